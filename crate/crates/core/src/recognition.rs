//! Language oracles, length-lexicographic enumeration and exhaustive
//! recognition-mode checks.
//!
//! Classical machines are compared against cutpoints exactly. Quantum
//! machines produce floats; any value within the tolerance of the cutpoint
//! is reported as indeterminate instead of being classified.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::automata::ClassicalAutomaton;
use crate::exactnum::{to_f64, Rational};
use crate::quantum::{DensityMatrix, QuantumAutomaton, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecognitionError {
    #[error("alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },
    #[error("symbol {0:?} is outside the oracle's alphabet")]
    SymbolNotInAlphabet(char),
    #[error("unknown oracle {0:?}")]
    UnknownOracle(String),
}

/// An acceptance value: exact for classical machines, a float for QFAs.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => to_f64(r),
            Value::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }

    /// Three-way comparison with `cutpoint`. Approximate values within
    /// `tolerance` of the cutpoint are indeterminate.
    pub fn compare(&self, cutpoint: &Rational, tolerance: f64) -> Verdict {
        match self {
            Value::Exact(r) => r.cmp(cutpoint).into(),
            Value::Approx(x) => {
                let diff = x - to_f64(cutpoint);
                if diff.abs() <= tolerance {
                    Verdict::Indeterminate
                } else if diff > 0.0 {
                    Verdict::Above
                } else {
                    Verdict::Below
                }
            }
        }
    }

    fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => self.as_f64().total_cmp(&other.as_f64()),
        }
    }

    fn minus(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Approx(self.as_f64() - other.as_f64()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) => write!(f, "{:.9}", x.clamp(0.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Below,
    Equal,
    Above,
    Indeterminate,
}

impl From<Ordering> for Verdict {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Verdict::Below,
            Ordering::Equal => Verdict::Equal,
            Ordering::Greater => Verdict::Above,
        }
    }
}

/// A machine that can be driven symbol by symbol, so that enumeration can
/// share work between strings with a common prefix.
pub trait Acceptor: Sync {
    type State: Clone + Send + Sync;

    fn alphabet(&self) -> &[char];
    /// State after the left end-marker.
    fn start(&self) -> Self::State;
    /// Panics if `c` is outside the alphabet.
    fn advance(&self, state: &Self::State, c: char) -> Self::State;
    /// Applies the right end-marker and reads out the acceptance value.
    fn value(&self, state: &Self::State) -> Value;
}

impl Acceptor for ClassicalAutomaton {
    type State = crate::exactnum::Vector;

    fn alphabet(&self) -> &[char] {
        ClassicalAutomaton::alphabet(self)
    }

    fn start(&self) -> Self::State {
        ClassicalAutomaton::start(self)
    }

    fn advance(&self, state: &Self::State, c: char) -> Self::State {
        self.step(state, c)
            .expect("symbol from the machine alphabet")
    }

    fn value(&self, state: &Self::State) -> Value {
        Value::Exact(self.readout(&self.finish(state)))
    }
}

impl Acceptor for QuantumAutomaton {
    type State = DensityMatrix;

    fn alphabet(&self) -> &[char] {
        QuantumAutomaton::alphabet(self)
    }

    fn start(&self) -> Self::State {
        QuantumAutomaton::start(self)
    }

    fn advance(&self, state: &Self::State, c: char) -> Self::State {
        self.step(state, c)
            .expect("symbol from the machine alphabet")
    }

    fn value(&self, state: &Self::State) -> Value {
        Value::Approx(self.readout(&self.finish(state)))
    }
}

fn sorted_alphabet(alphabet: &[char]) -> Vec<char> {
    let set: BTreeSet<char> = alphabet.iter().copied().collect();
    set.into_iter().collect()
}

/// All strings of length `0..=maxlen` over `alphabet` in
/// length-lexicographic order (letters sorted).
pub fn enumerate(alphabet: &[char], maxlen: usize) -> Enumeration {
    Enumeration {
        alphabet: sorted_alphabet(alphabet),
        maxlen,
        current: Some(Vec::new()),
    }
}

/// Number of strings [`enumerate`] yields: `Σ_{i≤maxlen} k^i`.
pub fn enumeration_count(alphabet_size: usize, maxlen: usize) -> usize {
    (0..=maxlen).map(|i| alphabet_size.pow(i as u32)).sum()
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    alphabet: Vec<char>,
    maxlen: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Enumeration {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let digits = self.current.as_mut()?;
        let word: String = digits.iter().map(|&d| self.alphabet[d]).collect();
        let k = self.alphabet.len();
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                let len = digits.len() + 1;
                if len > self.maxlen || k == 0 {
                    self.current = None;
                } else {
                    *digits = vec![0; len];
                }
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
        Some(word)
    }
}

/// Acceptance values of every string up to `maxlen`, in enumeration order.
/// Strings sharing a prefix share the work of reading it.
pub fn values<A: Acceptor>(machine: &A, maxlen: usize) -> Vec<(String, Value)> {
    let alphabet = sorted_alphabet(machine.alphabet());
    let mut level = vec![(String::new(), machine.start())];
    let mut out = Vec::with_capacity(enumeration_count(alphabet.len(), maxlen));
    for depth in 0..=maxlen {
        out.par_extend(
            level
                .par_iter()
                .map(|(w, state)| (w.clone(), machine.value(state))),
        );
        if depth == maxlen {
            break;
        }
        level = level
            .par_iter()
            .flat_map_iter(|(w, state)| {
                alphabet.iter().map(move |&c| {
                    let mut next = w.clone();
                    next.push(c);
                    (next, machine.advance(state, c))
                })
            })
            .collect();
    }
    out
}

/// Reference languages with closed-form membership tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LanguageOracle {
    /// `|w|_a = |w|_b` over `{a, b}`.
    Eq,
    /// `|w|_a² > |w|_b` and `|w|_b² > |w|_c` over `{a, b, c}`.
    Lapins,
    /// `|m-n| + |m-4n| = |m-2n| + |m-3n|` with `m = |w|_a`, `n = |w|_b`.
    AbsEq,
    /// Membership decided by a DFA.
    Dfa(ClassicalAutomaton),
}

impl LanguageOracle {
    pub fn from_name(name: &str) -> Result<Self, RecognitionError> {
        match name {
            "eq" | "EQ" => Ok(LanguageOracle::Eq),
            "lapins" | "LAPINS" => Ok(LanguageOracle::Lapins),
            "abs_eq" | "abseq" | "ABSEQ" => Ok(LanguageOracle::AbsEq),
            _ => Err(RecognitionError::UnknownOracle(name.to_string())),
        }
    }

    pub fn alphabet(&self) -> Vec<char> {
        match self {
            LanguageOracle::Eq | LanguageOracle::AbsEq => vec!['a', 'b'],
            LanguageOracle::Lapins => vec!['a', 'b', 'c'],
            LanguageOracle::Dfa(m) => m.alphabet().to_vec(),
        }
    }

    pub fn contains(&self, w: &str) -> Result<bool, RecognitionError> {
        let alphabet = self.alphabet();
        if let Some(c) = w.chars().find(|c| !alphabet.contains(c)) {
            return Err(RecognitionError::SymbolNotInAlphabet(c));
        }
        let count = |c: char| w.chars().filter(|&x| x == c).count() as i128;
        Ok(match self {
            LanguageOracle::Eq => count('a') == count('b'),
            LanguageOracle::Lapins => {
                let (x, y, z) = (count('a'), count('b'), count('c'));
                x * x > y && y * y > z
            }
            LanguageOracle::AbsEq => {
                let (m, n) = (count('a'), count('b'));
                (m - n).abs() + (m - 4 * n).abs() == (m - 2 * n).abs() + (m - 3 * n).abs()
            }
            LanguageOracle::Dfa(dfa) => !dfa
                .accept_value(w)
                .map_err(|_| RecognitionError::SymbolNotInAlphabet('?'))?
                .is_zero(),
        })
    }
}

pub fn oracle_eval(oracle: &LanguageOracle, w: &str) -> Result<bool, RecognitionError> {
    oracle.contains(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Members are exactly the strings with `f > λ`.
    Cutpoint,
    /// Members are exactly the strings with `f ≠ λ`.
    Exclusive,
    /// Members are exactly the strings with `f = λ`.
    Equality,
    /// Cutpoint 0: members are exactly the strings with `f > 0`.
    Nondeterministic,
    /// Members have `f > λ`, non-members `f < λ`; the report also carries
    /// the separation between the two sides.
    Isolation,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Cutpoint,
        Mode::Exclusive,
        Mode::Equality,
        Mode::Nondeterministic,
        Mode::Isolation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Cutpoint => "cutpoint",
            Mode::Exclusive => "exclusive",
            Mode::Equality => "equality",
            Mode::Nondeterministic => "nondet",
            Mode::Isolation => "isolation",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Whether the machine's verdict agrees with oracle membership.
    fn agreement(&self, verdict: Verdict, member: bool) -> Agreement {
        use Verdict::*;
        let claimed = match (self, verdict) {
            (_, Indeterminate) => return Agreement::Indeterminate,
            (Mode::Cutpoint | Mode::Nondeterministic, v) => Some(v == Above),
            (Mode::Exclusive, v) => Some(v != Equal),
            (Mode::Equality, v) => Some(v == Equal),
            (Mode::Isolation, Above) => Some(true),
            (Mode::Isolation, Below) => Some(false),
            (Mode::Isolation, Equal) => None,
        };
        if claimed == Some(member) {
            Agreement::Agree
        } else {
            Agreement::Disagree
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    Indeterminate,
}

impl Agreement {
    pub fn name(&self) -> &'static str {
        match self {
            Agreement::Agree => "yes",
            Agreement::Disagree => "no",
            Agreement::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub string: String,
    pub value: Value,
    pub member: bool,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub mode: Mode,
    pub cutpoint: Rational,
    pub maxlen: usize,
    pub records: Vec<SweepRecord>,
    /// Strings whose verdict disagrees with the oracle, in enumeration order.
    pub counterexamples: Vec<String>,
    /// Float values too close to the cutpoint to classify.
    pub indeterminate: Vec<String>,
    pub min_member: Option<Value>,
    pub max_nonmember: Option<Value>,
    /// `min_member - max_nonmember`, reported in isolation mode.
    pub gap: Option<Value>,
}

impl SweepReport {
    /// The claim holds on the whole corpus.
    pub fn verified(&self) -> bool {
        self.counterexamples.is_empty() && self.indeterminate.is_empty()
    }
}

fn check_alphabets(left: &[char], right: &[char]) -> Result<(), RecognitionError> {
    if sorted_alphabet(left) != sorted_alphabet(right) {
        return Err(RecognitionError::AlphabetMismatch {
            left: left.to_vec(),
            right: right.to_vec(),
        });
    }
    Ok(())
}

pub fn sweep<A: Acceptor>(
    machine: &A,
    cutpoint: &Rational,
    mode: Mode,
    oracle: &LanguageOracle,
    maxlen: usize,
) -> Result<SweepReport, RecognitionError> {
    sweep_with_tolerance(machine, cutpoint, mode, oracle, maxlen, DEFAULT_TOLERANCE)
}

/// Evaluates every string up to `maxlen` and checks the mode's predicate
/// against oracle membership. In nondeterministic mode the cutpoint is 0
/// whatever `cutpoint` says.
pub fn sweep_with_tolerance<A: Acceptor>(
    machine: &A,
    cutpoint: &Rational,
    mode: Mode,
    oracle: &LanguageOracle,
    maxlen: usize,
    tolerance: f64,
) -> Result<SweepReport, RecognitionError> {
    check_alphabets(machine.alphabet(), &oracle.alphabet())?;
    let cutpoint = if mode == Mode::Nondeterministic {
        Rational::zero()
    } else {
        cutpoint.clone()
    };
    let records = values(machine, maxlen)
        .into_par_iter()
        .map(|(string, value)| {
            let member = oracle.contains(&string)?;
            let agreement = mode.agreement(value.compare(&cutpoint, tolerance), member);
            Ok(SweepRecord {
                string,
                value,
                member,
                agreement,
            })
        })
        .collect::<Result<Vec<_>, RecognitionError>>()?;

    let pick = |agreement: Agreement| -> Vec<String> {
        records
            .iter()
            .filter(|r| r.agreement == agreement)
            .map(|r| r.string.clone())
            .collect()
    };
    let counterexamples = pick(Agreement::Disagree);
    let indeterminate = pick(Agreement::Indeterminate);
    let min_member = records
        .iter()
        .filter(|r| r.member)
        .map(|r| &r.value)
        .min_by(|a, b| a.total_cmp(b))
        .cloned();
    let max_nonmember = records
        .iter()
        .filter(|r| !r.member)
        .map(|r| &r.value)
        .max_by(|a, b| a.total_cmp(b))
        .cloned();
    let gap = match (mode, &min_member, &max_nonmember) {
        (Mode::Isolation, Some(lo), Some(hi)) => Some(lo.minus(hi)),
        _ => None,
    };
    Ok(SweepReport {
        mode,
        cutpoint,
        maxlen,
        records,
        counterexamples,
        indeterminate,
        min_member,
        max_nonmember,
        gap,
    })
}

/// Extremes of the two sides of an isolated cutpoint over a finite corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationGap {
    pub min_member: Option<Value>,
    pub max_nonmember: Option<Value>,
    /// `min_member - max_nonmember`: the full width of the empty band.
    pub gap: Option<Value>,
    /// `min(min_member - λ, λ - max_nonmember)`: the isolation radius
    /// around the cutpoint. Positive iff the cutpoint is isolated on the
    /// corpus.
    pub delta: Option<Value>,
}

pub fn isolation_gap<A: Acceptor>(
    machine: &A,
    cutpoint: &Rational,
    oracle: &LanguageOracle,
    maxlen: usize,
) -> Result<IsolationGap, RecognitionError> {
    let report = sweep(machine, cutpoint, Mode::Isolation, oracle, maxlen)?;
    let lambda = Value::Exact(cutpoint.clone());
    let delta = match (&report.min_member, &report.max_nonmember) {
        (Some(lo), Some(hi)) => {
            let above = lo.minus(&lambda);
            let below = lambda.minus(hi);
            Some(if above.total_cmp(&below) == Ordering::Less {
                above
            } else {
                below
            })
        }
        _ => None,
    };
    Ok(IsolationGap {
        min_member: report.min_member,
        max_nonmember: report.max_nonmember,
        gap: report.gap,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceViolation {
    pub string: String,
    pub left: Verdict,
    pub right: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub checked: usize,
    pub violations: Vec<EquivalenceViolation>,
    /// Strings where either side is indeterminate.
    pub indeterminate: Vec<String>,
}

impl EquivalenceReport {
    pub fn is_equivalent(&self) -> bool {
        self.violations.is_empty() && self.indeterminate.is_empty()
    }
}

/// Checks `sign(f₁(w) - λ₁) = sign(f₂(w) - λ₂)` on every string up to
/// `maxlen`.
pub fn equivalence_check<A: Acceptor, B: Acceptor>(
    left: &A,
    left_cutpoint: &Rational,
    right: &B,
    right_cutpoint: &Rational,
    maxlen: usize,
) -> Result<EquivalenceReport, RecognitionError> {
    check_alphabets(left.alphabet(), right.alphabet())?;
    let (lv, rv) = rayon::join(|| values(left, maxlen), || values(right, maxlen));
    let mut violations = Vec::new();
    let mut indeterminate = Vec::new();
    for ((w, a), (_, b)) in lv.iter().zip(&rv) {
        let l = a.compare(left_cutpoint, DEFAULT_TOLERANCE);
        let r = b.compare(right_cutpoint, DEFAULT_TOLERANCE);
        if l == Verdict::Indeterminate || r == Verdict::Indeterminate {
            indeterminate.push(w.clone());
        } else if l != r {
            violations.push(EquivalenceViolation {
                string: w.clone(),
                left: l,
                right: r,
            });
        }
    }
    Ok(EquivalenceReport {
        checked: lv.len(),
        violations,
        indeterminate,
    })
}
