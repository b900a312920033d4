//! Classical finite automata (DFA, PFA, AfA) evaluated over exact rationals.
//!
//! Every input is read as `¢ w $`: the left end-marker matrix is applied to
//! the initial basis state, then one matrix per input symbol, then the
//! right end-marker matrix. End-marker matrices default to the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{Defect, DimensionError, Matrix, MatrixKind, Rational, Vector, Violation};

/// A tape symbol: an input letter or one of the two end-markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Cent,
    Letter(char),
    Dollar,
}

impl Symbol {
    /// Name used in automaton files: `cent`, `dollar`, or the letter itself.
    pub fn name(&self) -> String {
        match self {
            Symbol::Cent => "cent".to_string(),
            Symbol::Dollar => "dollar".to_string(),
            Symbol::Letter(c) => c.to_string(),
        }
    }

    pub fn from_name(name: &str) -> Option<Symbol> {
        match name {
            "cent" => Some(Symbol::Cent),
            "dollar" => Some(Symbol::Dollar),
            _ => {
                let mut chars = name.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Some(Symbol::Letter(c)),
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// The tape `¢ w $` as a symbol sequence.
pub fn tape(w: &str) -> impl Iterator<Item = Symbol> + '_ {
    std::iter::once(Symbol::Cent)
        .chain(w.chars().map(Symbol::Letter))
        .chain(std::iter::once(Symbol::Dollar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicalKind {
    Dfa,
    Pfa,
    Afa,
}

impl ClassicalKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassicalKind::Dfa => "dfa",
            ClassicalKind::Pfa => "pfa",
            ClassicalKind::Afa => "afa",
        }
    }

    pub fn matrix_kind(&self) -> MatrixKind {
        match self {
            ClassicalKind::Dfa | ClassicalKind::Pfa => MatrixKind::Stochastic,
            ClassicalKind::Afa => MatrixKind::Affine,
        }
    }
}

impl fmt::Display for ClassicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A column of one transition matrix that breaks the machine kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixViolation {
    pub symbol: Symbol,
    pub column: usize,
    pub defect: Defect,
}

impl fmt::Display for MatrixViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "symbol {}, column {}: {}",
            self.symbol, self.column, self.defect
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(char),
    #[error("initial state index {0} out of range")]
    InitialOutOfRange(usize),
    #[error("accepting state index {0} out of range")]
    AcceptingOutOfRange(usize),
    #[error("no transition matrix for symbol {0:?}")]
    MissingSymbol(char),
    #[error("transition matrix given for symbol {0}, which is not in the alphabet")]
    UnknownSymbol(Symbol),
    #[error("matrix for symbol {symbol} is {rows}x{cols}, expected {expected}x{expected}")]
    WrongShape {
        symbol: Symbol,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("{} transition matrices violate the {kind} constraints: {}", .violations.len(), join_violations(.violations))]
    KindViolations {
        kind: ClassicalKind,
        violations: Vec<MatrixViolation>,
    },
    #[error("symbol {0:?} is not in the alphabet")]
    SymbolNotInAlphabet(char),
    #[error("operation requires an afa, got {0}")]
    NotAffine(ClassicalKind),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

fn join_violations(v: &[MatrixViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every matrix against the constraints of `kind`: affine columns
/// for afa, stochastic for pfa, stochastic 0/1 for dfa.
pub fn kind_violations(
    kind: ClassicalKind,
    transitions: &BTreeMap<Symbol, Matrix>,
) -> Vec<MatrixViolation> {
    let mut out = Vec::new();
    for (&symbol, m) in transitions {
        for Violation { column, defect } in m.validate(kind.matrix_kind()) {
            out.push(MatrixViolation {
                symbol,
                column,
                defect,
            });
        }
        if kind == ClassicalKind::Dfa {
            for j in 0..m.cols() {
                for k in 0..m.rows() {
                    let a = m.get(k, j);
                    if !a.is_zero() && !a.is_one() && !a.is_negative() && *a <= Rational::one() {
                        out.push(MatrixViolation {
                            symbol,
                            column: j,
                            defect: Defect::NotBinary {
                                row: k,
                                value: a.clone(),
                            },
                        });
                    }
                }
            }
        }
    }
    out
}

/// A DFA, PFA or AfA. Immutable once built; every transition matrix is
/// square, sized to the state set, and satisfies the kind's constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalAutomaton {
    kind: ClassicalKind,
    states: Vec<String>,
    alphabet: Vec<char>,
    transitions: BTreeMap<Symbol, Matrix>,
    initial: usize,
    accepting: BTreeSet<usize>,
}

impl ClassicalAutomaton {
    /// Validates and builds a machine. Missing end-marker matrices become
    /// the identity; every alphabet letter must have a matrix.
    pub fn new(
        kind: ClassicalKind,
        states: Vec<String>,
        alphabet: Vec<char>,
        mut transitions: BTreeMap<Symbol, Matrix>,
        initial: usize,
        accepting: BTreeSet<usize>,
    ) -> Result<Self, AutomatonError> {
        let n = states.len();
        if n == 0 {
            return Err(AutomatonError::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for &c in &alphabet {
            if !seen.insert(c) {
                return Err(AutomatonError::DuplicateSymbol(c));
            }
        }
        if initial >= n {
            return Err(AutomatonError::InitialOutOfRange(initial));
        }
        if let Some(&k) = accepting.iter().find(|&&k| k >= n) {
            return Err(AutomatonError::AcceptingOutOfRange(k));
        }
        for &symbol in transitions.keys() {
            if let Symbol::Letter(c) = symbol {
                if !alphabet.contains(&c) {
                    return Err(AutomatonError::UnknownSymbol(symbol));
                }
            }
        }
        for &c in &alphabet {
            if !transitions.contains_key(&Symbol::Letter(c)) {
                return Err(AutomatonError::MissingSymbol(c));
            }
        }
        for marker in [Symbol::Cent, Symbol::Dollar] {
            transitions
                .entry(marker)
                .or_insert_with(|| Matrix::identity(n));
        }
        for (&symbol, m) in &transitions {
            if m.rows() != n || m.cols() != n {
                return Err(AutomatonError::WrongShape {
                    symbol,
                    rows: m.rows(),
                    cols: m.cols(),
                    expected: n,
                });
            }
        }
        let violations = kind_violations(kind, &transitions);
        if !violations.is_empty() {
            return Err(AutomatonError::KindViolations { kind, violations });
        }
        Ok(Self {
            kind,
            states,
            alphabet,
            transitions,
            initial,
            accepting,
        })
    }

    /// Default state names `e1..en`.
    pub fn numbered_states(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("e{i}")).collect()
    }

    pub fn kind(&self) -> ClassicalKind {
        self.kind
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn transitions(&self) -> &BTreeMap<Symbol, Matrix> {
        &self.transitions
    }

    pub fn matrix(&self, symbol: Symbol) -> Option<&Matrix> {
        self.transitions.get(&symbol)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn with_accepting(&self, accepting: BTreeSet<usize>) -> Result<Self, AutomatonError> {
        Self::new(
            self.kind,
            self.states.clone(),
            self.alphabet.clone(),
            self.transitions.clone(),
            self.initial,
            accepting,
        )
    }

    /// Same machine reinterpreted under another kind (e.g. a PFA read as an AfA).
    pub fn with_kind(&self, kind: ClassicalKind) -> Result<Self, AutomatonError> {
        Self::new(
            kind,
            self.states.clone(),
            self.alphabet.clone(),
            self.transitions.clone(),
            self.initial,
            self.accepting.clone(),
        )
    }

    pub fn with_transition(&self, symbol: Symbol, m: Matrix) -> Result<Self, AutomatonError> {
        let mut transitions = self.transitions.clone();
        transitions.insert(symbol, m);
        Self::new(
            self.kind,
            self.states.clone(),
            self.alphabet.clone(),
            transitions,
            self.initial,
            self.accepting.clone(),
        )
    }

    fn letter_matrix(&self, c: char) -> Result<&Matrix, AutomatonError> {
        self.transitions
            .get(&Symbol::Letter(c))
            .ok_or(AutomatonError::SymbolNotInAlphabet(c))
    }

    fn marker(&self, symbol: Symbol) -> &Matrix {
        &self.transitions[&symbol]
    }

    pub fn check_input(&self, w: &str) -> Result<(), AutomatonError> {
        match w.chars().find(|c| !self.alphabet.contains(c)) {
            Some(c) => Err(AutomatonError::SymbolNotInAlphabet(c)),
            None => Ok(()),
        }
    }

    /// State after the left end-marker: `A_¢ e_initial`.
    pub fn start(&self) -> Vector {
        self.marker(Symbol::Cent)
            .apply(&Vector::basis(self.num_states(), self.initial))
            .expect("square matrices sized to the state set")
    }

    pub fn step(&self, state: &Vector, c: char) -> Result<Vector, AutomatonError> {
        Ok(self.letter_matrix(c)?.apply(state)?)
    }

    /// Applies the right end-marker.
    pub fn finish(&self, state: &Vector) -> Vector {
        self.marker(Symbol::Dollar)
            .apply(state)
            .expect("square matrices sized to the state set")
    }

    /// Acceptance value of a final state under this machine's kind.
    pub fn readout(&self, final_state: &Vector) -> Rational {
        match self.kind {
            ClassicalKind::Dfa | ClassicalKind::Pfa => {
                self.accepting.iter().map(|&k| &final_state[k]).sum()
            }
            ClassicalKind::Afa => {
                let accepted: Rational = self.accepting.iter().map(|&k| final_state[k].abs()).sum();
                let norm = final_state.l1_norm();
                if norm.is_zero() {
                    Rational::zero()
                } else {
                    accepted / norm
                }
            }
        }
    }

    /// Final state `v_f = A_$ A_{w_n} ⋯ A_{w_1} A_¢ e_initial`.
    pub fn run(&self, w: &str) -> Result<Vector, AutomatonError> {
        self.check_input(w)?;
        let mut state = self.start();
        for c in w.chars() {
            state = self.step(&state, c)?;
        }
        Ok(self.finish(&state))
    }

    pub fn accept_value(&self, w: &str) -> Result<Rational, AutomatonError> {
        Ok(self.readout(&self.run(w)?))
    }

    /// Acceptance value when the state is rescaled to l1-norm one after
    /// every operator. Always equals [`accept_value`](Self::accept_value).
    pub fn accept_value_normalized(&self, w: &str) -> Result<Rational, AutomatonError> {
        if self.kind != ClassicalKind::Afa {
            return Err(AutomatonError::NotAffine(self.kind));
        }
        self.check_input(w)?;
        let mut state = Vector::basis(self.num_states(), self.initial);
        for symbol in tape(w) {
            let next = self.transitions[&symbol].apply(&state)?;
            // entry-sum stays 1/|previous| > 0, so the norm is never zero
            let norm = next.l1_norm();
            state = next.scale(&norm.recip());
        }
        Ok(self.accepting.iter().map(|&k| state[k].abs()).sum())
    }
}

/// Result of one weighting block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Collapse {
    /// The block-restricted vector divided by its entry-sum.
    State(Vector),
    /// The block's entries sum to zero; no affine state can be formed.
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightOutcome {
    pub weight: Rational,
    pub result: Collapse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightingError {
    #[error("index {0} appears in more than one block")]
    Overlap(usize),
    #[error("index {0} is not covered by any block")]
    Uncovered(usize),
    #[error("index {index} out of range for a vector of length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("cannot weigh the zero vector")]
    ZeroVector,
}

/// Weighting operator over a partition of the state indices. Block `B`
/// is observed with weight `Σ_{k∈B} |v_k| / |v|`.
pub fn weigh_partition(
    v: &Vector,
    partition: &[Vec<usize>],
) -> Result<Vec<WeightOutcome>, WeightingError> {
    let len = v.len();
    let mut covered = vec![false; len];
    for block in partition {
        for &k in block {
            if k >= len {
                return Err(WeightingError::OutOfRange { index: k, len });
            }
            if std::mem::replace(&mut covered[k], true) {
                return Err(WeightingError::Overlap(k));
            }
        }
    }
    if let Some(k) = covered.iter().position(|&c| !c) {
        return Err(WeightingError::Uncovered(k));
    }
    let norm = v.l1_norm();
    if norm.is_zero() {
        return Err(WeightingError::ZeroVector);
    }
    Ok(partition
        .iter()
        .map(|block| {
            let mass: Rational = block.iter().map(|&k| v[k].abs()).sum();
            let sum: Rational = block.iter().map(|&k| &v[k]).sum();
            let result = if sum.is_zero() {
                Collapse::Terminal
            } else {
                let mut restricted = vec![Rational::zero(); len];
                for &k in block {
                    restricted[k] = &v[k] / &sum;
                }
                Collapse::State(Vector::new(restricted).expect("nonempty"))
            };
            WeightOutcome {
                weight: mass / &norm,
                result,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};
    use proptest::prelude::*;

    fn m1() -> ClassicalAutomaton {
        let mut t = BTreeMap::new();
        t.insert(
            Symbol::Letter('a'),
            Matrix::from_int_rows(&[&[2, 0], &[-1, 1]]),
        );
        t.insert(
            Symbol::Letter('b'),
            Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(1, 2), int(1)]]).unwrap(),
        );
        ClassicalAutomaton::new(
            ClassicalKind::Afa,
            ClassicalAutomaton::numbered_states(2),
            vec!['a', 'b'],
            t,
            0,
            BTreeSet::from([0]),
        )
        .unwrap()
    }

    #[test]
    fn run_examples() {
        let m = m1();
        assert_eq!(m.run("ab").unwrap(), Vector::from_ints(&[1, 0]));
        assert_eq!(m.run("aab").unwrap(), Vector::from_ints(&[2, -1]));
        assert_eq!(m.run("").unwrap(), Vector::from_ints(&[1, 0]));
        assert_eq!(m.run("ac"), Err(AutomatonError::SymbolNotInAlphabet('c')));
    }

    #[test]
    fn end_markers_apply_to_the_empty_string() {
        let swap = Matrix::from_int_rows(&[&[0, 1], &[1, 0]]);
        let m = m1().with_transition(Symbol::Dollar, swap).unwrap();
        assert_eq!(m.run("").unwrap(), Vector::from_ints(&[0, 1]));
        assert_eq!(m.accept_value("").unwrap(), int(0));
    }

    #[test]
    fn accept_value_examples() {
        let m = m1();
        assert_eq!(m.accept_value("aab").unwrap(), rat(2, 3));
        assert_eq!(m.accept_value("abba").unwrap(), int(1));
        assert_eq!(m.accept_value_normalized("aab").unwrap(), rat(2, 3));
        assert_eq!(m.accept_value_normalized("ab").unwrap(), int(1));
    }

    #[test]
    fn normalized_requires_afa() {
        let p = m1()
            .with_transition(Symbol::Letter('a'), Matrix::identity(2))
            .unwrap();
        let p = p.with_kind(ClassicalKind::Pfa).unwrap();
        assert_eq!(
            p.accept_value_normalized("a"),
            Err(AutomatonError::NotAffine(ClassicalKind::Pfa))
        );
    }

    #[test]
    fn construction_rejects_bad_machines() {
        let m = m1();
        assert!(matches!(
            m.with_kind(ClassicalKind::Pfa),
            Err(AutomatonError::KindViolations { .. })
        ));
        let half =
            Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(1, 2), int(1)]]).unwrap();
        let mut t = BTreeMap::new();
        t.insert(Symbol::Letter('a'), half);
        let err = ClassicalAutomaton::new(
            ClassicalKind::Dfa,
            ClassicalAutomaton::numbered_states(2),
            vec!['a'],
            t.clone(),
            0,
            BTreeSet::new(),
        )
        .unwrap_err();
        match err {
            AutomatonError::KindViolations { violations, .. } => {
                assert!(violations
                    .iter()
                    .all(|v| matches!(v.defect, Defect::NotBinary { .. }) && v.column == 0));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = ClassicalAutomaton::new(
            ClassicalKind::Pfa,
            ClassicalAutomaton::numbered_states(2),
            vec!['a', 'b'],
            t.clone(),
            0,
            BTreeSet::new(),
        );
        assert_eq!(err, Err(AutomatonError::MissingSymbol('b')));
        let err = ClassicalAutomaton::new(
            ClassicalKind::Pfa,
            ClassicalAutomaton::numbered_states(2),
            vec!['a'],
            t.clone(),
            2,
            BTreeSet::new(),
        );
        assert_eq!(err, Err(AutomatonError::InitialOutOfRange(2)));
        let err = ClassicalAutomaton::new(
            ClassicalKind::Pfa,
            ClassicalAutomaton::numbered_states(3),
            vec!['a'],
            t,
            0,
            BTreeSet::new(),
        );
        assert!(matches!(err, Err(AutomatonError::WrongShape { .. })));
    }

    #[test]
    fn weighting_examples() {
        let v = Vector::from_ints(&[1, -1, 1]);
        let out = weigh_partition(&v, &[vec![0], vec![1, 2]]).unwrap();
        assert_eq!(out[0].weight, rat(1, 3));
        assert_eq!(
            out[0].result,
            Collapse::State(Vector::from_ints(&[1, 0, 0]))
        );
        assert_eq!(out[1].weight, rat(2, 3));
        assert_eq!(out[1].result, Collapse::Terminal);

        let v = Vector::from_ints(&[2, -1]);
        let out = weigh_partition(&v, &[vec![0], vec![1]]).unwrap();
        assert_eq!(out[0].weight, rat(2, 3));
        assert_eq!(out[1].weight, rat(1, 3));
        assert_eq!(out[0].result, Collapse::State(Vector::basis(2, 0)));
        assert_eq!(out[1].result, Collapse::State(Vector::basis(2, 1)));

        let v = Vector::basis(3, 2);
        let out = weigh_partition(&v, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(out[0].weight, int(0));
        assert_eq!(out[1].weight, int(1));
    }

    #[test]
    fn weighting_rejects_bad_partitions() {
        let v = Vector::from_ints(&[1, -1, 1]);
        assert_eq!(
            weigh_partition(&v, &[vec![0, 1], vec![1, 2]]),
            Err(WeightingError::Overlap(1))
        );
        assert_eq!(
            weigh_partition(&v, &[vec![0], vec![2]]),
            Err(WeightingError::Uncovered(1))
        );
        assert_eq!(
            weigh_partition(&v, &[vec![0, 1, 2, 3]]),
            Err(WeightingError::OutOfRange { index: 3, len: 3 })
        );
    }

    fn word() -> impl Strategy<Value = String> {
        proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..12)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn m1_invariants(w in word()) {
            let m = m1();
            let v = m.run(&w).unwrap();
            prop_assert!(v.sum().is_one());
            let f = m.accept_value(&w).unwrap();
            prop_assert!(f >= int(0) && f <= int(1));
            prop_assert_eq!(m.accept_value_normalized(&w).unwrap(), f);
        }

        #[test]
        fn weights_sum_to_one(
            e in proptest::collection::vec((-9i64..=9, 1i64..=5), 1..7),
            cut in 0usize..7,
        ) {
            let v = Vector::new(e.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap();
            prop_assume!(!v.l1_norm().is_zero());
            let cut = cut.min(v.len());
            let blocks: Vec<Vec<usize>> = [(0..cut).collect::<Vec<_>>(), (cut..v.len()).collect()]
                .into_iter()
                .filter(|b| !b.is_empty())
                .collect();
            let out = weigh_partition(&v, &blocks).unwrap();
            let total: Rational = out.iter().map(|o| &o.weight).sum();
            prop_assert!(total.is_one());
            for o in out {
                if let Collapse::State(s) = o.result {
                    prop_assert!(s.sum().is_one());
                }
            }
        }
    }
}
