//! Superoperator-based quantum finite automata over real amplitudes.
//!
//! States are density matrices; each tape symbol carries a superoperator
//! given by its operation elements `E_j` with `Σ E_jᵀ E_j = I`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::automata::{tape, Symbol};

/// Default tolerance for channel validity and float comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default upper bound on the number of computation-tree leaves.
pub const DEFAULT_TREE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("superoperator needs at least one operation element")]
    NoElements,
    #[error("operation element {index} is {rows}x{cols}, expected {expected}x{expected}")]
    ElementShape {
        index: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("no channel for symbol {0:?}")]
    MissingSymbol(char),
    #[error("channel given for symbol {0}, which is not in the alphabet")]
    UnknownSymbol(Symbol),
    #[error("symbol {0:?} is not in the alphabet")]
    SymbolNotInAlphabet(char),
    #[error("computation tree would have {leaves} leaves, cap is {cap}")]
    TreeTooLarge { leaves: u128, cap: usize },
    #[error("invalid measurement partition: {0}")]
    InvalidPartition(String),
}

/// A quantum channel given by its operation elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    elements: Vec<DMatrix<f64>>,
}

impl Superoperator {
    pub fn new(elements: Vec<DMatrix<f64>>) -> Result<Self, QuantumError> {
        let n = elements.first().ok_or(QuantumError::NoElements)?.nrows();
        for (index, e) in elements.iter().enumerate() {
            if e.nrows() != n || e.ncols() != n {
                return Err(QuantumError::ElementShape {
                    index,
                    rows: e.nrows(),
                    cols: e.ncols(),
                    expected: n,
                });
            }
            if e.iter().any(|x| !x.is_finite()) {
                return Err(QuantumError::NonFinite);
            }
        }
        Ok(Self { elements })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            elements: vec![DMatrix::identity(n, n)],
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    /// `ρ' = Σ E_j ρ E_jᵀ`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QuantumError> {
        if rho.dim() != self.dim() {
            return Err(QuantumError::Dimension {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for e in &self.elements {
            out += e * &rho.0 * e.transpose();
        }
        Ok(DensityMatrix(out))
    }

    /// Largest entry-wise deviation of `Σ E_jᵀ E_j` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.dim();
        let mut sum = DMatrix::zeros(n, n);
        for e in &self.elements {
            sum += e.transpose() * e;
        }
        (sum - DMatrix::<f64>::identity(n, n)).amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelReport {
    pub deviation: f64,
    pub tolerance: f64,
}

impl ChannelReport {
    pub fn is_valid(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

pub fn validate_channel(channel: &Superoperator, tolerance: f64) -> ChannelReport {
    ChannelReport {
        deviation: channel.completeness_deviation(),
        tolerance,
    }
}

/// A mixed state. Channel application does not re-check positivity; use
/// [`DensityMatrix::new`] to validate an externally supplied matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<f64>);

impl DensityMatrix {
    pub fn new(m: DMatrix<f64>, tolerance: f64) -> Result<Self, QuantumError> {
        if !m.is_square() {
            return Err(QuantumError::NotDensity(format!(
                "{}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let trace = m.trace();
        if (trace - 1.0).abs() > tolerance {
            return Err(QuantumError::NotDensity(format!("trace is {trace}")));
        }
        if (&m - m.transpose()).amax() > tolerance {
            return Err(QuantumError::NotDensity("not symmetric".into()));
        }
        if let Some(k) = (0..m.nrows()).find(|&k| m[(k, k)] < -tolerance) {
            return Err(QuantumError::NotDensity(format!(
                "diagonal entry {k} is negative"
            )));
        }
        Ok(Self(m))
    }

    /// `|q_index⟩⟨q_index|`.
    pub fn pure_basis(dim: usize, index: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = 1.0;
        Self(m)
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn pure(v: &DVector<f64>) -> Self {
        Self(v * v.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)]).collect()
    }
}

pub fn apply_channel(
    channel: &Superoperator,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, QuantumError> {
    channel.apply(rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// `P_j ρ P_j / p_j`, absent when `p_j` is within tolerance of zero.
    pub post_state: Option<DensityMatrix>,
}

/// Projective measurement whose projectors are the 0/1 diagonal matrices
/// of the given basis-index blocks.
pub fn projective_measure(
    blocks: &[Vec<usize>],
    rho: &DensityMatrix,
    tolerance: f64,
) -> Result<Vec<MeasurementOutcome>, QuantumError> {
    let n = rho.dim();
    let mut covered = vec![false; n];
    for block in blocks {
        for &k in block {
            if k >= n {
                return Err(QuantumError::InvalidPartition(format!(
                    "index {k} out of range"
                )));
            }
            if std::mem::replace(&mut covered[k], true) {
                return Err(QuantumError::InvalidPartition(format!(
                    "index {k} in more than one block"
                )));
            }
        }
    }
    if let Some(k) = covered.iter().position(|c| !c) {
        return Err(QuantumError::InvalidPartition(format!(
            "index {k} not covered"
        )));
    }
    Ok(blocks
        .iter()
        .map(|block| {
            let mut projected = DMatrix::zeros(n, n);
            for &i in block {
                for &j in block {
                    projected[(i, j)] = rho.0[(i, j)];
                }
            }
            let probability = projected.trace();
            let post_state =
                (probability > tolerance).then(|| DensityMatrix(projected / probability));
            MeasurementOutcome {
                probability,
                post_state,
            }
        })
        .collect())
}

/// QFA: one superoperator per letter and end-marker, start in a basis
/// state, accept with the mass on the accepting diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumAutomaton {
    states: Vec<String>,
    alphabet: Vec<char>,
    channels: BTreeMap<Symbol, Superoperator>,
    initial: usize,
    accepting: BTreeSet<usize>,
}

impl QuantumAutomaton {
    /// Missing end-marker channels default to the identity channel.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<char>,
        mut channels: BTreeMap<Symbol, Superoperator>,
        initial: usize,
        accepting: BTreeSet<usize>,
    ) -> Result<Self, QuantumError> {
        let n = states.len();
        if n == 0 {
            return Err(QuantumError::NoStates);
        }
        if initial >= n {
            return Err(QuantumError::StateOutOfRange(initial));
        }
        if let Some(&k) = accepting.iter().find(|&&k| k >= n) {
            return Err(QuantumError::StateOutOfRange(k));
        }
        for &symbol in channels.keys() {
            if let Symbol::Letter(c) = symbol {
                if !alphabet.contains(&c) {
                    return Err(QuantumError::UnknownSymbol(symbol));
                }
            }
        }
        for &c in &alphabet {
            if !channels.contains_key(&Symbol::Letter(c)) {
                return Err(QuantumError::MissingSymbol(c));
            }
        }
        for marker in [Symbol::Cent, Symbol::Dollar] {
            channels
                .entry(marker)
                .or_insert_with(|| Superoperator::identity(n));
        }
        for channel in channels.values() {
            if channel.dim() != n {
                return Err(QuantumError::Dimension {
                    expected: n,
                    got: channel.dim(),
                });
            }
        }
        Ok(Self {
            states,
            alphabet,
            channels,
            initial,
            accepting,
        })
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

    pub fn channels(&self) -> &BTreeMap<Symbol, Superoperator> {
        &self.channels
    }

    pub fn channel(&self, symbol: Symbol) -> Option<&Superoperator> {
        self.channels.get(&symbol)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    /// Per-symbol completeness reports.
    pub fn validate(&self, tolerance: f64) -> Vec<(Symbol, ChannelReport)> {
        self.channels
            .iter()
            .map(|(&s, c)| (s, validate_channel(c, tolerance)))
            .collect()
    }

    pub fn check_input(&self, w: &str) -> Result<(), QuantumError> {
        match w.chars().find(|c| !self.alphabet.contains(c)) {
            Some(c) => Err(QuantumError::SymbolNotInAlphabet(c)),
            None => Ok(()),
        }
    }

    /// State after the left end-marker.
    pub fn start(&self) -> DensityMatrix {
        let rho = DensityMatrix::pure_basis(self.num_states(), self.initial);
        self.channels[&Symbol::Cent]
            .apply(&rho)
            .expect("channels sized to the state set")
    }

    pub fn step(&self, rho: &DensityMatrix, c: char) -> Result<DensityMatrix, QuantumError> {
        self.channels
            .get(&Symbol::Letter(c))
            .ok_or(QuantumError::SymbolNotInAlphabet(c))?
            .apply(rho)
    }

    pub fn finish(&self, rho: &DensityMatrix) -> DensityMatrix {
        self.channels[&Symbol::Dollar]
            .apply(rho)
            .expect("channels sized to the state set")
    }

    /// Accepting mass of a final state, unclamped.
    pub fn readout(&self, rho: &DensityMatrix) -> f64 {
        self.accepting.iter().map(|&k| rho.0[(k, k)]).sum()
    }

    pub fn run(&self, w: &str) -> Result<DensityMatrix, QuantumError> {
        self.check_input(w)?;
        let mut rho = self.start();
        for c in w.chars() {
            rho = self.step(&rho, c)?;
        }
        Ok(self.finish(&rho))
    }

    /// Raw acceptance value; may stray from `[0, 1]` by rounding error.
    pub fn accept_value(&self, w: &str) -> Result<f64, QuantumError> {
        Ok(self.readout(&self.run(w)?))
    }

    /// Unnormalized pure states at the leaves of the computation tree for
    /// `¢ w $`, in lexicographic order of element-index paths. Zero
    /// vectors are kept.
    pub fn leaf_vectors(&self, w: &str, cap: usize) -> Result<Vec<DVector<f64>>, QuantumError> {
        self.check_input(w)?;
        let mut leaves: u128 = 1;
        for symbol in tape(w) {
            leaves = leaves.saturating_mul(self.channels[&symbol].elements.len() as u128);
        }
        if leaves > cap as u128 {
            return Err(QuantumError::TreeTooLarge { leaves, cap });
        }
        let mut level = vec![DVector::from_fn(self.num_states(), |k, _| {
            if k == self.initial {
                1.0
            } else {
                0.0
            }
        })];
        for symbol in tape(w) {
            let elements = &self.channels[&symbol].elements;
            level = level
                .iter()
                .flat_map(|v| elements.iter().map(move |e| e * v))
                .collect();
        }
        Ok(level)
    }

    /// Acceptance value aggregated over the computation tree leaves.
    pub fn tree_accept_value(&self, w: &str, cap: usize) -> Result<f64, QuantumError> {
        Ok(self
            .leaf_vectors(w, cap)?
            .iter()
            .map(|v| self.accepting.iter().map(|&k| v[k] * v[k]).sum::<f64>())
            .sum())
    }
}
