//! Embeddings used for cutpoint-0 (nondeterministic) recognition: a PFA
//! with an exclusive cutpoint of 1/2 becomes an AfA that scores zero
//! exactly there, and an AfA becomes a QFA with the same zero set.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};

use super::{fresh_names, ConstructionError};
use crate::automata::{tape, ClassicalAutomaton, ClassicalKind, Symbol};
use crate::exactnum::{int, Matrix};
use crate::quantum::{QuantumAutomaton, Superoperator};

/// Builds an AfA `M` with `f_M(w) = 0` exactly when `f_P(w) = 1/2`.
///
/// The right end-marker becomes `A″ A′ A_$`: `A′` collects the rejecting
/// mass in state 1 and the accepting mass in state 2, and
/// `A″ = [[1, -1], [0, 2]] ⊕ I` turns `(1-f, f)` into `(1-2f, 2f)`. State 1
/// is the only accepting state. One-state PFAs get a dead second state.
pub fn exclusive_pfa_to_nafa(
    pfa: &ClassicalAutomaton,
) -> Result<ClassicalAutomaton, ConstructionError> {
    if pfa.kind() == ClassicalKind::Afa {
        return Err(ConstructionError::WrongKind {
            expected: "pfa",
            got: pfa.kind(),
        });
    }
    let padded;
    let pfa = if pfa.num_states() < 2 {
        let mut states = pfa.states().to_vec();
        states.extend(fresh_names(pfa.states(), "dead", 1));
        let transitions = pfa
            .transitions()
            .iter()
            .map(|(&s, m)| (s, m.direct_sum(&Matrix::identity(1))))
            .collect();
        padded = ClassicalAutomaton::new(
            pfa.kind(),
            states,
            pfa.alphabet().to_vec(),
            transitions,
            pfa.initial(),
            pfa.accepting().clone(),
        )?;
        &padded
    } else {
        pfa
    };
    let n = pfa.num_states();
    let mut collect = Matrix::zeros(n, n);
    for j in 0..n {
        let row = usize::from(pfa.accepting().contains(&j));
        collect.set(row, j, int(1));
    }
    let mut spread = Matrix::identity(n);
    spread.set(0, 1, int(-1));
    spread.set(1, 1, int(2));
    let dollar = spread
        .mul(&collect)
        .and_then(|m| m.mul(pfa.matrix(Symbol::Dollar).expect("dollar present")))
        .expect("square matrices of one size");
    let mut transitions = pfa.transitions().clone();
    transitions.insert(Symbol::Dollar, dollar);
    Ok(ClassicalAutomaton::new(
        ClassicalKind::Afa,
        pfa.states().to_vec(),
        pfa.alphabet().to_vec(),
        transitions,
        pfa.initial(),
        BTreeSet::from([0]),
    )?)
}

/// A QFA simulating an AfA together with the per-symbol normalization
/// factors `l_σ` used to build it.
#[derive(Debug, Clone)]
pub struct NqfaConversion {
    pub automaton: QuantumAutomaton,
    pub scales: BTreeMap<Symbol, f64>,
}

impl NqfaConversion {
    /// `l_w`, the product of the factors over `¢ w $`.
    pub fn scale_for(&self, w: &str) -> f64 {
        tape(w).map(|s| self.scales[&s]).product()
    }
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Builds a QFA on `2n` basis states (the AfA states followed by `n`
/// auxiliary ones) whose acceptance is zero exactly where the AfA's is.
///
/// For each symbol the first operation element is `diag(A_σ, I) / l_σ`
/// with `l_σ = max(1, σ_max(A_σ))`, so the residual
/// `R = I - E₁ᵀE₁` is positive semidefinite. Writing `R = B²` with the
/// symmetric square root `B`, the first and second halves of `B`'s rows
/// are placed in the auxiliary rows of two further elements, which then
/// contribute exactly `BᵀB = R`. When the residual vanishes the channel
/// has the single element `E₁`.
///
/// Only the all-first-element path keeps amplitude on the AfA states, so
/// `f'(w) = Σ_{k∈acc} v_f[k]² / l_w²`.
pub fn afa_to_nqfa(afa: &ClassicalAutomaton) -> Result<NqfaConversion, ConstructionError> {
    super::require_afa(afa.kind())?;
    let n = afa.num_states();
    let mut channels = BTreeMap::new();
    let mut scales = BTreeMap::new();
    for (&symbol, a) in afa.transitions() {
        let a = a.to_f64();
        let top = a.singular_values().max();
        let scale = top.max(1.0);
        let mut first = DMatrix::<f64>::identity(2 * n, 2 * n);
        first.view_mut((0, 0), (n, n)).copy_from(&a);
        first /= scale;
        let residual = DMatrix::<f64>::identity(2 * n, 2 * n) - first.transpose() * &first;
        let mut elements = vec![first];
        if residual.amax() > 0.0 {
            let root = psd_sqrt(&residual);
            for half in 0..2 {
                let mut e = DMatrix::zeros(2 * n, 2 * n);
                e.view_mut((n, 0), (n, 2 * n))
                    .copy_from(&root.rows(half * n, n));
                elements.push(e);
            }
        }
        channels.insert(symbol, Superoperator::new(elements)?);
        scales.insert(symbol, scale);
    }
    let mut states = afa.states().to_vec();
    states.extend(fresh_names(afa.states(), "aux", n));
    let automaton = QuantumAutomaton::new(
        states,
        afa.alphabet().to_vec(),
        channels,
        afa.initial(),
        afa.accepting().clone(),
    )?;
    Ok(NqfaConversion { automaton, scales })
}
