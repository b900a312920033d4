//! Automaton-to-automaton constructions and the concrete example machines.
//!
//! Every classical construction here produces a machine that passes the
//! kind checks of [`ClassicalAutomaton::new`]: each column of each
//! transition matrix sums to exactly one.

mod counters;
mod cutpoint;
mod encoder;
mod nondet;
mod product;
mod zoo;

pub use counters::{compile_blind_counters, gadget_matrix, CounterMachineSpec};
pub use cutpoint::{shift_extreme, shift_interior, Side};
pub use encoder::{encode, encoder_initial, encoder_matrix, EncoderKind};
pub use nondet::{afa_to_nqfa, exclusive_pfa_to_nafa, NqfaConversion};
pub use product::tensor;
pub use zoo::{abs_eq, lapins, m1_eq, m2_eq, zoo, ZooMachine};

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::automata::{AutomatonError, ClassicalKind};
use crate::exactnum::{Matrix, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a {expected} machine, got {got}")]
    WrongKind {
        expected: &'static str,
        got: ClassicalKind,
    },
    #[error("alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },
    #[error("no {0} states to redirect")]
    EmptyTargetSet(&'static str),
    #[error("unknown zoo machine {0:?}")]
    UnknownMachine(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Quantum(#[from] crate::quantum::QuantumError),
}

fn require_afa(kind: ClassicalKind) -> Result<(), ConstructionError> {
    if kind == ClassicalKind::Afa {
        Ok(())
    } else {
        Err(ConstructionError::WrongKind {
            expected: "afa",
            got: kind,
        })
    }
}

fn require_open_unit(name: &str, value: &Rational) -> Result<(), ConstructionError> {
    if value.is_zero() || *value >= Rational::one() || *value < Rational::zero() {
        return Err(ConstructionError::InvalidParameter(format!(
            "{name} = {value} must lie strictly between 0 and 1"
        )));
    }
    Ok(())
}

/// Names `prefix1, prefix2, ...` that do not clash with `existing`.
fn fresh_names(existing: &[String], prefix: &str, count: usize) -> Vec<String> {
    let taken: BTreeSet<&str> = existing.iter().map(String::as_str).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 1;
    while out.len() < count {
        let name = format!("{prefix}{i}");
        if !taken.contains(name.as_str()) {
            out.push(name);
        }
        i += 1;
    }
    out
}

/// Turns a linear map on homogeneous coordinates into an affine map with
/// one extra slack coordinate. The slack row takes `1 - column sum` in
/// every column and the slack column is a unit column, so for any state
/// `(u, 1 - Σu)` the image is `(L u, 1 - Σ L u)`.
pub(crate) fn affine_lift(linear: &Matrix) -> Matrix {
    let d = linear.rows();
    let mut out = Matrix::zeros(d + 1, d + 1);
    for j in 0..d {
        let mut sum = Rational::zero();
        for k in 0..d {
            let a = linear.get(k, j).clone();
            sum += &a;
            out.set(k, j, a);
        }
        out.set(d, j, Rational::one() - sum);
    }
    out.set(d, d, Rational::one());
    out
}

/// An `n x n` affine matrix whose leading rows are `rows`, followed by
/// `split` rows that share each column's deficit `1 - Σ rows` equally.
/// Remaining rows are zero. Applied to an affine state this yields
/// `(r_1·v, …, r_p·v, (1-T)/split, …, 0, …)` with `T = Σ r_i·v`.
pub(crate) fn complete_affine(n: usize, rows: &[Vec<Rational>], split: usize) -> Matrix {
    assert!(rows.len() + split <= n && split > 0);
    let mut out = Matrix::zeros(n, n);
    let share = Rational::new(1.into(), (split as i64).into());
    for j in 0..n {
        let mut sum = Rational::zero();
        for (k, row) in rows.iter().enumerate() {
            sum += &row[j];
            out.set(k, j, row[j].clone());
        }
        let rest = (Rational::one() - sum) * &share;
        for k in 0..split {
            out.set(rows.len() + k, j, rest.clone());
        }
    }
    out
}
