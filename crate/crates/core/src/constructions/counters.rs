use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::ConstructionError;
use crate::automata::{ClassicalAutomaton, ClassicalKind, Symbol};
use crate::exactnum::{int, Matrix, Rational};

/// A deterministic automaton with `counters` blind counters. On reading
/// letter `σ` in state `q`, counter `i` changes by `increments[(q, σ)][i]`.
#[derive(Debug, Clone)]
pub struct CounterMachineSpec {
    pub dfa: ClassicalAutomaton,
    pub counters: usize,
    pub increments: BTreeMap<(usize, char), Vec<i64>>,
    /// Gadget scale `x ≥ 1`; non-zero counters cap the value at `1/(2x+1)`.
    pub scale: Rational,
}

impl CounterMachineSpec {
    fn check(&self) -> Result<(), ConstructionError> {
        let bad = |msg: String| Err(ConstructionError::InvalidParameter(msg));
        if self.dfa.kind() != ClassicalKind::Dfa {
            return Err(ConstructionError::WrongKind {
                expected: "dfa",
                got: self.dfa.kind(),
            });
        }
        if self.scale < Rational::one() {
            return bad(format!("scale x = {} must be at least 1", self.scale));
        }
        for q in 0..self.dfa.num_states() {
            for &c in self.dfa.alphabet() {
                match self.increments.get(&(q, c)) {
                    None => return bad(format!("no increments for state {q} on {c:?}")),
                    Some(v) if v.len() != self.counters => {
                        return bad(format!(
                            "increments for state {q} on {c:?} have {} entries, expected {}",
                            v.len(),
                            self.counters
                        ))
                    }
                    _ => {}
                }
            }
        }
        if let Some((q, c)) = self
            .increments
            .keys()
            .find(|(q, c)| *q >= self.dfa.num_states() || !self.dfa.alphabet().contains(c))
        {
            return bad(format!("increments given for unknown pair ({q}, {c:?})"));
        }
        Ok(())
    }
}

/// Three-state gadget step: `(1, c·x, -c·x) ↦ (1, (c+δ)·x, -(c+δ)·x)`.
pub fn gadget_matrix(delta: i64, scale: &Rational) -> Matrix {
    let d = int(delta) * scale;
    let mut m = Matrix::identity(3);
    m.set(1, 0, d.clone());
    m.set(2, 0, -d);
    m
}

fn dfa_target(m: &Matrix, q: usize) -> usize {
    (0..m.rows())
        .find(|&k| m.get(k, q).is_one())
        .expect("dfa columns are unit vectors")
}

/// Compiles a deterministic blind-counter automaton into an AfA on
/// `|Q| · 3^k` states, one gadget per counter. The value is 1 when the
/// DFA accepts with all counters at zero, at most `1/(2x+1)` when it
/// accepts with some counter non-zero, and 0 when it rejects.
pub fn compile_blind_counters(
    spec: &CounterMachineSpec,
) -> Result<ClassicalAutomaton, ConstructionError> {
    spec.check()?;
    let dfa = &spec.dfa;
    let q_count = dfa.num_states();
    let block = 3usize.pow(spec.counters as u32);
    let n = q_count * block;

    let mut transitions = BTreeMap::new();
    for (&symbol, m) in dfa.transitions() {
        let joint = match symbol {
            Symbol::Letter(c) => {
                let mut joint = Matrix::zeros(n, n);
                for q in 0..q_count {
                    let target = dfa_target(m, q);
                    let gadgets = spec.increments[&(q, c)]
                        .iter()
                        .fold(Matrix::identity(1), |acc, &d| {
                            acc.kron(&gadget_matrix(d, &spec.scale))
                        });
                    for i in 0..block {
                        for j in 0..block {
                            let a = gadgets.get(i, j);
                            if !a.is_zero() {
                                joint.set(target * block + i, q * block + j, a.clone());
                            }
                        }
                    }
                }
                joint
            }
            // end-markers move the DFA only
            _ => m.kron(&Matrix::identity(block)),
        };
        transitions.insert(symbol, joint);
    }

    let mut states = Vec::with_capacity(n);
    for q in dfa.states() {
        for g in 0..block {
            let digits: String = (0..spec.counters)
                .rev()
                .map(|i| char::from(b'1' + ((g / 3usize.pow(i as u32)) % 3) as u8))
                .collect();
            states.push(format!("{q}.{digits}"));
        }
    }
    let accepting: BTreeSet<usize> = dfa.accepting().iter().map(|&q| q * block).collect();
    Ok(ClassicalAutomaton::new(
        ClassicalKind::Afa,
        states,
        dfa.alphabet().to_vec(),
        transitions,
        dfa.initial() * block,
        accepting,
    )?)
}
