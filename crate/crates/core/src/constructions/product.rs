use std::collections::{BTreeMap, BTreeSet};

use super::{require_afa, ConstructionError};
use crate::automata::{ClassicalAutomaton, ClassicalKind};

/// Runs two AfAs in parallel on one product state space. Every matrix is
/// the Kronecker product of the constituents, so the final state of the
/// product is the Kronecker product of the two final states. The accepting
/// set is left empty; callers pick one with
/// [`ClassicalAutomaton::with_accepting`].
pub fn tensor(
    left: &ClassicalAutomaton,
    right: &ClassicalAutomaton,
) -> Result<ClassicalAutomaton, ConstructionError> {
    require_afa(left.kind())?;
    require_afa(right.kind())?;
    let l: BTreeSet<char> = left.alphabet().iter().copied().collect();
    let r: BTreeSet<char> = right.alphabet().iter().copied().collect();
    if l != r {
        return Err(ConstructionError::AlphabetMismatch {
            left: left.alphabet().to_vec(),
            right: right.alphabet().to_vec(),
        });
    }
    let transitions: BTreeMap<_, _> = left
        .transitions()
        .iter()
        .map(|(&symbol, a)| {
            let b = right.matrix(symbol).expect("same symbol set");
            (symbol, a.kron(b))
        })
        .collect();
    let mut states = Vec::with_capacity(left.num_states() * right.num_states());
    for p in left.states() {
        for q in right.states() {
            states.push(format!("{p}_{q}"));
        }
    }
    let unique: BTreeSet<&String> = states.iter().collect();
    if unique.len() != states.len() {
        states = ClassicalAutomaton::numbered_states(states.len());
    }
    Ok(ClassicalAutomaton::new(
        ClassicalKind::Afa,
        states,
        left.alphabet().to_vec(),
        transitions,
        left.initial() * right.num_states() + right.initial(),
        BTreeSet::new(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Symbol;
    use crate::constructions::{m1_eq, m2_eq};
    use crate::exactnum::{int, Matrix, Vector};

    fn trivial(alphabet: Vec<char>) -> ClassicalAutomaton {
        let transitions = alphabet
            .iter()
            .map(|&c| (Symbol::Letter(c), Matrix::identity(1)))
            .collect();
        ClassicalAutomaton::new(
            ClassicalKind::Afa,
            vec!["s".into()],
            alphabet,
            transitions,
            0,
            BTreeSet::from([0]),
        )
        .unwrap()
    }

    #[test]
    fn product_with_trivial_machine() {
        let m = m1_eq();
        let p = tensor(&m, &trivial(vec!['a', 'b']))
            .unwrap()
            .with_accepting(m.accepting().clone())
            .unwrap();
        for w in ["", "a", "aab", "babba"] {
            assert_eq!(p.run(w).unwrap(), m.run(w).unwrap());
            assert_eq!(p.accept_value(w).unwrap(), m.accept_value(w).unwrap());
        }
    }

    #[test]
    fn product_final_state_is_kron() {
        let p = tensor(&m1_eq(), &m1_eq()).unwrap();
        assert_eq!(p.num_states(), 4);
        assert!(p.accepting().is_empty());
        assert_eq!(p.run("aab").unwrap(), Vector::from_ints(&[4, -2, -2, 1]));

        let q = tensor(&m1_eq(), &m2_eq(&int(2)).unwrap()).unwrap();
        for w in ["", "b", "ab", "abbab", "aaaab"] {
            let v = q.run(w).unwrap();
            assert!(v.sum() == int(1));
            assert_eq!(
                v,
                m1_eq()
                    .run(w)
                    .unwrap()
                    .kron(&m2_eq(&int(2)).unwrap().run(w).unwrap())
            );
        }
    }

    #[test]
    fn alphabet_must_match() {
        assert!(matches!(
            tensor(&m1_eq(), &trivial(vec!['a'])),
            Err(ConstructionError::AlphabetMismatch { .. })
        ));
    }
}
