//! Cutpoint shifting. Each construction keeps the machine's evolution
//! unchanged and appends one affine stage after the right end-marker.

use std::collections::BTreeSet;

use num_traits::One;

use super::{fresh_names, require_afa, require_open_unit, ConstructionError};
use crate::automata::{ClassicalAutomaton, Symbol};
use crate::exactnum::{Matrix, Rational};

/// Pads every matrix with an identity block for `extra` fresh states and
/// replaces the right end-marker with `stage · (A_$ ⊕ I)`.
fn extend_with_stage(
    machine: &ClassicalAutomaton,
    extra: usize,
    fresh_prefix: &str,
    stage: &Matrix,
    accepting: BTreeSet<usize>,
) -> Result<ClassicalAutomaton, ConstructionError> {
    let pad = Matrix::identity(extra);
    let mut transitions: std::collections::BTreeMap<_, _> = machine
        .transitions()
        .iter()
        .map(|(&s, m)| (s, m.direct_sum(&pad)))
        .collect();
    let dollar = stage
        .mul(&transitions[&Symbol::Dollar])
        .expect("stage sized to the extended state set");
    transitions.insert(Symbol::Dollar, dollar);
    let mut states = machine.states().to_vec();
    states.extend(fresh_names(machine.states(), fresh_prefix, extra));
    Ok(ClassicalAutomaton::new(
        machine.kind(),
        states,
        machine.alphabet().to_vec(),
        transitions,
        machine.initial(),
        accepting,
    )?)
}

/// Moves an interior cutpoint `from` to `to` with two extra states, so
/// that `f'(w) - to` has the same sign as `f(w) - from` for every input.
///
/// Accepting entries are scaled by `to/from`, rejecting entries by
/// `(1-to)/(1-from)`, and the lost mass `1 - T` is split between a fresh
/// accepting state (`to (1-T)`) and a fresh rejecting one
/// (`(1-to)(1-T)`).
pub fn shift_interior(
    machine: &ClassicalAutomaton,
    from: &Rational,
    to: &Rational,
) -> Result<ClassicalAutomaton, ConstructionError> {
    require_afa(machine.kind())?;
    require_open_unit("source cutpoint", from)?;
    require_open_unit("target cutpoint", to)?;
    let n = machine.num_states();
    let one = Rational::one();
    let accept_scale = to / from;
    let reject_scale = (&one - to) / (&one - from);
    let mut stage = Matrix::identity(n + 2);
    for j in 0..n {
        let c = if machine.accepting().contains(&j) {
            accept_scale.clone()
        } else {
            reject_scale.clone()
        };
        let rest = &one - &c;
        stage.set(j, j, c);
        stage.set(n, j, to * &rest);
        stage.set(n + 1, j, (&one - to) * rest);
    }
    let mut accepting = machine.accepting().clone();
    accepting.insert(n);
    extend_with_stage(machine, 2, "shift", &stage, accepting)
}

/// Which extreme cutpoint is being moved into the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `f = 0 ⇔ f' = λ`, and `f > 0 ⇔ f' > λ`.
    Zero,
    /// `f = 1 ⇔ f' = λ`, and `f < 1 ⇔ f' < λ`.
    One,
}

/// Moves cutpoint 0 or 1 to `lambda` with one fresh state per redirected
/// state.
///
/// For [`Side::Zero`] each rejecting value is kept at `(1-λ)` and `λ` of
/// it is copied to a fresh accepting state. For [`Side::One`] each
/// accepting value is kept at `λ` and `(1-λ)` of it moves to a fresh
/// rejecting state.
pub fn shift_extreme(
    machine: &ClassicalAutomaton,
    side: Side,
    lambda: &Rational,
) -> Result<ClassicalAutomaton, ConstructionError> {
    require_afa(machine.kind())?;
    require_open_unit("cutpoint", lambda)?;
    let n = machine.num_states();
    let targets: Vec<usize> = (0..n)
        .filter(|k| machine.accepting().contains(k) == (side == Side::One))
        .collect();
    if targets.is_empty() {
        return Err(ConstructionError::EmptyTargetSet(match side {
            Side::Zero => "non-accepting",
            Side::One => "accepting",
        }));
    }
    let k = targets.len();
    let one = Rational::one();
    let (keep, moved) = match side {
        Side::Zero => (&one - lambda, lambda.clone()),
        Side::One => (lambda.clone(), &one - lambda),
    };
    let mut stage = Matrix::identity(n + k);
    for (t, &i) in targets.iter().enumerate() {
        stage.set(i, i, keep.clone());
        stage.set(n + t, i, moved.clone());
    }
    let mut accepting = machine.accepting().clone();
    if side == Side::Zero {
        accepting.extend(n..n + k);
    }
    extend_with_stage(machine, k, "shift", &stage, accepting)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{m1_eq, m2_eq};
    use crate::exactnum::{int, rat, MatrixKind};
    use num_traits::Zero;
    use std::cmp::Ordering;

    fn words(maxlen: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut level = vec![String::new()];
        for _ in 0..maxlen {
            level = level
                .iter()
                .flat_map(|w| ['a', 'b'].into_iter().map(move |c| format!("{w}{c}")))
                .collect();
            out.extend(level.iter().cloned());
        }
        out
    }

    #[test]
    fn interior_shift_keeps_trichotomy() {
        let m = m1_eq();
        let (from, to) = (rat(5, 6), rat(1, 2));
        let s = shift_interior(&m, &from, &to).unwrap();
        assert_eq!(s.num_states(), 4);
        for matrix in s.transitions().values() {
            assert!(matrix.is_kind(MatrixKind::Affine));
        }
        for w in words(8) {
            let f = m.accept_value(&w).unwrap();
            let g = s.accept_value(&w).unwrap();
            assert_eq!(f.cmp(&from), g.cmp(&to), "{w}");
            // members score 1, non-members at most 2/3
            assert_eq!(g > to, f.is_one(), "{w}");
        }
    }

    #[test]
    fn interior_shift_maps_cutpoint_exactly() {
        // m1_eq scores exactly 2/3 on "aab"
        let m = m1_eq();
        let s = shift_interior(&m, &rat(2, 3), &rat(1, 4)).unwrap();
        assert_eq!(s.accept_value("aab").unwrap(), rat(1, 4));
        assert_eq!(
            s.accept_value("bba").unwrap().cmp(&rat(1, 4)),
            Ordering::Less
        );
    }

    #[test]
    fn identical_cutpoints_with_unit_mass_change_nothing() {
        // m1_eq members end in (1, 0): T = 1 so the fresh states stay empty
        let m = m1_eq();
        let s = shift_interior(&m, &rat(1, 3), &rat(1, 3)).unwrap();
        for w in ["", "ab", "ba", "aabb"] {
            assert_eq!(s.accept_value(w).unwrap(), m.accept_value(w).unwrap());
        }
    }

    #[test]
    fn interior_rejects_extreme_cutpoints() {
        let m = m1_eq();
        assert!(shift_interior(&m, &int(0), &rat(1, 2)).is_err());
        assert!(shift_interior(&m, &rat(1, 2), &int(1)).is_err());
    }

    #[test]
    fn zero_side() {
        // accepting e2, e3: zero exactly on members
        let m = m2_eq(&int(1))
            .unwrap()
            .with_accepting(BTreeSet::from([1, 2]))
            .unwrap();
        let lambda = rat(1, 3);
        let s = shift_extreme(&m, Side::Zero, &lambda).unwrap();
        assert_eq!(s.num_states(), 4);
        for w in words(7) {
            let f = m.accept_value(&w).unwrap();
            let g = s.accept_value(&w).unwrap();
            if f.is_zero() {
                assert_eq!(g, lambda, "{w}");
            } else {
                assert!(g > lambda, "{w}");
            }
        }
    }

    #[test]
    fn one_side() {
        let m = m1_eq();
        let lambda = rat(3, 4);
        let s = shift_extreme(&m, Side::One, &lambda).unwrap();
        assert_eq!(s.num_states(), 3);
        for w in words(8) {
            let f = m.accept_value(&w).unwrap();
            let g = s.accept_value(&w).unwrap();
            if f.is_one() {
                assert_eq!(g, lambda, "{w}");
            } else {
                assert!(g < lambda, "{w}");
            }
        }
    }

    #[test]
    fn always_accepting_machine_becomes_constant() {
        let m = m1_eq().with_accepting(BTreeSet::from([0, 1])).unwrap();
        let s = shift_extreme(&m, Side::One, &rat(2, 7)).unwrap();
        for w in words(5) {
            assert_eq!(s.accept_value(&w).unwrap(), rat(2, 7));
        }
    }

    #[test]
    fn empty_target_sets() {
        let all = m1_eq().with_accepting(BTreeSet::from([0, 1])).unwrap();
        assert_eq!(
            shift_extreme(&all, Side::Zero, &rat(1, 2)),
            Err(ConstructionError::EmptyTargetSet("non-accepting"))
        );
        let none = m1_eq().with_accepting(BTreeSet::new()).unwrap();
        assert_eq!(
            shift_extreme(&none, Side::One, &rat(1, 2)),
            Err(ConstructionError::EmptyTargetSet("accepting"))
        );
    }
}
