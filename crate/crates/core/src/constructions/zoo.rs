//! The concrete machines: two AfAs for equal letter counts, the
//! two-comparison cutpoint machine over `{a, b, c}`, and the six-state
//! machine whose value is exactly 1/2 on the absolute-value equation.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{affine_lift, complete_affine, encoder_matrix, tensor, ConstructionError, EncoderKind};
use crate::automata::{ClassicalAutomaton, ClassicalKind, Symbol};
use crate::exactnum::{int, rat, Matrix, Rational, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZooMachine {
    M1Eq,
    M2Eq,
    Lapins,
    AbsEq,
}

impl ZooMachine {
    pub const ALL: [ZooMachine; 4] = [
        ZooMachine::M1Eq,
        ZooMachine::M2Eq,
        ZooMachine::Lapins,
        ZooMachine::AbsEq,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ZooMachine::M1Eq => "m1_eq",
            ZooMachine::M2Eq => "m2_eq",
            ZooMachine::Lapins => "lapins",
            ZooMachine::AbsEq => "abs_eq",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ConstructionError> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| ConstructionError::UnknownMachine(name.to_string()))
    }
}

/// Builds a zoo machine. Only `m2_eq` takes a parameter, the scale `x ≥ 1`.
pub fn zoo(
    machine: ZooMachine,
    x: Option<&Rational>,
) -> Result<ClassicalAutomaton, ConstructionError> {
    match (machine, x) {
        (ZooMachine::M2Eq, Some(x)) => m2_eq(x),
        (ZooMachine::M2Eq, None) => Err(ConstructionError::InvalidParameter(
            "m2_eq requires the scale x".into(),
        )),
        (_, Some(_)) => Err(ConstructionError::InvalidParameter(format!(
            "{} takes no parameters",
            machine.name()
        ))),
        (ZooMachine::M1Eq, None) => Ok(m1_eq()),
        (ZooMachine::Lapins, None) => Ok(lapins()),
        (ZooMachine::AbsEq, None) => Ok(abs_eq()),
    }
}

fn letters(pairs: Vec<(char, Matrix)>) -> BTreeMap<Symbol, Matrix> {
    pairs
        .into_iter()
        .map(|(c, m)| (Symbol::Letter(c), m))
        .collect()
}

/// Two states; the first entry doubles on `a` and halves on `b`, so the
/// final state is `(2^{m-n}, 1 - 2^{m-n})`.
pub fn m1_eq() -> ClassicalAutomaton {
    let a = Matrix::from_int_rows(&[&[2, 0], &[-1, 1]]);
    let b = Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(1, 2), int(1)]]).expect("2x2");
    ClassicalAutomaton::new(
        ClassicalKind::Afa,
        ClassicalAutomaton::numbered_states(2),
        vec!['a', 'b'],
        letters(vec![('a', a), ('b', b)]),
        0,
        BTreeSet::from([0]),
    )
    .expect("m1_eq is a valid afa")
}

/// Three states implementing a blind counter scaled by `x`; the final
/// state is `(1, (m-n)x, (n-m)x)`.
pub fn m2_eq(x: &Rational) -> Result<ClassicalAutomaton, ConstructionError> {
    if *x < Rational::one() {
        return Err(ConstructionError::InvalidParameter(format!(
            "m2_eq scale x = {x} must be at least 1"
        )));
    }
    let step = |sign: i64| {
        let d = x * int(sign);
        Matrix::from_rows(vec![
            vec![int(1), int(0), int(0)],
            vec![d.clone(), int(1), int(0)],
            vec![-d, int(0), int(1)],
        ])
        .expect("3x3")
    };
    Ok(ClassicalAutomaton::new(
        ClassicalKind::Afa,
        ClassicalAutomaton::numbered_states(3),
        vec!['a', 'b'],
        letters(vec![('a', step(1)), ('b', step(-1))]),
        0,
        BTreeSet::from([0]),
    )?)
}

/// Six states. Reading leaves `(1-m-n, m, n, 0, 0, 0)`; the right
/// end-marker produces `(m-n, m-2n, m-3n, m-4n, (1-T)/2, (1-T)/2)` with
/// `T = 4m - 10n`. States 1, 4 and 5 accept.
pub fn abs_eq() -> ClassicalAutomaton {
    let embed = |block: &[&[i64]]| {
        let mut m = Matrix::identity(6);
        for (k, row) in block.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                m.set(k, j, int(a));
            }
        }
        m
    };
    let a = embed(&[&[0, -1, -1], &[1, 2, 1], &[0, 0, 1]]);
    let b = embed(&[&[0, -1, -1], &[0, 1, 0], &[1, 1, 2]]);
    let h = |n: i64| rat(n, 2);
    let dollar = Matrix::from_rows(vec![
        vec![int(0), int(1), int(-1), int(1), int(0), int(0)],
        vec![int(0), int(1), int(-2), int(0), int(1), int(0)],
        vec![int(0), int(1), int(-3), int(0), int(0), int(1)],
        vec![int(0), int(1), int(-4), int(0), int(0), int(0)],
        vec![h(1), h(-3), h(11), int(0), int(0), int(0)],
        vec![h(1), h(-3), h(11), int(0), int(0), int(0)],
    ])
    .expect("6x6");
    let mut transitions = letters(vec![('a', a), ('b', b)]);
    transitions.insert(Symbol::Dollar, dollar);
    ClassicalAutomaton::new(
        ClassicalKind::Afa,
        ClassicalAutomaton::numbered_states(6),
        vec!['a', 'b'],
        transitions,
        0,
        BTreeSet::from([0, 3, 4]),
    )
    .expect("abs_eq is a valid afa")
}

fn unit_row(n: usize, indices: &[usize]) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); n];
    for &i in indices {
        row[i] += Rational::one();
    }
    row
}

/// Five-state sub-machine in homogeneous coordinates
/// `(1, 2s+1, s², t, slack)`: `square_on` drives the square encoder for
/// `s`, `count_on` increments `t`. The left end-marker prepares
/// `(1, 1, 0, 0, -1)`.
fn square_and_count(square_on: char, count_on: char, dollar: Matrix) -> ClassicalAutomaton {
    let sq = encoder_matrix(EncoderKind::Square);
    let mut square = Matrix::identity(4);
    for k in 0..3 {
        for j in 0..3 {
            square.set(k, j, sq.get(k, j).clone());
        }
    }
    let mut count = Matrix::identity(4);
    count.set(3, 0, int(1));

    let mut transitions = BTreeMap::new();
    for c in ['a', 'b', 'c'] {
        let linear = if c == square_on {
            &square
        } else if c == count_on {
            &count
        } else {
            &Matrix::identity(4)
        };
        transitions.insert(Symbol::Letter(c), affine_lift(linear));
    }
    let mut cent = Matrix::identity(5);
    let prepared = Vector::from_ints(&[1, 1, 0, 0, -1]);
    for (k, a) in prepared.iter().enumerate() {
        cent.set(k, 0, a.clone());
    }
    transitions.insert(Symbol::Cent, cent);
    transitions.insert(Symbol::Dollar, dollar);
    ClassicalAutomaton::new(
        ClassicalKind::Afa,
        ClassicalAutomaton::numbered_states(5),
        vec!['a', 'b', 'c'],
        transitions,
        0,
        BTreeSet::new(),
    )
    .expect("encoder sub-machine is a valid afa")
}

/// Cutpoint-1/2 machine over `{a, b, c}` for `x² > y` and `y² > z`, where
/// `x, y, z` count the three letters. Final state:
/// `(x²(y²-z), x²(1-y²+z), y, (1-T)/2, (1-T)/2, 0, …)`, `T = x² + y`,
/// accepting states 1 and 4.
pub fn lapins() -> ClassicalAutomaton {
    // (x², y, 1 - x² - y, 0, 0)
    let left = square_and_count(
        'a',
        'b',
        complete_affine(5, &[unit_row(5, &[2]), unit_row(5, &[3])], 1),
    );
    // (y² - z, 1 - y² + z, 0, 0, 0)
    let mut diff = unit_row(5, &[2]);
    diff[3] = int(-1);
    let right = square_and_count('b', 'c', complete_affine(5, &[diff], 1));

    let product = tensor(&left, &right).expect("same alphabet, both afa");
    let n = product.num_states();
    let idx = |i: usize, j: usize| i * right.num_states() + j;
    let y_row: Vec<usize> = (0..right.num_states()).map(|j| idx(1, j)).collect();
    let arrange = complete_affine(
        n,
        &[
            unit_row(n, &[idx(0, 0)]),
            unit_row(n, &[idx(0, 1)]),
            unit_row(n, &y_row),
        ],
        2,
    );
    let dollar = arrange
        .mul(product.matrix(Symbol::Dollar).expect("dollar present"))
        .expect("square");
    ClassicalAutomaton::new(
        ClassicalKind::Afa,
        ClassicalAutomaton::numbered_states(n),
        product.alphabet().to_vec(),
        {
            let mut t = product.transitions().clone();
            t.insert(Symbol::Dollar, dollar);
            t
        },
        product.initial(),
        BTreeSet::from([0, 3]),
    )
    .expect("lapins is a valid afa")
}
