//! Exact rational scalars and the small dense vector/matrix algebra used by
//! every classical semantics in this crate.
//!
//! Matrices follow the column convention: the entry at row `k`, column `j`
//! is the weight of the transition from state `j` to state `k`, so a state
//! vector evolves as `v' = A v`.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact fraction, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds `numer/denom` from machine integers. Panics if `denom == 0`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("malformed rational {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses the text form `-?[0-9]+(/[0-9]+)?` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let malformed = || ParseRationalError::Malformed(text.to_string());
    let (num_text, den_text) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let digits = num_text.strip_prefix('-').unwrap_or(num_text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let numer: BigInt = num_text.parse().map_err(|_| malformed())?;
    let denom: BigInt = match den_text {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            d.parse().map_err(|_| malformed())?
        }
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("matrix has {cols} columns but vector has length {len}")]
    Apply { cols: usize, len: usize },
    #[error("cannot multiply {left_rows}x{left_cols} by {right_rows}x{right_cols}")]
    Multiply {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrices and vectors need at least one entry")]
    Empty,
}

/// A column vector of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vector(Vec<Rational>);

impl Vector {
    pub fn new(entries: Vec<Rational>) -> Result<Self, DimensionError> {
        if entries.is_empty() {
            return Err(DimensionError::Empty);
        }
        Ok(Self(entries))
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&n| int(n)).collect())
    }

    /// The standard basis vector `e_index` of length `len`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut entries = vec![Rational::zero(); len];
        entries[index] = Rational::one();
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    /// Sum of all entries. Affine states have entry-sum exactly one.
    pub fn sum(&self) -> Rational {
        self.0.iter().sum()
    }

    /// Sum of absolute values, the magnitude of an affine state.
    pub fn l1_norm(&self) -> Rational {
        self.0.iter().map(|a| a.abs()).sum()
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self(self.0.iter().map(|a| a * factor).collect())
    }

    /// Kronecker product of two column vectors.
    pub fn kron(&self, other: &Vector) -> Vector {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        Self(out)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

impl Index<usize> for Vector {
    type Output = Rational;

    fn index(&self, index: usize) -> &Rational {
        &self.0[index]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Best-effort conversion of an exact rational to a double.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Which column constraint a matrix is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Every column sums to exactly one.
    Affine,
    /// Affine with every entry in `[0, 1]`.
    Stochastic,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Defect {
    ColumnSum(Rational),
    EntryOutOfRange {
        row: usize,
        value: Rational,
    },
    /// Deterministic machines allow only 0 and 1.
    NotBinary {
        row: usize,
        value: Rational,
    },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::ColumnSum(sum) => write!(f, "column sums to {sum}, expected 1"),
            Defect::EntryOutOfRange { row, value } => {
                write!(f, "entry at row {row} is {value}, outside [0, 1]")
            }
            Defect::NotBinary { row, value } => {
                write!(f, "entry at row {row} is {value}, expected 0 or 1")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub column: usize,
    pub defect: Defect,
}

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, DimensionError> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || cols == 0 {
            return Err(DimensionError::Empty);
        }
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (row, entries) in rows.into_iter().enumerate() {
            if entries.len() != cols {
                return Err(DimensionError::RaggedRow {
                    row,
                    len: entries.len(),
                    expected: cols,
                });
            }
            data.extend(entries);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    /// Convenience for literal integer matrices. Panics on ragged input.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| int(n)).collect())
                .collect(),
        )
        .expect("well-formed literal matrix")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vector]) -> Result<Self, DimensionError> {
        let rows = columns.first().map(Vector::len).unwrap_or(0);
        if columns.is_empty() || rows == 0 {
            return Err(DimensionError::Empty);
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(DimensionError::RaggedRow {
                    row: j,
                    len: col.len(),
                    expected: rows,
                });
            }
            for (k, a) in col.iter().enumerate() {
                m.set(k, j, a.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vector {
        Vector((0..self.rows).map(|k| self.get(k, col).clone()).collect())
    }

    pub fn column_sum(&self, col: usize) -> Rational {
        (0..self.rows).map(|k| self.get(k, col)).sum()
    }

    /// Exact matrix-vector product `M v`.
    pub fn apply(&self, v: &Vector) -> Result<Vector, DimensionError> {
        if v.len() != self.cols {
            return Err(DimensionError::Apply {
                cols: self.cols,
                len: v.len(),
            });
        }
        let out = (0..self.rows)
            .map(|k| {
                let mut acc = Rational::zero();
                for (a, x) in self.row(k).iter().zip(v.iter()) {
                    // constructed machines are mostly zeros
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect();
        Ok(Vector(out))
    }

    /// Exact matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, DimensionError> {
        if self.cols != rhs.rows {
            return Err(DimensionError::Multiply {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product. Column sums multiply, so affine and stochastic
    /// kinds are preserved.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }

    /// Checks every column against `kind`. An empty list means valid.
    pub fn validate(&self, kind: MatrixKind) -> Vec<Violation> {
        let mut violations = Vec::new();
        if kind == MatrixKind::Unconstrained {
            return violations;
        }
        for j in 0..self.cols {
            let sum = self.column_sum(j);
            if !sum.is_one() {
                violations.push(Violation {
                    column: j,
                    defect: Defect::ColumnSum(sum),
                });
            }
            if kind == MatrixKind::Stochastic {
                for k in 0..self.rows {
                    let a = self.get(k, j);
                    if a.is_negative() || *a > Rational::one() {
                        violations.push(Violation {
                            column: j,
                            defect: Defect::EntryOutOfRange {
                                row: k,
                                value: a.clone(),
                            },
                        });
                    }
                }
            }
        }
        violations
    }

    pub fn is_kind(&self, kind: MatrixKind) -> bool {
        self.validate(kind).is_empty()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.rows {
            let row: Vec<String> = self.row(k).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m1_a() -> Matrix {
        Matrix::from_int_rows(&[&[2, 0], &[-1, 1]])
    }

    fn m1_b() -> Matrix {
        Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(1, 2), int(1)]]).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-4/8").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("-0").unwrap(), int(0));
        assert!(matches!(
            parse_rational("3/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        for bad in [
            "", "-", "1/", "/2", "1/-2", "+1", "1.5", "a/b", "1/2/3", " 1",
        ] {
            assert!(
                matches!(parse_rational(bad), Err(ParseRationalError::Malformed(_))),
                "{bad:?} should be malformed"
            );
        }
    }

    #[test]
    fn render_uses_text_form() {
        assert_eq!(rat(-4, 8).to_string(), "-1/2");
        assert_eq!(int(3).to_string(), "3");
        assert_eq!(int(0).to_string(), "0");
    }

    #[test]
    fn apply_examples() {
        let v = Vector::from_ints(&[1, 0]);
        assert_eq!(m1_a().apply(&v).unwrap(), Vector::from_ints(&[2, -1]));
        assert_eq!(Matrix::identity(2).apply(&v).unwrap(), v);

        let inc = Matrix::from_int_rows(&[&[1, 0], &[1, 1]]);
        let mut state = v.clone();
        for _ in 0..3 {
            state = inc.apply(&state).unwrap();
        }
        assert_eq!(state, Vector::from_ints(&[1, 3]));

        assert_eq!(
            m1_a().apply(&Vector::from_ints(&[1, 0, 0])),
            Err(DimensionError::Apply { cols: 2, len: 3 })
        );
    }

    #[test]
    fn kron_examples() {
        let one = Matrix::from_int_rows(&[&[1]]);
        assert_eq!(one.kron(&m1_b()), m1_b());

        let k = m1_a().kron(&m1_b());
        assert_eq!((k.rows(), k.cols()), (4, 4));
        for j in 0..4 {
            // direct column summation
            let mut s = Rational::zero();
            for i in 0..4 {
                s += k.get(i, j);
            }
            assert!(s.is_one());
        }

        // blind-counter gadget states (1, c x, -c x)
        let (c1, c2, x) = (int(2), int(-3), rat(1, 2));
        let g1 = Vector::new(vec![int(1), &c1 * &x, -(&c1 * &x)]).unwrap();
        let g2 = Vector::new(vec![int(1), &c2 * &x, -(&c2 * &x)]).unwrap();
        let g = g1.kron(&g2);
        assert_eq!(g.len(), 9);
        assert!(g[0].is_one());
        let expected = (int(1) + int(2) * c1.abs() * &x) * (int(1) + int(2) * c2.abs() * &x);
        assert_eq!(g.l1_norm(), expected);
    }

    #[test]
    fn validate_examples() {
        assert!(m1_b().is_kind(MatrixKind::Stochastic));
        assert!(m1_a().is_kind(MatrixKind::Affine));
        let v = m1_a().validate(MatrixKind::Stochastic);
        assert_eq!(
            v,
            vec![
                Violation {
                    column: 0,
                    defect: Defect::EntryOutOfRange {
                        row: 0,
                        value: int(2)
                    }
                },
                Violation {
                    column: 0,
                    defect: Defect::EntryOutOfRange {
                        row: 1,
                        value: int(-1)
                    }
                }
            ]
        );
        let bad = Matrix::from_int_rows(&[&[1, 1], &[1, 0]]);
        assert_eq!(
            bad.validate(MatrixKind::Affine),
            vec![Violation {
                column: 0,
                defect: Defect::ColumnSum(int(2))
            }]
        );
        assert!(bad.is_kind(MatrixKind::Unconstrained));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(Vector::from_ints(&[1, -1, 1]).l1_norm(), int(3));
        assert_eq!(Vector::from_ints(&[2, -1]).l1_norm(), int(3));
        let p = Vector::new(vec![rat(1, 3), rat(1, 6), rat(1, 2)]).unwrap();
        assert_eq!(p.l1_norm(), int(1));
    }

    #[test]
    fn mul_and_direct_sum() {
        let ab = m1_a().mul(&m1_b()).unwrap();
        let v = Vector::from_ints(&[1, 0]);
        assert_eq!(
            ab.apply(&v).unwrap(),
            m1_a().apply(&m1_b().apply(&v).unwrap()).unwrap()
        );
        let d = m1_a().direct_sum(&Matrix::identity(1));
        assert_eq!(
            d.apply(&Vector::from_ints(&[1, 0, 5])).unwrap(),
            Vector::from_ints(&[2, -1, 5])
        );
        assert!(m1_a().mul(&Matrix::identity(3)).is_err());
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
    }

    /// Random affine matrix: free entries in all rows but the last, which
    /// absorbs the remainder of each column.
    fn affine_matrix(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(small_rational(), n * (n - 1)).prop_map(move |free| {
            let mut m = Matrix::zeros(n, n);
            for j in 0..n {
                let mut s = Rational::zero();
                for k in 0..n - 1 {
                    let a = free[j * (n - 1) + k].clone();
                    s += &a;
                    m.set(k, j, a);
                }
                m.set(n - 1, j, Rational::one() - s);
            }
            m
        })
    }

    fn affine_vector(n: usize) -> impl Strategy<Value = Vector> {
        proptest::collection::vec(small_rational(), n - 1).prop_map(|mut e| {
            let s: Rational = e.iter().sum();
            e.push(Rational::one() - s);
            Vector::new(e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rational_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
            let r = rat(n, d);
            prop_assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }

        #[test]
        fn affine_maps_preserve_entry_sum(m in affine_matrix(3), v in affine_vector(3)) {
            prop_assert!(m.is_kind(MatrixKind::Affine));
            prop_assert!(m.apply(&v).unwrap().sum().is_one());
        }

        #[test]
        fn kron_preserves_affine(a in affine_matrix(2), b in affine_matrix(3)) {
            prop_assert!(a.kron(&b).is_kind(MatrixKind::Affine));
        }

        #[test]
        fn kron_preserves_stochastic(p in 0i64..=6, q in 0i64..=6) {
            let a = Matrix::from_rows(vec![vec![rat(p, 6), int(1)], vec![rat(6 - p, 6), int(0)]]).unwrap();
            let b = Matrix::from_rows(vec![vec![rat(q, 6), rat(1, 2)], vec![rat(6 - q, 6), rat(1, 2)]]).unwrap();
            prop_assert!(a.kron(&b).is_kind(MatrixKind::Stochastic));
        }

        #[test]
        fn l1_bounds_entry_sum(e in proptest::collection::vec(small_rational(), 1..6)) {
            let v = Vector::new(e).unwrap();
            let l1 = v.l1_norm();
            let s = v.sum().abs();
            prop_assert!(l1 >= s);
            let same_sign = v.iter().all(|a| !a.is_negative()) || v.iter().all(|a| !a.is_positive());
            prop_assert_eq!(l1 == s, same_sign);
        }
    }
}
