use crate::exactnum::{Matrix, Vector};

/// Integer encoders realized by repeated matrix application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    /// `(1, m)` after `m` steps.
    Increment,
    /// `(1, 2m + 1, m²)` after `m` steps.
    Square,
}

pub fn encoder_matrix(kind: EncoderKind) -> Matrix {
    match kind {
        EncoderKind::Increment => Matrix::from_int_rows(&[&[1, 0], &[1, 1]]),
        EncoderKind::Square => Matrix::from_int_rows(&[&[1, 0, 0], &[2, 1, 0], &[0, 1, 1]]),
    }
}

/// Starting vector. The square encoder starts at `(1, 1, 0)`: the odd
/// counter must already hold `2·0 + 1` for the recurrence
/// `(1, 2m - 1, (m-1)²) ↦ (1, 2m + 1, m²)` to hold from the first step.
pub fn encoder_initial(kind: EncoderKind) -> Vector {
    match kind {
        EncoderKind::Increment => Vector::from_ints(&[1, 0]),
        EncoderKind::Square => Vector::from_ints(&[1, 1, 0]),
    }
}

/// The encoder matrix applied `m` times to the starting vector.
pub fn encode(kind: EncoderKind, m: u64) -> Vector {
    let matrix = encoder_matrix(kind);
    let mut v = encoder_initial(kind);
    for _ in 0..m {
        v = matrix.apply(&v).expect("encoder dimensions agree");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            encode(EncoderKind::Increment, 3),
            Vector::from_ints(&[1, 3])
        );
        assert_eq!(
            encode(EncoderKind::Square, 3),
            Vector::from_ints(&[1, 7, 9])
        );
        assert_eq!(
            encode(EncoderKind::Square, 0),
            Vector::from_ints(&[1, 1, 0])
        );
    }

    #[test]
    fn zero_initial_vector_does_not_square() {
        // starting from (1, 0, 0) the third entry lags behind m²
        let m = encoder_matrix(EncoderKind::Square);
        let v = m.apply(&Vector::from_ints(&[1, 0, 0])).unwrap();
        assert_eq!(v, Vector::from_ints(&[1, 2, 0]));
    }
}
