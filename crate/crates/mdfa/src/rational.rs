//! Exact rational arithmetic shared by the simplex solver and the vertex
//! audits.
//!
//! Everything numeric in the linear-programming layer runs over
//! arbitrary-precision rationals: comparisons, pivots, and rank computations
//! are exact, and there is no epsilon anywhere in this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, kept in lowest terms with a positive
/// denominator by construction.
pub type Rational = BigRational;

/// Rational from a numerator/denominator pair. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from a signed integer.
pub fn rat_int(num: i64) -> Rational {
    BigRational::from_integer(BigInt::from(num))
}

/// Rational from an unsigned integer.
pub fn rat_u64(num: u64) -> Rational {
    BigRational::from_integer(BigInt::from(num))
}

/// True when `x` has denominator 1.
pub fn is_integer(x: &Rational) -> bool {
    x.is_integer()
}

/// True when `0 < x < 1`, the "fractional coordinate" test used by the
/// rounding steps.
pub fn is_strictly_fractional(x: &Rational) -> bool {
    x.is_positive() && *x < BigRational::one()
}

/// Rank of a rational matrix, by Gaussian elimination with exact pivots.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut r = 0;
    for col in 0..cols {
        let Some(pivot) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pivot);
        let inv = m[r][col].clone();
        for x in m[r].iter_mut() {
            *x /= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in 0..cols {
                    let sub = &f * &m[r][c];
                    m[i][c] -= sub;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}
