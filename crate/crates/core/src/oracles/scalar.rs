//! Exact scalar fields the numeric oracles are generic over.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Signed};

pub type Q = BigRational;
/// Fixed-width rationals; fine for grids up to a few thousand.
pub type Q128 = Ratio<i128>;

pub trait Scalar: Clone + PartialOrd + Signed + FromPrimitive + Debug + Display {
    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n).expect("small integer") / Self::from_i64(d).expect("small integer")
    }

    fn to_big(&self) -> BigRational;
}

impl Scalar for BigRational {
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

impl Scalar for Q128 {
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

pub fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

/// `1/k`, with `1/0` read as unbounded (`None`).
pub fn inv<S: Scalar>(k: u64) -> Option<S> {
    if k == 0 {
        None
    } else {
        Some(S::one() / S::from_u64(k).expect("fits"))
    }
}

/// `|a| < 1/k`, true for every `a` when `k = 0`.
pub fn below_inv<S: Scalar>(a: &S, k: u64) -> bool {
    match inv::<S>(k) {
        None => true,
        Some(e) => a.abs() < e,
    }
}

/// `|a| ≤ 1/k`.
pub fn at_most_inv<S: Scalar>(a: &S, k: u64) -> bool {
    match inv::<S>(k) {
        None => true,
        Some(e) => a.abs() <= e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_agree() {
        let a = Q128::ratio(3, 8);
        assert_eq!(a.to_big(), q(3, 8));
        assert!(below_inv(&q(1, 11), 10));
        assert!(!below_inv(&q(1, 10), 10));
        assert!(at_most_inv(&q(1, 10), 10));
        assert!(below_inv(&q(1000, 1), 0));
    }
}
