//! Grid search for approximate roots.

use super::realfn::RealExpr;
use super::scalar::{below_inv, Scalar};
use super::OracleError;

/// First grid point `j/D` with `|f(j/D)| < 1/k`.
pub fn approx_ivt_oracle<S: Scalar>(f: &RealExpr, k: u64, denom: u64) -> Result<S, OracleError> {
    for j in 0..=denom {
        let x = S::ratio(j as i64, denom as i64);
        if below_inv(&f.eval(&x), k) {
            return Ok(x);
        }
    }
    Err(OracleError::NoApproxRoot { k, denom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::scalar::{q, Q, Q128};

    #[test]
    fn examples() {
        let f = RealExpr::c(2, 1).mul(RealExpr::x()).sub(RealExpr::c(1, 1));
        let r: Q = approx_ivt_oracle(&f, 10, 1024).unwrap();
        assert!(below_inv(&f.eval(&r), 10));
        let g = RealExpr::x().sub(RealExpr::c(1, 2));
        assert_eq!(approx_ivt_oracle::<Q>(&g, 2, 2).unwrap(), q(1, 2));
        let h = RealExpr::x().mul(RealExpr::x()).sub(RealExpr::c(1, 2));
        let r: Q128 = approx_ivt_oracle(&h, 16, 4096).unwrap();
        assert!(below_inv(&h.eval(&r), 16));
        // no grid point near the root of x - 1/3 at denominator 2 for k = 100
        let e = RealExpr::x().sub(RealExpr::c(1, 3));
        assert_eq!(
            approx_ivt_oracle::<Q>(&e, 100, 2),
            Err(OracleError::NoApproxRoot { k: 100, denom: 2 })
        );
    }
}
