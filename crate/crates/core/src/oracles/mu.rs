//! Bounded search for zeros and the monotone sequences built from it.

use std::any::Any;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::scalar::{at_most_inv, Q};
use super::OracleError;
use crate::kernel::reals::real_value;
use crate::kernel::{EvalError, FinType, Foreign, Machine, Value};

/// Least `n ≤ bound` with `f(n) = 0`.
pub fn mu_bounded(f: impl Fn(u64) -> u64, bound: u64) -> Result<u64, OracleError> {
    (0..=bound).find(|&n| f(n) == 0).ok_or(OracleError::NoZero)
}

/// `x_k = 0` while `f(i) ≠ 0` for all `i ≤ k`, else `Σ_{i=1}^{k} 2^{-i}`.
pub fn leuk(f: impl Fn(u64) -> u64, k: u64) -> Q {
    if (0..=k).all(|i| f(i) != 0) {
        Q::zero()
    } else {
        let d = BigInt::one() << k;
        Q::new_raw(&d - BigInt::one(), d)
    }
}

/// The first `len` terms of the sequence for a function whose only zero is `p`.
pub fn leuk_sequence(zero: Option<u64>, len: usize) -> Vec<Q> {
    let f = zero_at(zero);
    (0..len as u64).map(|k| leuk(&f, k)).collect()
}

/// `f(i) = 0` exactly at `i = p`.
pub fn zero_at(zero: Option<u64>) -> impl Fn(u64) -> u64 {
    move |i| u64::from(Some(i) != zero)
}

/// Least `N` such that all terms from `N` on (inside the window) are within `1/k`.
pub fn exact_rate(xs: &[Q], k: u64) -> u64 {
    TailSpread::new(xs).rate(k)
}

/// `max − min` of every tail `xs[n..]`, so rates for many `k` share one pass.
#[derive(Clone, Debug)]
pub struct TailSpread {
    spread: Vec<Q>,
}

impl TailSpread {
    pub fn new(xs: &[Q]) -> TailSpread {
        let mut spread = vec![Q::zero(); xs.len()];
        let (mut hi, mut lo) = (None::<&Q>, None::<&Q>);
        for n in (0..xs.len()).rev() {
            let x = &xs[n];
            let h = hi.map_or(x, |h| h.max(x));
            let l = lo.map_or(x, |l| l.min(x));
            spread[n] = h - l;
            hi = Some(h);
            lo = Some(l);
        }
        TailSpread { spread }
    }

    pub fn rate(&self, k: u64) -> u64 {
        let mut n = self.spread.len();
        while n > 0 && at_most_inv(&self.spread[n - 1], k) {
            n -= 1;
        }
        n as u64
    }
}

/// All `n, m ≥ N` inside the window satisfy `|x_n − x_m| ≤ 1/k`.
pub fn cauchy_from(xs: &[Q], n: u64, k: u64) -> bool {
    exact_rate(xs, k) <= n
}

fn ceil_log2(k: u64) -> u64 {
    let mut n = 0;
    while (1u128 << n) < k as u128 {
        n += 1;
    }
    n
}

/// Convergence rate of the sequence built from `f`, computed with a mu
/// oracle: `0` when `f` has no zero, else `max(μ(f)+1, ⌈log2 k⌉)`.
pub fn mct_rate(
    mu: impl Fn(&dyn Fn(u64) -> u64) -> u64,
    f: &dyn Fn(u64) -> u64,
    k: u64,
    window: usize,
) -> Result<u64, OracleError> {
    let p = mu(f);
    let n = if f(p) != 0 {
        0
    } else {
        (p + 1).max(ceil_log2(k))
    };
    if n as usize >= window {
        return Err(OracleError::WindowTooSmall { window, k });
    }
    Ok(n)
}

/// A zero of `f` from a rate of convergence for its sequence: the rate at
/// precision 3 lies past the first zero, so a bounded search finds it.
pub fn mu_from_rate(rate: impl Fn(u64) -> u64, f: impl Fn(u64) -> u64) -> Option<u64> {
    let n = rate(3);
    (0..=n).find(|&i| f(i) == 0)
}

/// `μ` restricted to `0..=bound`, returning 0 when there is no zero there.
#[derive(Debug, Clone)]
pub struct MuBounded {
    pub bound: u64,
}

impl Foreign for MuBounded {
    fn name(&self) -> String {
        format!("mu<={}", self.bound)
    }
    fn ty(&self) -> FinType {
        FinType::arrow(FinType::real(), FinType::nat())
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], m: &mut Machine) -> Result<Value, EvalError> {
        for n in 0..=self.bound {
            if m.apply(&args[0], Value::Nat(n))?.as_nat()? == 0 {
                return Ok(Value::Nat(n));
            }
        }
        Ok(Value::Nat(0))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// The sequence `n ↦ x_n` of exact reals for a function with a single zero at `p`.
#[derive(Debug, Clone)]
pub struct LeukSeq {
    pub zero: Option<u64>,
}

impl Foreign for LeukSeq {
    fn name(&self) -> String {
        match self.zero {
            Some(p) => format!("leuk:{p}"),
            None => "leuk:none".into(),
        }
    }
    fn ty(&self) -> FinType {
        FinType::arrow(FinType::nat(), FinType::real())
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        Ok(real_value(leuk(zero_at(self.zero), args[0].as_nat()?)))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::scalar::q;

    #[test]
    fn mu_examples() {
        let f = [1u64, 1, 0, 1];
        assert_eq!(mu_bounded(|i| f[i as usize], 3), Ok(2));
        assert_eq!(mu_bounded(|_| 1, 100), Err(OracleError::NoZero));
        assert_eq!(mu_bounded(|_| 0, 17), Ok(0));
    }

    #[test]
    fn sequence() {
        let xs = leuk_sequence(Some(2), 5);
        assert_eq!(xs, vec![q(0, 1), q(0, 1), q(3, 4), q(7, 8), q(15, 16)]);
        assert!(leuk_sequence(None, 50).iter().all(Zero::is_zero));
        // x_0 is the empty sum even when f(0) = 0
        assert_eq!(leuk_sequence(Some(0), 2), vec![q(0, 1), q(1, 2)]);
    }

    #[test]
    fn rates() {
        let mu = |f: &dyn Fn(u64) -> u64| mu_bounded(f, 1000).unwrap_or(0);
        let f = zero_at(Some(5));
        let xs = leuk_sequence(Some(5), 1000);
        let n = mct_rate(mu, &f, 4, 1000).unwrap();
        assert_eq!(n, 6);
        assert!(cauchy_from(&xs, n, 4));
        assert!(!cauchy_from(&xs, 4, 4));
        assert_eq!(mct_rate(mu, &zero_at(None), 4, 1000), Ok(0));
        assert!(matches!(
            mct_rate(mu, &f, 4, 3),
            Err(OracleError::WindowTooSmall { .. })
        ));
        let xs7 = leuk_sequence(Some(7), 1000);
        assert_eq!(
            mu_from_rate(|k| exact_rate(&xs7, k), zero_at(Some(7))),
            Some(7)
        );
        assert_eq!(
            mu_from_rate(|k| exact_rate(&leuk_sequence(None, 100), k), zero_at(None)),
            None
        );
    }
}
