//! Real numbers coded at type 1: `n ↦ zigzag(⌊q·2^n⌋)` is a fast-converging
//! Cauchy sequence of dyadic approximants.

use std::any::Any;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::eval::{EvalError, Foreign, Machine, Value};
use super::types::FinType;

pub fn zigzag(z: &BigInt) -> Option<u64> {
    let two = BigInt::from(2);
    let v: BigInt = if z.is_negative() {
        -(z * &two) - 1
    } else {
        z * &two
    };
    v.to_u64()
}

pub fn unzigzag(n: u64) -> BigInt {
    if n.is_multiple_of(2) {
        BigInt::from(n / 2)
    } else {
        -BigInt::from(n / 2) - 1
    }
}

/// `⌊q·2^n⌋`
pub fn floor_scaled(q: &BigRational, n: u32) -> BigInt {
    let scaled = q * BigRational::from_integer(BigInt::one() << n);
    scaled.floor().to_integer()
}

/// Canonical text of a rational: `3/4`, `-2`, `0`.
pub fn rat_text(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Primitive names of exact rational reals look like `q:3/4`.
pub fn parse_rat_name(name: &str) -> Option<BigRational> {
    let body = name.strip_prefix("q:")?;
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n.parse::<BigInt>().ok()?, d.parse::<BigInt>().ok()?),
        None => (body.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn rat_name(q: &BigRational) -> String {
    format!("q:{}", rat_text(q))
}

/// An exactly known rational real.
#[derive(Debug, Clone)]
pub struct RealConst {
    pub value: BigRational,
}

impl RealConst {
    pub fn new(value: BigRational) -> RealConst {
        RealConst { value }
    }
}

impl Foreign for RealConst {
    fn name(&self) -> String {
        rat_name(&self.value)
    }
    fn ty(&self) -> FinType {
        FinType::real()
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        let n = args[0].as_nat()?;
        let n =
            u32::try_from(n).map_err(|_| EvalError::Overflow("real approximant index".into()))?;
        zigzag(&floor_scaled(&self.value, n))
            .map(Value::Nat)
            .ok_or_else(|| {
                EvalError::Overflow(format!("approximant {n} of {}", rat_text(&self.value)))
            })
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn real_value(q: BigRational) -> Value {
    Value::foreign(Arc::new(RealConst::new(q)))
}

/// `a/b` as a real, with `a/0` read as 0.
pub fn rat_value(a: u64, b: u64) -> Value {
    if b == 0 {
        return real_value(BigRational::zero());
    }
    real_value(BigRational::new(BigInt::from(a), BigInt::from(b)))
}

/// The exact rational behind a real code, when it is known.
pub fn exact(v: &Value) -> Option<&BigRational> {
    v.foreign_ref::<RealConst>().map(|c| &c.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealOpKind {
    Add,
    Sub,
    Mul,
}

/// Sum or difference of two codes that are not both exact, computed lazily.
#[derive(Debug)]
struct RealOp {
    kind: RealOpKind,
    a: Value,
    b: Value,
}

impl Foreign for RealOp {
    fn name(&self) -> String {
        let op = match self.kind {
            RealOpKind::Add => "radd",
            RealOpKind::Sub => "rsub",
            RealOpKind::Mul => "rmul",
        };
        format!("{op}-lazy")
    }
    fn ty(&self) -> FinType {
        FinType::real()
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], m: &mut Machine) -> Result<Value, EvalError> {
        let n = args[0].as_nat()?;
        let n =
            u32::try_from(n).map_err(|_| EvalError::Overflow("real approximant index".into()))?;
        let x = approximant(&self.a, n + 2, m)?;
        let y = approximant(&self.b, n + 2, m)?;
        let s = match self.kind {
            RealOpKind::Add => x + y,
            RealOpKind::Sub => x - y,
            RealOpKind::Mul => unreachable!("products are only formed exactly"),
        };
        // round to nearest at precision n
        let scaled = s * BigRational::from_integer(BigInt::one() << n);
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let z = (scaled + half).floor().to_integer();
        zigzag(&z)
            .map(Value::Nat)
            .ok_or_else(|| EvalError::Overflow("lazy real".into()))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn combine(
    kind: RealOpKind,
    a: &Value,
    b: &Value,
    _m: &mut Machine,
) -> Result<Value, EvalError> {
    if let (Some(x), Some(y)) = (exact(a), exact(b)) {
        return Ok(real_value(match kind {
            RealOpKind::Add => x + y,
            RealOpKind::Sub => x - y,
            RealOpKind::Mul => x * y,
        }));
    }
    if kind == RealOpKind::Mul {
        return Err(EvalError::Unsupported(
            "product of inexact real codes".into(),
        ));
    }
    Ok(Value::foreign(Arc::new(RealOp {
        kind,
        a: a.clone(),
        b: b.clone(),
    })))
}

/// The dyadic approximant `code(n)/2^n` of any real code.
pub fn approximant(code: &Value, n: u32, m: &mut Machine) -> Result<BigRational, EvalError> {
    if let Some(q) = exact(code) {
        return Ok(BigRational::new(floor_scaled(q, n), BigInt::one() << n));
    }
    let z = m.apply(code, Value::Nat(n as u64))?.as_nat()?;
    Ok(BigRational::new(unzigzag(z), BigInt::one() << n))
}

/// Precision index n with 2^-n ≤ 1/(4k).
fn precision_for(k: u64) -> u32 {
    let target = 4u128 * k as u128;
    let mut n = 0u32;
    while (1u128 << n) < target {
        n += 1;
    }
    n
}

/// Comparison at two thresholds: 1 guarantees |y| < 1/k, 0 guarantees |y| ≥ 1/(2k).
/// `k = 0` reads 1/0 as unbounded.
pub fn lt_inv(y: &Value, k: u64, m: &mut Machine) -> Result<bool, EvalError> {
    if k == 0 {
        return Ok(true);
    }
    let n = precision_for(k);
    let a = approximant(y, n, m)?;
    Ok(a.abs() < BigRational::new(BigInt::from(3), BigInt::from(4 * k)))
}

/// Comparison at two thresholds: 1 guarantees y > 1/(2k), 0 guarantees y < 1/k.
pub fn gt_inv(y: &Value, k: u64, m: &mut Machine) -> Result<bool, EvalError> {
    if k == 0 {
        return Ok(false);
    }
    let n = precision_for(k);
    let a = approximant(y, n, m)?;
    Ok(a > BigRational::new(BigInt::from(3), BigInt::from(4 * k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval::PrimTable;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zigzag_round_trip() {
        for z in -50i64..50 {
            let b = BigInt::from(z);
            assert_eq!(unzigzag(zigzag(&b).unwrap()), b);
        }
    }

    #[test]
    fn approximants_converge_fast() {
        let prims = PrimTable::new();
        let mut m = Machine::new(&prims, 1_000_000);
        for (n, d) in [(1, 3), (-2, 7), (5, 1), (0, 1), (-1, 2)] {
            let v = real_value(q(n, d));
            for i in 0..12u32 {
                let a = approximant(&v, i, &mut m).unwrap();
                for j in 0..6u32 {
                    let b = approximant(&v, i + j, &mut m).unwrap();
                    assert!(
                        (a.clone() - b).abs() < BigRational::new(BigInt::one(), BigInt::one() << i)
                    );
                }
            }
        }
    }

    #[test]
    fn two_threshold_decisions() {
        let prims = PrimTable::new();
        let mut m = Machine::new(&prims, 1_000_000);
        for num in -40i64..=40 {
            let y = q(num, 100);
            for k in 1..20u64 {
                let v = real_value(y.clone());
                let inv_k = q(1, k as i64);
                if lt_inv(&v, k, &mut m).unwrap() {
                    assert!(y.abs() < inv_k);
                } else {
                    assert!(y.abs() >= q(1, 2 * k as i64));
                }
                if gt_inv(&v, k, &mut m).unwrap() {
                    assert!(y > q(1, 2 * k as i64));
                } else {
                    assert!(y < inv_k);
                }
            }
        }
    }

    #[test]
    fn lazy_sums_respect_the_modulus() {
        let prims = PrimTable::new();
        let mut m = Machine::new(&prims, 1_000_000);
        let x = real_value(q(1, 3));
        let y = real_value(q(2, 7));
        let lazy = Value::foreign(Arc::new(RealOp {
            kind: RealOpKind::Sub,
            a: x,
            b: y,
        }));
        let exact = q(1, 3) - q(2, 7);
        for n in 0..16u32 {
            let a = approximant(&lazy, n, &mut m).unwrap();
            assert!(
                (a - exact.clone()).abs() < BigRational::new(BigInt::one(), BigInt::one() << n)
            );
        }
    }

    #[test]
    fn names() {
        assert_eq!(parse_rat_name("q:-3/4"), Some(q(-3, 4)));
        assert_eq!(rat_name(&q(6, 3)), "q:2");
        assert_eq!(parse_rat_name("q:1/0"), None);
    }
}
