//! Interpretation of the named atoms at rational precision. Reals must be
//! exact rationals; sequences `(-> N N)` are inspected on a finite window.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_traits::{Signed, Zero};

use super::scalar::{at_most_inv, below_inv, Q};
use super::OracleError;
use crate::kernel::reals::{exact, real_value};
use crate::kernel::{readback, Machine, Value};

#[derive(Clone, Debug)]
pub struct AtomConfig {
    /// Indices inspected by `binary` and `mono01`.
    pub window: u64,
    /// Tree atoms look at strings up to this length.
    pub tree_depth: usize,
    /// Seed for the pseudo-random interpretation of unknown atoms.
    pub seed: u64,
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig {
            window: 64,
            tree_depth: 3,
            seed: 0,
        }
    }
}

pub fn real(v: &Value) -> Result<Q, OracleError> {
    exact(v)
        .cloned()
        .ok_or_else(|| OracleError::Inexact(readback(v).to_string()))
}

fn nat(v: &Value) -> Result<u64, OracleError> {
    Ok(v.as_nat()?)
}

fn at(m: &mut Machine, f: &Value, i: u64) -> Result<Value, OracleError> {
    Ok(m.apply(f, Value::Nat(i))?)
}

fn nat_at(m: &mut Machine, f: &Value, i: u64) -> Result<u64, OracleError> {
    nat(&at(m, f, i)?)
}

fn real_at(m: &mut Machine, f: &Value, x: &Q) -> Result<Q, OracleError> {
    real(&m.apply(f, real_value(x.clone()))?)
}

/// Code of a finite binary string: `2^|σ| − 1 + bin(σ)`, first bit most significant.
pub fn string_code(bits: &[u64]) -> u64 {
    let mut c = 0u64;
    for &b in bits {
        c = 2 * c + 1 + b;
    }
    c
}

/// Inverse of [`string_code`].
pub fn code_string(mut c: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while c > 0 {
        let b = (c - 1) % 2;
        out.push(b);
        c = (c - 1) / 2;
    }
    out.reverse();
    out
}

/// `(x0, t0, x1, t1, ..., xn)` with `0 = x0 < x1 < ... < xn = 1` and `x_i ≤ t_i ≤ x_{i+1}`.
pub fn partition_points(p: &[Value]) -> Result<Option<(Vec<Q>, Vec<Q>)>, OracleError> {
    if p.len() < 3 || p.len().is_multiple_of(2) {
        return Ok(None);
    }
    let vals: Vec<Q> = p.iter().map(real).collect::<Result<_, _>>()?;
    let xs: Vec<Q> = vals.iter().step_by(2).cloned().collect();
    let ts: Vec<Q> = vals.iter().skip(1).step_by(2).cloned().collect();
    let ok = xs[0].is_zero()
        && xs[xs.len() - 1] == Q::from_integer(1.into())
        && xs.windows(2).all(|w| w[0] < w[1])
        && ts
            .iter()
            .enumerate()
            .all(|(i, t)| xs[i] <= *t && *t <= xs[i + 1]);
    Ok(ok.then_some((xs, ts)))
}

fn riemann(m: &mut Machine, f: &Value, p: &[Value]) -> Result<Q, OracleError> {
    let (xs, ts) = partition_points(p)?
        .ok_or_else(|| OracleError::NotPartition(format!("{} entries", p.len())))?;
    let mut s = Q::zero();
    for (i, t) in ts.iter().enumerate() {
        s += real_at(m, f, t)? * (&xs[i + 1] - &xs[i]);
    }
    Ok(s)
}

fn arity(name: &str, args: &[Value], n: usize) -> Result<(), OracleError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(OracleError::BadAtom(format!(
            "{name} takes {n} arguments, got {}",
            args.len()
        )))
    }
}

pub fn eval_atom(
    name: &str,
    args: &[Value],
    cfg: &AtomConfig,
    m: &mut Machine,
) -> Result<bool, OracleError> {
    let zero = Q::zero();
    let one = Q::from_integer(1.into());
    match name {
        "near" | "near-le" => {
            arity(name, args, 3)?;
            let d = real(&args[0])? - real(&args[1])?;
            let k = nat(&args[2])?;
            Ok(if name == "near" {
                below_inv(&d, k)
            } else {
                at_most_inv(&d, k)
            })
        }
        "small" => {
            arity(name, args, 2)?;
            Ok(below_inv(&real(&args[0])?, nat(&args[1])?))
        }
        "unit" => {
            arity(name, args, 1)?;
            let x = real(&args[0])?;
            Ok(zero <= x && x <= one)
        }
        "nonzero" => {
            arity(name, args, 1)?;
            Ok(!real(&args[0])?.is_zero())
        }
        "sign-change" => {
            arity(name, args, 1)?;
            let a = real_at(m, &args[0], &zero)?;
            let b = real_at(m, &args[0], &one)?;
            Ok((a * b).is_negative())
        }
        "mono01" => {
            arity(name, args, 1)?;
            let mut prev = real(&at(m, &args[0], 0)?)?;
            if prev < zero {
                return Ok(false);
            }
            for i in 1..=cfg.window {
                let x = real(&at(m, &args[0], i)?)?;
                if x < prev || x > one {
                    return Ok(false);
                }
                prev = x;
            }
            Ok(true)
        }
        "partition" => {
            arity(name, args, 1)?;
            Ok(partition_points(args[0].as_seq()?)?.is_some())
        }
        "mesh-lt" => {
            arity(name, args, 2)?;
            let k = nat(&args[1])?;
            let Some((xs, _)) = partition_points(args[0].as_seq()?)? else {
                return Ok(false);
            };
            Ok(xs.windows(2).all(|w| below_inv(&(&w[1] - &w[0]), k)))
        }
        "riemann-near" => {
            arity(name, args, 4)?;
            let sp = riemann(m, &args[0], args[1].as_seq()?)?;
            let sq = riemann(m, &args[0], args[2].as_seq()?)?;
            Ok(below_inv(&(sp - sq), nat(&args[3])?))
        }
        "dq-near" => {
            arity(name, args, 5)?;
            let (a, e, e2) = (real(&args[1])?, real(&args[2])?, real(&args[3])?);
            if e.is_zero() || e2.is_zero() {
                return Ok(false);
            }
            let fa = real_at(m, &args[0], &a)?;
            let d1 = (real_at(m, &args[0], &(&a + &e))? - &fa) / &e;
            let d2 = (real_at(m, &args[0], &(&a + &e2))? - &fa) / &e2;
            Ok(below_inv(&(d1 - d2), nat(&args[4])?))
        }
        "binary" => {
            arity(name, args, 1)?;
            for i in 0..cfg.window {
                if nat_at(m, &args[0], i)? > 1 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        "agree" => {
            arity(name, args, 3)?;
            for i in 0..nat(&args[2])? {
                if nat_at(m, &args[0], i)? != nat_at(m, &args[1], i)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        "tree" => {
            arity(name, args, 1)?;
            let limit = (1u64 << (cfg.tree_depth + 1)) - 1;
            for c in 1..limit {
                if nat_at(m, &args[0], c)? != 0 && nat_at(m, &args[0], (c - 1) / 2)? == 0 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        "prefix-out" => {
            arity(name, args, 3)?;
            let n = nat(&args[2])?;
            let mut bits = Vec::new();
            for i in 0..n {
                let b = nat_at(m, &args[1], i)?;
                if b > 1 {
                    return Ok(true);
                }
                bits.push(b);
            }
            Ok(nat_at(m, &args[0], string_code(&bits))? == 0)
        }
        _ => Ok(hashed(name, args, cfg.seed)),
    }
}

/// An arbitrary but fixed relation for atoms without an interpretation.
fn hashed(name: &str, args: &[Value], seed: u64) -> bool {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    name.hash(&mut h);
    for a in args {
        readback(a).to_string().hash(&mut h);
    }
    h.finish().is_multiple_of(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::reals::rat_value;
    use crate::kernel::{FinType, PrimTable, DEFAULT_FUEL};
    use crate::oracles::realfn::RealExpr;

    fn run(name: &str, args: &[Value]) -> bool {
        let prims = PrimTable::new();
        let mut m = Machine::new(&prims, DEFAULT_FUEL);
        eval_atom(name, args, &AtomConfig::default(), &mut m).unwrap()
    }

    #[test]
    fn codes() {
        assert_eq!(string_code(&[]), 0);
        assert_eq!(string_code(&[0]), 1);
        assert_eq!(string_code(&[1]), 2);
        assert_eq!(string_code(&[0, 0]), 3);
        assert_eq!(string_code(&[1, 1, 1]), 14);
        for c in 0..100 {
            assert_eq!(string_code(&code_string(c)), c);
        }
        // parent of a code
        assert_eq!((string_code(&[1, 0]) - 1) / 2, string_code(&[1]));
    }

    #[test]
    fn real_atoms() {
        assert!(run(
            "near",
            &[rat_value(1, 2), rat_value(1, 3), Value::Nat(5)]
        ));
        assert!(!run(
            "near",
            &[rat_value(1, 2), rat_value(1, 3), Value::Nat(6)]
        ));
        assert!(run(
            "near-le",
            &[rat_value(1, 2), rat_value(1, 3), Value::Nat(6)]
        ));
        assert!(run(
            "near",
            &[rat_value(0, 1), rat_value(1, 1), Value::Nat(0)]
        ));
        assert!(run("unit", &[rat_value(1, 1)]));
        assert!(!run("unit", &[rat_value(3, 2)]));
        let f = RealExpr::c(2, 1)
            .mul(RealExpr::x())
            .sub(RealExpr::c(1, 1))
            .value();
        assert!(run("sign-change", &[f]));
    }

    #[test]
    fn partitions() {
        let p = Value::seq(
            FinType::real(),
            vec![
                rat_value(0, 1),
                rat_value(0, 1),
                rat_value(1, 2),
                rat_value(1, 2),
                rat_value(1, 1),
            ],
        );
        assert!(run("partition", std::slice::from_ref(&p)));
        assert!(run("mesh-lt", &[p.clone(), Value::Nat(1)]));
        assert!(!run("mesh-lt", &[p.clone(), Value::Nat(2)]));
        let bad = Value::seq(
            FinType::real(),
            vec![rat_value(0, 1), rat_value(1, 1), rat_value(1, 2)],
        );
        assert!(!run("partition", &[bad]));
        let f = RealExpr::x().value();
        // left tags 0, 1/2: sum 1/4; compare with itself
        assert!(run("riemann-near", &[f, p.clone(), p, Value::Nat(1000)]));
    }

    #[test]
    fn unknown_atoms_are_deterministic() {
        let a = run("mystery", &[Value::Nat(3)]);
        assert_eq!(a, run("mystery", &[Value::Nat(3)]));
    }
}
