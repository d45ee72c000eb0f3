//! Riemann sums over tagged partitions and the grid scans behind the
//! modulus-of-integration checks.

use std::sync::Arc;

use super::realfn::RealExpr;
use super::scalar::{below_inv, Scalar};
use super::OracleError;
use crate::kernel::reals::real_value;
use crate::kernel::{FinType, Value};

/// Points `0 = x0 < ... < xn = 1` and tags `x_i ≤ t_i ≤ x_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<S> {
    pub points: Vec<S>,
    pub tags: Vec<S>,
}

impl<S: Scalar> Partition<S> {
    pub fn new(points: Vec<S>, tags: Vec<S>) -> Result<Partition<S>, OracleError> {
        let bad = |why: &str| Err(OracleError::NotPartition(why.to_string()));
        if points.len() < 2 || tags.len() + 1 != points.len() {
            return bad("need n+1 points and n tags");
        }
        if !points[0].is_zero() || !points[points.len() - 1].is_one() {
            return bad("must run from 0 to 1");
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return bad("points must increase");
        }
        if tags
            .iter()
            .enumerate()
            .any(|(i, t)| *t < points[i] || *t > points[i + 1])
        {
            return bad("tag outside its interval");
        }
        Ok(Partition { points, tags })
    }

    /// `n` equal intervals tagged at their left ends.
    pub fn uniform_left(n: i64) -> Partition<S> {
        let points: Vec<S> = (0..=n).map(|i| S::ratio(i, n)).collect();
        let tags = points[..n as usize].to_vec();
        Partition { points, tags }
    }

    pub fn mesh(&self) -> S {
        let mut best = S::zero();
        for w in self.points.windows(2) {
            let g = w[1].clone() - w[0].clone();
            if g > best {
                best = g;
            }
        }
        best
    }

    /// Each interval split in `m` equal parts, each part tagged where its parent was clamped.
    pub fn refine(&self, m: i64) -> Partition<S> {
        let mut points = vec![S::zero()];
        let mut tags = Vec::new();
        for (i, w) in self.points.windows(2).enumerate() {
            let step = (w[1].clone() - w[0].clone()) / S::ratio(m, 1);
            for j in 0..m {
                let lo = w[0].clone() + step.clone() * S::ratio(j, 1);
                let hi = lo.clone() + step.clone();
                let t = &self.tags[i];
                let tag = if *t < lo {
                    lo.clone()
                } else if *t > hi {
                    hi.clone()
                } else {
                    t.clone()
                };
                tags.push(tag);
                points.push(hi);
            }
        }
        Partition { points, tags }
    }

    /// The `(x0, t0, x1, ..., xn)` sequence of exact reals read by the atoms.
    pub fn to_value(&self) -> Value {
        let mut items = Vec::new();
        for (i, t) in self.tags.iter().enumerate() {
            items.push(real_value(self.points[i].to_big()));
            items.push(real_value(t.to_big()));
        }
        items.push(real_value(self.points[self.points.len() - 1].to_big()));
        Value::Seq(FinType::real(), Arc::new(items))
    }
}

/// `S_π(f) = Σ f(t_i)(x_{i+1} − x_i)`
pub fn riemann_sum<S: Scalar>(f: &RealExpr, p: &Partition<S>) -> S {
    let mut s = S::zero();
    for (i, t) in p.tags.iter().enumerate() {
        s = s + f.eval(t) * (p.points[i + 1].clone() - p.points[i].clone());
    }
    s
}

/// `max S − min S` over all partitions of the grid `j/D` with every gap
/// below `1/n` and grid tags, where `samples[j] = f(j/D)`. `None` when no
/// partition has small enough mesh.
pub fn grid_spread<S: Scalar>(samples: &[S], n: u64) -> Option<S> {
    let d = samples.len() - 1;
    let gap_ok = |g: usize| n == 0 || (g as u128) * (n as u128) < d as u128;
    let mut hi: Vec<Option<S>> = vec![None; d + 1];
    let mut lo: Vec<Option<S>> = vec![None; d + 1];
    hi[0] = Some(S::zero());
    lo[0] = Some(S::zero());
    for j in 1..=d {
        for i in (0..j).rev() {
            if !gap_ok(j - i) {
                break;
            }
            let (Some(h), Some(l)) = (hi[i].clone(), lo[i].clone()) else {
                continue;
            };
            let mut fmax = samples[i].clone();
            let mut fmin = samples[i].clone();
            for s in &samples[i..=j] {
                if *s > fmax {
                    fmax = s.clone();
                }
                if *s < fmin {
                    fmin = s.clone();
                }
            }
            let w = S::ratio((j - i) as i64, d as i64);
            let (a, b) = (h + fmax * w.clone(), l + fmin * w);
            if hi[j].as_ref().is_none_or(|c| a > *c) {
                hi[j] = Some(a);
            }
            if lo[j].as_ref().is_none_or(|c| b < *c) {
                lo[j] = Some(b);
            }
        }
    }
    Some(hi[d].clone()? - lo[d].clone()?)
}

/// Exhaustive scan of every point set on the grid `j/D`: for each, the
/// largest gap and the extreme sums over grid tags.
pub struct PartitionScan<S> {
    pub denom: u64,
    entries: Vec<(u64, S, S)>,
}

impl<S: Scalar> PartitionScan<S> {
    pub fn new(f: &RealExpr, denom: u64) -> PartitionScan<S> {
        let d = denom as usize;
        let samples: Vec<S> = (0..=d)
            .map(|j| f.eval(&S::ratio(j as i64, d as i64)))
            .collect();
        let mut entries = Vec::with_capacity(1 << (d - 1));
        for mask in 0u64..(1u64 << (d - 1)) {
            let mut pts = vec![0usize];
            pts.extend((1..d).filter(|j| mask >> (j - 1) & 1 == 1));
            pts.push(d);
            let mut gap = 0u64;
            let (mut smax, mut smin) = (S::zero(), S::zero());
            for w in pts.windows(2) {
                gap = gap.max((w[1] - w[0]) as u64);
                let seg = &samples[w[0]..=w[1]];
                let mut fmax = seg[0].clone();
                let mut fmin = seg[0].clone();
                for s in seg {
                    if *s > fmax {
                        fmax = s.clone();
                    }
                    if *s < fmin {
                        fmin = s.clone();
                    }
                }
                let width = S::ratio((w[1] - w[0]) as i64, d as i64);
                smax = smax + fmax * width.clone();
                smin = smin + fmin * width;
            }
            entries.push((gap, smax, smin));
        }
        PartitionScan { denom, entries }
    }

    /// Largest `|S_p − S_q|` over pairs of mesh below `1/n`.
    pub fn spread(&self, n: u64) -> Option<S> {
        let mut hi: Option<S> = None;
        let mut lo: Option<S> = None;
        for (gap, smax, smin) in &self.entries {
            if n != 0 && gap * n >= self.denom {
                continue;
            }
            if hi.as_ref().is_none_or(|h| smax > h) {
                hi = Some(smax.clone());
            }
            if lo.as_ref().is_none_or(|l| smin < l) {
                lo = Some(smin.clone());
            }
        }
        Some(hi? - lo?)
    }

    /// Whether `n` validates precision `k` on this grid.
    pub fn validates(&self, n: u64, k: u64) -> bool {
        self.spread(n).is_none_or(|s| below_inv(&s, k))
    }

    /// Least `n ≤ D` validating precision `k`.
    pub fn least_modulus(&self, k: u64) -> Option<u64> {
        (0..=self.denom).find(|&n| self.validates(n, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::scalar::{q, Q, Q128};

    #[test]
    fn sums() {
        let one = RealExpr::c(1, 1);
        let p =
            Partition::<Q>::new(vec![q(0, 1), q(1, 3), q(1, 1)], vec![q(1, 5), q(1, 2)]).unwrap();
        assert_eq!(riemann_sum(&one, &p), q(1, 1));
        let u = Partition::<Q>::uniform_left(4);
        assert_eq!(riemann_sum(&RealExpr::x(), &u), q(3, 8));
        let u128 = Partition::<Q128>::uniform_left(4);
        assert_eq!(riemann_sum(&RealExpr::x(), &u128), Q128::ratio(3, 8));
    }

    #[test]
    fn refinements_of_equal_partitions_agree() {
        let f = RealExpr::x().mul(RealExpr::x());
        let a = Partition::<Q>::uniform_left(3).refine(2);
        let b = Partition::<Q>::uniform_left(3).refine(2);
        assert_eq!(riemann_sum(&f, &a), riemann_sum(&f, &b));
        assert_eq!(a.points.len(), 7);
    }

    #[test]
    fn not_partitions() {
        assert!(Partition::<Q>::new(vec![q(0, 1), q(1, 2)], vec![q(0, 1)]).is_err());
        assert!(Partition::<Q>::new(vec![q(0, 1), q(1, 1)], vec![q(2, 1)]).is_err());
        assert!(
            Partition::<Q>::new(vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)], vec![q(0, 1); 3])
                .is_err()
        );
    }

    #[test]
    fn dp_matches_scan() {
        for f in [
            RealExpr::x(),
            RealExpr::x().mul(RealExpr::x()).sub(RealExpr::c(1, 3)),
        ] {
            for d in [2u64, 5, 8] {
                let scan = PartitionScan::<Q128>::new(&f, d);
                let samples: Vec<Q128> = (0..=d)
                    .map(|j| f.eval(&Q128::ratio(j as i64, d as i64)))
                    .collect();
                for n in 0..=d + 1 {
                    assert_eq!(grid_spread(&samples, n), scan.spread(n), "d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn identity_modulus() {
        let scan = PartitionScan::<Q128>::new(&RealExpr::x(), 16);
        // the spread for mesh below 1/n is at most 1/n
        for k in 1..=8 {
            let n = scan.least_modulus(k).unwrap();
            assert!(n <= k + 1);
            assert!(scan.validates(k + 1, k));
        }
    }
}
