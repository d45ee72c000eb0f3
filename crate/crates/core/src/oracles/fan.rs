//! Functionals on Cantor space given by tables over prefixes, the fan
//! modulus, the special fan functional built from it, and an exhaustive
//! check of its cover property over finite trees.

use std::any::Any;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::atoms::{code_string, string_code};
use super::OracleError;
use crate::kernel::{EvalError, FinType, Foreign, Machine, PrimTable, Term, Value};

/// Default cap on the depth of enumerated trees.
pub const TREE_DEPTH_CAP: usize = 3;

/// All 0/1 strings of length `n`, lexicographic.
pub fn strings(n: usize) -> Vec<Vec<u64>> {
    (0..1u64 << n)
        .map(|i| (0..n).map(|b| (i >> (n - 1 - b)) & 1).collect())
        .collect()
}

/// A zero-padded finite binary sequence, as a real `(-> N N)`.
#[derive(Debug, Clone)]
pub struct BinSeq {
    pub bits: Vec<u64>,
}

impl BinSeq {
    pub fn value(bits: Vec<u64>) -> Value {
        Value::foreign(Arc::new(BinSeq { bits }))
    }
}

impl Foreign for BinSeq {
    fn name(&self) -> String {
        let s: String = self.bits.iter().map(|b| b.to_string()).collect();
        format!("bin:{s}")
    }
    fn ty(&self) -> FinType {
        FinType::real()
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        let n = args[0].as_nat()?;
        Ok(Value::Nat(self.bits.get(n as usize).copied().unwrap_or(0)))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// A finite set of binary strings as the characteristic function of their codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub members: Vec<bool>,
}

impl Tree {
    pub fn contains(&self, s: &[u64]) -> bool {
        self.members
            .get(string_code(s) as usize)
            .copied()
            .unwrap_or(false)
    }

    pub fn strings(&self) -> Vec<Vec<u64>> {
        (0..self.members.len() as u64)
            .filter(|&c| self.members[c as usize])
            .map(code_string)
            .collect()
    }

    pub fn value(self) -> Value {
        Value::foreign(Arc::new(self))
    }
}

impl Foreign for Tree {
    fn name(&self) -> String {
        let s: String = self
            .members
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        format!("tree:{s}")
    }
    fn ty(&self) -> FinType {
        FinType::real()
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        let c = args[0].as_nat()?;
        Ok(Value::Nat(u64::from(
            self.members.get(c as usize).copied().unwrap_or(false),
        )))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// All prefix-closed sets of strings of length at most `depth`.
pub fn prefix_closed_trees(depth: usize, cap: usize) -> Result<Vec<Tree>, OracleError> {
    if depth > cap {
        return Err(OracleError::DepthTooLarge { depth, cap });
    }
    let n = (1usize << (depth + 1)) - 1;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let members: Vec<bool> = (0..n).map(|c| mask >> c & 1 == 1).collect();
        if (1..n).all(|c| !members[c] || members[(c - 1) / 2]) {
            out.push(Tree { members });
        }
    }
    Ok(out)
}

fn cached_trees(depth: usize) -> Arc<Vec<Tree>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Tree>>>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(Default::default)
        .lock()
        .expect("tree cache");
    cache
        .entry(depth)
        .or_insert_with(|| {
            Arc::new(prefix_closed_trees(depth, depth).expect("depth within its own cap"))
        })
        .clone()
}

/// A functional on Cantor space reading at most `depth` bits; `values` is
/// indexed by the first `depth` bits read as a binary number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorTable {
    pub name: String,
    pub depth: usize,
    pub values: Vec<u64>,
}

impl CantorTable {
    pub fn from_fn(name: &str, depth: usize, f: impl Fn(&[u64]) -> u64) -> CantorTable {
        CantorTable {
            name: name.to_string(),
            depth,
            values: strings(depth).iter().map(|s| f(s)).collect(),
        }
    }

    pub fn constant(c: u64) -> CantorTable {
        CantorTable::from_fn(&format!("const{c}"), 0, |_| c)
    }

    /// Value at a sequence given by enough leading bits (missing bits are 0).
    pub fn at(&self, bits: &[u64]) -> u64 {
        let mut i = 0usize;
        for b in 0..self.depth {
            i = 2 * i + bits.get(b).copied().unwrap_or(0).min(1) as usize;
        }
        self.values[i]
    }

    /// Tabulate a closed `(-> R N)` term on zero-padded prefixes, rejecting
    /// terms that read past `depth` on the two following bits.
    pub fn tabulate(
        name: &str,
        term: &Term,
        depth: usize,
        prims: &PrimTable,
        fuel: u64,
    ) -> Result<CantorTable, OracleError> {
        let mut m = Machine::new(prims, fuel);
        let y = m.eval(term, &crate::kernel::Env::new())?;
        let mut values = Vec::new();
        for s in strings(depth) {
            let v = m.apply(&y, BinSeq::value(s.clone()))?.as_nat()?;
            for ext in strings(2) {
                let mut t = s.clone();
                t.extend(ext);
                if m.apply(&y, BinSeq::value(t))?.as_nat()? != v {
                    return Err(OracleError::NotUniform(depth));
                }
            }
            values.push(v);
        }
        Ok(CantorTable {
            name: name.to_string(),
            depth,
            values,
        })
    }

    pub fn value(self) -> Value {
        Value::foreign(Arc::new(self))
    }
}

impl Foreign for CantorTable {
    fn name(&self) -> String {
        format!("cantor:{}", self.name)
    }
    fn ty(&self) -> FinType {
        FinType::arrow(FinType::real(), FinType::nat())
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], m: &mut Machine) -> Result<Value, EvalError> {
        let mut bits = Vec::with_capacity(self.depth);
        for i in 0..self.depth {
            bits.push(m.apply(&args[0], Value::Nat(i as u64))?.as_nat()?);
        }
        Ok(Value::Nat(self.at(&bits)))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
    fn key(&self) -> String {
        format!("cantor:{}:{:?}", self.depth, self.values)
    }
}

/// Least `N ≤ d` such that sequences agreeing on `N` bits get equal values.
pub fn fan_modulus_muc(y: &CantorTable, d: usize) -> Result<usize, OracleError> {
    let full = y.depth.max(d);
    let all = strings(full);
    (0..=d)
        .find(|&n| {
            all.iter().all(|s| {
                let mut t = s.clone();
                for b in t.iter_mut().skip(n) {
                    *b = 0;
                }
                y.at(s) == y.at(&t)
            })
        })
        .ok_or(OracleError::NotUniform(d))
}

/// `(bound, candidates)` as produced by a special fan functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanWitness {
    pub bound: u64,
    pub candidates: Vec<Vec<u64>>,
}

/// The bound is the largest value of `g` over the `2^N` prefixes fixed by its
/// fan modulus `N`; the candidates are all strings of that length.
pub fn special_fan_from_muc(g: &CantorTable, d: usize) -> Result<FanWitness, OracleError> {
    let n = fan_modulus_muc(g, d)?;
    let bound = strings(n).iter().map(|s| g.at(s)).max().unwrap_or(0);
    Ok(FanWitness {
        bound,
        candidates: strings(bound as usize),
    })
}

#[derive(Clone, Debug)]
pub struct ScfCheck {
    pub trees: usize,
    pub counterexample: Option<Tree>,
}

impl ScfCheck {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn prefix(s: &[u64], n: usize) -> Vec<u64> {
    (0..n).map(|i| s.get(i).copied().unwrap_or(0)).collect()
}

/// For every prefix-closed tree `T` of depth `≤ d`: if each candidate `a`
/// leaves `T` within `g(a)` bits, every binary sequence leaves `T` within
/// `bound` bits.
pub fn check_scf(theta: &FanWitness, g: &CantorTable, d: usize) -> Result<ScfCheck, OracleError> {
    check_scf_capped(theta, g, d, TREE_DEPTH_CAP)
}

pub fn check_scf_capped(
    theta: &FanWitness,
    g: &CantorTable,
    d: usize,
    cap: usize,
) -> Result<ScfCheck, OracleError> {
    if d > cap {
        return Err(OracleError::DepthTooLarge { depth: d, cap });
    }
    let trees = cached_trees(d);
    let count = trees.len();
    // membership only depends on string codes, so compute those once
    let cands: Vec<usize> = theta
        .candidates
        .iter()
        .map(|a| string_code(&prefix(a, g.at(a) as usize)) as usize)
        .collect();
    // only the first d+1 bits of a sequence can meet a tree of depth d
    let probe = (theta.bound as usize).min(d + 1);
    let betas: Vec<Vec<usize>> = strings(probe)
        .iter()
        .map(|b| {
            (0..=theta.bound as usize)
                .map(|i| string_code(&prefix(b, i.min(d + 1))) as usize)
                .collect()
        })
        .collect();
    let has = |t: &Tree, c: usize| t.members.get(c).copied().unwrap_or(false);
    for t in trees.iter() {
        if cands.iter().any(|&c| has(t, c)) {
            continue;
        }
        if !betas.iter().all(|codes| codes.iter().any(|&c| !has(t, c))) {
            return Ok(ScfCheck {
                trees: count,
                counterexample: Some(t.clone()),
            });
        }
    }
    Ok(ScfCheck {
        trees: count,
        counterexample: None,
    })
}

/// Every table of depth `≤ d` with values in `0..=max_value`.
pub fn tabled_suite(d: usize, max_value: u64) -> Vec<CantorTable> {
    let mut out = Vec::new();
    for depth in 0..=d {
        let n = 1usize << depth;
        let total = (max_value + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let values: Vec<u64> = (0..n)
                .map(|_| {
                    let v = c % (max_value + 1);
                    c /= max_value + 1;
                    v
                })
                .collect();
            out.push(CantorTable {
                name: format!("d{depth}#{code}"),
                depth,
                values,
            });
        }
    }
    out
}

/// A small named suite of functionals used by demos.
pub fn named_functionals() -> Vec<CantorTable> {
    vec![
        CantorTable::constant(0),
        CantorTable::constant(2),
        CantorTable::from_fn("a0+1", 1, |s| s[0] + 1),
        CantorTable::from_fn("a2", 3, |s| s[2]),
        CantorTable::from_fn("3a1+a0", 2, |s| 3 * s[1] + s[0]),
        CantorTable::from_fn("sum+1", 3, |s| s.iter().sum::<u64>() + 1),
    ]
}

/// `Ω` for tables: the fan modulus at the table's own depth.
#[derive(Debug, Clone)]
pub struct FanOmega;

impl Foreign for FanOmega {
    fn name(&self) -> String {
        "fan-omega".into()
    }
    fn ty(&self) -> FinType {
        FinType::arrow(
            FinType::arrow(FinType::real(), FinType::nat()),
            FinType::nat(),
        )
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        let y = args[0].foreign_ref::<CantorTable>().ok_or_else(|| {
            EvalError::Unsupported("fan modulus of a functional without a table".into())
        })?;
        fan_modulus_muc(y, y.depth)
            .map(|n| Value::Nat(n as u64))
            .map_err(|e| EvalError::Unsupported(e.to_string()))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli() {
        assert_eq!(
            fan_modulus_muc(&CantorTable::from_fn("a0", 1, |s| s[0]), 1),
            Ok(1)
        );
        assert_eq!(fan_modulus_muc(&CantorTable::constant(5), 0), Ok(0));
        assert_eq!(
            fan_modulus_muc(&CantorTable::from_fn("a2", 3, |s| s[2]), 3),
            Ok(3)
        );
        // a2 read at depth 3 has no modulus below 3
        let a2 = CantorTable::from_fn("a2", 3, |s| s[2]);
        assert_eq!(fan_modulus_muc(&a2, 2), Err(OracleError::NotUniform(2)));
        // a table of depth 3 that ignores its last bit
        assert_eq!(
            fan_modulus_muc(&CantorTable::from_fn("a0", 3, |s| s[0]), 3),
            Ok(1)
        );
    }

    #[test]
    fn modulus_is_least() {
        for y in tabled_suite(2, 1) {
            let n = fan_modulus_muc(&y, y.depth).unwrap();
            if n > 0 {
                // some pair agreeing on n-1 bits is separated
                let all = strings(y.depth);
                assert!(all.iter().any(|s| all
                    .iter()
                    .any(|t| s[..n - 1] == t[..n - 1] && y.at(s) != y.at(t))));
            }
        }
    }

    #[test]
    fn witnesses() {
        let w = special_fan_from_muc(&CantorTable::constant(2), 3).unwrap();
        assert_eq!(w.bound, 2);
        assert_eq!(w.candidates.len(), 4);
        let w0 = special_fan_from_muc(&CantorTable::constant(0), 3).unwrap();
        assert_eq!(
            w0,
            FanWitness {
                bound: 0,
                candidates: vec![vec![]]
            }
        );
        let g = CantorTable::from_fn("a0+1", 1, |s| s[0] + 1);
        let w1 = special_fan_from_muc(&g, 3).unwrap();
        assert_eq!(w1.bound, 2);
        assert!(w1.candidates.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn tree_enumeration() {
        // prefix-closed subsets of the depth-3 binary tree, empty tree included
        assert_eq!(prefix_closed_trees(3, 3).unwrap().len(), 677);
        assert_eq!(prefix_closed_trees(1, 3).unwrap().len(), 5);
        assert!(matches!(
            prefix_closed_trees(4, 3),
            Err(OracleError::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn scf_examples() {
        let g2 = CantorTable::constant(2);
        let w = special_fan_from_muc(&g2, 3).unwrap();
        assert!(check_scf(&w, &g2, 3).unwrap().holds());

        let empty = FanWitness {
            bound: 2,
            candidates: vec![],
        };
        let r = check_scf(&empty, &g2, 3).unwrap();
        assert!(!r.holds());

        let g = CantorTable::from_fn("a0+1", 1, |s| s[0] + 1);
        let mut w = special_fan_from_muc(&g, 3).unwrap();
        w.bound -= 1;
        let r = check_scf(&w, &g, 3).unwrap();
        let t = r.counterexample.expect("a witness tree");
        assert!(t.contains(&[1]) && !t.contains(&[0]));
    }

    #[test]
    fn tabulated_terms() {
        let t = crate::kernel::parse_term_str("(lam (a (-> N N)) (app (prim add) (app a 0) 1))")
            .unwrap();
        let y = CantorTable::tabulate("a0+1", &t, 1, &PrimTable::new(), 100_000).unwrap();
        assert_eq!(y.values, vec![1, 2]);
        assert_eq!(
            CantorTable::tabulate("a0+1", &t, 0, &PrimTable::new(), 100_000),
            Err(OracleError::NotUniform(0))
        );
    }
}
