//! Checking an extracted contract `(∀x)(∃y∈t(x))φ` over an enumerated
//! domain of inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::fan::{
    named_functionals, prefix_closed_trees, strings, BinSeq, FanOmega, TREE_DEPTH_CAP,
};
use super::mu::{LeukSeq, MuBounded};
use super::realfn::{continuity_suite, ivt_suite, linear_modulus, riemann_suite};
use super::structure::FiniteStructure;
use super::OracleError;
use crate::formula::{Formula, Quant};
use crate::kernel::reals::rat_value;
use crate::kernel::{parse_type_str, readback, Env, FinType, Machine, PrimTable, Value, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Range(u64, u64),
    /// `j/D` for `j = 0..=D`.
    Grid(u64),
    Suite(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub vars: Vec<String>,
    pub source: Source,
}

/// Input bindings plus the parameters of the structure the rest of the
/// contract is evaluated in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainSpec {
    pub bindings: Vec<Binding>,
    pub settings: BTreeMap<String, String>,
}

const SETTINGS: &[&str] = &[
    "denom",
    "nat",
    "binary",
    "tree",
    "partition",
    "fuel",
    "window",
    "mubound",
    "seq",
];

fn parse_source(text: &str) -> Result<Source, String> {
    if let Some(d) = text.strip_prefix("grid:") {
        return d
            .parse()
            .map(Source::Grid)
            .map_err(|_| format!("bad grid {text}"));
    }
    if let Some(name) = text.strip_prefix("suite:") {
        return Ok(Source::Suite(name.to_string()));
    }
    if let Some((a, b)) = text.split_once("..") {
        let a = a.parse().map_err(|_| format!("bad range {text}"))?;
        let b = b.parse().map_err(|_| format!("bad range {text}"))?;
        return Ok(Source::Range(a, b));
    }
    text.parse()
        .map(|n| Source::Range(n, n))
        .map_err(|_| format!("bad domain source {text}"))
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Range(a, b) if a == b => write!(f, "{a}"),
            Source::Range(a, b) => write!(f, "{a}..{b}"),
            Source::Grid(d) => write!(f, "grid:{d}"),
            Source::Suite(s) => write!(f, "suite:{s}"),
        }
    }
}

impl DomainSpec {
    /// Items look like `k=1..64`, `x=grid:16`, `f,g=suite:ivt`, `denom=256`
    /// or `dom:R->N=suite:fan`.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<DomainSpec, String> {
        let mut d = DomainSpec::default();
        for item in items {
            for part in item.as_ref().split_whitespace() {
                d.add(part)?;
            }
        }
        Ok(d)
    }

    fn add(&mut self, item: &str) -> Result<(), String> {
        let (lhs, rhs) = item
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got {item}"))?;
        if SETTINGS.contains(&lhs) || lhs.starts_with("dom:") {
            self.settings.insert(lhs.to_string(), rhs.to_string());
            return Ok(());
        }
        let vars: Vec<String> = lhs.split(',').map(str::to_string).collect();
        if vars.iter().any(String::is_empty) {
            return Err(format!("bad variable list in {item}"));
        }
        let source = parse_source(rhs)?;
        self.bindings
            .retain(|b| !b.vars.iter().any(|v| vars.contains(v)));
        self.bindings.push(Binding { vars, source });
        Ok(())
    }

    /// `other` wins on conflicts.
    pub fn merged(&self, other: &DomainSpec) -> DomainSpec {
        let mut out = self.clone();
        for b in &other.bindings {
            out.bindings
                .retain(|a| !a.vars.iter().any(|v| b.vars.contains(v)));
            out.bindings.push(b.clone());
        }
        out.settings.extend(other.settings.clone());
        out
    }

    pub fn items(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .bindings
            .iter()
            .map(|b| format!("{}={}", b.vars.join(","), b.source))
            .collect();
        out.extend(self.settings.iter().map(|(k, v)| format!("{k}={v}")));
        out
    }

    pub fn setting(&self, key: &str, default: u64) -> u64 {
        self.settings
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    }

    pub fn bound_vars(&self) -> Vec<&str> {
        self.bindings
            .iter()
            .flat_map(|b| b.vars.iter().map(String::as_str))
            .collect()
    }

    /// The structure in which the unbound part of a contract is evaluated.
    pub fn structure(&self) -> Result<FiniteStructure, OracleError> {
        let nat = self.setting("nat", 32);
        let denom = self.setting("denom", 64).max(1);
        let mut s = FiniteStructure::new(nat + 1, None);
        s.fuel = self.setting("fuel", crate::kernel::DEFAULT_FUEL);
        s.seq_len = self.setting("seq", 2) as usize;
        s.atoms.window = self.setting("window", 64);
        s.atoms.tree_depth = self.setting("tree", 3) as usize;
        s.partition_denom = Some(self.setting("partition", 16).max(1));
        let grid: Vec<Value> = (0..=denom).map(|j| rat_value(j, denom)).collect();
        let bits = self.setting("binary", 4) as usize;
        let trees =
            prefix_closed_trees(s.atoms.tree_depth, TREE_DEPTH_CAP.max(s.atoms.tree_depth))?;
        let mut s = s
            .with_domain(FinType::real(), grid.clone())
            .with_sort("unit", grid)
            .with_sort(
                "binary",
                strings(bits).into_iter().map(BinSeq::value).collect(),
            )
            .with_sort("tree", trees.into_iter().map(|t| t.value()).collect());
        for (k, v) in &self.settings {
            let Some(ty) = k.strip_prefix("dom:") else {
                continue;
            };
            let ty = parse_compact_type(ty)
                .ok_or_else(|| OracleError::BadAtom(format!("bad type {ty}")))?;
            let Source::Suite(name) = parse_source(v).map_err(OracleError::BadAtom)? else {
                return Err(OracleError::BadAtom(format!(
                    "type domains come from suites: {v}"
                )));
            };
            let vals = suite(&name, self)?
                .into_iter()
                .map(|mut t| t.remove(0))
                .collect();
            s = s.with_domain(ty, vals);
        }
        Ok(s)
    }

    fn values(&self, b: &Binding) -> Result<Vec<Vec<Value>>, OracleError> {
        Ok(match &b.source {
            Source::Range(lo, hi) => (*lo..=*hi).map(|n| vec![Value::Nat(n)]).collect(),
            Source::Grid(d) => (0..=*d).map(|j| vec![rat_value(j, (*d).max(1))]).collect(),
            Source::Suite(name) => suite(name, self)?,
        })
    }
}

/// `R->N`, `N`, `R->R`, `(R->N)->N`: arrows associate to the right.
pub fn parse_compact_type(s: &str) -> Option<FinType> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(') {
        // a parenthesised domain
        let mut depth = 1;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if depth == 0 {
                let dom = parse_compact_type(&inner[..i])?;
                let rest = inner[i + 1..].trim();
                return match rest.strip_prefix("->") {
                    None if rest.is_empty() => Some(dom),
                    None => None,
                    Some(r) => Some(FinType::arrow(dom, parse_compact_type(r)?)),
                };
            }
        }
        return None;
    }
    match s.split_once("->") {
        Some((a, b)) => Some(FinType::arrow(
            parse_compact_type(a)?,
            parse_compact_type(b)?,
        )),
        None => match s {
            "N" => Some(FinType::nat()),
            "R" => Some(FinType::real()),
            _ => parse_type_str(s).ok(),
        },
    }
}

pub const SUITES: &[&str] = &[
    "continuity",
    "ivt",
    "riemann",
    "leuk",
    "mu",
    "fan",
    "omega",
    "moduli",
];

/// Named tuples of test inputs.
pub fn suite(name: &str, d: &DomainSpec) -> Result<Vec<Vec<Value>>, OracleError> {
    let prims = PrimTable::new();
    let modulus = |c: u64| -> Result<Value, OracleError> {
        Ok(Machine::new(&prims, 1000).eval(&linear_modulus(c), &Env::new())?)
    };
    let fns = |cases: Vec<super::realfn::FnCase>| -> Result<Vec<Vec<Value>>, OracleError> {
        cases
            .into_iter()
            .map(|c| Ok(vec![c.f.value(), modulus(c.modulus)?]))
            .collect()
    };
    match name {
        "continuity" => fns(continuity_suite()),
        "ivt" => fns(ivt_suite()),
        "riemann" => fns(riemann_suite()),
        "riemann-x" => fns(riemann_suite().into_iter().take(1).collect()),
        "leuk" => Ok([
            Some(0),
            Some(1),
            Some(2),
            Some(5),
            Some(10),
            Some(25),
            Some(50),
            None,
        ]
        .into_iter()
        .map(|p| vec![Value::foreign(Arc::new(LeukSeq { zero: p }))])
        .collect()),
        "mu" => Ok(vec![vec![Value::foreign(Arc::new(MuBounded {
            bound: d.setting("mubound", 128),
        }))]]),
        "fan" => Ok(named_functionals()
            .into_iter()
            .map(|g| vec![g.value()])
            .collect()),
        "omega" => Ok(vec![vec![Value::foreign(Arc::new(FanOmega))]]),
        "moduli" => Ok(vec![vec![modulus(1)?], vec![modulus(2)?]]),
        _ => Err(OracleError::UnknownSuite(name.to_string())),
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Failure {
    pub input: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct VerificationReport {
    pub status: String,
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Peel the leading universal prefix up to the last variable bound by the
/// domain, enumerate the bound inputs and evaluate the rest.
pub fn verify_contract(
    contract: &Formula,
    domain: &DomainSpec,
) -> Result<VerificationReport, OracleError> {
    verify_with(contract, domain, &|_, s| Ok(s.clone()))
}

/// Per-input structure adjustment.
pub type Augment<'a> =
    dyn Fn(&Env, &FiniteStructure) -> Result<FiniteStructure, OracleError> + Sync + 'a;

/// As [`verify_contract`], evaluating each input in `augment(input, base)`.
pub fn verify_with(
    contract: &Formula,
    domain: &DomainSpec,
    augment: &Augment,
) -> Result<VerificationReport, OracleError> {
    let bound = domain.bound_vars();
    let mut prefix: Vec<Var> = Vec::new();
    let mut cur = contract;
    while let Formula::Quant(Quant::All, x, body) = cur {
        prefix.push(x.clone());
        cur = body;
    }
    let last = prefix
        .iter()
        .rposition(|x| bound.contains(&&*x.name.to_string()));
    let (peeled, rest) = match last {
        Some(i) => (
            prefix[..=i].to_vec(),
            Formula::quant_block(Quant::All, &prefix[i + 1..], cur.clone()),
        ),
        None => (Vec::new(), contract.clone()),
    };
    let unbound_prefix: Vec<Var> = peeled
        .iter()
        .filter(|x| !bound.contains(&&*x.name.to_string()))
        .cloned()
        .collect();
    let body = Formula::quant_block(Quant::All, &unbound_prefix, rest);
    for (name, _) in body.free_vars() {
        if !bound.contains(&&*name.to_string()) {
            return Err(OracleError::Free(name.to_string()));
        }
    }
    if domain.bindings.is_empty() {
        return Ok(VerificationReport {
            status: "pass".into(),
            checked: 0,
            failures: vec![],
        });
    }
    let structure = domain.structure()?;
    let columns: Vec<(Vec<String>, Vec<Vec<Value>>)> = domain
        .bindings
        .iter()
        .map(|b| Ok((b.vars.clone(), domain.values(b)?)))
        .collect::<Result<_, OracleError>>()?;
    let total: usize = columns.iter().map(|(_, v)| v.len()).product();
    let results: Vec<Option<Failure>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut env = Env::new();
            let mut shown = Vec::new();
            for (vars, vals) in &columns {
                let tuple = &vals[idx % vals.len()];
                idx /= vals.len();
                for (v, x) in vars.iter().zip(tuple) {
                    env = env.bind(crate::kernel::Name::parse(v), x.clone());
                    shown.push(format!("{v}={}", readback(x)));
                }
            }
            let input = shown.join(", ");
            let result = augment(&env, &structure).and_then(|s| s.eval_formula(&body, &env));
            match result {
                Ok(true) => None,
                Ok(false) => Some(Failure {
                    input,
                    detail: "contract is false".into(),
                }),
                Err(e) => Some(Failure {
                    input,
                    detail: e.to_string(),
                }),
            }
        })
        .collect();
    let failures: Vec<Failure> = results.into_iter().flatten().collect();
    let status = if failures.is_empty() { "pass" } else { "fail" };
    Ok(VerificationReport {
        status: status.into(),
        checked: total,
        failures,
    })
}

/// Verify an extraction result's contract over `domain`.
pub fn verify_witness(
    r: &crate::extract::ExtractionResult,
    domain: &DomainSpec,
) -> Result<VerificationReport, OracleError> {
    verify_contract(&r.contract, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn modulus_contract(f: &str, g: &str) -> Formula {
        parse_formula(&format!(
            "(forall ((x R) (k N)) (exists-in (N N) (seq N (app {g} k)) (forall ((y R)) \
             (implies (atom near x y N) (atom near (app {f} x) (app {f} y) k)))))"
        ))
        .unwrap()
    }

    #[test]
    fn parse_items() {
        let d = DomainSpec::parse(&[
            "k=1..64 x=grid:16",
            "f,g=suite:ivt",
            "denom=256",
            "dom:R->N=suite:fan",
        ])
        .unwrap();
        assert_eq!(d.bindings.len(), 3);
        assert_eq!(d.setting("denom", 0), 256);
        assert_eq!(
            d.items(),
            vec![
                "k=1..64",
                "x=grid:16",
                "f,g=suite:ivt",
                "denom=256",
                "dom:R->N=suite:fan"
            ]
        );
        let e = d.merged(&DomainSpec::parse(&["k=1..8"]).unwrap());
        assert_eq!(e.bindings.last().unwrap().source, Source::Range(1, 8));
        assert!(DomainSpec::parse(&["k"]).is_err());
        assert_eq!(
            parse_compact_type("(R->N)->N").unwrap().to_string(),
            "(-> (-> (-> N N) N) N)"
        );
    }

    #[test]
    fn identity_modulus_passes() {
        let c = modulus_contract("(lam (z R) z)", "(lam (k N) k)");
        let d = DomainSpec::parse(&["k=1..64", "x=grid:16", "denom=256"]).unwrap();
        let r = verify_contract(&c, &d).unwrap();
        assert_eq!(r.checked, 64 * 17);
        assert!(r.passed(), "{:?}", r.failures.first());
    }

    #[test]
    fn corrupted_modulus_fails() {
        let c = modulus_contract(
            "(lam (z R) (app (prim radd) z z))",
            "(lam (k N) (app (prim div) k 2))",
        );
        let d = DomainSpec::parse(&["k=1..16", "x=grid:16", "denom=64"]).unwrap();
        let r = verify_contract(&c, &d).unwrap();
        assert!(!r.passed());
        assert!(r.failures[0].input.contains("k="));
    }

    #[test]
    fn empty_domain() {
        let c = parse_formula("(forall ((k N)) (=0 k k))").unwrap();
        let r = verify_contract(&c, &DomainSpec::default()).unwrap();
        assert_eq!((r.checked, r.passed()), (0, true));
        let c = parse_formula("(=0 0 0)").unwrap();
        assert_eq!(
            verify_contract(&c, &DomainSpec::default()).unwrap().checked,
            0
        );
    }

    #[test]
    fn unbound_prefix_variables_are_quantified() {
        let c = modulus_contract("(lam (z R) z)", "(lam (k N) k)");
        let d = DomainSpec::parse(&["k=1..4", "denom=8"]).unwrap();
        let r = verify_contract(&c, &d).unwrap();
        assert_eq!(r.checked, 4);
        assert!(r.passed());
    }
}
