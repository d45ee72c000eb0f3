//! Bundled pipelines for the worked examples, each with its own oracle checks.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::extract::{
    parse_script, round_trip, run_pipeline, ExtractError, ExtractionResult, PipelineScript,
    RoundTrip,
};
use crate::kernel::reals::exact;
use crate::kernel::{Env, Machine, PrimTable, Value, DEFAULT_FUEL};
use crate::normal_form::{to_normal_form, NormalForm, NormalizeOptions};
use crate::oracles::fan::{named_functionals, FanOmega};
use crate::oracles::mu::{cauchy_from, zero_at, LeukSeq, MuBounded};
use crate::oracles::realfn::{ivt_suite, linear_modulus, RealExpr};
use crate::oracles::riemann::PartitionScan;
use crate::oracles::scalar::below_inv;
use crate::oracles::{
    approx_ivt_oracle, check_scf, leuk_sequence, mct_rate, mu_bounded, mu_from_rate,
    special_fan_from_muc, verify_contract, DomainSpec, OracleError, VerificationReport, Q,
};

pub struct Demo {
    pub name: &'static str,
    pub about: &'static str,
    pub script: &'static str,
}

pub const DEMOS: &[Demo] = &[
    Demo {
        name: "continuity",
        about: "modulus of pointwise continuity s(x, k)",
        script: include_str!("../scripts/continuity.nsp"),
    },
    Demo {
        name: "uniform-continuity",
        about: "modulus of uniform continuity on the unit interval",
        script: include_str!("../scripts/uniform-continuity.nsp"),
    },
    Demo {
        name: "ivt",
        about: "approximate intermediate value t(f, g, k) with |f(t)| < 1/k",
        script: include_str!("../scripts/ivt.nsp"),
    },
    Demo {
        name: "riemann",
        about: "modulus of integration from a modulus of uniform continuity",
        script: include_str!("../scripts/riemann.nsp"),
    },
    Demo {
        name: "mct-mu",
        about: "rate of convergence of monotone sequences from a bounded search operator",
        script: include_str!("../scripts/mct-mu.nsp"),
    },
    Demo {
        name: "stp-fan",
        about: "special fan functional from a fan modulus",
        script: include_str!("../scripts/stp-fan.nsp"),
    },
    Demo {
        name: "reverse-riemann",
        about: "the integration modulus embedded back and re-normalized",
        script: include_str!("../scripts/riemann.nsp"),
    },
];

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("unknown demo {0}")]
    UnknownDemo(String),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

pub struct DemoReport {
    pub name: String,
    pub about: String,
    pub result: ExtractionResult,
    pub verification: VerificationReport,
    pub checks: Vec<Check>,
    pub round_trip: Option<RoundTrip>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.verification.passed() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "demo": self.name,
            "about": self.about,
            "passed": self.passed(),
            "result": self.result.to_json(),
            "verification": self.verification,
            "checks": self.checks,
            "round_trip": self.round_trip.as_ref().map(|r| json!({
                "normal_form": r.normal_form.to_string(),
                "justification": r.justification,
                "idempotent": r.idempotent,
                "implied": r.implied,
            })),
        })
    }
}

pub fn demo(name: &str) -> Result<&'static Demo, DemoError> {
    DEMOS
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| DemoError::UnknownDemo(name.to_string()))
}

pub fn demo_script(name: &str) -> Result<PipelineScript, DemoError> {
    Ok(parse_script(demo(name)?.script).map_err(ExtractError::from)?)
}

/// The full normal form of a script's formula under its options.
pub fn input_normal_form(script: &PipelineScript) -> Result<NormalForm, ExtractError> {
    let opts = NormalizeOptions {
        mode: script.mode,
        zeta_names: script.zeta.clone(),
        monotone: script.monotone.clone(),
    };
    Ok(to_normal_form(&script.formula, &opts)?.0)
}

/// Run a script, then reverse-embed its witness over the script's reverse domain.
pub fn script_round_trip(
    script: &PipelineScript,
) -> Result<(ExtractionResult, RoundTrip), ExtractError> {
    let r = run_pipeline(script)?;
    let rt = round_trip(&r, &input_normal_form(script)?, &script.reverse)?;
    Ok((r, rt))
}

struct Evaluator {
    prims: PrimTable,
    witness: Vec<Value>,
}

impl Evaluator {
    fn new(r: &ExtractionResult) -> Result<Evaluator, OracleError> {
        let prims = PrimTable::new();
        let witness = r
            .witness
            .iter()
            .map(|t| Machine::new(&prims, DEFAULT_FUEL).eval(t, &Env::new()))
            .collect::<Result<_, _>>()?;
        Ok(Evaluator { prims, witness })
    }

    /// The candidate list of slot `i` at `args`.
    fn at(&self, i: usize, args: &[Value]) -> Result<Vec<Value>, OracleError> {
        let v = Machine::new(&self.prims, DEFAULT_FUEL).apply_all(&self.witness[i], args)?;
        Ok(v.as_seq()?.to_vec())
    }

    fn first_nat(&self, i: usize, args: &[Value]) -> Result<Option<u64>, OracleError> {
        Ok(match self.at(i, args)?.first() {
            Some(v) => Some(v.as_nat()?),
            None => None,
        })
    }
}

fn modulus_value(c: u64) -> Result<Value, OracleError> {
    Ok(Machine::new(&PrimTable::new(), 1000).eval(&linear_modulus(c), &Env::new())?)
}

fn ivt_checks(r: &ExtractionResult) -> Result<Vec<Check>, OracleError> {
    let ev = Evaluator::new(r)?;
    let mut out = Vec::new();
    for case in ivt_suite() {
        let g = modulus_value(case.modulus)?;
        let mut bad = Vec::new();
        for k in 1..=32u64 {
            let cands = ev.at(0, &[case.f.value(), g.clone(), Value::Nat(k)])?;
            let q = cands.first().and_then(exact).cloned();
            let oracle = approx_ivt_oracle::<Q>(&case.f, k, 1024);
            let ok = match (&q, &oracle) {
                (Some(q), Ok(o)) => below_inv(&case.f.eval(q), k) && below_inv(&case.f.eval(o), k),
                _ => false,
            };
            if !ok {
                bad.push(k);
            }
        }
        let detail = if bad.is_empty() {
            "k = 1..32".to_string()
        } else {
            format!("fails at k = {bad:?}")
        };
        out.push(check(
            format!("|f(t)| < 1/k and grid oracle agree, f = {}", case.f),
            bad.is_empty(),
            detail,
        ));
    }
    Ok(out)
}

fn riemann_checks(r: &ExtractionResult) -> Result<Vec<Check>, OracleError> {
    let ev = Evaluator::new(r)?;
    let scan = PartitionScan::<Q>::new(&RealExpr::x(), 16);
    let g = modulus_value(1)?;
    let mut bad = Vec::new();
    let mut shown = Vec::new();
    for k in 1..=8u64 {
        let n = ev.first_nat(0, &[g.clone(), Value::Nat(k)])?.unwrap_or(0);
        let least = scan.least_modulus(k);
        shown.push(format!(
            "k={k}: N={n} least={}",
            least.map_or("-".into(), |l| l.to_string())
        ));
        if !scan.validates(n, k) || least.is_some_and(|l| l > n) {
            bad.push(k);
        }
    }
    Ok(vec![check(
        "partition-pair scan, f = x, g(k) = k, D = 16",
        bad.is_empty(),
        shown.join("; "),
    )])
}

pub const LEUK_ZEROS: [Option<u64>; 8] = [
    Some(0),
    Some(1),
    Some(2),
    Some(5),
    Some(10),
    Some(25),
    Some(50),
    None,
];

fn mct_checks(r: &ExtractionResult) -> Result<Vec<Check>, OracleError> {
    let ev = Evaluator::new(r)?;
    let mu = Value::foreign(Arc::new(MuBounded { bound: 128 }));
    let mut out = Vec::new();
    for p in LEUK_ZEROS {
        let xs = leuk_sequence(p, 1000);
        let seq = Value::foreign(Arc::new(LeukSeq { zero: p }));
        let mut rates = Vec::new();
        let mut ok = true;
        for k in 1..=8u64 {
            let m = ev
                .first_nat(0, &[mu.clone(), seq.clone(), Value::Nat(k)])?
                .unwrap_or(0);
            let n = mct_rate(|h| mu_bounded(h, 1000).unwrap_or(0), &zero_at(p), k, 1000)?;
            ok &= cauchy_from(&xs, m, k) && cauchy_from(&xs, n, k);
            rates.push(m);
        }
        let recovered = mu_from_rate(|k| rates[(k.clamp(1, 8) - 1) as usize], zero_at(p));
        ok &= recovered == p;
        let shown = p.map_or("none".into(), |p| p.to_string());
        out.push(check(
            format!("window 1000 and recovered zero, p = {shown}"),
            ok,
            format!("rates {rates:?}, recovered {recovered:?}"),
        ));
    }
    Ok(out)
}

fn fan_checks(r: &ExtractionResult) -> Result<Vec<Check>, OracleError> {
    let ev = Evaluator::new(r)?;
    let omega = Value::foreign(Arc::new(FanOmega));
    let mut out = Vec::new();
    for g in named_functionals() {
        let w = special_fan_from_muc(&g, 3)?;
        let scf = check_scf(&w, &g, 3)?;
        let gv = g.clone().value();
        let bound = ev.first_nat(1, &[omega.clone(), gv.clone()])?;
        let cands = ev.at(0, &[omega.clone(), gv])?;
        let listed = match cands.first() {
            Some(v) => v.as_seq()?.len(),
            None => 0,
        };
        let ok = scf.holds() && bound == Some(w.bound) && listed == w.candidates.len();
        out.push(check(
            format!("special fan at depth 3, g = {}", g.name),
            ok,
            format!(
                "bound {} ({} trees), extracted {bound:?} with {listed} candidates",
                w.bound, scf.trees
            ),
        ));
    }
    Ok(out)
}

/// Run a bundled demo; `overrides` replaces parts of its verification domain.
pub fn run_demo(name: &str, overrides: &DomainSpec) -> Result<DemoReport, DemoError> {
    let d = demo(name)?;
    let script = demo_script(name)?;
    let result = run_pipeline(&script)?;
    let domain = script.domain.merged(overrides);
    let verification = verify_contract(&result.contract, &domain)?;
    let mut round = None;
    let checks = match name {
        "ivt" => ivt_checks(&result)?,
        "riemann" => riemann_checks(&result)?,
        "mct-mu" => mct_checks(&result)?,
        "stp-fan" => fan_checks(&result)?,
        "reverse-riemann" => {
            let rt = round_trip(
                &result,
                &input_normal_form(&script)?,
                &script.reverse.merged(overrides),
            )?;
            let checks = vec![
                check(
                    "re-normalization is the identity",
                    rt.idempotent,
                    rt.normal_form.to_string(),
                ),
                check(
                    "original implies the re-normalized form",
                    rt.implied.passed(),
                    format!("{} inputs", rt.implied.checked),
                ),
            ];
            round = Some(rt);
            checks
        }
        _ => vec![],
    };
    Ok(DemoReport {
        name: name.into(),
        about: d.about.into(),
        result,
        verification,
        checks,
        round_trip: round,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_parse_and_run() {
        for d in DEMOS {
            let s = parse_script(d.script).unwrap_or_else(|e| panic!("{}: {e}", d.name));
            run_pipeline(&s).unwrap_or_else(|e| panic!("{}: {e}", d.name));
        }
    }

    #[test]
    fn unknown() {
        assert!(matches!(
            run_demo("nope", &DomainSpec::default()),
            Err(DemoError::UnknownDemo(_))
        ));
    }
}
