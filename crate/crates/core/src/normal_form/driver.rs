//! Bottom-up normalization: children first, then rules at the node until it
//! is a normal form. Every rewrite is recorded with the whole formula
//! before and after.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use super::rules::{chain, seq_element, ImplMode, Rule};
use super::{recognize, NfError, NormalForm};
use crate::formula::{lookup, Formula, Quant};
use crate::kernel::Name;

#[derive(Clone, Debug)]
pub struct NormalizeOptions {
    pub mode: ImplMode,
    /// Names for the functionals introduced by implication steps.
    pub zeta_names: Vec<String>,
    /// Base names of witness variables declared upward-monotone.
    pub monotone: BTreeSet<String>,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            mode: ImplMode::Weak,
            zeta_names: vec![],
            monotone: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub rule: Rule,
    pub path: Vec<usize>,
    pub before: Formula,
    pub after: Formula,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<Step>,
}

impl Step {
    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule.name(),
            "args": self.rule.args(),
            "path": self.path,
            "citation": self.rule.citation(),
            "before": self.before.to_string(),
            "after": self.after.to_string(),
            "witness": self.witness,
        })
    }
}

impl Trace {
    pub fn push(&mut self, rule: Rule, path: &[usize], before: Formula, after: Formula) {
        let witness = rule.transformer(before.at(path).unwrap_or(&before));
        self.steps.push(Step {
            rule,
            path: path.to_vec(),
            before,
            after,
            witness,
        });
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.steps.iter().map(Step::to_json).collect())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Re-apply every step to its recorded `before` and compare with `after`.
pub fn replay(trace: &Trace) -> Result<(), NfError> {
    for (i, s) in trace.steps.iter().enumerate() {
        let bad = || NfError::Replay {
            index: i,
            rule: s.rule.name().to_string(),
        };
        if i > 0 && trace.steps[i - 1].after != s.before {
            return Err(bad());
        }
        if s.rule.apply(&s.before, &s.path)? != s.after {
            return Err(bad());
        }
    }
    Ok(())
}

struct Driver<'a> {
    cur: Formula,
    trace: Trace,
    opts: &'a NormalizeOptions,
    monotone: BTreeSet<String>,
    infinitesimal: BTreeSet<Name>,
}

impl Driver<'_> {
    fn run(&mut self, rule: Rule, path: &[usize]) -> Result<(), NfError> {
        let after = rule.apply(&self.cur, path)?;
        let before = std::mem::replace(&mut self.cur, after.clone());
        self.trace.push(rule, path, before, after);
        Ok(())
    }

    fn at(&self, path: &[usize]) -> &Formula {
        self.cur.at(path).expect("driver paths stay valid")
    }

    fn nf_at(&self, path: &[usize]) -> NormalForm {
        recognize(self.at(path)).expect("child normalized")
    }

    fn pull_n(&mut self, p: &mut Vec<usize>, side: usize, n: usize) -> Result<(), NfError> {
        for _ in 0..n {
            self.run(Rule::Pull { side }, p)?;
            p.push(0);
        }
        Ok(())
    }

    /// Move the head of `body_depth` up past `n` internal quantifiers starting at `top`.
    fn bubble(&mut self, path: &[usize], top: usize, n: usize) -> Result<(), NfError> {
        for d in (top..top + n).rev() {
            let mut p = path.to_vec();
            p.extend(std::iter::repeat_n(0, d));
            self.run(Rule::Commute, &p)?;
        }
        Ok(())
    }

    fn norm(&mut self, path: &[usize]) -> Result<(), NfError> {
        loop {
            let g = self.at(path).clone();
            if g.is_internal() {
                return Ok(());
            }
            let child = |i: usize| {
                let mut p = path.to_vec();
                p.push(i);
                p
            };
            match &g {
                Formula::Def(name, _) => {
                    let entry = lookup(name)
                        .ok_or_else(|| NfError::NotPure(format!("unknown definition {name}")))?;
                    self.monotone.extend(entry.monotone.iter().cloned());
                    if entry.derive {
                        self.run(Rule::Expand, path)?;
                    } else {
                        self.run(Rule::DefNormalForm, path)?;
                        return Ok(());
                    }
                }
                Formula::St(_) => return self.run(Rule::StUnfold, path),
                Formula::Not(_) => {
                    self.norm(&child(0))?;
                    let a = self.nf_at(&child(0));
                    if !a.uvars.is_empty() && !a.evars.is_empty() {
                        return Err(NfError::NotPure(format!(
                            "negation of a normal form with both blocks: {g}"
                        )));
                    }
                    let mut p = path.to_vec();
                    return self.pull_n(&mut p, 0, a.uvars.len() + a.evars.len());
                }
                Formula::And(..) | Formula::Or(..) => {
                    self.norm(&child(0))?;
                    self.norm(&child(1))?;
                    let (a, b) = (self.nf_at(&child(0)), self.nf_at(&child(1)));
                    let mut p = path.to_vec();
                    self.pull_n(&mut p, 0, a.uvars.len())?;
                    self.pull_n(&mut p, 1, b.uvars.len())?;
                    self.pull_n(&mut p, 0, a.evars.len())?;
                    return self.pull_n(&mut p, 1, b.evars.len());
                }
                Formula::Implies(..) => {
                    self.norm(&child(0))?;
                    self.norm(&child(1))?;
                    let (a, b) = (self.nf_at(&child(0)), self.nf_at(&child(1)));
                    if !a.uvars.is_empty() && !a.evars.is_empty() {
                        let rule = Rule::Implies {
                            mode: self.opts.mode,
                            names: self.opts.zeta_names.clone(),
                        };
                        return self.run(rule, path);
                    }
                    let mut p = path.to_vec();
                    self.pull_n(&mut p, 0, a.evars.len())?;
                    self.pull_n(&mut p, 1, b.uvars.len())?;
                    self.pull_n(&mut p, 1, b.evars.len())?;
                    return self.pull_n(&mut p, 0, a.uvars.len());
                }
                Formula::Quant(Quant::AllSt, ..) => return self.norm(&child(0)),
                Formula::Quant(Quant::ExSt, ..) => {
                    self.norm(&child(0))?;
                    if !self.nf_at(&child(0)).uvars.is_empty() {
                        return Err(NfError::NotPure(format!(
                            "standard existential over a standard universal: {g}"
                        )));
                    }
                    return Ok(());
                }
                Formula::Quant(q @ (Quant::All | Quant::Ex), ..) => {
                    return self.internal_chain(path, *q)
                }
                Formula::Quant(Quant::AllInf, ..) => {
                    let (es, _) = chain(&g, Quant::AllInf);
                    let mut body = path.to_vec();
                    body.extend(std::iter::repeat_n(0, es.len()));
                    self.norm(&body)?;
                    self.run(Rule::Infinitesimal, path)?;
                    if let Some(Formula::Implies(hyp, _)) = self.cur.at(&body) {
                        if let Formula::Quant(Quant::AllSt, n, _) = &**hyp {
                            self.infinitesimal.insert(n.name.clone());
                        }
                    }
                }
                Formula::In(..) => {
                    return Err(NfError::NotPure(format!(
                        "sequence-bounded quantifier over an external formula: {g}"
                    )))
                }
                _ => return Err(NfError::NotPure(g.to_string())),
            }
        }
    }

    fn internal_chain(&mut self, path: &[usize], q: Quant) -> Result<(), NfError> {
        let (xs, _) = chain(self.at(path), q);
        let n = xs.len();
        let mut body = path.to_vec();
        body.extend(std::iter::repeat_n(0, n));
        self.norm(&body)?;
        let nf = self.nf_at(&body);
        let (u, e) = (nf.uvars.len(), nf.evars.len());
        if q == Quant::Ex {
            if u > 0 {
                return Err(NfError::NotPure(format!(
                    "internal existential over a standard universal: {}",
                    self.at(path)
                )));
            }
            for i in 0..e {
                self.bubble(path, i, n)?;
            }
            return Ok(());
        }
        for i in 0..u {
            self.bubble(path, i, n)?;
        }
        if e == 0 {
            return Ok(());
        }
        let mut head = path.to_vec();
        head.extend(std::iter::repeat_n(0, u));
        self.run(Rule::Idealize, &head)?;
        for i in 0..e {
            let mut p = head.clone();
            p.extend(std::iter::repeat_n(0, i));
            if let Some((_, x, _)) = seq_element(self.at(&p)) {
                let declared =
                    self.monotone.contains(&*x.name.base) || self.infinitesimal.contains(&x.name);
                if x.ty.is_base() && declared {
                    self.run(Rule::Collapse, &p)?;
                }
            }
        }
        Ok(())
    }
}

/// Normalize `f`, recording every step.
pub fn to_normal_form(
    f: &Formula,
    opts: &NormalizeOptions,
) -> Result<(NormalForm, Trace), NfError> {
    if f.is_internal() {
        return Ok((NormalForm::internal(f.clone()), Trace::default()));
    }
    let mut d = Driver {
        cur: f.clone(),
        trace: Trace::default(),
        opts,
        monotone: opts.monotone.clone(),
        infinitesimal: BTreeSet::new(),
    };
    d.norm(&[])?;
    if d.trace.is_empty() {
        d.run(
            Rule::NoOp {
                note: "already a normal form".into(),
            },
            &[],
        )?;
    }
    let nf = recognize(&d.cur).map_err(NfError::NotPure)?;
    Ok((nf, d.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn norm(s: &str) -> (NormalForm, Trace) {
        to_normal_form(&parse_formula(s).unwrap(), &NormalizeOptions::default()).unwrap()
    }

    #[test]
    fn registry_normal_forms_are_derived() {
        for e in crate::formula::registry().iter().filter(|e| e.derive) {
            let args: Vec<_> = e.params.iter().map(|v| v.term()).collect();
            let f = Formula::def(&e.name, args);
            let (nf, trace) = to_normal_form(&f, &NormalizeOptions::default()).unwrap();
            let want = recognize(&e.normal_form).unwrap();
            assert!(nf.alpha_eq(&want), "{}:\n got  {nf}\n want {want}", e.name);
            replay(&trace).unwrap();
        }
    }

    #[test]
    fn stp_uses_registered_form() {
        let (nf, trace) = norm("(def STP)");
        assert_eq!(trace.steps[0].rule.name(), "definition-normal-form");
        assert_eq!(nf.evars.len(), 2);
    }

    #[test]
    fn internal_input_has_empty_trace() {
        let (nf, trace) = norm("(forall ((x N)) (=0 x x))");
        assert!(nf.uvars.is_empty() && nf.evars.is_empty());
        assert!(trace.is_empty());
    }

    #[test]
    fn normal_form_input_gets_noop() {
        let (_, trace) = norm("(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))");
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].rule.name(), "no-op");
    }

    #[test]
    fn standardness_atom() {
        let (nf, _) = norm("(not (st z))");
        assert_eq!(nf.to_string(), "(forall-st ((y N)) (not (=0 y z)))");
    }

    #[test]
    fn not_pure_errors() {
        let f = parse_formula("(not (forall-st ((x N)) (exists-st ((y N)) (=0 x y))))").unwrap();
        assert!(matches!(
            to_normal_form(&f, &NormalizeOptions::default()),
            Err(NfError::NotPure(_))
        ));
    }

    #[test]
    fn trace_chains() {
        let (_, trace) = norm("(def ns-continuity f)");
        for w in trace.steps.windows(2) {
            assert_eq!(w[0].after, w[1].before);
        }
        assert!(trace.steps.iter().any(|s| s.rule == Rule::Idealize));
        assert!(trace.steps.iter().any(|s| s.rule == Rule::Collapse));
    }
}
