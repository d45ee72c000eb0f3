use std::collections::BTreeSet;

use super::script::{term_over, Occurrence, PipelineScript, ScriptStep};
use super::select::selection;
use super::{Event, ExtractError, ExtractionResult};
use crate::formula::{lookup, Formula, Quant};
use crate::kernel::combinators::{flatten, mk_max_seq};
use crate::kernel::{infer_open, typecheck, FinType, Term, TypeEnv, Var};
use crate::normal_form::{
    recognize, replay, seq_element, to_normal_form, NfError, NormalizeOptions, Rule, Step, Trace,
};

/// A standard universal prefix (internal universals allowed in between),
/// then a block of standard existentials, then an internal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub inputs: Vec<Var>,
    pub evars: Vec<Var>,
}

pub fn shape_of(f: &Formula) -> Option<Shape> {
    let mut cur = f;
    let mut inputs = Vec::new();
    loop {
        match cur {
            Formula::Quant(Quant::AllSt, x, b) => {
                inputs.push(x.clone());
                cur = b;
            }
            Formula::Quant(Quant::All, _, b) if !b.is_internal() => cur = b,
            _ => break,
        }
    }
    let mut evars = Vec::new();
    while let Formula::Quant(Quant::ExSt, y, b) = cur {
        evars.push(y.clone());
        cur = b;
    }
    cur.is_internal().then_some(Shape { inputs, evars })
}

/// Open candidate lists, one per slot, over the standard inputs.
struct Realizer {
    inputs: Vec<Var>,
    slots: Vec<Var>,
    bodies: Vec<Term>,
}

fn mismatch(step: usize, detail: impl Into<String>) -> ExtractError {
    ExtractError::ReplayFailure {
        step,
        detail: detail.into(),
    }
}

/// Apply a closed term to the inputs, reducing leading lambdas.
fn instantiate(t: &Term, inputs: &[Var]) -> Term {
    let mut cur = t.clone();
    let mut rest = inputs;
    while let (Term::Lam(x, body), [v, tail @ ..]) = (&cur, rest) {
        cur = body.subst1(&x.name, &v.term());
        rest = tail;
    }
    Term::apps(cur, rest.iter().map(Var::term))
}

impl Realizer {
    fn advance(&mut self, index: usize, s: &Step) -> Result<(), ExtractError> {
        if matches!(s.rule, Rule::Implies { .. } | Rule::Hac { .. }) {
            return Err(mismatch(
                index,
                format!("{} cannot act on a live realizer", s.rule.name()),
            ));
        }
        let after = shape_of(&s.after)
            .ok_or_else(|| mismatch(index, "step leaves the realizable shape"))?;
        if after.inputs != self.inputs {
            return Err(mismatch(
                index,
                format!("{} changes the standard inputs", s.rule.name()),
            ));
        }
        if let Rule::Weaken { vars } = &s.rule {
            let mut keep = Vec::new();
            for (v, b) in self.slots.iter().zip(&self.bodies) {
                if !vars.contains(&v.name.to_string()) {
                    keep.push((v.clone(), b.clone()));
                }
            }
            (self.slots, self.bodies) = keep.into_iter().unzip();
        }
        if after.evars.len() != self.slots.len() {
            return Err(mismatch(
                index,
                format!("{} changes the number of witnesses", s.rule.name()),
            ));
        }
        for (i, new) in after.evars.iter().enumerate() {
            let old = &self.slots[i].ty;
            if &new.ty == old {
                continue;
            }
            let body = self.bodies[i].clone();
            self.bodies[i] = match &s.rule {
                Rule::Idealize if new.ty == FinType::seq(old.clone()) => {
                    Term::seq(new.ty.clone(), vec![body])
                }
                Rule::Collapse if *old == FinType::seq(FinType::nat()) && new.ty.is_base() => {
                    let max = Term::app(mk_max_seq(), Term::app(flatten(&FinType::nat()), body));
                    Term::seq(FinType::nat(), vec![max])
                }
                _ => {
                    return Err(ExtractError::TypeMismatch(format!(
                        "{} turns witness {} of type {old} into type {}",
                        s.rule.name(),
                        self.slots[i],
                        new.ty
                    )))
                }
            };
        }
        self.slots = after.evars;
        Ok(())
    }
}

fn collect_monotone(f: &Formula, out: &mut BTreeSet<String>, seen: &mut BTreeSet<String>) {
    if let Formula::Def(name, _) = f {
        if let Some(e) = lookup(name) {
            out.extend(e.monotone.iter().cloned());
            if seen.insert(e.name.clone()) {
                collect_monotone(&e.expansion, out, seen);
            }
        }
    }
    for c in f.children() {
        collect_monotone(c, out, seen);
    }
}

fn first_applicable(f: &Formula, rule: &Rule, path: &mut Vec<usize>) -> Option<Vec<usize>> {
    if rule.apply(f, &[]).is_ok() {
        return Some(path.clone());
    }
    for (i, c) in f.children().into_iter().enumerate() {
        path.push(i);
        if let Some(p) = first_applicable(c, rule, path) {
            return Some(p);
        }
        path.pop();
    }
    None
}

struct Run<'a> {
    script: &'a PipelineScript,
    cur: Formula,
    trace: Trace,
    events: Vec<Event>,
    realizer: Option<Realizer>,
    monotone: BTreeSet<String>,
}

impl Run<'_> {
    fn record(&mut self, index: usize, s: Step) -> Result<(), ExtractError> {
        if let Some(r) = &mut self.realizer {
            r.advance(index, &s)?;
        }
        self.cur = s.after.clone();
        self.events.push(Event::Rule(s.clone()));
        self.trace.steps.push(s);
        Ok(())
    }

    fn step(&mut self, index: usize, step: &ScriptStep) -> Result<(), ExtractError> {
        match step {
            ScriptStep::Normalize { before, mode, zeta } => {
                let opts = NormalizeOptions {
                    mode: mode.unwrap_or(self.script.mode),
                    zeta_names: zeta.clone().unwrap_or_else(|| self.script.zeta.clone()),
                    monotone: self.monotone.clone(),
                };
                let (_, t) = to_normal_form(&self.cur, &opts)?;
                let mut steps = t.steps;
                if let Some((r, which)) = before {
                    let hits: Vec<usize> = steps
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.rule.name() == r)
                        .map(|(i, _)| i)
                        .collect();
                    let pos = match which {
                        Occurrence::Nth(n) => hits.get(n - 1),
                        Occurrence::Last => hits.last(),
                    };
                    let pos = *pos.ok_or_else(|| {
                        mismatch(index, format!("normalization never reaches {r}"))
                    })?;
                    steps.truncate(pos);
                }
                if self.realizer.is_some() {
                    steps.retain(|s| !matches!(s.rule, Rule::NoOp { .. }));
                }
                for s in steps {
                    self.record(index, s)?;
                }
            }
            ScriptStep::Rule { rule, path } => {
                let path = match path {
                    Some(p) => p.clone(),
                    None => {
                        first_applicable(&self.cur, rule, &mut Vec::new()).ok_or_else(|| {
                            mismatch(index, format!("{} applies nowhere", rule.name()))
                        })?
                    }
                };
                if *rule == Rule::Collapse {
                    let node = self
                        .cur
                        .at(&path)
                        .ok_or_else(|| mismatch(index, "no subformula at path"))?;
                    if let Some((w, x, _)) = seq_element(node) {
                        if !self.monotone.contains(&*x.name.base)
                            && !self.monotone.contains(&*w.name.base)
                        {
                            return Err(NfError::MonotonicityUndeclared(x.name.to_string()).into());
                        }
                    }
                }
                let after = rule.apply(&self.cur, &path)?;
                let mut t = Trace::default();
                t.push(rule.clone(), &path, self.cur.clone(), after);
                let s = t.steps.pop().expect("pushed");
                self.record(index, s)?;
            }
            ScriptStep::Realize(terms) => {
                let sh = shape_of(&self.cur).ok_or_else(|| {
                    mismatch(
                        index,
                        "realize needs standard inputs, standard witnesses and an internal matrix",
                    )
                })?;
                if terms.len() != sh.evars.len() {
                    return Err(ExtractError::TypeMismatch(format!(
                        "{} realizer terms for {} witnesses",
                        terms.len(),
                        sh.evars.len()
                    )));
                }
                let tys: Vec<FinType> = sh.inputs.iter().map(|v| v.ty.clone()).collect();
                for (t, y) in terms.iter().zip(&sh.evars) {
                    let want = FinType::arrows(&tys, FinType::seq(y.ty.clone()));
                    let got = typecheck(t, &TypeEnv::new())
                        .map_err(|e| ExtractError::TypeMismatch(e.to_string()))?;
                    if got != want {
                        return Err(ExtractError::TypeMismatch(format!(
                            "realizer for {y} has type {got}, expected {want}"
                        )));
                    }
                }
                let bodies = terms.iter().map(|t| instantiate(t, &sh.inputs)).collect();
                self.events.push(Event::Realize {
                    terms: terms.clone(),
                });
                self.realizer = Some(Realizer {
                    inputs: sh.inputs,
                    slots: sh.evars,
                    bodies,
                });
            }
            ScriptStep::Select { evar, test, k } => {
                let r = self
                    .realizer
                    .as_mut()
                    .ok_or_else(|| mismatch(index, "select before realize"))?;
                let i = r
                    .slots
                    .iter()
                    .position(|v| v.name.to_string() == *evar)
                    .ok_or_else(|| mismatch(index, format!("no witness named {evar}")))?;
                let test = term_over(test, &r.inputs)?;
                let k = term_over(k, &r.inputs)?;
                let elem = r.slots[i].ty.clone();
                let tt =
                    infer_open(&test).map_err(|e| ExtractError::TypeMismatch(e.to_string()))?;
                if tt != FinType::arrow(elem.clone(), FinType::real()) {
                    return Err(ExtractError::TypeMismatch(format!(
                        "comparison function has type {tt}"
                    )));
                }
                if infer_open(&k).ok() != Some(FinType::nat()) {
                    return Err(ExtractError::TypeMismatch(
                        "precision must be a number".into(),
                    ));
                }
                r.bodies[i] = selection(&elem, &test, &k, r.bodies[i].clone());
                self.events.push(Event::Select {
                    evar: evar.clone(),
                    body: r.bodies[i].clone(),
                });
            }
        }
        Ok(())
    }
}

/// Run a script to its final normal form and package the witness.
pub fn run_pipeline(script: &PipelineScript) -> Result<ExtractionResult, ExtractError> {
    let mut monotone = script.monotone.clone();
    collect_monotone(&script.formula, &mut monotone, &mut BTreeSet::new());
    let mut run = Run {
        script,
        cur: script.formula.clone(),
        trace: Trace::default(),
        events: Vec::new(),
        realizer: None,
        monotone,
    };
    for (i, step) in script.steps.iter().enumerate() {
        run.step(i, step)?;
    }
    let nf = recognize(&run.cur).map_err(|e| {
        mismatch(
            script.steps.len(),
            format!("final formula is not a normal form: {e}"),
        )
    })?;
    replay(&run.trace)?;
    if let Some(target) = &script.target {
        let want =
            recognize(target).map_err(|e| mismatch(script.steps.len(), format!("target: {e}")))?;
        if !nf.alpha_eq_unordered(&want) {
            return Err(mismatch(
                script.steps.len(),
                format!("result {nf} differs from the target {want}"),
            ));
        }
    }
    let (slots, bodies) = match run.realizer {
        Some(r) => {
            if r.inputs != nf.uvars || r.slots != nf.evars {
                return Err(mismatch(
                    script.steps.len(),
                    "realizer does not match the final normal form",
                ));
            }
            (r.slots, r.bodies)
        }
        None if nf.evars.is_empty() => (vec![], vec![]),
        None => {
            return Err(ExtractError::TypeMismatch(format!(
                "no realizer for the witnesses {}",
                nf.evars
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )))
        }
    };
    let tys: Vec<FinType> = nf.uvars.iter().map(|v| v.ty.clone()).collect();
    let mut witness = Vec::new();
    for (y, body) in slots.iter().zip(bodies) {
        let t = Term::lams(&nf.uvars, body);
        if let Some((name, _)) = t.free_vars().into_iter().next() {
            return Err(ExtractError::NotClosed(name.to_string()));
        }
        let want = FinType::arrows(&tys, FinType::seq(y.ty.clone()));
        let got = typecheck(&t, &TypeEnv::new())
            .map_err(|e| ExtractError::TypeMismatch(e.to_string()))?;
        if got != want {
            return Err(ExtractError::TypeMismatch(format!(
                "witness for {y} has type {got}, expected {want}"
            )));
        }
        witness.push(t);
    }
    let mut inner = nf.matrix.clone();
    for (y, t) in slots.iter().zip(&witness).rev() {
        inner = Formula::exists_in(
            y.clone(),
            Term::apps(t.clone(), nf.uvars.iter().map(Var::term)),
            inner,
        );
    }
    let contract = Formula::quant_block(Quant::All, &nf.uvars, inner);
    Ok(ExtractionResult {
        name: script.name.clone(),
        inputs: nf.uvars.clone(),
        slots,
        witness,
        matrix: nf.matrix.clone(),
        normal_form: nf,
        contract,
        events: run.events,
        trace: run.trace,
        domain: script.domain.clone(),
        reverse: script.reverse.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::parse_script;

    const CONT: &str = "(pipeline c (inputs (f (-> R R))) (formula (def ns-continuity f)) \
        (steps (normalize (before idealize)) (realize (lam (x R) (lam (k N) (seq N k (app (prim mul) 2 k))))) (normalize)))";

    #[test]
    fn continuity_realizer_collapses() {
        let r = run_pipeline(&parse_script(CONT).unwrap()).unwrap();
        assert_eq!(r.witness.len(), 1);
        assert_eq!(r.inputs.len(), 2);
        assert!(r.witness[0].is_closed());
        assert!(r.events.iter().any(|e| matches!(e, Event::Realize { .. })));
        assert!(r.contract.free_vars().keys().all(|n| n.to_string() == "f"));
    }

    #[test]
    fn missing_realizer() {
        let s = parse_script("(pipeline c (inputs (f (-> R R))) (formula (def ns-continuity f)))")
            .unwrap();
        assert!(matches!(
            run_pipeline(&s),
            Err(ExtractError::TypeMismatch(_))
        ));
    }

    #[test]
    fn ill_typed_realizer() {
        let s = parse_script(
            "(pipeline c (inputs (f (-> R R))) (formula (def ns-continuity f)) \
             (steps (normalize (before idealize)) (realize (lam (k N) (seq N k)))))",
        )
        .unwrap();
        assert!(matches!(
            run_pipeline(&s),
            Err(ExtractError::TypeMismatch(_))
        ));
    }

    #[test]
    fn undeclared_collapse() {
        let s = parse_script(
            "(pipeline c (formula (forall-st ((k N)) (forall ((y N)) (exists-st ((M N)) (=0 (app (prim monus) y M) 0))))) \
             (steps (rule idealize) (rule monotone-collapse)))",
        )
        .unwrap();
        assert!(matches!(
            run_pipeline(&s),
            Err(ExtractError::Normalize(NfError::MonotonicityUndeclared(_)))
        ));
    }

    #[test]
    fn target_mismatch() {
        let s = parse_script(
            "(pipeline c (formula (forall-st ((x N)) (exists-st ((y N)) (=0 x y)))) \
             (steps (realize (lam (x N) (seq N x)))) (target (forall-st ((x N)) (=0 x x))))",
        )
        .unwrap();
        assert!(matches!(
            run_pipeline(&s),
            Err(ExtractError::ReplayFailure { .. })
        ));
    }

    #[test]
    fn trivial_pipeline() {
        let s = parse_script(
            "(pipeline c (formula (forall-st ((x N)) (exists-st ((y N)) (=0 x y)))) \
             (steps (realize (lam (x N) (seq N x)))) (target (forall-st ((u N)) (exists-st ((v N)) (=0 u v)))))",
        )
        .unwrap();
        let r = run_pipeline(&s).unwrap();
        assert_eq!(r.witness[0].to_string(), "(lam (x N) (seq N x))");
    }
}
