//! Node-level rewrite rules. Each rule acts on the subformula at a path and
//! is a pure function of the whole formula, so traces replay exactly.

use std::collections::BTreeSet;

use super::{recognize, NfError, NormalForm};
use crate::formula::{definition_normal_form, expand_definition, Bounded, Formula, Quant};
use crate::kernel::{infer_open, FinType, Name, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImplMode {
    /// Antecedent inputs become existential witnesses.
    Strong,
    /// Antecedent inputs are universally quantified inside the matrix.
    Weak,
}

impl ImplMode {
    pub fn name(self) -> &'static str {
        match self {
            ImplMode::Strong => "strong",
            ImplMode::Weak => "weak",
        }
    }

    pub fn parse(s: &str) -> Option<ImplMode> {
        match s {
            "strong" => Some(ImplMode::Strong),
            "weak" => Some(ImplMode::Weak),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Expand,
    DefNormalForm,
    StUnfold,
    /// Move the standard quantifier heading child `side` above the connective.
    Pull {
        side: usize,
    },
    /// Swap an internal quantifier with the standard one of the same polarity below it.
    Commute,
    Implies {
        mode: ImplMode,
        names: Vec<String>,
    },
    Idealize,
    /// Replace a sequence witness by a single number (its maximum).
    Collapse,
    Infinitesimal,
    Hac {
        names: Vec<String>,
    },
    Weaken {
        vars: Vec<String>,
    },
    NoOp {
        note: String,
    },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Expand => "expand",
            Rule::DefNormalForm => "definition-normal-form",
            Rule::StUnfold => "st-unfold",
            Rule::Pull { .. } => "pull",
            Rule::Commute => "commute",
            Rule::Implies { .. } => "nf-implies",
            Rule::Idealize => "idealize",
            Rule::Collapse => "monotone-collapse",
            Rule::Infinitesimal => "prefix-infinitesimal",
            Rule::Hac { .. } => "hac",
            Rule::Weaken { .. } => "weaken",
            Rule::NoOp { .. } => "no-op",
        }
    }

    pub fn args(&self) -> Vec<String> {
        match self {
            Rule::Pull { side } => vec![if *side == 0 {
                "left".into()
            } else {
                "right".into()
            }],
            Rule::Implies { mode, names } => {
                let mut v = vec![mode.name().to_string()];
                v.extend(names.iter().cloned());
                v
            }
            Rule::Hac { names } => names.clone(),
            Rule::Weaken { vars } => vars.clone(),
            Rule::NoOp { note } => vec![note.clone()],
            _ => vec![],
        }
    }

    pub fn citation(&self) -> &'static str {
        match self {
            Rule::Expand => "definition unfolding",
            Rule::DefNormalForm => "registered normal form of a definition",
            Rule::StUnfold => "standardness of t as a standard object equal to t",
            Rule::Pull { .. } => "prenexing a standard quantifier past a connective",
            Rule::Commute => "standard quantifier moved past an internal one of the same polarity",
            Rule::Implies { .. } => "normal forms are closed under implication",
            Rule::Idealize => "idealisation in sequence form",
            Rule::Collapse => {
                "upward-monotone witness: a candidate sequence is replaced by its maximum"
            }
            Rule::Infinitesimal => "infinitesimal quantifier unfolded to its standard hypothesis",
            Rule::Hac { .. } => "herbrandised axiom of choice",
            Rule::Weaken { .. } => "antecedent instance weakened to a universal",
            Rule::NoOp { .. } => "degenerate input",
        }
    }

    /// Effect of the step on witnesses, as a term with a hole `[]`.
    pub fn transformer(&self, before: &Formula) -> String {
        match self {
            Rule::Implies {
                mode: ImplMode::Strong,
                ..
            } => "(pair (w []) (x []))".into(),
            Rule::Implies {
                mode: ImplMode::Weak,
                ..
            } => "(w [])".into(),
            Rule::Idealize => "(seq [])".into(),
            Rule::Collapse => "(app mk-max-seq [])".into(),
            Rule::Infinitesimal => match before {
                Formula::Quant(Quant::AllInf, ..) if is_vacuous_inf(before) => "1".into(),
                _ => "[]".into(),
            },
            Rule::Hac { .. } => "(lam x (seq []))".into(),
            Rule::Weaken { .. } => "(drop [])".into(),
            _ => "[]".into(),
        }
    }

    pub fn apply(&self, whole: &Formula, path: &[usize]) -> Result<Formula, NfError> {
        let g = whole
            .at(path)
            .ok_or_else(|| NfError::Shape(format!("no subformula at {path:?}")))?;
        let mut avoid = whole.names();
        let g2 = self.apply_node(g, &mut avoid)?;
        Ok(whole.replaced(path, g2).expect("path checked"))
    }

    pub fn apply_node(&self, g: &Formula, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
        match self {
            Rule::Expand | Rule::DefNormalForm => match g {
                Formula::Def(name, args) => Ok(if *self == Rule::Expand {
                    expand_definition(name, args)?
                } else {
                    definition_normal_form(name, args)?
                }),
                _ => Err(shape("expected a definition")),
            },
            Rule::StUnfold => match g {
                Formula::St(t) => {
                    let ty = infer_open(t).map_err(|e| NfError::Shape(e.to_string()))?;
                    let y = fresh_var("y", ty, avoid);
                    Ok(Formula::exists_st(
                        y.clone(),
                        Formula::eq(y.term(), t.clone()),
                    ))
                }
                _ => Err(shape("expected (st t)")),
            },
            Rule::Pull { side } => pull(g, *side, avoid),
            Rule::Commute => commute(g, avoid),
            Rule::Implies { mode, names } => match g {
                Formula::Implies(a, b) => {
                    let a = recognize(a).map_err(NfError::Shape)?;
                    let b = recognize(b).map_err(NfError::Shape)?;
                    Ok(implies_nf(&a, &b, *mode, names, avoid).to_formula())
                }
                _ => Err(shape("expected an implication")),
            },
            Rule::Idealize => idealize_node(g, avoid),
            Rule::Collapse => collapse_node(g, avoid),
            Rule::Infinitesimal => infinitesimal_node(g, avoid),
            Rule::Hac { names } => {
                let nf = recognize(g).map_err(NfError::Shape)?;
                Ok(hac_nf(&nf, names, avoid))
            }
            Rule::Weaken { vars } => {
                let nf = recognize(g).map_err(NfError::Shape)?;
                Ok(weaken(&nf, vars)?.to_formula())
            }
            Rule::NoOp { .. } => Ok(g.clone()),
        }
    }
}

fn shape(msg: &str) -> NfError {
    NfError::Shape(msg.to_string())
}

pub(crate) fn fresh_var(base: &str, ty: FinType, avoid: &mut BTreeSet<Name>) -> Var {
    let n = Name::parse(base).fresh(avoid);
    avoid.insert(n.clone());
    Var { name: n, ty }
}

fn rename_bound(x: &Var, body: &Formula, avoid: &mut BTreeSet<Name>) -> (Var, Formula) {
    let x2 = fresh_var(&x.name.base, x.ty.clone(), avoid);
    let b2 = body.rename_free(x, &x2);
    (x2, b2)
}

fn pull(g: &Formula, side: usize, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
    let std_head = |f: &Formula| match f {
        Formula::Quant(q, x, body) if q.is_standard() => Some((*q, x.clone(), (**body).clone())),
        _ => None,
    };
    match g {
        Formula::Not(a) if side == 0 => {
            let (q, x, body) =
                std_head(a).ok_or_else(|| shape("negated formula has no standard quantifier"))?;
            Ok(Formula::quant(q.dual(), x, Formula::not(body)))
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            let (head, other) = if side == 0 { (l, r) } else { (r, l) };
            let (q, mut x, mut body) =
                std_head(head).ok_or_else(|| shape("no standard quantifier to pull"))?;
            if other.occurs_free(&x.name) {
                (x, body) = rename_bound(&x, &body, avoid);
            }
            let q = if side == 0 && matches!(g, Formula::Implies(..)) {
                q.dual()
            } else {
                q
            };
            let inner = match (g, side) {
                (Formula::And(..), 0) => Formula::and(body, (**r).clone()),
                (Formula::And(..), _) => Formula::and((**l).clone(), body),
                (Formula::Or(..), 0) => Formula::or(body, (**r).clone()),
                (Formula::Or(..), _) => Formula::or((**l).clone(), body),
                (_, 0) => Formula::implies(body, (**r).clone()),
                _ => Formula::implies((**l).clone(), body),
            };
            Ok(Formula::quant(q, x, inner))
        }
        _ => Err(shape("pull needs a connective")),
    }
}

fn commute(g: &Formula, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
    match g {
        Formula::Quant(outer, z, body) => match &**body {
            Formula::Quant(inner, x, r)
                if (*outer == Quant::All && *inner == Quant::AllSt)
                    || (*outer == Quant::Ex && *inner == Quant::ExSt) =>
            {
                let (x, r) = if x.name == z.name {
                    rename_bound(x, r, avoid)
                } else {
                    (x.clone(), (**r).clone())
                };
                Ok(Formula::quant(
                    *inner,
                    x,
                    Formula::quant(*outer, z.clone(), r),
                ))
            }
            _ => Err(shape(
                "commute needs an internal quantifier over a standard one of the same polarity",
            )),
        },
        _ => Err(shape("commute needs a quantifier")),
    }
}

/// Strip a chain of quantifiers of kind `q`.
pub(crate) fn chain(f: &Formula, q: Quant) -> (Vec<Var>, &Formula) {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Quant(q2, x, body) = cur {
        if *q2 != q {
            break;
        }
        vars.push(x.clone());
        cur = body;
    }
    (vars, cur)
}

pub(crate) fn implies_nf(
    a: &NormalForm,
    b: &NormalForm,
    mode: ImplMode,
    names: &[String],
    avoid: &mut BTreeSet<Name>,
) -> NormalForm {
    let a_free = a.to_formula().free_vars();
    let b_free = b.to_formula().free_vars();
    avoid.extend(a.to_formula().names());
    avoid.extend(b.to_formula().names());
    // B's block variables must not capture A's parameters.
    let mut b = b.clone();
    for i in 0..b.uvars.len() + b.evars.len() {
        let v = if i < b.uvars.len() {
            b.uvars[i].clone()
        } else {
            b.evars[i - b.uvars.len()].clone()
        };
        if a_free.contains_key(&v.name) {
            let v2 = fresh_var(&v.name.base, v.ty.clone(), avoid);
            b.matrix = b.matrix.rename_free(&v, &v2);
            if i < b.uvars.len() {
                b.uvars[i] = v2;
            } else {
                let k = i - b.uvars.len();
                b.evars[k] = v2;
            }
        }
    }
    let b_blocks: BTreeSet<Name> = b
        .uvars
        .iter()
        .chain(&b.evars)
        .map(|v| v.name.clone())
        .collect();
    let xs: Vec<Var> = a
        .uvars
        .iter()
        .map(|x| {
            if mode == ImplMode::Strong
                && (b_free.contains_key(&x.name) || b_blocks.contains(&x.name))
            {
                fresh_var(&x.name.base, x.ty.clone(), avoid)
            } else {
                x.clone()
            }
        })
        .collect();
    let x_types: Vec<FinType> = xs.iter().map(|x| x.ty.clone()).collect();
    let zetas: Vec<Var> = a
        .evars
        .iter()
        .enumerate()
        .map(|(j, y)| {
            let base = names.get(j).map(String::as_str).unwrap_or("zeta");
            fresh_var(base, FinType::arrows(&x_types, y.ty.clone()), avoid)
        })
        .collect();
    let mut sigma = crate::kernel::term::Subst::new();
    for (x, x2) in a.uvars.iter().zip(&xs) {
        sigma.insert(x.name.clone(), x2.term());
    }
    for (y, z) in a.evars.iter().zip(&zetas) {
        sigma.insert(
            y.name.clone(),
            Term::apps(z.term(), xs.iter().map(Var::term)),
        );
    }
    let phi = a.matrix.subst(&sigma);
    let mut uvars = zetas;
    uvars.extend(b.uvars.iter().cloned());
    let mut evars = b.evars.clone();
    let matrix = match mode {
        ImplMode::Strong => {
            evars.extend(xs);
            Formula::implies(phi, b.matrix.clone())
        }
        ImplMode::Weak => {
            Formula::implies(Formula::quant_block(Quant::All, &xs, phi), b.matrix.clone())
        }
    };
    NormalForm {
        uvars,
        evars,
        matrix,
    }
}

/// Implication of normal forms; `ζ` variables are named `zeta`, `zeta'`, ...
pub fn nf_implies(a: &NormalForm, b: &NormalForm, mode: ImplMode) -> NormalForm {
    implies_nf(a, b, mode, &[], &mut BTreeSet::new())
}

fn idealize_node(g: &Formula, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
    let (ys, body) = chain(g, Quant::All);
    let (xs, phi) = chain(body, Quant::ExSt);
    if ys.is_empty() || xs.is_empty() || !phi.is_internal() {
        return Err(shape("no internal universal over a standard existential"));
    }
    let ws: Vec<Var> = xs
        .iter()
        .map(|x| fresh_var("w", FinType::seq(x.ty.clone()), avoid))
        .collect();
    let mut inner = phi.clone();
    for (x, w) in xs.iter().zip(&ws).rev() {
        inner = Formula::exists_in(x.clone(), w.term(), inner);
    }
    Ok(Formula::quant_block(
        Quant::ExSt,
        &ws,
        Formula::quant_block(Quant::All, &ys, inner),
    ))
}

/// `(∃^st w ...)(∀y)(∃x∈w)φ → (∃^st x ...)(∀y)(∃x∈w)φ` when the
/// formula has an outer `∀^st` prefix and an internal `∀`; otherwise the input.
pub fn idealize(f: &Formula) -> Result<Formula, NfError> {
    let (us, rest) = chain(f, Quant::AllSt);
    if !matches!(rest, Formula::Quant(Quant::All, ..)) {
        return Ok(f.clone());
    }
    let path = vec![0; us.len()];
    Rule::Idealize.apply(f, &path)
}

/// The element variable of a sequence witness `(∃^st w)...(∃x∈w)...`, and the
/// path (relative to the body of `w`) of the bounded quantifier.
pub(crate) fn seq_element(g: &Formula) -> Option<(Var, Var, Vec<usize>)> {
    let Formula::Quant(Quant::ExSt, w, body) = g else {
        return None;
    };
    let mut found = None;
    let mut count = 0;
    find_in(body, w, &mut Vec::new(), &mut found, &mut count);
    match (found, count) {
        (Some((x, p)), 1) => Some((w.clone(), x, p)),
        _ => None,
    }
}

fn find_in(
    f: &Formula,
    w: &Var,
    path: &mut Vec<usize>,
    found: &mut Option<(Var, Vec<usize>)>,
    count: &mut usize,
) {
    if let Formula::Quant(_, x, _) | Formula::In(_, x, _, _) = f {
        if x.name == w.name {
            return;
        }
    }
    if let Formula::In(Bounded::Ex, x, Term::Var(s), _) = f {
        if s.name == w.name {
            *count += 1;
            *found = Some((x.clone(), path.clone()));
        }
    }
    for (i, c) in f.children().into_iter().enumerate() {
        path.push(i);
        find_in(c, w, path, found, count);
        path.pop();
    }
}

fn collapse_node(g: &Formula, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
    let (w, x, p) = seq_element(g)
        .ok_or_else(|| shape("no sequence witness used by exactly one bounded existential"))?;
    if !x.ty.is_base() {
        return Err(shape("collapse needs a number witness"));
    }
    let Formula::Quant(_, _, body) = g else {
        unreachable!()
    };
    let Some(Formula::In(_, _, _, phi)) = body.at(&p) else {
        unreachable!()
    };
    let tmp = fresh_var(&x.name.base, x.ty.clone(), avoid);
    let replaced = body.replaced(&p, phi.rename_free(&x, &tmp)).unwrap();
    if replaced.occurs_free(&w.name) {
        return Err(shape(
            "sequence witness used outside its bounded quantifier",
        ));
    }
    let others = replaced.names();
    let target = if others.contains(&x.name) {
        fresh_var(&x.name.base, x.ty.clone(), avoid)
    } else {
        x.clone()
    };
    Ok(Formula::exists_st(
        target.clone(),
        replaced.rename_free(&tmp, &target),
    ))
}

/// Collapse the sequence witness whose name, or whose element variable's
/// name, is `var`; the element's base name must be declared monotone.
pub fn monotone_collapse(
    f: &Formula,
    var: &str,
    declared: &BTreeSet<String>,
) -> Result<Formula, NfError> {
    let (us, _) = chain(f, Quant::AllSt);
    let mut path = vec![0; us.len()];
    loop {
        let g = f
            .at(&path)
            .ok_or_else(|| shape("no matching sequence witness"))?;
        if !matches!(g, Formula::Quant(Quant::ExSt, ..)) {
            return Err(shape("no matching sequence witness"));
        }
        if let Some((w, x, _)) = seq_element(g) {
            if w.name.to_string() == var || x.name.to_string() == var {
                if !declared.contains(&*x.name.base) && !declared.contains(&*w.name.base) {
                    return Err(NfError::MonotonicityUndeclared(x.name.to_string()));
                }
                return Rule::Collapse.apply(f, &path);
            }
        }
        path.push(0);
    }
}

fn is_vacuous_inf(g: &Formula) -> bool {
    let (es, body) = chain(g, Quant::AllInf);
    es.iter().all(|e| !body.occurs_free(&e.name))
}

fn infinitesimal_node(g: &Formula, avoid: &mut BTreeSet<Name>) -> Result<Formula, NfError> {
    let (es, body) = chain(g, Quant::AllInf);
    if es.is_empty() {
        return Err(shape("expected an infinitesimal quantifier"));
    }
    if is_vacuous_inf(g) {
        return Ok(body.clone());
    }
    let n = fresh_var("N", FinType::nat(), avoid);
    let mut hyp: Option<Formula> = None;
    for e in es.iter().rev() {
        let s = Formula::pred("small", vec![e.term(), n.term()]);
        hyp = Some(match hyp {
            None => s,
            Some(h) => Formula::and(s, h),
        });
    }
    let unfolded = Formula::implies(Formula::forall_st(n, hyp.unwrap()), body.clone());
    Ok(Formula::quant_block(Quant::All, &es, unfolded))
}

/// `(∀ε≈0)NF` to a normal form; with `monotone`, every number witness of
/// `NF` is collapsed to a single value.
pub fn prefix_infinitesimal(
    f: &Formula,
    monotone: bool,
) -> Result<(NormalForm, super::Trace), NfError> {
    let (es, body) = chain(f, Quant::AllInf);
    if es.is_empty() {
        return Err(shape("expected an infinitesimal quantifier"));
    }
    let nf = recognize(body).map_err(NfError::Shape)?;
    let mut opts = super::NormalizeOptions::default();
    if monotone {
        for y in &nf.evars {
            if y.ty.is_base() {
                opts.monotone.insert(y.name.base.to_string());
            }
        }
    }
    super::to_normal_form(f, &opts)
}

fn hac_nf(nf: &NormalForm, names: &[String], avoid: &mut BTreeSet<Name>) -> Formula {
    if nf.uvars.is_empty() {
        return nf.to_formula();
    }
    avoid.extend(nf.to_formula().names());
    let x_types: Vec<FinType> = nf.uvars.iter().map(|x| x.ty.clone()).collect();
    let gs: Vec<Var> = nf
        .evars
        .iter()
        .enumerate()
        .map(|(j, y)| {
            let base = names.get(j).map(String::as_str).unwrap_or("G");
            fresh_var(
                base,
                FinType::arrows(&x_types, FinType::seq(y.ty.clone())),
                avoid,
            )
        })
        .collect();
    let mut inner = nf.matrix.clone();
    for (y, g) in nf.evars.iter().zip(&gs).rev() {
        inner = Formula::exists_in(
            y.clone(),
            Term::apps(g.term(), nf.uvars.iter().map(Var::term)),
            inner,
        );
    }
    Formula::quant_block(
        Quant::ExSt,
        &gs,
        Formula::quant_block(Quant::AllSt, &nf.uvars, inner),
    )
}

/// `(∀^st x)(∃^st y)φ → (∃^st G)(∀^st x)(∃y∈G(x))φ`.
pub fn apply_hac(f: &Formula) -> Result<Formula, NfError> {
    Rule::Hac { names: vec![] }.apply(f, &[])
}

/// Drop existential slots `vars` whose only use is in the antecedent of an
/// implication matrix, quantifying them universally there.
pub fn weaken(nf: &NormalForm, vars: &[String]) -> Result<NormalForm, NfError> {
    let Formula::Implies(a, b) = &nf.matrix else {
        return Err(shape("weaken needs an implication matrix"));
    };
    let mut dropped = Vec::new();
    let mut evars = Vec::new();
    for y in &nf.evars {
        if vars.iter().any(|v| *v == y.name.to_string()) {
            if b.occurs_free(&y.name) {
                return Err(NfError::Shape(format!(
                    "{} occurs in the consequent",
                    y.name
                )));
            }
            dropped.push(y.clone());
        } else {
            evars.push(y.clone());
        }
    }
    if dropped.len() != vars.len() {
        return Err(shape(
            "weaken names a variable that is not an existential witness",
        ));
    }
    let matrix = Formula::implies(
        Formula::quant_block(Quant::All, &dropped, (**a).clone()),
        (**b).clone(),
    );
    Ok(NormalForm {
        uvars: nf.uvars.clone(),
        evars,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn nf(s: &str) -> NormalForm {
        recognize(&p(s)).unwrap()
    }

    #[test]
    fn self_implication_weak() {
        let a = nf("(forall-st ((x N)) (exists-st ((y N)) (atom P x y)))");
        let got = nf_implies(&a, &a, ImplMode::Weak);
        let want = nf("(forall-st ((zeta (-> N N)) (x N)) (exists-st ((y N)) \
             (implies (forall ((x' N)) (atom P x' (app zeta x'))) (atom P x y))))");
        assert!(got.alpha_eq(&want), "{got}");
    }

    #[test]
    fn strong_mode_renames_inputs() {
        let a = nf("(forall-st ((x N)) (exists-st ((y N)) (atom P x y)))");
        let got = nf_implies(&a, &a, ImplMode::Strong);
        let want = nf(
            "(forall-st ((zeta (-> N N)) (x N)) (exists-st ((y N) (x' N)) \
             (implies (atom P x' (app zeta x')) (atom P x y))))",
        );
        assert!(got.alpha_eq(&want), "{got}");
    }

    #[test]
    fn idealize_and_collapse() {
        let f = p("(forall-st ((k N)) (forall ((y N)) (exists-st ((N N)) (implies (<=0 N y) (atom P k y)))))");
        let g = idealize(&f).unwrap();
        assert_eq!(
            g.to_string(),
            "(forall-st ((k N)) (exists-st ((w (* N))) (forall ((y N)) (exists-in (N N) w (implies (<=0 N y) (atom P k y))))))"
        );
        let declared: BTreeSet<String> = ["N".to_string()].into();
        let h = monotone_collapse(&g, "w", &declared).unwrap();
        assert_eq!(
            h.to_string(),
            "(forall-st ((k N)) (exists-st ((N N)) (forall ((y N)) (implies (<=0 N y) (atom P k y)))))"
        );
        assert_eq!(
            monotone_collapse(&g, "N", &BTreeSet::new()),
            Err(NfError::MonotonicityUndeclared("N".into()))
        );
        // nothing to idealize
        let q = p("(forall-st ((k N)) (exists-st ((N N)) (=0 k N)))");
        assert_eq!(idealize(&q).unwrap(), q);
    }

    #[test]
    fn hac_shape() {
        let f = p("(forall-st ((a R)) (exists-st ((n N)) (atom prefix-out T a n)))");
        let g = apply_hac(&f).unwrap();
        assert_eq!(
            g.to_string(),
            "(exists-st ((G (-> (-> N N) (* N)))) (forall-st ((a (-> N N))) (exists-in (n N) (app G a) (atom prefix-out T a n))))"
        );
        let e = p("(exists-st ((n N)) (=0 n 0))");
        assert_eq!(apply_hac(&e).unwrap(), e);
    }

    #[test]
    fn weaken_strong_to_weak() {
        let a = nf("(forall-st ((x N)) (exists-st ((y N)) (atom P x y)))");
        let b = nf("(forall-st ((z N)) (exists-st ((w N)) (atom Q z w)))");
        let strong = nf_implies(&a, &b, ImplMode::Strong);
        let weak = nf_implies(&a, &b, ImplMode::Weak);
        let w = weaken(&strong, &["x".to_string()]).unwrap();
        assert!(w.alpha_eq(&weak));
        assert!(weaken(&strong, &["w".to_string()]).is_err());
    }

    #[test]
    fn pull_renames_on_clash() {
        let f = p("(and (forall-st ((x N)) (=0 x 0)) (=0 x 1))");
        let g = Rule::Pull { side: 0 }.apply(&f, &[]).unwrap();
        assert_eq!(
            g.to_string(),
            "(forall-st ((x' N)) (and (=0 x' 0) (=0 x 1)))"
        );
        let h = p("(implies (exists-st ((y N)) (=0 y 0)) (=0 0 0))");
        let k = Rule::Pull { side: 0 }.apply(&h, &[]).unwrap();
        assert_eq!(
            k.to_string(),
            "(forall-st ((y N)) (implies (=0 y 0) (=0 0 0)))"
        );
    }

    #[test]
    fn vacuous_infinitesimal() {
        let f = p("(forall-inf (e) (forall-st ((x N)) (exists-st ((y N)) (=0 x y))))");
        let g = Rule::Infinitesimal.apply(&f, &[]).unwrap();
        assert_eq!(
            g.to_string(),
            "(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))"
        );
        assert_eq!(Rule::Infinitesimal.transformer(&f), "1");
    }
}
