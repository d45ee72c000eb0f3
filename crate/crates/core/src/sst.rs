//! The S_st interpretation: a clause-by-clause map from external formulas to
//! normal forms. Normal forms are fixed points.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{expand_definition, Formula, Quant};
use crate::kernel::{infer_open, FinType, Name, Term, Var};
use crate::normal_form::{recognize, NormalForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    /// Internal formula, unchanged.
    I,
    /// Standardness predicate.
    II,
    /// Negation.
    III,
    /// Disjunction.
    IV,
    /// Internal universal quantifier.
    V,
    /// A connective or quantifier rewritten by its classical abbreviation.
    Abbreviation,
    Definition,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::I => "i",
            Clause::II => "ii",
            Clause::III => "iii",
            Clause::IV => "iv",
            Clause::V => "v",
            Clause::Abbreviation => "abbreviation",
            Clause::Definition => "definition",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ClauseStep {
    pub clause: Clause,
    pub input: Formula,
    /// The clause output before any simplification.
    pub raw: Formula,
    /// After the single-witness simplifications, in the order applied.
    pub simplified: Vec<(&'static str, Formula)>,
    pub output: Formula,
}

#[derive(Clone, Debug)]
pub struct SstResult {
    pub translated: NormalForm,
    pub trace: Vec<ClauseStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SstError {
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
}

struct Translator {
    avoid: BTreeSet<Name>,
    trace: Vec<ClauseStep>,
    /// Negated internal subformulas of the input, hidden behind atoms so that
    /// clause (iii) only ever cancels negations it introduced itself.
    sealed: Vec<(Vec<Var>, Formula)>,
}

const SEAL: &str = "#sealed";

/// Name for a Herbrand functional or candidate sequence built from a witness variable.
fn upper(base: &str) -> String {
    let u = base.to_uppercase();
    if u == base {
        format!("{base}s")
    } else {
        u
    }
}

impl Translator {
    fn seal(&mut self, f: &Formula) -> Formula {
        if f.is_internal() {
            if !matches!(f, Formula::Not(_)) {
                return f.clone();
            }
            let fv: Vec<Var> = f
                .free_vars()
                .into_iter()
                .map(|(name, ty)| Var { name, ty })
                .collect();
            let mut args = vec![Term::num(self.sealed.len() as u64)];
            args.extend(fv.iter().map(Var::term));
            self.sealed.push((fv, f.clone()));
            return Formula::Pred(SEAL.into(), args);
        }
        match f {
            Formula::Not(a) => Formula::not(self.seal(a)),
            Formula::And(a, b) => Formula::and(self.seal(a), self.seal(b)),
            Formula::Or(a, b) => Formula::or(self.seal(a), self.seal(b)),
            Formula::Implies(a, b) => Formula::implies(self.seal(a), self.seal(b)),
            Formula::Quant(q, x, body) => Formula::quant(*q, x.clone(), self.seal(body)),
            Formula::In(bq, x, t, body) => {
                Formula::In(*bq, x.clone(), t.clone(), Box::new(self.seal(body)))
            }
            _ => f.clone(),
        }
    }

    fn unseal(&self, f: &Formula) -> Formula {
        match f {
            Formula::Pred(p, args) if &**p == SEAL => {
                let Some(i) = args.first().and_then(Term::as_numeral) else {
                    return f.clone();
                };
                let (fv, body) = &self.sealed[i as usize];
                let sigma = fv
                    .iter()
                    .map(|v| v.name.clone())
                    .zip(args[1..].iter().cloned())
                    .collect();
                body.subst(&sigma)
            }
            Formula::Not(a) => Formula::not(self.unseal(a)),
            Formula::And(a, b) => Formula::and(self.unseal(a), self.unseal(b)),
            Formula::Or(a, b) => Formula::or(self.unseal(a), self.unseal(b)),
            Formula::Implies(a, b) => Formula::implies(self.unseal(a), self.unseal(b)),
            Formula::Quant(q, x, body) => Formula::quant(*q, x.clone(), self.unseal(body)),
            Formula::In(bq, x, t, body) => {
                Formula::In(*bq, x.clone(), t.clone(), Box::new(self.unseal(body)))
            }
            _ => f.clone(),
        }
    }

    fn finish(self, nf: NormalForm) -> SstResult {
        let translated =
            NormalForm::new(nf.uvars.clone(), nf.evars.clone(), self.unseal(&nf.matrix));
        let trace = self
            .trace
            .iter()
            .map(|s| ClauseStep {
                clause: s.clause,
                input: self.unseal(&s.input),
                raw: self.unseal(&s.raw),
                simplified: s
                    .simplified
                    .iter()
                    .map(|(r, f)| (*r, self.unseal(f)))
                    .collect(),
                output: self.unseal(&s.output),
            })
            .collect();
        SstResult { translated, trace }
    }

    fn fresh(&mut self, base: &str, ty: FinType) -> Var {
        let n = Name::new(base).fresh(&self.avoid);
        self.avoid.insert(n.clone());
        Var { name: n, ty }
    }

    fn record(
        &mut self,
        clause: Clause,
        input: &Formula,
        raw: &NormalForm,
        simplified: Vec<(&'static str, Formula)>,
        out: &NormalForm,
    ) {
        self.trace.push(ClauseStep {
            clause,
            input: input.clone(),
            raw: raw.to_formula(),
            simplified,
            output: out.to_formula(),
        });
    }

    fn abbreviate(&mut self, input: &Formula, expanded: Formula) -> Result<NormalForm, SstError> {
        let nf = self.tr(&expanded)?;
        self.trace.push(ClauseStep {
            clause: Clause::Abbreviation,
            input: input.clone(),
            raw: expanded.clone(),
            simplified: vec![],
            output: nf.to_formula(),
        });
        Ok(nf)
    }

    fn tr(&mut self, f: &Formula) -> Result<NormalForm, SstError> {
        if f.is_internal() {
            let nf = NormalForm::internal(f.clone());
            self.record(Clause::I, f, &nf, vec![], &nf);
            return Ok(nf);
        }
        match f {
            Formula::St(t) => {
                let ty =
                    infer_open(t).map_err(|e| SstError::UnsupportedConstruct(e.to_string()))?;
                let y = self.fresh("y", ty);
                let nf = NormalForm::new(vec![], vec![y.clone()], Formula::eq(y.term(), t.clone()));
                self.record(Clause::II, f, &nf, vec![], &nf);
                Ok(nf)
            }
            Formula::Not(a) => {
                let a = self.tr(a)?;
                self.negate(f, a)
            }
            Formula::Or(a, b) => {
                let a = self.tr(a)?;
                let b = self.tr(b)?;
                let mut uvars = a.uvars.clone();
                uvars.extend(b.uvars.iter().cloned());
                let mut evars = a.evars.clone();
                evars.extend(b.evars.iter().cloned());
                let nf = NormalForm::new(uvars, evars, Formula::or(a.matrix, b.matrix));
                self.record(Clause::IV, f, &nf, vec![], &nf);
                Ok(nf)
            }
            Formula::Quant(Quant::All, z, body) => {
                let a = self.tr(body)?;
                self.forall(f, z, a)
            }
            Formula::And(a, b) => {
                let e = Formula::not(Formula::or(
                    Formula::not((**a).clone()),
                    Formula::not((**b).clone()),
                ));
                self.abbreviate(f, e)
            }
            Formula::Implies(a, b) => {
                let e = Formula::or(Formula::not((**a).clone()), (**b).clone());
                self.abbreviate(f, e)
            }
            Formula::Quant(Quant::Ex, z, body) => {
                let e = Formula::not(Formula::forall(z.clone(), Formula::not((**body).clone())));
                self.abbreviate(f, e)
            }
            Formula::Quant(Quant::AllSt, x, body) => {
                let e = Formula::forall(
                    x.clone(),
                    Formula::or(Formula::not(Formula::st(x.term())), (**body).clone()),
                );
                self.abbreviate(f, e)
            }
            Formula::Quant(Quant::ExSt, y, body) => {
                let e = Formula::not(Formula::forall(
                    y.clone(),
                    Formula::or(
                        Formula::not(Formula::st(y.term())),
                        Formula::not((**body).clone()),
                    ),
                ));
                self.abbreviate(f, e)
            }
            Formula::Def(name, args) => {
                let e = expand_definition(name, args)
                    .map_err(|e| SstError::UnsupportedConstruct(e.to_string()))?;
                let e = self.seal(&e);
                let nf = self.tr(&e)?;
                self.trace.push(ClauseStep {
                    clause: Clause::Definition,
                    input: f.clone(),
                    raw: e,
                    simplified: vec![],
                    output: nf.to_formula(),
                });
                Ok(nf)
            }
            Formula::Quant(Quant::AllInf, e, body) => {
                let n = self.fresh("n", FinType::nat());
                let hyp =
                    Formula::forall_st(n.clone(), Formula::pred("small", vec![e.term(), n.term()]));
                let unfolded = Formula::forall(e.clone(), Formula::implies(hyp, (**body).clone()));
                self.abbreviate(f, unfolded)
            }
            Formula::In(..) => Err(SstError::UnsupportedConstruct(format!(
                "sequence-bounded quantifier over an external formula: {f}"
            ))),
            _ => Err(SstError::UnsupportedConstruct(f.to_string())),
        }
    }

    /// Clause (iii): `(∀^st Y)(∃^st x)(∀y∈Y[x])¬φ`.
    fn negate(&mut self, input: &Formula, a: NormalForm) -> Result<NormalForm, SstError> {
        let x_types: Vec<FinType> = a.uvars.iter().map(|x| x.ty.clone()).collect();
        let ys: Vec<Var> = a
            .evars
            .iter()
            .map(|y| {
                self.fresh(
                    &upper(&y.name.base),
                    FinType::arrows(&x_types, FinType::seq(y.ty.clone())),
                )
            })
            .collect();
        let neg = |m: &Formula| match m {
            Formula::Not(inner) => (**inner).clone(),
            _ => Formula::not(m.clone()),
        };
        let mut raw_matrix = Formula::not(a.matrix.clone());
        for (y, big) in a.evars.iter().zip(&ys).rev() {
            raw_matrix = Formula::forall_in(
                y.clone(),
                Term::apps(big.term(), a.uvars.iter().map(Var::term)),
                raw_matrix,
            );
        }
        let raw = NormalForm::new(ys.clone(), a.uvars.clone(), raw_matrix);
        let mut simplified = Vec::new();
        let out = if a.uvars.is_empty() {
            // (∀^st W)(∀w∈W)χ with no inputs is (∀^st w)χ
            let s1 = NormalForm::new(a.evars.clone(), vec![], Formula::not(a.matrix.clone()));
            simplified.push(("single-list", s1.to_formula()));
            NormalForm::new(a.evars.clone(), vec![], neg(&a.matrix))
        } else if a.evars.is_empty() {
            NormalForm::new(vec![], a.uvars.clone(), neg(&a.matrix))
        } else {
            let mut m = neg(&a.matrix);
            for (y, big) in a.evars.iter().zip(&ys).rev() {
                m = Formula::forall_in(
                    y.clone(),
                    Term::apps(big.term(), a.uvars.iter().map(Var::term)),
                    m,
                );
            }
            NormalForm::new(ys, a.uvars.clone(), m)
        };
        if matches!(a.matrix, Formula::Not(_)) {
            simplified.push(("double-negation", out.to_formula()));
        }
        self.record(Clause::III, input, &raw, simplified, &out);
        Ok(out)
    }

    /// Clause (v): `(∀^st x)(∃^st y)(∀z)(∃y'∈y)φ`.
    fn forall(&mut self, input: &Formula, z: &Var, a: NormalForm) -> Result<NormalForm, SstError> {
        let seqs: Vec<Var> = a
            .evars
            .iter()
            .map(|y| self.fresh(&upper(&y.name.base), FinType::seq(y.ty.clone())))
            .collect();
        let with_lists = |m: Formula| {
            let mut m = m;
            for (y, s) in a.evars.iter().zip(&seqs).rev() {
                m = Formula::exists_in(y.clone(), s.term(), m);
            }
            m
        };
        let raw = NormalForm::new(
            a.uvars.clone(),
            seqs.clone(),
            Formula::forall(z.clone(), with_lists(a.matrix.clone())),
        );
        let mut simplified = Vec::new();
        let mut out = raw.clone();
        // equality-guarded: (∀z)[¬(w=z) ∨ χ] with standard w is χ[z:=w]
        if let Formula::Or(guard, chi) = &a.matrix {
            if let Formula::Not(eq) = &**guard {
                if let Formula::Eq(Term::Var(w), Term::Var(zz)) = &**eq {
                    let std_w = a
                        .uvars
                        .iter()
                        .position(|u| u.name == w.name)
                        .filter(|_| zz.name == z.name && w.name != z.name);
                    if let Some(i) = std_w {
                        let mut uvars = a.uvars.clone();
                        let mut chi = chi.subst1(&z.name, &w.term());
                        let candidate =
                            NormalForm::new(uvars.clone(), seqs.clone(), with_lists(chi.clone()));
                        // keep the eliminated variable's name for the survivor when it is free to use
                        if !candidate.to_formula().names().contains(&z.name) {
                            let renamed = w.renamed(z.name.clone());
                            chi = chi.rename_free(w, &renamed);
                            uvars[i] = renamed;
                        }
                        out = NormalForm::new(uvars, seqs.clone(), with_lists(chi.clone()));
                        simplified.push(("equality-guard", out.to_formula()));
                        // witness by instantiation: (∃^st Y)(∃y∈Y)χ is (∃^st y)χ
                        if !a.evars.is_empty() {
                            out = NormalForm::new(out.uvars.clone(), a.evars.clone(), chi);
                            simplified.push(("single-witness", out.to_formula()));
                        }
                    }
                }
            }
        }
        self.record(Clause::V, input, &raw, simplified, &out);
        Ok(out)
    }
}

pub fn sst_translate(f: &Formula) -> Result<SstResult, SstError> {
    let mut t = Translator {
        avoid: f.names(),
        trace: Vec::new(),
        sealed: Vec::new(),
    };
    let sealed = t.seal(f);
    let nf = t.tr(&sealed)?;
    Ok(t.finish(nf))
}

/// True iff `f` is a normal form and its translation is alpha-equivalent to it.
pub fn check_fixed_point(f: &Formula) -> bool {
    let Ok(nf) = recognize(f) else { return false };
    match sst_translate(f) {
        Ok(r) => r.translated.alpha_eq(&nf),
        Err(_) => false,
    }
}

/// The raw clause outputs grouped with their simplifications, for display.
pub fn trace_json(r: &SstResult) -> serde_json::Value {
    serde_json::Value::Array(
        r.trace
            .iter()
            .map(|s| {
                serde_json::json!({
                    "clause": s.clause.to_string(),
                    "input": s.input.to_string(),
                    "raw": s.raw.to_string(),
                    "simplified": s.simplified.iter().map(|(k, f)| serde_json::json!({"by": k, "formula": f.to_string()})).collect::<Vec<_>>(),
                    "output": s.output.to_string(),
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn tr(s: &str) -> SstResult {
        sst_translate(&parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn standardness() {
        assert_eq!(
            tr("(st x)").translated.to_string(),
            "(exists-st ((y N)) (=0 y x))"
        );
    }

    #[test]
    fn negated_standardness() {
        let r = tr("(not (st y))");
        assert_eq!(
            r.translated.to_string(),
            "(forall-st ((y' N)) (not (=0 y' y)))"
        );
        let step = r.trace.iter().find(|s| s.clause == Clause::III).unwrap();
        assert_eq!(
            step.raw.to_string(),
            "(forall-st ((Y (* N))) (forall-in (y' N) Y (not (=0 y' y))))"
        );
    }

    #[test]
    fn internal_is_clause_one() {
        let r = tr("(forall ((x N)) (=0 x x))");
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].clause, Clause::I);
    }

    #[test]
    fn normal_forms_are_fixed() {
        for s in [
            "(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))",
            "(forall-st ((x N) (x2 N)) (exists-st ((y N) (y2 N)) (atom P x x2 y y2)))",
            "(exists-st ((y N)) (=0 y 0))",
            "(forall-st ((x N)) (=0 x 0))",
            "(=0 0 0)",
        ] {
            assert!(check_fixed_point(&parse_formula(s).unwrap()), "{s}");
        }
        assert!(!check_fixed_point(&parse_formula("(st z)").unwrap()));
    }

    #[test]
    fn registry_normal_forms_are_fixed() {
        for e in crate::formula::registry() {
            assert!(check_fixed_point(&e.normal_form), "{}", e.name);
            let r = sst_translate(&e.normal_form).unwrap();
            assert!(r.translated.matrix.is_internal());
        }
    }

    #[test]
    fn idempotent_on_definitions() {
        for e in crate::formula::registry() {
            let once = sst_translate(&e.expansion).unwrap().translated;
            let twice = sst_translate(&once.to_formula()).unwrap().translated;
            assert!(once.alpha_eq(&twice), "{}", e.name);
        }
    }

    #[test]
    fn unsupported() {
        let f = parse_formula("(forall-in (x N) s (st x))").unwrap();
        assert!(sst_translate(&f).is_err());
    }
}
