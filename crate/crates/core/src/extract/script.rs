//! Pipeline scripts: a formula, the normalization steps to take, and the
//! realizer terms to thread through them.
//!
//! ```text
//! (pipeline NAME
//!   (inputs (f (-> R R)))
//!   (formula F)
//!   (monotone N)
//!   (options (mode weak) (zeta g))
//!   (steps (normalize (before idealize [N|last])) (realize T...) (select q f k) (normalize))
//!   (target NF)
//!   (domain k=1..64 x=grid:16)
//!   (reverse ...))
//! ```

use std::collections::BTreeSet;

use crate::formula::{parse_formula_with, Formula};
use crate::kernel::combinators;
use crate::kernel::syntax::parse_binder;
use crate::kernel::{parse_term, parse_type, FinType, Scope, Term, Var};
use crate::normal_form::{ImplMode, Rule};
use crate::oracles::DomainSpec;
use crate::sexpr::{parse_one, ParseError, Sexp};

/// Which occurrence of a rule a normalization stops before.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Occurrence {
    /// 1-based.
    Nth(usize),
    Last,
}

#[derive(Clone, Debug)]
pub enum ScriptStep {
    Normalize {
        before: Option<(String, Occurrence)>,
        mode: Option<ImplMode>,
        zeta: Option<Vec<String>>,
    },
    Rule {
        rule: Rule,
        path: Option<Vec<usize>>,
    },
    /// One closed term per standard existential of the current formula.
    Realize(Vec<Term>),
    /// Filter the candidates of `evar` by `|test(q)| < 1/k`; both terms are
    /// read over the standard inputs at the time the step runs.
    Select { evar: String, test: Sexp, k: Sexp },
}

#[derive(Clone, Debug)]
pub struct PipelineScript {
    pub name: String,
    pub inputs: Vec<Var>,
    pub formula: Formula,
    pub monotone: BTreeSet<String>,
    pub mode: ImplMode,
    pub zeta: Vec<String>,
    pub steps: Vec<ScriptStep>,
    pub target: Option<Formula>,
    pub domain: DomainSpec,
    pub reverse: DomainSpec,
}

fn items_of(s: &Sexp) -> Vec<String> {
    s.list()
        .map(|l| l[1..].iter().map(|x| x.to_string()).collect())
        .unwrap_or_default()
}

fn domain_of(s: &Sexp) -> Result<DomainSpec, ParseError> {
    DomainSpec::parse(&items_of(s)).map_err(|e| s.error(e))
}

/// Replace `(comb NAME TYPE...)` by the named closed combinator.
pub fn expand_combinators(s: &Sexp) -> Result<Sexp, ParseError> {
    let Sexp::List(items, pos) = s else {
        return Ok(s.clone());
    };
    if s.head() == Some("comb") {
        let name = items
            .get(1)
            .and_then(Sexp::atom)
            .ok_or_else(|| s.error("comb needs a name"))?;
        let tys = items[2..]
            .iter()
            .map(parse_type)
            .collect::<Result<Vec<FinType>, _>>()?;
        let need = |n: usize| {
            if tys.len() == n {
                Ok(())
            } else {
                Err(s.error(format!("{name} takes {n} type arguments")))
            }
        };
        let t = match name {
            "mk-max-seq" => need(0).map(|_| combinators::mk_max_seq()),
            "range-seq" => need(0).map(|_| combinators::range_seq()),
            "pad" => need(0).map(|_| combinators::pad()),
            "prefix" => need(0).map(|_| combinators::prefix()),
            "binary-strings" => need(0).map(|_| combinators::binary_strings()),
            "fold" => need(2).map(|_| combinators::fold(&tys[0], &tys[1])),
            "map" => need(2).map(|_| combinators::map(&tys[0], &tys[1])),
            "flatten" => need(1).map(|_| combinators::flatten(&tys[0])),
            "first-where" => need(1).map(|_| combinators::first_where(&tys[0])),
            _ => Err(s.error(format!("unknown combinator {name}"))),
        }?;
        return parse_one(&t.to_string());
    }
    let inner = items
        .iter()
        .map(expand_combinators)
        .collect::<Result<_, _>>()?;
    Ok(Sexp::List(inner, *pos))
}

/// Parse a term over `vars` after combinator expansion.
pub fn term_over(s: &Sexp, vars: &[Var]) -> Result<Term, ParseError> {
    let mut scope = Scope::new();
    for v in vars {
        scope.declare(v.name.clone(), v.ty.clone());
    }
    parse_term(&expand_combinators(s)?, &mut scope)
}

fn parse_rule(s: &Sexp, items: &[Sexp]) -> Result<ScriptStep, ParseError> {
    let name = items
        .get(1)
        .and_then(Sexp::atom)
        .ok_or_else(|| s.error("rule needs a name"))?;
    let mut args = Vec::new();
    let mut path = None;
    for a in &items[2..] {
        match a {
            Sexp::List(l, _) if a.head() == Some("at") => {
                let p = l[1..]
                    .iter()
                    .map(|x| {
                        x.expect_atom("a path index")?
                            .parse::<usize>()
                            .map_err(|_| x.error("bad path index"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                path = Some(p);
            }
            Sexp::Atom(x, _) => args.push(x.clone()),
            _ => return Err(a.error("unexpected rule argument")),
        }
    }
    let rule = match name {
        "expand" => Rule::Expand,
        "definition-normal-form" => Rule::DefNormalForm,
        "st-unfold" => Rule::StUnfold,
        "pull" => match args.first().map(String::as_str) {
            Some("left") => Rule::Pull { side: 0 },
            Some("right") => Rule::Pull { side: 1 },
            _ => return Err(s.error("pull needs left or right")),
        },
        "commute" => Rule::Commute,
        "nf-implies" => {
            let mode = args
                .first()
                .and_then(|m| ImplMode::parse(m))
                .ok_or_else(|| s.error("nf-implies needs a mode"))?;
            Rule::Implies {
                mode,
                names: args[1..].to_vec(),
            }
        }
        "idealize" => Rule::Idealize,
        "monotone-collapse" => Rule::Collapse,
        "prefix-infinitesimal" => Rule::Infinitesimal,
        "hac" => Rule::Hac { names: args },
        "weaken" => Rule::Weaken { vars: args },
        _ => return Err(s.error(format!("unknown rule {name}"))),
    };
    Ok(ScriptStep::Rule { rule, path })
}

fn parse_step(s: &Sexp) -> Result<ScriptStep, ParseError> {
    let items = s.expect_list("a step")?;
    match s.head() {
        Some("normalize") => {
            let (mut before, mut mode, mut zeta) = (None, None, None);
            for opt in &items[1..] {
                let parts = opt.expect_list("a normalize option")?;
                let arg = |i: usize| {
                    parts
                        .get(i)
                        .and_then(Sexp::atom)
                        .ok_or_else(|| opt.error("missing argument"))
                };
                match opt.head() {
                    Some("before") => {
                        let which = match parts.get(2).and_then(Sexp::atom) {
                            None => Occurrence::Nth(1),
                            Some("last") => Occurrence::Last,
                            Some(n) => Occurrence::Nth(
                                n.parse()
                                    .ok()
                                    .filter(|&n| n > 0)
                                    .ok_or_else(|| opt.error("bad occurrence"))?,
                            ),
                        };
                        before = Some((arg(1)?.to_string(), which));
                    }
                    Some("mode") => {
                        mode = Some(
                            ImplMode::parse(arg(1)?).ok_or_else(|| opt.error("unknown mode"))?,
                        )
                    }
                    Some("zeta") => {
                        zeta = Some(
                            parts[1..]
                                .iter()
                                .filter_map(Sexp::atom)
                                .map(String::from)
                                .collect(),
                        )
                    }
                    _ => return Err(opt.error("unknown normalize option")),
                }
            }
            Ok(ScriptStep::Normalize { before, mode, zeta })
        }
        Some("rule") => parse_rule(s, items),
        Some("realize") => {
            let ts = items[1..]
                .iter()
                .map(|t| term_over(t, &[]))
                .collect::<Result<_, _>>()?;
            Ok(ScriptStep::Realize(ts))
        }
        Some("select") => {
            if items.len() != 4 {
                return Err(s.error("select takes a variable, a function and a precision"));
            }
            Ok(ScriptStep::Select {
                evar: items[1].expect_atom("a variable")?.to_string(),
                test: items[2].clone(),
                k: items[3].clone(),
            })
        }
        _ => Err(s.error("unknown step")),
    }
}

pub fn parse_script(text: &str) -> Result<PipelineScript, ParseError> {
    let root = parse_one(text)?;
    if root.head() != Some("pipeline") {
        return Err(root.error("expected (pipeline NAME ...)"));
    }
    let items = root.expect_list("a pipeline")?;
    let name = items
        .get(1)
        .ok_or_else(|| root.error("pipeline needs a name"))?
        .expect_atom("a name")?;
    let mut script = PipelineScript {
        name: name.to_string(),
        inputs: Vec::new(),
        formula: Formula::eq(Term::Zero, Term::Zero),
        monotone: BTreeSet::new(),
        mode: ImplMode::Weak,
        zeta: Vec::new(),
        steps: Vec::new(),
        target: None,
        domain: DomainSpec::default(),
        reverse: DomainSpec::default(),
    };
    let mut formula = None;
    let mut target = None;
    for field in &items[2..] {
        let parts = field.expect_list("a pipeline field")?;
        match field.head() {
            Some("inputs") => {
                script.inputs = parts[1..]
                    .iter()
                    .map(parse_binder)
                    .collect::<Result<_, _>>()?
            }
            Some("formula") => {
                formula = Some(parts.get(1).ok_or_else(|| field.error("empty formula"))?)
            }
            Some("target") => {
                target = Some(parts.get(1).ok_or_else(|| field.error("empty target"))?)
            }
            Some("monotone") => script
                .monotone
                .extend(parts[1..].iter().filter_map(Sexp::atom).map(String::from)),
            Some("options") => {
                for opt in &parts[1..] {
                    let o = opt.expect_list("an option")?;
                    match opt.head() {
                        Some("mode") => {
                            let m = o.get(1).and_then(Sexp::atom).and_then(ImplMode::parse);
                            script.mode = m.ok_or_else(|| opt.error("unknown mode"))?;
                        }
                        Some("zeta") => {
                            script.zeta = o[1..]
                                .iter()
                                .filter_map(Sexp::atom)
                                .map(String::from)
                                .collect()
                        }
                        _ => return Err(opt.error("unknown option")),
                    }
                }
            }
            Some("steps") => {
                script.steps = parts[1..]
                    .iter()
                    .map(parse_step)
                    .collect::<Result<_, _>>()?
            }
            Some("domain") => script.domain = domain_of(field)?,
            Some("reverse") => script.reverse = domain_of(field)?,
            _ => return Err(field.error("unknown pipeline field")),
        }
    }
    let formula = formula.ok_or_else(|| root.error("pipeline without formula"))?;
    script.formula = parse_formula_with(&expand_combinators(formula)?, &script.inputs)?;
    if let Some(t) = target {
        script.target = Some(parse_formula_with(&expand_combinators(t)?, &script.inputs)?);
    }
    if script.steps.is_empty() {
        script.steps.push(ScriptStep::Normalize {
            before: None,
            mode: None,
            zeta: None,
        });
    }
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fields() {
        let s = parse_script(
            "(pipeline demo (inputs (f (-> R R))) ; comment\n\
             (formula (def ns-continuity f)) (monotone N) (options (mode strong) (zeta g h))\n\
             (steps (normalize (before idealize)) (realize (lam (x R) (lam (k N) (seq N k)))) \
             (rule pull left (at 0 1)) (normalize))\n\
             (domain k=1..4 denom=8))",
        )
        .unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.inputs.len(), 1);
        assert_eq!(s.mode, ImplMode::Strong);
        assert_eq!(s.zeta, vec!["g", "h"]);
        assert_eq!(s.steps.len(), 4);
        assert!(
            matches!(&s.steps[2], ScriptStep::Rule { rule: Rule::Pull { side: 0 }, path: Some(p) } if p == &[0, 1])
        );
        assert_eq!(s.domain.setting("denom", 0), 8);
    }

    #[test]
    fn combinators_expand() {
        let t = term_over(&parse_one("(app (comb range-seq) 3)").unwrap(), &[]).unwrap();
        assert!(t.is_closed());
        assert!(term_over(&parse_one("(comb nope)").unwrap(), &[]).is_err());
        assert!(term_over(&parse_one("(comb map N)").unwrap(), &[]).is_err());
    }

    #[test]
    fn rejects_junk() {
        assert!(parse_script("(pipeline x)").is_err());
        assert!(parse_script("(pipeline x (formula (=0 0 0)) (steps (dance)))").is_err());
        assert!(parse_script("(notapipeline)").is_err());
    }
}
