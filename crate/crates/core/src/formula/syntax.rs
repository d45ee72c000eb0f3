//! Formula DSL: printing and parsing.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::{Bounded, Formula, Quant};
use crate::kernel::syntax::{parse_binder, parse_term, Scope};
use crate::kernel::{FinType, Name, Term, Var};
use crate::sexpr::{parse_one, ParseError, Sexp};

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "(=0 {a} {b})"),
            Formula::Le(a, b) => write!(f, "(<=0 {a} {b})"),
            Formula::Pred(p, args) | Formula::Def(p, args) => {
                let kw = if matches!(self, Formula::Pred(..)) {
                    "atom"
                } else {
                    "def"
                };
                write!(f, "({kw} {p}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Formula::St(t) => write!(f, "(st {t})"),
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Formula::Quant(q, _, _) => {
                let mut vars = Vec::new();
                let mut cur = self;
                while let Formula::Quant(q2, x, body) = cur {
                    if q2 != q {
                        break;
                    }
                    vars.push(x);
                    cur = body;
                }
                write!(f, "({} (", q.keyword())?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    if *q == Quant::AllInf {
                        write!(f, "{}", v.name)?;
                    } else {
                        write!(f, "({} {})", v.name, v.ty)?;
                    }
                }
                write!(f, ") {cur})")
            }
            Formula::In(bq, x, s, body) => {
                let kw = match bq {
                    Bounded::All => "forall-in",
                    Bounded::Ex => "exists-in",
                };
                write!(f, "({kw} ({} {}) {s} {body})", x.name, x.ty)
            }
        }
    }
}

fn fresh_for(base: &str, terms: &[&Term], scope_names: &BTreeSet<Name>) -> Var {
    let mut avoid = scope_names.clone();
    for t in terms {
        t.all_names(&mut avoid);
    }
    Var {
        name: Name::new(base).fresh(&avoid),
        ty: FinType::Base,
    }
}

struct Parser {
    scope: Scope,
    bound: Vec<Name>,
}

impl Parser {
    fn term(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        parse_term(s, &mut self.scope)
    }

    fn terms(&mut self, ss: &[Sexp]) -> Result<Vec<Term>, ParseError> {
        ss.iter().map(|s| self.term(s)).collect()
    }

    fn with_binders<T>(
        &mut self,
        vars: &[Var],
        k: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        for v in vars {
            self.scope.push(v.name.clone(), v.ty.clone());
            self.bound.push(v.name.clone());
        }
        let r = k(self);
        for _ in vars {
            self.scope.pop();
            self.bound.pop();
        }
        r
    }

    fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        let items = s.expect_list("a formula")?;
        let head = items
            .first()
            .and_then(Sexp::atom)
            .ok_or_else(|| s.error("expected a formula form"))?;
        let args = &items[1..];
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(s.error(format!("'{head}' takes {n} arguments")))
            }
        };
        match head {
            "=0" | "<=0" => {
                arity(2)?;
                let a = self.term(&args[0])?;
                let b = self.term(&args[1])?;
                Ok(if head == "=0" {
                    Formula::eq(a, b)
                } else {
                    Formula::le(a, b)
                })
            }
            "atom" | "def" => {
                let name = args
                    .first()
                    .and_then(Sexp::atom)
                    .ok_or_else(|| s.error(format!("'{head}' needs a name")))?;
                if head == "def" {
                    let entry = super::defs::lookup(name)
                        .ok_or_else(|| s.error(format!("unknown definition '{name}'")))?;
                    // a bare undeclared argument takes the parameter's type
                    for (a, p) in args[1..].iter().zip(&entry.params) {
                        if let Some(id) = a.atom() {
                            let n = Name::parse(id);
                            if id.parse::<u64>().is_err() && !self.scope.knows(&n) {
                                self.scope.declare(n, p.ty.clone());
                            }
                        }
                    }
                    let ts = self.terms(&args[1..])?;
                    Ok(Formula::def(name, ts))
                } else {
                    Ok(Formula::pred(name, self.terms(&args[1..])?))
                }
            }
            "st" => {
                arity(1)?;
                Ok(Formula::st(self.term(&args[0])?))
            }
            "not" => {
                arity(1)?;
                Ok(Formula::not(self.formula(&args[0])?))
            }
            "and" | "or" | "implies" => {
                if args.len() < 2 || (head == "implies" && args.len() != 2) {
                    return Err(s.error(format!("'{head}' takes two arguments")));
                }
                let mut parts = args
                    .iter()
                    .map(|a| self.formula(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut acc = parts.pop().unwrap();
                while let Some(p) = parts.pop() {
                    acc = match head {
                        "and" => Formula::and(p, acc),
                        "or" => Formula::or(p, acc),
                        _ => Formula::implies(p, acc),
                    };
                }
                Ok(acc)
            }
            "forall" | "exists" | "forall-st" | "exists-st" => {
                arity(2)?;
                let q = match head {
                    "forall" => Quant::All,
                    "exists" => Quant::Ex,
                    "forall-st" => Quant::AllSt,
                    _ => Quant::ExSt,
                };
                let binders = args[0].expect_list("a binder list")?;
                if binders.is_empty() {
                    return Err(args[0].error("empty binder list"));
                }
                let vars = binders
                    .iter()
                    .map(parse_binder)
                    .collect::<Result<Vec<_>, _>>()?;
                let body = self.with_binders(&vars, |p| p.formula(&args[1]))?;
                Ok(Formula::quant_block(q, &vars, body))
            }
            "forall-inf" => {
                arity(2)?;
                let names = args[0].expect_list("a list of variable names")?;
                if names.is_empty() {
                    return Err(args[0].error("empty binder list"));
                }
                let vars = names
                    .iter()
                    .map(|n| {
                        n.expect_atom("a variable name").map(|a| Var {
                            name: Name::parse(a),
                            ty: FinType::real(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let body = self.with_binders(&vars, |p| p.formula(&args[1]))?;
                Ok(Formula::quant_block(Quant::AllInf, &vars, body))
            }
            "forall-in" | "exists-in" => {
                arity(3)?;
                let x = parse_binder(&args[0])?;
                let seq = self.term(&args[1])?;
                let body = self.with_binders(std::slice::from_ref(&x), |p| p.formula(&args[2]))?;
                Ok(if head == "forall-in" {
                    Formula::forall_in(x, seq, body)
                } else {
                    Formula::exists_in(x, seq, body)
                })
            }
            "approx" => {
                arity(2)?;
                let a = self.term(&args[0])?;
                let b = self.term(&args[1])?;
                let names: BTreeSet<Name> = self.bound.iter().cloned().collect();
                let n = fresh_for("n", &[&a, &b], &names);
                Ok(Formula::forall_st(
                    n.clone(),
                    Formula::pred("near", vec![a, b, n.term()]),
                ))
            }
            "approx-eps" => {
                arity(1)?;
                let e = self.term(&args[0])?;
                let names: BTreeSet<Name> = self.bound.iter().cloned().collect();
                let n = fresh_for("n", &[&e], &names);
                Ok(Formula::forall_st(
                    n.clone(),
                    Formula::pred("small", vec![e, n.term()]),
                ))
            }
            "with" => Err(s.error("'with' is only allowed at the top level")),
            other => Err(s.error(format!("unknown formula form '{other}'"))),
        }
    }
}

/// Declarations of free variables from a top-level `(with ((f TY) ...) F)`.
pub fn split_with(s: &Sexp) -> Result<(Vec<Var>, &Sexp), ParseError> {
    if s.head() == Some("with") {
        let items = s.list().unwrap();
        if items.len() != 3 {
            return Err(s.error("'with' takes a declaration list and a formula"));
        }
        let decls = items[1].expect_list("a declaration list")?;
        let vars = decls
            .iter()
            .map(parse_binder)
            .collect::<Result<Vec<_>, _>>()?;
        Ok((vars, &items[2]))
    } else {
        Ok((Vec::new(), s))
    }
}

/// Parse a formula; free variables are N unless declared in `decls`.
pub fn parse_formula_with(s: &Sexp, decls: &[Var]) -> Result<Formula, ParseError> {
    let mut p = Parser {
        scope: Scope::new(),
        bound: Vec::new(),
    };
    for v in decls {
        p.scope.declare(v.name.clone(), v.ty.clone());
    }
    p.formula(s)
}

pub fn parse_formula_sexp(s: &Sexp) -> Result<Formula, ParseError> {
    let (decls, body) = split_with(s)?;
    parse_formula_with(body, &decls)
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_sexp(&parse_one(text)?)
}

/// Print with a `with` header declaring every non-N free variable, so that
/// the text parses back to the same formula.
pub fn print_closed(f: &Formula) -> String {
    let decls: Vec<String> = f
        .free_vars()
        .into_iter()
        .filter(|(_, ty)| !ty.is_base())
        .map(|(n, ty)| format!("({n} {ty})"))
        .collect();
    if decls.is_empty() {
        f.to_string()
    } else {
        format!("(with ({}) {f})", decls.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_and_block_forms() {
        assert_eq!(
            parse_formula("(st x)").unwrap(),
            Formula::st(Var::nat("x").term())
        );
        let f = parse_formula("(forall-st ((k N)) (exists-st ((M N)) (atom P k M)))").unwrap();
        let want = Formula::forall_st(
            Var::nat("k"),
            Formula::exists_st(
                Var::nat("M"),
                Formula::pred("P", vec![Var::nat("k").term(), Var::nat("M").term()]),
            ),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn approx_sugar() {
        let f = parse_formula("(forall-inf (eps) (approx-eps eps))").unwrap();
        assert_eq!(
            f.to_string(),
            "(forall-inf (eps) (forall-st ((n N)) (atom small eps n)))"
        );
        let g = parse_formula("(with ((n R)) (approx n n))").unwrap();
        assert_eq!(g.to_string(), "(forall-st ((n' N)) (atom near n n n'))");
    }

    #[test]
    fn round_trips() {
        for s in [
            "(forall ((x N) (y N)) (implies (<=0 x y) (=0 x y)))",
            "(exists-st ((w (* N))) (forall ((y N)) (exists-in (N N) w (atom P y N))))",
            "(not (or (st x) (and (=0 x 0) (def MU mu))))",
            "(forall-inf (e e') (atom small e 3))",
        ] {
            let f = parse_formula(s).unwrap();
            let want = if s.contains("(def MU mu)") {
                format!("(with ((mu (-> (-> N N) N))) {s})")
            } else {
                s.to_string()
            };
            assert_eq!(print_closed(&f), want);
            let g = parse_formula(&print_closed(&f)).unwrap();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn with_declares_types() {
        let f = parse_formula("(with ((f (-> N N))) (=0 (app f 0) 0))").unwrap();
        assert_eq!(print_closed(&f), "(with ((f (-> N N))) (=0 (app f 0) 0))");
    }

    #[test]
    fn errors() {
        assert!(parse_formula("(forall () (st x))").is_err());
        assert!(parse_formula("(def no-such-thing x)").is_err());
        let e = parse_formula("(and (st x)\n (bogus))").unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
    }
}
