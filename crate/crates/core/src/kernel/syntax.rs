//! S-expression syntax for terms.

use std::collections::HashMap;

use super::eval::builtin_type;
use super::term::{Name, Term, Var};
use super::types::{parse_type, FinType};
use crate::sexpr::{parse_one, ParseError, Sexp};

/// Variable scope for parsing: binder stack over a map of declared free variables.
/// Undeclared free variables default to type N.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    declared: HashMap<Name, FinType>,
    stack: Vec<(Name, FinType)>,
}

impl Scope {
    pub fn new() -> Scope {
        Scope::default()
    }

    pub fn declare(&mut self, name: Name, ty: FinType) {
        self.declared.insert(name, ty);
    }

    pub fn push(&mut self, name: Name, ty: FinType) {
        self.stack.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.stack.pop();
    }

    pub fn knows(&self, name: &Name) -> bool {
        self.declared.contains_key(name) || self.stack.iter().any(|(n, _)| n == name)
    }

    pub fn lookup(&self, name: &Name) -> FinType {
        self.stack
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
            .or_else(|| self.declared.get(name).cloned())
            .unwrap_or(FinType::Base)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    s.chars().all(|c| c.is_alphanumeric() || "_-'".contains(c))
}

pub fn parse_binder(s: &Sexp) -> Result<Var, ParseError> {
    let items = s.expect_list("a binder (x TYPE)")?;
    if items.len() != 2 {
        return Err(s.error("a binder has the form (x TYPE)"));
    }
    let name = items[0].expect_atom("a variable name")?;
    if !is_ident(name) {
        return Err(items[0].error(format!("bad variable name '{name}'")));
    }
    Ok(Var {
        name: Name::parse(name),
        ty: parse_type(&items[1])?,
    })
}

pub fn parse_term(s: &Sexp, scope: &mut Scope) -> Result<Term, ParseError> {
    match s {
        Sexp::Atom(a, _) => {
            if let Ok(n) = a.parse::<u64>() {
                return Ok(Term::num(n));
            }
            if !is_ident(a) {
                return Err(s.error(format!("unexpected token '{a}'")));
            }
            let name = Name::parse(a);
            let ty = scope.lookup(&name);
            Ok(Term::Var(Var { name, ty }))
        }
        Sexp::List(items, _) => {
            let head = items
                .first()
                .and_then(Sexp::atom)
                .ok_or_else(|| s.error("expected a term form"))?;
            let args = &items[1..];
            let arity = |n: usize| -> Result<(), ParseError> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(s.error(format!("'{head}' takes {n} arguments")))
                }
            };
            match head {
                "succ" => {
                    arity(1)?;
                    Ok(Term::succ(parse_term(&args[0], scope)?))
                }
                "lam" => {
                    arity(2)?;
                    let x = parse_binder(&args[0])?;
                    scope.push(x.name.clone(), x.ty.clone());
                    let body = parse_term(&args[1], scope);
                    scope.pop();
                    Ok(Term::lam(x, body?))
                }
                "app" => {
                    if args.len() < 2 {
                        return Err(s.error("'app' takes a function and at least one argument"));
                    }
                    let f = parse_term(&args[0], scope)?;
                    let rest = args[1..]
                        .iter()
                        .map(|a| parse_term(a, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Term::apps(f, rest))
                }
                "rec" => {
                    arity(4)?;
                    Ok(Term::rec(
                        parse_type(&args[0])?,
                        parse_term(&args[1], scope)?,
                        parse_term(&args[2], scope)?,
                        parse_term(&args[3], scope)?,
                    ))
                }
                "seq" => {
                    if args.is_empty() {
                        return Err(s.error("'seq' needs an element type"));
                    }
                    let elem = parse_type(&args[0])?;
                    let items = args[1..]
                        .iter()
                        .map(|a| parse_term(a, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Term::seq(elem, items))
                }
                "len" => {
                    arity(1)?;
                    Ok(Term::len(parse_term(&args[0], scope)?))
                }
                "idx" => {
                    arity(2)?;
                    Ok(Term::idx(
                        parse_term(&args[0], scope)?,
                        parse_term(&args[1], scope)?,
                    ))
                }
                "cat" => {
                    arity(2)?;
                    Ok(Term::cat(
                        parse_term(&args[0], scope)?,
                        parse_term(&args[1], scope)?,
                    ))
                }
                "prim" => {
                    let name = args
                        .first()
                        .and_then(Sexp::atom)
                        .ok_or_else(|| s.error("'prim' needs a name"))?;
                    let ty = match args.len() {
                        1 => builtin_type(name)
                            .ok_or_else(|| s.error(format!("primitive '{name}' needs a type")))?,
                        2 => parse_type(&args[1])?,
                        _ => return Err(s.error("'prim' takes a name and an optional type")),
                    };
                    Ok(Term::prim(name, ty))
                }
                other => Err(s.error(format!("unknown term form '{other}'"))),
            }
        }
    }
}

pub fn parse_term_str(text: &str) -> Result<Term, ParseError> {
    parse_term(&parse_one(text)?, &mut Scope::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_examples() {
        for s in [
            "0",
            "17",
            "(succ x)",
            "(lam (x N) (succ x))",
            "(app f 1 2)",
            "(rec N 3 (lam (n N) (lam (m N) (succ m))) 2)",
            "(seq N 0 1)",
            "(idx (seq N 0 1) 1)",
            "(cat (seq (-> N N)) (seq (-> N N) (prim q:1/2)))",
            "(len (seq (* N)))",
            "(prim add)",
            "(prim foo (-> N N))",
            "(lam (y' N) y)",
        ] {
            assert_eq!(parse_term_str(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn numerals_print_identically() {
        assert_eq!(Term::succ(Term::succ(Term::Zero)).to_string(), "2");
        assert_eq!(parse_term_str("0").unwrap(), Term::Zero);
    }

    #[test]
    fn binder_types_flow_to_occurrences() {
        let t = parse_term_str("(lam (f (-> N N)) (app f 0))").unwrap();
        assert_eq!(
            crate::kernel::typecheck::infer_open(&t)
                .unwrap()
                .to_string(),
            "(-> (-> N N) N)"
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term_str("(lam (x N)\n  (bogus 1))").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }
}
