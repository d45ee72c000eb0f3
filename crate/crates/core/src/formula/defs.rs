//! The registry of nonstandard and internal definitions, each paired with its normal form.

use std::sync::OnceLock;

use thiserror::Error;

use super::ast::Formula;
use super::syntax::parse_formula_with;
use crate::kernel::syntax::parse_binder;
use crate::kernel::term::Subst;
use crate::kernel::{infer_open, Term, Var};
use crate::sexpr::{parse_one, ParseError, Sexp};

pub const REGISTRY_TEXT: &str = include_str!("registry.nsr");

#[derive(Clone, Debug)]
pub struct DefinitionEntry {
    pub name: String,
    pub params: Vec<Var>,
    pub cite: String,
    pub internal: bool,
    /// The normalizer may derive the normal form from the expansion.
    pub derive: bool,
    /// Base names of witness variables declared upward-monotone.
    pub monotone: Vec<String>,
    pub expansion: Formula,
    pub normal_form: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DefError {
    #[error("unknown definition {0}")]
    UnknownDefinition(String),
    #[error("{name} takes {expected} arguments, got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of {name}: {message}")]
    ArgumentType {
        name: String,
        index: usize,
        message: String,
    },
}

fn parse_entry(s: &Sexp) -> Result<DefinitionEntry, ParseError> {
    let items = s.expect_list("a definition")?;
    let name = items
        .get(1)
        .and_then(Sexp::atom)
        .ok_or_else(|| s.error("definition needs a name"))?;
    let mut entry = DefinitionEntry {
        name: name.to_string(),
        params: Vec::new(),
        cite: String::new(),
        internal: false,
        derive: false,
        monotone: Vec::new(),
        expansion: Formula::eq(Term::Zero, Term::Zero),
        normal_form: Formula::eq(Term::Zero, Term::Zero),
    };
    let mut expansion = None;
    let mut nf = None;
    for field in &items[2..] {
        let parts = field.expect_list("a definition field")?;
        match field.head() {
            Some("params") => {
                entry.params = parts[1..]
                    .iter()
                    .map(parse_binder)
                    .collect::<Result<_, _>>()?;
            }
            Some("cite") => {
                entry.cite = parts
                    .get(1)
                    .and_then(Sexp::atom)
                    .unwrap_or("")
                    .trim_matches('"')
                    .to_string();
            }
            Some("internal") => entry.internal = true,
            Some("derive") => entry.derive = true,
            Some("monotone") => {
                entry.monotone = parts[1..]
                    .iter()
                    .filter_map(Sexp::atom)
                    .map(String::from)
                    .collect();
            }
            Some("expansion") => expansion = parts.get(1),
            Some("normal-form") => nf = parts.get(1),
            _ => return Err(field.error("unknown definition field")),
        }
    }
    let expansion = expansion.ok_or_else(|| s.error("definition without expansion"))?;
    let nf = nf.ok_or_else(|| s.error("definition without normal form"))?;
    entry.expansion = parse_formula_with(expansion, &entry.params)?;
    entry.normal_form = parse_formula_with(nf, &entry.params)?;
    Ok(entry)
}

fn load() -> Vec<DefinitionEntry> {
    let root = parse_one(REGISTRY_TEXT).expect("registry parses");
    let items = root.list().expect("registry is a list");
    items[1..]
        .iter()
        .filter(|s| s.head() == Some("definition"))
        .map(|s| parse_entry(s).unwrap_or_else(|err| panic!("registry entry: {err}")))
        .collect()
}

pub fn registry() -> &'static [DefinitionEntry] {
    static REG: OnceLock<Vec<DefinitionEntry>> = OnceLock::new();
    REG.get_or_init(load)
}

pub fn registry_version() -> u32 {
    1
}

pub fn lookup(name: &str) -> Option<&'static DefinitionEntry> {
    registry().iter().find(|e| e.name == name)
}

fn instantiate(
    entry: &DefinitionEntry,
    body: &Formula,
    args: &[Term],
) -> Result<Formula, DefError> {
    if args.len() != entry.params.len() {
        return Err(DefError::Arity {
            name: entry.name.clone(),
            expected: entry.params.len(),
            found: args.len(),
        });
    }
    let mut sigma = Subst::new();
    for (i, (p, a)) in entry.params.iter().zip(args).enumerate() {
        let ty = infer_open(a).map_err(|e| DefError::ArgumentType {
            name: entry.name.clone(),
            index: i,
            message: e.to_string(),
        })?;
        if ty != p.ty {
            return Err(DefError::ArgumentType {
                name: entry.name.clone(),
                index: i,
                message: format!("expected {}, found {ty}", p.ty),
            });
        }
        sigma.insert(p.name.clone(), a.clone());
    }
    Ok(body.subst(&sigma))
}

/// The definition instantiated at `args` (hygienic substitution).
pub fn expand_definition(name: &str, args: &[Term]) -> Result<Formula, DefError> {
    let entry = lookup(name).ok_or_else(|| DefError::UnknownDefinition(name.to_string()))?;
    instantiate(entry, &entry.expansion, args)
}

/// The registered normal form instantiated at `args`.
pub fn definition_normal_form(name: &str, args: &[Term]) -> Result<Formula, DefError> {
    let entry = lookup(name).ok_or_else(|| DefError::UnknownDefinition(name.to_string()))?;
    instantiate(entry, &entry.normal_form, args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::kernel::FinType;

    #[test]
    fn registry_loads_with_citations() {
        assert!(registry().len() >= 10);
        for e in registry() {
            assert!(!e.cite.is_empty(), "{}", e.name);
            assert_eq!(e.expansion.is_internal(), e.internal, "{}", e.name);
        }
    }

    #[test]
    fn uniform_continuity_expansion() {
        let f = Var::new("f", FinType::arrow(FinType::real(), FinType::real()));
        let got = expand_definition("ns-uniform-continuity", &[f.term()]).unwrap();
        let want = parse_formula(
            "(with ((f (-> R R))) (forall ((x R) (y R)) (implies (and (atom unit x) (atom unit y)) \
             (implies (forall-st ((N N)) (atom near x y N)) (forall-st ((k N)) (atom near (app f x) (app f y) k))))))",
        )
        .unwrap();
        assert!(got.alpha_eq(&want));
    }

    #[test]
    fn expansion_is_hygienic() {
        // an argument named like a bound variable of the template
        let x = Var::new("x", FinType::arrow(FinType::real(), FinType::real()));
        let got = expand_definition("ns-uniform-continuity", &[x.term()]).unwrap();
        assert!(got.occurs_free(&x.name));
    }

    #[test]
    fn transfer_and_mu() {
        let t = expand_definition("Pi01-TRANS", &[]).unwrap();
        assert_eq!(
            t.to_string(),
            "(forall-st ((f (-> N N))) (implies (forall-st ((n N)) (not (=0 (app f n) 0))) (forall ((m N)) (not (=0 (app f m) 0)))))"
        );
        let mu = Var::new("mu", FinType::arrow(FinType::real(), FinType::nat()));
        let m = expand_definition("MU", &[mu.term()]).unwrap();
        assert_eq!(
            m.to_string(),
            "(forall ((f (-> N N))) (implies (exists ((n N)) (=0 (app f n) 0)) (=0 (app f (app mu f)) 0)))"
        );
        assert!(m.is_internal());
    }

    #[test]
    fn errors() {
        assert_eq!(
            expand_definition("nope", &[]),
            Err(DefError::UnknownDefinition("nope".into()))
        );
        assert!(matches!(
            expand_definition("MU", &[]),
            Err(DefError::Arity { .. })
        ));
        assert!(matches!(
            expand_definition("MU", &[Term::Zero]),
            Err(DefError::ArgumentType { .. })
        ));
    }
}
