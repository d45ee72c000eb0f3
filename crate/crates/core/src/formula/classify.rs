//! Internal/external classification and relativization to the standard world.

use thiserror::Error;

use super::ast::{Formula, Quant};
use super::defs::expand_definition;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("formula is not internal: {0}")]
    NotInternal(String),
}

/// A number quantifier immediately guarded by `x ≤ t`.
pub fn is_bounded_number_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Quant(Quant::All, x, body) if x.ty.is_base() => {
            matches!(&**body, Formula::Implies(g, _) if is_guard(g, x))
        }
        Formula::Quant(Quant::Ex, x, body) if x.ty.is_base() => {
            matches!(&**body, Formula::And(g, _) if is_guard(g, x))
        }
        _ => false,
    }
}

fn is_guard(g: &Formula, x: &crate::kernel::Var) -> bool {
    match g {
        Formula::Le(Term::Var(v), t) => v.name == x.name && !t.occurs_free(&x.name),
        _ => false,
    }
}

use crate::kernel::Term;

/// Every unbounded quantifier becomes its standard counterpart.
pub fn relativize_st(f: &Formula) -> Result<Formula, ClassifyError> {
    if !f.is_internal() {
        return Err(ClassifyError::NotInternal(f.to_string()));
    }
    Ok(rel(f))
}

fn rel(f: &Formula) -> Formula {
    match f {
        Formula::Eq(..) | Formula::Le(..) | Formula::Pred(..) | Formula::St(_) => f.clone(),
        Formula::Def(name, args) => match expand_definition(name, args) {
            Ok(e) => rel(&e),
            Err(_) => f.clone(),
        },
        Formula::Not(a) => Formula::not(rel(a)),
        Formula::And(a, b) => Formula::and(rel(a), rel(b)),
        Formula::Or(a, b) => Formula::or(rel(a), rel(b)),
        Formula::Implies(a, b) => Formula::implies(rel(a), rel(b)),
        Formula::Quant(q, x, body) => {
            let q2 = if is_bounded_number_quantifier(f) {
                *q
            } else {
                match q {
                    Quant::All => Quant::AllSt,
                    Quant::Ex => Quant::ExSt,
                    other => *other,
                }
            };
            Formula::quant(q2, x.clone(), rel(body))
        }
        Formula::In(bq, x, s, body) => Formula::In(*bq, x.clone(), s.clone(), Box::new(rel(body))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn r(s: &str) -> String {
        relativize_st(&parse_formula(s).unwrap())
            .unwrap()
            .to_string()
    }

    #[test]
    fn examples() {
        assert_eq!(
            r("(forall ((x N)) (=0 x x))"),
            "(forall-st ((x N)) (=0 x x))"
        );
        assert_eq!(r("(=0 x y)"), "(=0 x y)");
        assert_eq!(
            r("(with ((f (-> N N))) (forall ((n N)) (exists ((m N)) (=0 (app f n) m))))"),
            "(forall-st ((n N)) (exists-st ((m N)) (=0 (app f n) m)))"
        );
    }

    #[test]
    fn bounded_quantifiers_untouched() {
        assert_eq!(
            r("(forall ((n N)) (exists ((i N)) (and (<=0 i n) (=0 i 0))))"),
            "(forall-st ((n N)) (exists ((i N)) (and (<=0 i n) (=0 i 0))))"
        );
        assert_eq!(
            r("(forall ((i N)) (implies (<=0 i 5) (=0 i i)))"),
            "(forall ((i N)) (implies (<=0 i 5) (=0 i i)))"
        );
    }

    #[test]
    fn external_rejected() {
        let f = parse_formula("(st x)").unwrap();
        assert!(matches!(
            relativize_st(&f),
            Err(ClassifyError::NotInternal(_))
        ));
    }
}
