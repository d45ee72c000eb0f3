use std::fmt;

use crate::sexpr::{ParseError, Sexp};

/// Finite types: the base type of naturals, arrows, and finite sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FinType {
    Base,
    Arrow(Box<FinType>, Box<FinType>),
    Seq(Box<FinType>),
}

impl FinType {
    pub fn nat() -> FinType {
        FinType::Base
    }

    pub fn arrow(a: FinType, b: FinType) -> FinType {
        FinType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn seq(a: FinType) -> FinType {
        FinType::Seq(Box::new(a))
    }

    /// Type-1 objects; real numbers are coded at this type.
    pub fn real() -> FinType {
        FinType::arrow(FinType::Base, FinType::Base)
    }

    /// `a1 -> ... -> an -> ret`
    pub fn arrows<'a>(args: impl IntoIterator<Item = &'a FinType>, ret: FinType) -> FinType {
        let args: Vec<&FinType> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(ret, |acc, a| FinType::arrow(a.clone(), acc))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, FinType::Base)
    }

    pub fn codomain(&self) -> Option<&FinType> {
        match self {
            FinType::Arrow(_, b) => Some(b),
            _ => None,
        }
    }

    pub fn domain(&self) -> Option<&FinType> {
        match self {
            FinType::Arrow(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn element(&self) -> Option<&FinType> {
        match self {
            FinType::Seq(a) => Some(a),
            _ => None,
        }
    }

    /// Split a curried arrow into its argument list and final result.
    pub fn uncurry(&self) -> (Vec<&FinType>, &FinType) {
        let mut args = Vec::new();
        let mut t = self;
        while let FinType::Arrow(a, b) = t {
            args.push(a.as_ref());
            t = b;
        }
        (args, t)
    }

    /// Usual type level: 0 for N, one more than the argument level for arrows.
    pub fn level(&self) -> usize {
        match self {
            FinType::Base => 0,
            FinType::Seq(a) => a.level(),
            FinType::Arrow(a, b) => (a.level() + 1).max(b.level()),
        }
    }
}

impl fmt::Display for FinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinType::Base => f.write_str("N"),
            FinType::Seq(a) => write!(f, "(* {a})"),
            FinType::Arrow(..) => {
                let (args, ret) = self.uncurry();
                f.write_str("(->")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " {ret})")
            }
        }
    }
}

/// `N`, `R` (alias for `(-> N N)`), `(-> a b ...)`, `(* a)`.
pub fn parse_type(s: &Sexp) -> Result<FinType, ParseError> {
    match s {
        Sexp::Atom(a, _) => match a.as_str() {
            "N" | "0" => Ok(FinType::Base),
            "R" | "1" => Ok(FinType::real()),
            other => Err(s.error(format!("unknown type '{other}'"))),
        },
        Sexp::List(items, _) => match items.first().and_then(Sexp::atom) {
            Some("->") if items.len() >= 3 => {
                let parts = items[1..]
                    .iter()
                    .map(parse_type)
                    .collect::<Result<Vec<_>, _>>()?;
                let (ret, args) = parts.split_last().unwrap();
                Ok(FinType::arrows(args, ret.clone()))
            }
            Some("*") if items.len() == 2 => Ok(FinType::seq(parse_type(&items[1])?)),
            _ => Err(s.error(format!("malformed type {s}"))),
        },
    }
}

pub fn parse_type_str(text: &str) -> Result<FinType, ParseError> {
    parse_type(&crate::sexpr::parse_one(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_parse() {
        for t in [
            "N",
            "(-> N N)",
            "(* N)",
            "(-> (-> N N) N N)",
            "(* (-> N (* N)))",
            "(-> N (* N) N)",
        ] {
            assert_eq!(parse_type_str(t).unwrap().to_string(), t);
        }
        assert_eq!(parse_type_str("R").unwrap(), FinType::real());
    }

    #[test]
    fn seq_differs_from_arrow() {
        assert_ne!(
            FinType::seq(FinType::nat()),
            FinType::arrow(FinType::nat(), FinType::nat())
        );
    }

    #[test]
    fn levels() {
        assert_eq!(FinType::nat().level(), 0);
        assert_eq!(FinType::real().level(), 1);
        assert_eq!(FinType::arrow(FinType::real(), FinType::nat()).level(), 2);
    }
}
