//! Rational polynomial functions on reals: exact evaluation, compilation to
//! System T, and a native primitive for fast exact application.

use std::any::Any;
use std::fmt;
use std::sync::Arc;

use super::scalar::{Scalar, Q};
use crate::kernel::reals::{exact, rat_name, rat_text, real_value};
use crate::kernel::{EvalError, FinType, Foreign, Machine, Term, Value, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealExpr {
    X,
    Const(Q),
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
}

impl RealExpr {
    pub fn x() -> RealExpr {
        RealExpr::X
    }

    pub fn c(n: i64, d: i64) -> RealExpr {
        RealExpr::Const(Q::ratio(n, d))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: RealExpr) -> RealExpr {
        RealExpr::Add(Box::new(self), Box::new(o))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: RealExpr) -> RealExpr {
        RealExpr::Sub(Box::new(self), Box::new(o))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, o: RealExpr) -> RealExpr {
        RealExpr::Mul(Box::new(self), Box::new(o))
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        match self {
            RealExpr::X => x.clone(),
            RealExpr::Const(c) => {
                let n: i64 = c.numer().try_into().expect("small constant");
                let d: i64 = c.denom().try_into().expect("small constant");
                S::ratio(n, d)
            }
            RealExpr::Add(a, b) => a.eval(x) + b.eval(x),
            RealExpr::Sub(a, b) => a.eval(x) - b.eval(x),
            RealExpr::Mul(a, b) => a.eval(x) * b.eval(x),
        }
    }

    fn body(&self, x: &Var) -> Term {
        let r2 = || FinType::arrows([&FinType::real(), &FinType::real()], FinType::real());
        let bin = |op: &str, a: &RealExpr, b: &RealExpr| {
            Term::apps(Term::prim(op, r2()), [a.body(x), b.body(x)])
        };
        match self {
            RealExpr::X => x.term(),
            RealExpr::Const(c) => Term::prim(&rat_name(c), FinType::real()),
            RealExpr::Add(a, b) => bin("radd", a, b),
            RealExpr::Sub(a, b) => bin("rsub", a, b),
            RealExpr::Mul(a, b) => bin("rmul", a, b),
        }
    }

    /// A closed term of type `(-> R R)`.
    pub fn to_term(&self) -> Term {
        let x = Var::new("x", FinType::real());
        Term::lam(x.clone(), self.body(&x))
    }

    pub fn value(&self) -> Value {
        Value::foreign(Arc::new(RealFn::new(self.clone())))
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealExpr::X => f.write_str("x"),
            RealExpr::Const(c) => f.write_str(&rat_text(c)),
            RealExpr::Add(a, b) => write!(f, "({a}+{b})"),
            RealExpr::Sub(a, b) => write!(f, "({a}-{b})"),
            RealExpr::Mul(a, b) => write!(f, "{a}*{b}"),
        }
    }
}

/// Native `(-> R R)` on exact arguments.
#[derive(Debug, Clone)]
pub struct RealFn {
    pub expr: RealExpr,
}

impl RealFn {
    pub fn new(expr: RealExpr) -> RealFn {
        RealFn { expr }
    }
}

impl Foreign for RealFn {
    fn name(&self) -> String {
        format!("fn:{}", self.expr)
    }
    fn ty(&self) -> FinType {
        FinType::arrow(FinType::real(), FinType::real())
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        let q = exact(&args[0])
            .ok_or_else(|| EvalError::Unsupported(format!("{} at an inexact real", self.name())))?;
        Ok(real_value(self.expr.eval(q)))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `λk. c·k` as a closed `(-> N N)` term.
pub fn linear_modulus(c: u64) -> Term {
    let k = Var::nat("k");
    let n2 = FinType::arrows([&FinType::nat(), &FinType::nat()], FinType::nat());
    Term::lam(
        k.clone(),
        Term::apps(Term::prim("mul", n2), [Term::num(c), k.term()]),
    )
}

#[derive(Clone, Debug)]
pub struct FnCase {
    pub f: RealExpr,
    /// Modulus of uniform continuity on the unit interval, as `λk. c·k`.
    pub modulus: u64,
}

pub fn continuity_suite() -> Vec<FnCase> {
    let x = RealExpr::x;
    vec![
        FnCase { f: x(), modulus: 1 },
        FnCase {
            f: RealExpr::c(2, 1).mul(x()),
            modulus: 2,
        },
        FnCase {
            f: RealExpr::c(1, 2).mul(x()),
            modulus: 1,
        },
    ]
}

pub fn ivt_suite() -> Vec<FnCase> {
    let x = RealExpr::x;
    vec![
        FnCase {
            f: RealExpr::c(2, 1).mul(x()).sub(RealExpr::c(1, 1)),
            modulus: 2,
        },
        FnCase {
            f: x().sub(RealExpr::c(1, 2)),
            modulus: 1,
        },
        FnCase {
            f: x().mul(x()).sub(RealExpr::c(1, 2)),
            modulus: 2,
        },
    ]
}

pub fn riemann_suite() -> Vec<FnCase> {
    let x = RealExpr::x;
    vec![
        FnCase { f: x(), modulus: 1 },
        FnCase {
            f: RealExpr::c(1, 2).mul(x()),
            modulus: 1,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::reals::exact;
    use crate::kernel::{typecheck, Env, PrimTable, TypeEnv, DEFAULT_FUEL};
    use crate::oracles::scalar::{q, Q128};

    #[test]
    fn eval_generic() {
        let f = RealExpr::x().mul(RealExpr::x()).sub(RealExpr::c(1, 2));
        assert_eq!(f.eval(&q(1, 2)), q(-1, 4));
        assert_eq!(f.eval(&Q128::ratio(1, 2)), Q128::ratio(-1, 4));
        assert_eq!(f.to_string(), "(x*x-1/2)");
    }

    #[test]
    fn term_matches_native() {
        let prims = PrimTable::new();
        for case in ivt_suite().into_iter().chain(continuity_suite()) {
            let t = case.f.to_term();
            assert_eq!(
                typecheck(&t, &TypeEnv::new()).unwrap(),
                FinType::arrow(FinType::real(), FinType::real())
            );
            let mut m = Machine::new(&prims, DEFAULT_FUEL);
            let fv = m.eval(&t, &Env::new()).unwrap();
            for j in 0..=8 {
                let x = q(j, 8);
                let a = m.apply(&fv, real_value(x.clone())).unwrap();
                let b = m.apply(&case.f.value(), real_value(x.clone())).unwrap();
                assert_eq!(exact(&a), exact(&b));
                assert_eq!(exact(&a).unwrap(), &case.f.eval(&x));
            }
        }
    }
}
