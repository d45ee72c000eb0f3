//! Call-by-value environment machine with an explicit fuel budget.

use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use super::reals;
use super::term::{Name, Term, Var};
use super::typecheck::{typecheck, TypeEnv};
use super::types::FinType;

pub const DEFAULT_FUEL: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("ill-typed term: {0}")]
    IllTyped(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(String),
    #[error("unknown primitive {0}")]
    UnknownPrim(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// A primitive operation implemented natively.
pub trait Foreign: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn ty(&self) -> FinType;
    fn arity(&self) -> usize;
    fn call(&self, args: &[Value], m: &mut Machine) -> Result<Value, EvalError>;
    fn as_any(&self) -> &dyn Any;
    /// Identity used by value equality; defaults to the name.
    fn key(&self) -> String {
        self.name()
    }
}

#[derive(Clone)]
pub enum Value {
    Nat(u64),
    Seq(FinType, Arc<Vec<Value>>),
    Closure(Arc<Closure>),
    Foreign(Arc<dyn Foreign>, Arc<Vec<Value>>),
}

pub struct Closure {
    pub param: Var,
    pub body: Arc<Term>,
    pub env: Env,
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", readback(self))
    }
}

impl Value {
    pub fn foreign(f: Arc<dyn Foreign>) -> Value {
        Value::Foreign(f, Arc::new(Vec::new()))
    }

    pub fn seq(elem: FinType, items: Vec<Value>) -> Value {
        Value::Seq(elem, Arc::new(items))
    }

    pub fn as_nat(&self) -> Result<u64, EvalError> {
        match self {
            Value::Nat(n) => Ok(*n),
            other => Err(EvalError::IllTyped(format!(
                "expected a number, got {other:?}"
            ))),
        }
    }

    pub fn as_seq(&self) -> Result<&[Value], EvalError> {
        match self {
            Value::Seq(_, items) => Ok(items),
            other => Err(EvalError::IllTyped(format!(
                "expected a sequence, got {other:?}"
            ))),
        }
    }

    /// The native object behind an unapplied foreign value.
    pub fn foreign_ref<T: 'static>(&self) -> Option<&T> {
        match self {
            Value::Foreign(f, args) if args.is_empty() => f.as_any().downcast_ref::<T>(),
            _ => None,
        }
    }

    /// Structural equality; closures compare up to alpha-equivalence of their readback.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Nat(a), Value::Nat(b)) => a == b,
            (Value::Seq(_, a), Value::Seq(_, b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.same(y))
            }
            (Value::Foreign(f, a), Value::Foreign(g, b)) => {
                f.key() == g.key()
                    && a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|(x, y)| x.same(y))
            }
            (Value::Closure(_), Value::Closure(_)) => readback(self).alpha_eq(&readback(other)),
            _ => false,
        }
    }
}

/// Persistent variable environment.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

impl Env {
    pub fn new() -> Env {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Value) -> Env {
        Env(Some(Arc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &Name) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.name == *name {
                return Some(&node.value);
            }
            cur = &node.next;
        }
        None
    }
}

type BuiltinFn = fn(&[Value], &mut Machine) -> Result<Value, EvalError>;

struct Builtin {
    name: &'static str,
    ty: FinType,
    arity: usize,
    run: BuiltinFn,
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl Foreign for Builtin {
    fn name(&self) -> String {
        self.name.to_string()
    }
    fn ty(&self) -> FinType {
        self.ty.clone()
    }
    fn arity(&self) -> usize {
        self.arity
    }
    fn call(&self, args: &[Value], m: &mut Machine) -> Result<Value, EvalError> {
        (self.run)(args, m)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn nn(args: &[Value]) -> Result<(u64, u64), EvalError> {
    Ok((args[0].as_nat()?, args[1].as_nat()?))
}

fn b(x: bool) -> Value {
    Value::Nat(x as u64)
}

fn builtin_list() -> Vec<Builtin> {
    let n = FinType::nat;
    let n2 = || FinType::arrows([&n(), &n()], n());
    let r = FinType::real;
    vec![
        Builtin {
            name: "add",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                x.checked_add(y)
                    .map(Value::Nat)
                    .ok_or_else(|| EvalError::Overflow("add".into()))
            },
        },
        Builtin {
            name: "mul",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                x.checked_mul(y)
                    .map(Value::Nat)
                    .ok_or_else(|| EvalError::Overflow("mul".into()))
            },
        },
        Builtin {
            name: "monus",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(Value::Nat(x.saturating_sub(y)))
            },
        },
        Builtin {
            name: "pred",
            ty: FinType::arrow(n(), n()),
            arity: 1,
            run: |a, _| Ok(Value::Nat(a[0].as_nat()?.saturating_sub(1))),
        },
        Builtin {
            name: "max",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(Value::Nat(x.max(y)))
            },
        },
        Builtin {
            name: "min",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(Value::Nat(x.min(y)))
            },
        },
        Builtin {
            name: "div",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(Value::Nat(x.checked_div(y).unwrap_or(x)))
            },
        },
        Builtin {
            name: "pow2",
            ty: FinType::arrow(n(), n()),
            arity: 1,
            run: |a, _| {
                let x = a[0].as_nat()?;
                1u64.checked_shl(x as u32)
                    .filter(|_| x < 64)
                    .map(Value::Nat)
                    .ok_or_else(|| EvalError::Overflow("pow2".into()))
            },
        },
        Builtin {
            name: "le",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(b(x <= y))
            },
        },
        Builtin {
            name: "lt",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(b(x < y))
            },
        },
        Builtin {
            name: "eq",
            ty: n2(),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(b(x == y))
            },
        },
        Builtin {
            name: "cond",
            ty: FinType::arrows([&n(), &n(), &n()], n()),
            arity: 3,
            run: |a, _| {
                Ok(if a[0].as_nat()? != 0 {
                    a[1].clone()
                } else {
                    a[2].clone()
                })
            },
        },
        Builtin {
            name: "rat",
            ty: FinType::arrows([&n(), &n()], r()),
            arity: 2,
            run: |a, _| {
                let (x, y) = nn(a)?;
                Ok(reals::rat_value(x, y))
            },
        },
        Builtin {
            name: "radd",
            ty: FinType::arrows([&r(), &r()], r()),
            arity: 2,
            run: |a, m| reals::combine(reals::RealOpKind::Add, &a[0], &a[1], m),
        },
        Builtin {
            name: "rsub",
            ty: FinType::arrows([&r(), &r()], r()),
            arity: 2,
            run: |a, m| reals::combine(reals::RealOpKind::Sub, &a[0], &a[1], m),
        },
        Builtin {
            name: "rmul",
            ty: FinType::arrows([&r(), &r()], r()),
            arity: 2,
            run: |a, m| reals::combine(reals::RealOpKind::Mul, &a[0], &a[1], m),
        },
        Builtin {
            name: "rlt-inv",
            ty: FinType::arrows([&r(), &n()], n()),
            arity: 2,
            run: |a, m| reals::lt_inv(&a[0], a[1].as_nat()?, m).map(b),
        },
        Builtin {
            name: "rgt-inv",
            ty: FinType::arrows([&r(), &n()], n()),
            arity: 2,
            run: |a, m| reals::gt_inv(&a[0], a[1].as_nat()?, m).map(b),
        },
    ]
}

fn builtins() -> &'static HashMap<&'static str, Arc<dyn Foreign>> {
    static TABLE: OnceLock<HashMap<&'static str, Arc<dyn Foreign>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        builtin_list()
            .into_iter()
            .map(|b| (b.name, Arc::new(b) as Arc<dyn Foreign>))
            .collect()
    })
}

/// Type of a builtin primitive, if `name` is one.
pub fn builtin_type(name: &str) -> Option<FinType> {
    if let Some(b) = builtins().get(name) {
        return Some(b.ty());
    }
    reals::parse_rat_name(name).map(|_| FinType::real())
}

pub fn builtin_names() -> Vec<&'static str> {
    let mut v: Vec<_> = builtins().keys().copied().collect();
    v.sort();
    v
}

/// Name-indexed primitives: the builtins plus anything registered by a caller.
#[derive(Clone, Default)]
pub struct PrimTable {
    extra: HashMap<String, Arc<dyn Foreign>>,
}

impl PrimTable {
    pub fn new() -> PrimTable {
        PrimTable::default()
    }

    pub fn insert(&mut self, f: Arc<dyn Foreign>) {
        self.extra.insert(f.name(), f);
    }

    pub fn resolve(&self, name: &str) -> Option<Arc<dyn Foreign>> {
        if let Some(b) = builtins().get(name) {
            return Some(b.clone());
        }
        if let Some(f) = self.extra.get(name) {
            return Some(f.clone());
        }
        reals::parse_rat_name(name).map(|q| Arc::new(reals::RealConst::new(q)) as Arc<dyn Foreign>)
    }
}

pub struct Machine<'p> {
    pub prims: &'p PrimTable,
    budget: u64,
    used: u64,
}

impl<'p> Machine<'p> {
    pub fn new(prims: &'p PrimTable, budget: u64) -> Machine<'p> {
        Machine {
            prims,
            budget,
            used: 0,
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn tick(&mut self) -> Result<(), EvalError> {
        self.used += 1;
        if self.used > self.budget {
            Err(EvalError::FuelExhausted(self.budget))
        } else {
            Ok(())
        }
    }

    pub fn eval(&mut self, t: &Term, env: &Env) -> Result<Value, EvalError> {
        self.tick()?;
        match t {
            Term::Var(v) => env
                .lookup(&v.name)
                .cloned()
                .ok_or_else(|| EvalError::IllTyped(format!("unbound variable {}", v.name))),
            Term::Zero => Ok(Value::Nat(0)),
            Term::Num(n) => Ok(Value::Nat(*n)),
            Term::Succ(u) => {
                let n = self.eval(u, env)?.as_nat()?;
                n.checked_add(1)
                    .map(Value::Nat)
                    .ok_or_else(|| EvalError::Overflow("succ".into()))
            }
            Term::Lam(x, body) => Ok(Value::Closure(Arc::new(Closure {
                param: x.clone(),
                body: body.clone(),
                env: env.clone(),
            }))),
            Term::App(f, a) => {
                let fv = self.eval(f, env)?;
                let av = self.eval(a, env)?;
                self.apply(&fv, av)
            }
            Term::Rec {
                base, step, index, ..
            } => {
                let mut acc = self.eval(base, env)?;
                let g = self.eval(step, env)?;
                let n = self.eval(index, env)?.as_nat()?;
                for i in 0..n {
                    self.tick()?;
                    let gi = self.apply(&g, Value::Nat(i))?;
                    acc = self.apply(&gi, acc)?;
                }
                Ok(acc)
            }
            Term::SeqLit { elem, items } => {
                let vs = items
                    .iter()
                    .map(|it| self.eval(it, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::seq(elem.clone(), vs))
            }
            Term::Len(s) => Ok(Value::Nat(self.eval(s, env)?.as_seq()?.len() as u64)),
            Term::Idx(s, i) => {
                let sv = self.eval(s, env)?;
                let iv = self.eval(i, env)?.as_nat()?;
                match &sv {
                    Value::Seq(elem, items) => Ok(items
                        .get(iv as usize)
                        .cloned()
                        .unwrap_or_else(|| default_value(elem))),
                    other => Err(EvalError::IllTyped(format!(
                        "idx of non-sequence {other:?}"
                    ))),
                }
            }
            Term::Cat(a, b) => {
                let av = self.eval(a, env)?;
                let bv = self.eval(b, env)?;
                match (&av, &bv) {
                    (Value::Seq(elem, x), Value::Seq(_, y)) => {
                        let mut out = Vec::with_capacity(x.len() + y.len());
                        out.extend(x.iter().cloned());
                        out.extend(y.iter().cloned());
                        Ok(Value::seq(elem.clone(), out))
                    }
                    _ => Err(EvalError::IllTyped("cat of non-sequences".into())),
                }
            }
            Term::Prim { name, .. } => {
                let f = self
                    .prims
                    .resolve(name)
                    .ok_or_else(|| EvalError::UnknownPrim(name.to_string()))?;
                if f.arity() == 0 {
                    f.call(&[], self)
                } else {
                    Ok(Value::foreign(f))
                }
            }
        }
    }

    pub fn apply(&mut self, f: &Value, a: Value) -> Result<Value, EvalError> {
        self.tick()?;
        match f {
            Value::Closure(c) => {
                let env = c.env.bind(c.param.name.clone(), a);
                let body = c.body.clone();
                self.eval(&body, &env)
            }
            Value::Foreign(p, args) => {
                let mut all = Vec::with_capacity(args.len() + 1);
                all.extend(args.iter().cloned());
                all.push(a);
                if all.len() >= p.arity() {
                    p.call(&all, self)
                } else {
                    Ok(Value::Foreign(p.clone(), Arc::new(all)))
                }
            }
            other => Err(EvalError::IllTyped(format!(
                "application of non-function {other:?}"
            ))),
        }
    }

    pub fn apply_all(&mut self, f: &Value, args: &[Value]) -> Result<Value, EvalError> {
        let mut cur = f.clone();
        for a in args {
            cur = self.apply(&cur, a.clone())?;
        }
        Ok(cur)
    }
}

/// Canonical inhabitant of a type; out-of-range sequence lookups return it.
pub fn default_term(ty: &FinType) -> Term {
    match ty {
        FinType::Base => Term::Zero,
        FinType::Seq(e) => Term::seq((**e).clone(), Vec::new()),
        FinType::Arrow(a, b) => Term::lam(
            Var {
                name: Name::new("_"),
                ty: (**a).clone(),
            },
            default_term(b),
        ),
    }
}

pub fn default_value(ty: &FinType) -> Value {
    match ty {
        FinType::Base => Value::Nat(0),
        FinType::Seq(e) => Value::seq((**e).clone(), Vec::new()),
        FinType::Arrow(a, b) => Value::Closure(Arc::new(Closure {
            param: Var {
                name: Name::new("_"),
                ty: (**a).clone(),
            },
            body: Arc::new(default_term(b)),
            env: Env::new(),
        })),
    }
}

/// Convert a value back into a closed term.
pub fn readback(v: &Value) -> Term {
    match v {
        Value::Nat(n) => Term::num(*n),
        Value::Seq(elem, items) => Term::seq(elem.clone(), items.iter().map(readback).collect()),
        Value::Closure(c) => {
            let mut sigma = super::term::Subst::new();
            for (name, _) in c.body.free_vars() {
                if name == c.param.name {
                    continue;
                }
                if let Some(val) = c.env.lookup(&name) {
                    sigma.insert(name, readback(val));
                }
            }
            Term::lam(c.param.clone(), c.body.subst(&sigma))
        }
        Value::Foreign(f, args) => {
            Term::apps(Term::prim(&f.name(), f.ty()), args.iter().map(readback))
        }
    }
}

/// Evaluate a closed term to a value term with the builtin primitives.
pub fn eval(t: &Term, fuel: u64) -> Result<Term, EvalError> {
    eval_with(t, fuel, &PrimTable::new())
}

pub fn eval_with(t: &Term, fuel: u64, prims: &PrimTable) -> Result<Term, EvalError> {
    typecheck(t, &TypeEnv::new()).map_err(|e| EvalError::IllTyped(e.to_string()))?;
    let mut m = Machine::new(prims, fuel);
    let v = m.eval(t, &Env::new())?;
    Ok(readback(&v))
}

/// Reference definition of a numeric builtin by primitive recursion.
pub fn builtin_reference(name: &str) -> Option<Term> {
    use super::syntax::parse_term_str;
    let src = match name {
        "add" => "(lam (a N) (lam (b N) (rec N a (lam (i N) (lam (r N) (succ r))) b)))",
        "mul" => "(lam (a N) (lam (b N) (rec N 0 (lam (i N) (lam (r N) (app (prim add) r a))) b)))",
        "pred" => "(lam (a N) (rec N 0 (lam (i N) (lam (r N) i)) a))",
        "monus" => "(lam (a N) (lam (b N) (rec N a (lam (i N) (lam (r N) (app (prim pred) r))) b)))",
        "le" => "(lam (a N) (lam (b N) (rec N 1 (lam (i N) (lam (r N) 0)) (app (prim monus) a b))))",
        "lt" => "(lam (a N) (lam (b N) (app (prim le) (succ a) b)))",
        "eq" => "(lam (a N) (lam (b N) (app (prim mul) (app (prim le) a b) (app (prim le) b a))))",
        "max" => "(lam (a N) (lam (b N) (app (prim add) a (app (prim monus) b a))))",
        "min" => "(lam (a N) (lam (b N) (app (prim monus) a (app (prim monus) a b))))",
        "cond" => "(lam (c N) (lam (a N) (lam (b N) (rec N b (lam (i N) (lam (r N) a)) c))))",
        "pow2" => "(lam (a N) (rec N 1 (lam (i N) (lam (r N) (app (prim add) r r))) a))",
        "div" => "(lam (a N) (lam (b N) (rec N 0 (lam (j N) (lam (r N) (app (prim add) r (app (prim le) (app (prim mul) (succ j) b) a)))) a)))",
        _ => return None,
    };
    Some(parse_term_str(src).expect("reference definitions parse"))
}

/// Replace numeric builtins by their recursive reference definitions.
pub fn expand_builtins(t: &Term) -> Term {
    match t {
        Term::Prim { name, .. } => match builtin_reference(name) {
            Some(r) => expand_builtins(&r),
            None => t.clone(),
        },
        Term::Var(_) | Term::Zero | Term::Num(_) => t.clone(),
        Term::Succ(u) => Term::succ(expand_builtins(u)),
        Term::Len(u) => Term::len(expand_builtins(u)),
        Term::Lam(x, b) => Term::lam(x.clone(), expand_builtins(b)),
        Term::App(f, a) => Term::app(expand_builtins(f), expand_builtins(a)),
        Term::Idx(f, a) => Term::idx(expand_builtins(f), expand_builtins(a)),
        Term::Cat(f, a) => Term::cat(expand_builtins(f), expand_builtins(a)),
        Term::Rec {
            ty,
            base,
            step,
            index,
        } => Term::rec(
            ty.clone(),
            expand_builtins(base),
            expand_builtins(step),
            expand_builtins(index),
        ),
        Term::SeqLit { elem, items } => {
            Term::seq(elem.clone(), items.iter().map(expand_builtins).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::syntax::parse_term_str;

    fn ev(s: &str) -> Term {
        eval(&parse_term_str(s).unwrap(), DEFAULT_FUEL).unwrap()
    }

    #[test]
    fn recursor_base_and_step() {
        assert_eq!(
            ev("(rec N 7 (lam (n N) (lam (m N) (succ m))) 0)"),
            Term::Num(7)
        );
        assert_eq!(
            ev("(rec N 3 (lam (n N) (lam (m N) (succ m))) 2)"),
            Term::Num(5)
        );
    }

    #[test]
    fn values_are_fixed_points() {
        for s in ["0", "5", "(seq N 1 2)", "(lam (x N) x)"] {
            let t = parse_term_str(s).unwrap();
            assert!(ev(s).alpha_eq(&t), "{s}");
        }
    }

    #[test]
    fn fuel_is_enforced() {
        let t = parse_term_str("(rec N 0 (lam (n N) (lam (m N) (succ m))) 100000)").unwrap();
        assert_eq!(eval(&t, 1000), Err(EvalError::FuelExhausted(1000)));
    }

    #[test]
    fn out_of_range_index_defaults() {
        assert_eq!(ev("(idx (seq N 4) 3)"), Term::Zero);
        assert!(ev("(idx (seq (* N)) 0)").alpha_eq(&parse_term_str("(seq N)").unwrap()));
    }

    #[test]
    fn closures_read_back_with_environment() {
        let r = ev("(app (lam (a N) (lam (b N) (app (prim add) a b))) 3)");
        assert!(r.alpha_eq(&parse_term_str("(lam (b N) (app (prim add) 3 b))").unwrap()));
    }

    #[test]
    fn builtins_match_references_small() {
        for name in ["add", "mul", "monus", "le", "lt", "eq", "max", "min", "div"] {
            for a in 0..6u64 {
                for b in 0..6u64 {
                    let direct = Term::apps(
                        Term::prim(name, builtin_type(name).unwrap()),
                        [Term::num(a), Term::num(b)],
                    );
                    let refd = expand_builtins(&direct);
                    assert_eq!(
                        eval(&direct, DEFAULT_FUEL).unwrap(),
                        eval(&refd, DEFAULT_FUEL).unwrap(),
                        "{name} {a} {b}"
                    );
                }
            }
        }
    }
}
