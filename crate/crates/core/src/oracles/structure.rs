//! Finite structures: a testing semantics in which every quantifier ranges
//! over an explicit finite domain.

use std::any::Any;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use super::atoms::{eval_atom, AtomConfig};
use super::riemann::grid_spread;
use super::scalar::{below_inv, Q};
use super::OracleError;
use crate::formula::{expand_definition, is_bounded_number_quantifier, Bounded, Formula, Quant};
use crate::kernel::reals::{exact, real_value};
use crate::kernel::{
    default_value, readback, Env, EvalError, FinType, Foreign, Machine, PrimTable, Term, Value, Var,
};
use crate::normal_form::Rule;

/// A finite function given by its graph; arguments outside the graph map to
/// the default value of the codomain.
#[derive(Debug, Clone)]
pub struct TableFn {
    pub ty: FinType,
    pub keys: Arc<Vec<Value>>,
    pub vals: Vec<Value>,
}

impl TableFn {
    pub fn lookup(&self, a: &Value) -> Value {
        match self.keys.iter().position(|k| k.same(a)) {
            Some(i) => self.vals[i].clone(),
            None => default_value(self.ty.codomain().expect("arrow")),
        }
    }
}

impl Foreign for TableFn {
    fn name(&self) -> String {
        let body: Vec<String> = self.vals.iter().map(|v| readback(v).to_string()).collect();
        format!("table[{}]", body.join(","))
    }
    fn ty(&self) -> FinType {
        self.ty.clone()
    }
    fn arity(&self) -> usize {
        1
    }
    fn call(&self, args: &[Value], _m: &mut Machine) -> Result<Value, EvalError> {
        Ok(self.lookup(&args[0]))
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub struct FiniteStructure {
    /// The number domain is `0..base_size`.
    pub base_size: u64,
    /// `st(n) ⇔ n < K`; `None` reads every object as standard.
    pub threshold: Option<u64>,
    pub seq_len: usize,
    /// Largest domain built by enumeration.
    pub table_limit: usize,
    pub fuel: u64,
    pub atoms: AtomConfig,
    pub prims: PrimTable,
    /// Denominator of the grid on which partition pairs are scanned.
    pub partition_denom: Option<u64>,
    domains: HashMap<FinType, Arc<Vec<Value>>>,
    sorts: HashMap<String, Arc<Vec<Value>>>,
    cache: Mutex<HashMap<FinType, Arc<Vec<Value>>>>,
}

impl Clone for FiniteStructure {
    fn clone(&self) -> Self {
        FiniteStructure {
            base_size: self.base_size,
            threshold: self.threshold,
            seq_len: self.seq_len,
            table_limit: self.table_limit,
            fuel: self.fuel,
            atoms: self.atoms.clone(),
            prims: self.prims.clone(),
            partition_denom: self.partition_denom,
            domains: self.domains.clone(),
            sorts: self.sorts.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl FiniteStructure {
    /// `threshold` is clamped to `base_size`.
    pub fn new(base_size: u64, threshold: Option<u64>) -> FiniteStructure {
        FiniteStructure {
            base_size,
            threshold: threshold.map(|k| k.min(base_size)),
            seq_len: 2,
            table_limit: 4096,
            fuel: crate::kernel::DEFAULT_FUEL,
            atoms: AtomConfig::default(),
            prims: PrimTable::new(),
            partition_denom: None,
            domains: HashMap::new(),
            sorts: HashMap::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `K = M`: every element of the number domain is standard.
    pub fn degenerate(base_size: u64) -> FiniteStructure {
        FiniteStructure::new(base_size, Some(base_size))
    }

    pub fn random(rng: &mut impl Rng, max_size: u64) -> FiniteStructure {
        let m = rng.gen_range(1..=max_size);
        let mut s = FiniteStructure::degenerate(m);
        s.atoms.seed = rng.gen();
        s.seq_len = rng.gen_range(0..=2);
        s
    }

    pub fn with_domain(mut self, ty: FinType, values: Vec<Value>) -> Self {
        self.domains.insert(ty, Arc::new(values));
        self
    }

    /// Put `values` in front of the domain of `ty`, which may be unrepresentable.
    pub fn with_candidates(self, ty: &FinType, values: Vec<Value>) -> Result<Self, OracleError> {
        let mut all = values;
        match self.domain(ty) {
            Ok(d) => all.extend(d.iter().cloned()),
            Err(OracleError::Unrepresentable(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(self.with_domain(ty.clone(), all))
    }

    /// Variables guarded by the one-place atom `atom` range over `values`.
    pub fn with_sort(mut self, atom: &str, values: Vec<Value>) -> Self {
        self.sorts.insert(atom.to_string(), Arc::new(values));
        self
    }

    pub fn with_prims(mut self, prims: PrimTable) -> Self {
        self.prims = prims;
        self
    }

    pub fn domain(&self, ty: &FinType) -> Result<Arc<Vec<Value>>, OracleError> {
        if let Some(d) = self.domains.get(ty) {
            return Ok(d.clone());
        }
        if let Some(d) = self.cache.lock().expect("cache").get(ty) {
            return Ok(d.clone());
        }
        let too_big = || OracleError::Unrepresentable(ty.clone());
        let values = match ty {
            FinType::Base => (0..self.base_size).map(Value::Nat).collect(),
            FinType::Seq(e) => {
                let elems = self.domain(e)?;
                let mut out = vec![Value::seq((**e).clone(), vec![])];
                let mut layer: Vec<Vec<Value>> = vec![vec![]];
                for _ in 0..self.seq_len {
                    let mut next = Vec::new();
                    for s in &layer {
                        for x in elems.iter() {
                            let mut t = s.clone();
                            t.push(x.clone());
                            next.push(t);
                        }
                        if next.len() + out.len() > self.table_limit {
                            return Err(too_big());
                        }
                    }
                    out.extend(next.iter().map(|s| Value::seq((**e).clone(), s.clone())));
                    layer = next;
                }
                out
            }
            FinType::Arrow(a, b) => {
                let keys = self.domain(a)?;
                let vals = self.domain(b)?;
                let count = (vals.len() as f64).powi(keys.len() as i32);
                if count > self.table_limit as f64 {
                    return Err(too_big());
                }
                let mut out = Vec::new();
                let mut idx = vec![0usize; keys.len()];
                loop {
                    let table = TableFn {
                        ty: ty.clone(),
                        keys: keys.clone(),
                        vals: idx.iter().map(|&i| vals[i].clone()).collect(),
                    };
                    out.push(Value::foreign(Arc::new(table)));
                    // odometer
                    let mut i = 0;
                    while i < idx.len() {
                        idx[i] += 1;
                        if idx[i] < vals.len() {
                            break;
                        }
                        idx[i] = 0;
                        i += 1;
                    }
                    if i == idx.len() || vals.is_empty() {
                        break;
                    }
                }
                out
            }
        };
        let values = Arc::new(values);
        self.cache
            .lock()
            .expect("cache")
            .insert(ty.clone(), values.clone());
        Ok(values)
    }

    pub fn is_standard(&self, v: &Value) -> bool {
        let Some(k) = self.threshold else { return true };
        match v {
            Value::Nat(n) => *n < k,
            Value::Seq(_, items) => items.iter().all(|x| self.is_standard(x)),
            Value::Foreign(..) => match v.foreign_ref::<TableFn>() {
                Some(t) => t.vals.iter().all(|x| self.is_standard(x)),
                None => true,
            },
            Value::Closure(_) => true,
        }
    }

    /// Truth of a closed formula.
    pub fn eval_closed(&self, f: &Formula) -> Result<bool, OracleError> {
        if let Some((name, _)) = f.free_vars().into_iter().next() {
            return Err(OracleError::Free(name.to_string()));
        }
        self.eval_formula(f, &Env::new())
    }

    /// Truth under an assignment of the free variables.
    pub fn eval_formula(&self, f: &Formula, env: &Env) -> Result<bool, OracleError> {
        let mut m = Machine::new(&self.prims, self.fuel);
        self.eval(f, env, &mut m)
    }

    fn term(&self, t: &Term, env: &Env, m: &mut Machine) -> Result<Value, OracleError> {
        Ok(m.eval(t, env)?)
    }

    fn eval(&self, f: &Formula, env: &Env, m: &mut Machine) -> Result<bool, OracleError> {
        match f {
            Formula::Eq(a, b) => {
                let (x, y) = (self.term(a, env, m)?, self.term(b, env, m)?);
                self.ext_eq(&x, &y, m)
            }
            Formula::Le(a, b) => {
                Ok(self.term(a, env, m)?.as_nat()? <= self.term(b, env, m)?.as_nat()?)
            }
            Formula::Pred(name, args) => {
                let vals: Vec<Value> = args
                    .iter()
                    .map(|t| self.term(t, env, m))
                    .collect::<Result<_, _>>()?;
                eval_atom(name, &vals, &self.atoms, m)
            }
            Formula::St(t) => Ok(self.is_standard(&self.term(t, env, m)?)),
            Formula::Not(a) => Ok(!self.eval(a, env, m)?),
            Formula::And(a, b) => Ok(self.eval(a, env, m)? && self.eval(b, env, m)?),
            Formula::Or(a, b) => Ok(self.eval(a, env, m)? || self.eval(b, env, m)?),
            Formula::Implies(a, b) => Ok(!self.eval(a, env, m)? || self.eval(b, env, m)?),
            Formula::Def(name, args) => {
                let e = expand_definition(name, args)
                    .map_err(|e| OracleError::BadAtom(e.to_string()))?;
                self.eval(&e, env, m)
            }
            Formula::In(bq, x, s, body) => {
                let seq = self.term(s, env, m)?;
                for v in seq.as_seq()? {
                    let r = self.eval(body, &env.bind(x.name.clone(), v.clone()), m)?;
                    match bq {
                        Bounded::All if !r => return Ok(false),
                        Bounded::Ex if r => return Ok(true),
                        _ => {}
                    }
                }
                Ok(*bq == Bounded::All)
            }
            Formula::Quant(Quant::AllInf, ..) => {
                let unfolded = Rule::Infinitesimal
                    .apply(f, &[])
                    .map_err(|e| OracleError::BadAtom(e.to_string()))?;
                self.eval(&unfolded, env, m)
            }
            Formula::Quant(q, x, body) => {
                if *q == Quant::All {
                    if let Some(r) = self.riemann_pairs(f, env, m)? {
                        return Ok(r);
                    }
                }
                let universal = matches!(q, Quant::All | Quant::AllSt);
                let values = self.range(f, *q, x, body, env, m)?;
                for v in values.iter() {
                    if q.is_standard() && !self.is_standard(v) {
                        continue;
                    }
                    let r = self.eval(body, &env.bind(x.name.clone(), v.clone()), m)?;
                    if universal && !r {
                        return Ok(false);
                    }
                    if !universal && r {
                        return Ok(true);
                    }
                }
                Ok(universal)
            }
        }
    }

    fn range(
        &self,
        f: &Formula,
        q: Quant,
        x: &Var,
        body: &Formula,
        env: &Env,
        m: &mut Machine,
    ) -> Result<Arc<Vec<Value>>, OracleError> {
        if is_bounded_number_quantifier(f) {
            let guard = match body {
                Formula::Implies(g, _) | Formula::And(g, _) => g,
                _ => unreachable!("bounded quantifier"),
            };
            let Formula::Le(_, t) = &**guard else {
                unreachable!("bounded quantifier")
            };
            let hi = self.term(t, env, m)?.as_nat()?;
            return Ok(Arc::new((0..=hi).map(Value::Nat).collect()));
        }
        if let Some(d) = self.guard_sort(q, x, body) {
            return Ok(d);
        }
        self.domain(&x.ty)
    }

    fn guard_sort(&self, q: Quant, x: &Var, body: &Formula) -> Option<Arc<Vec<Value>>> {
        let mut cur = body;
        while let Formula::Quant(q2, y, b) = cur {
            if *q2 != q || y.name == x.name {
                break;
            }
            cur = b;
        }
        let guard = match (q, cur) {
            (Quant::All | Quant::AllSt, Formula::Implies(g, _)) => g,
            (Quant::Ex | Quant::ExSt, Formula::And(g, _)) => g,
            _ => return None,
        };
        let mut stack = vec![&**guard];
        while let Some(g) = stack.pop() {
            match g {
                Formula::And(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Formula::Pred(name, args) if args.len() == 1 => {
                    if matches!(&args[0], Term::Var(v) if v.name == x.name) {
                        if let Some(d) = self.sorts.get(&**name) {
                            return Some(d.clone());
                        }
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// `(∀p)(∀q)(partition p ∧ partition q → (mesh-lt p N ∧ mesh-lt q N → riemann-near f p q k))`
    /// decided over all grid partitions by the exact spread computation.
    fn riemann_pairs(
        &self,
        f: &Formula,
        env: &Env,
        m: &mut Machine,
    ) -> Result<Option<bool>, OracleError> {
        let Some(denom) = self.partition_denom else {
            return Ok(None);
        };
        let Formula::Quant(Quant::All, p, b1) = f else {
            return Ok(None);
        };
        let Formula::Quant(Quant::All, q, b2) = &**b1 else {
            return Ok(None);
        };
        let Formula::Implies(g1, rest) = &**b2 else {
            return Ok(None);
        };
        let Formula::Implies(g2, concl) = &**rest else {
            return Ok(None);
        };
        let is_var = |t: &Term, v: &Var| matches!(t, Term::Var(w) if w.name == v.name);
        let pred = |g: &Formula, name: &str| match g {
            Formula::Pred(n, args) if &**n == name => Some(args.clone()),
            _ => None,
        };
        let (Formula::And(a1, a2), Formula::And(m1, m2)) = (&**g1, &**g2) else {
            return Ok(None);
        };
        let (Some(pa), Some(pb)) = (pred(a1, "partition"), pred(a2, "partition")) else {
            return Ok(None);
        };
        let (Some(ma), Some(mb)) = (pred(m1, "mesh-lt"), pred(m2, "mesh-lt")) else {
            return Ok(None);
        };
        let Some(rn) = pred(concl, "riemann-near") else {
            return Ok(None);
        };
        let shape = is_var(&pa[0], p)
            && is_var(&pb[0], q)
            && is_var(&ma[0], p)
            && is_var(&mb[0], q)
            && ma[1] == mb[1]
            && is_var(&rn[1], p)
            && is_var(&rn[2], q);
        let free_of_pq = |t: &Term| !t.occurs_free(&p.name) && !t.occurs_free(&q.name);
        if !shape || !free_of_pq(&ma[1]) || !free_of_pq(&rn[0]) || !free_of_pq(&rn[3]) {
            return Ok(None);
        }
        let n = self.term(&ma[1], env, m)?.as_nat()?;
        let k = self.term(&rn[3], env, m)?.as_nat()?;
        let fv = self.term(&rn[0], env, m)?;
        let mut samples = Vec::with_capacity(denom as usize + 1);
        for j in 0..=denom {
            let y = m.apply(&fv, real_value(Q::new(j.into(), denom.into())))?;
            samples.push(super::atoms::real(&y)?);
        }
        Ok(Some(match grid_spread(&samples, n) {
            None => true,
            Some(spread) => below_inv(&spread, k),
        }))
    }

    fn ext_eq(&self, a: &Value, b: &Value, m: &mut Machine) -> Result<bool, OracleError> {
        match (a, b) {
            (Value::Nat(x), Value::Nat(y)) => Ok(x == y),
            (Value::Seq(_, xs), Value::Seq(_, ys)) => {
                if xs.len() != ys.len() {
                    return Ok(false);
                }
                for (x, y) in xs.iter().zip(ys.iter()) {
                    if !self.ext_eq(x, y, m)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => {
                if let (Some(x), Some(y)) = (exact(a), exact(b)) {
                    return Ok(x == y);
                }
                let ty = arg_type(a).or_else(|| arg_type(b)).ok_or_else(|| {
                    OracleError::Eval(EvalError::IllTyped(format!("equality of {a:?} and {b:?}")))
                })?;
                for d in self.domain(&ty)?.iter() {
                    let (x, y) = (m.apply(a, d.clone())?, m.apply(b, d.clone())?);
                    if !self.ext_eq(&x, &y, m)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

fn arg_type(v: &Value) -> Option<FinType> {
    match v {
        Value::Closure(c) => Some(c.param.ty.clone()),
        Value::Foreign(f, args) => {
            let ty = f.ty();
            let (doms, _) = ty.uncurry();
            doms.get(args.len()).map(|t| (*t).clone())
        }
        _ => None,
    }
}

/// Truth of a closed formula in `s`.
pub fn eval_formula(f: &Formula, s: &FiniteStructure) -> Result<bool, OracleError> {
    s.eval_closed(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn holds(s: &FiniteStructure, text: &str) -> bool {
        eval_formula(&parse_formula(text).unwrap(), s).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let s = FiniteStructure::new(8, Some(5));
        assert!(holds(&s, "(st 3)"));
        assert!(!holds(&s, "(st 6)"));
        assert!(holds(&s, "(forall-st ((x N)) (<=0 (succ x) 5))"));
        assert!(!holds(&s, "(forall ((x N)) (<=0 (succ x) 5))"));
        assert!(holds(&s, "(exists ((x N)) (not (st x)))"));
    }

    #[test]
    fn degenerate_reads_everything_standard() {
        let s = FiniteStructure::degenerate(4);
        assert!(holds(&s, "(forall ((x N)) (st x))"));
        assert!(holds(&s, "(forall ((f (-> N N))) (st f))"));
        let s = FiniteStructure::new(4, None);
        assert!(holds(&s, "(st 100)"));
    }

    #[test]
    fn tables_and_extensionality() {
        let s = FiniteStructure::degenerate(3);
        assert_eq!(
            s.domain(&FinType::arrow(FinType::nat(), FinType::nat()))
                .unwrap()
                .len(),
            27
        );
        assert!(holds(
            &s,
            "(forall ((f (-> N N))) (exists ((g (-> N N))) (=0 f g)))"
        ));
        assert!(holds(
            &s,
            "(exists ((f (-> N N))) (forall ((x N)) (=0 (app f x) 2)))"
        ));
        assert!(!holds(&s, "(forall ((f (-> N N)) (g (-> N N))) (=0 f g))"));
        // sequences up to length 2 over 3 numbers
        assert_eq!(
            s.domain(&FinType::seq(FinType::nat())).unwrap().len(),
            1 + 3 + 9
        );
    }

    #[test]
    fn bounded_quantifiers_leave_the_domain() {
        let s = FiniteStructure::degenerate(2);
        assert!(holds(&s, "(exists ((i N)) (and (<=0 i 7) (=0 i 7)))"));
        assert!(!holds(&s, "(exists ((i N)) (=0 i 7))"));
    }

    #[test]
    fn unrepresentable() {
        let s = FiniteStructure::degenerate(5);
        let f = parse_formula("(forall ((F (-> (-> N N) N))) (=0 0 0))").unwrap();
        assert!(matches!(
            eval_formula(&f, &s),
            Err(OracleError::Unrepresentable(_))
        ));
    }

    #[test]
    fn infinitesimal_quantifier() {
        let grid: Vec<Value> = (0..=4)
            .map(|j| crate::kernel::reals::rat_value(j, 4))
            .collect();
        let s = FiniteStructure::new(6, Some(3)).with_domain(FinType::real(), grid);
        // every real of the grid that is below 1/k for all standard k is 0
        assert!(holds(&s, "(forall-inf (e) (<=0 (app e 0) 0))"));
    }
}
