use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::kernel::term::Subst;
use crate::kernel::{FinType, Name, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quant {
    All,
    Ex,
    AllSt,
    ExSt,
    /// `(∀ε≈0)`, sugar for `(∀ε)((∀^st k)|ε|<1/k → ...)`.
    AllInf,
}

impl Quant {
    pub fn keyword(self) -> &'static str {
        match self {
            Quant::All => "forall",
            Quant::Ex => "exists",
            Quant::AllSt => "forall-st",
            Quant::ExSt => "exists-st",
            Quant::AllInf => "forall-inf",
        }
    }

    pub fn is_standard(self) -> bool {
        matches!(self, Quant::AllSt | Quant::ExSt)
    }

    /// The quantifier with the opposite polarity.
    pub fn dual(self) -> Quant {
        match self {
            Quant::All => Quant::Ex,
            Quant::Ex => Quant::All,
            Quant::AllSt => Quant::ExSt,
            Quant::ExSt => Quant::AllSt,
            Quant::AllInf => Quant::AllInf,
        }
    }
}

/// Quantifiers bounded by a finite sequence: `(∀x∈t)` and `(∃x∈t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bounded {
    All,
    Ex,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// Equality; at number type this is `=_0`, at higher types it is read extensionally.
    Eq(Term, Term),
    Le(Term, Term),
    Pred(Arc<str>, Vec<Term>),
    St(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant(Quant, Var, Box<Formula>),
    In(Bounded, Var, Term, Box<Formula>),
    /// A registered definition applied to arguments; expanded by the normalizer.
    Def(Arc<str>, Vec<Term>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Le(a, b)
    }
    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(Arc::from(name), args)
    }
    pub fn st(t: Term) -> Formula {
        Formula::St(t)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn quant(q: Quant, x: Var, body: Formula) -> Formula {
        Formula::Quant(q, x, Box::new(body))
    }
    pub fn forall(x: Var, body: Formula) -> Formula {
        Formula::quant(Quant::All, x, body)
    }
    pub fn exists(x: Var, body: Formula) -> Formula {
        Formula::quant(Quant::Ex, x, body)
    }
    pub fn forall_st(x: Var, body: Formula) -> Formula {
        Formula::quant(Quant::AllSt, x, body)
    }
    pub fn exists_st(x: Var, body: Formula) -> Formula {
        Formula::quant(Quant::ExSt, x, body)
    }
    pub fn forall_in(x: Var, s: Term, body: Formula) -> Formula {
        Formula::In(Bounded::All, x, s, Box::new(body))
    }
    pub fn exists_in(x: Var, s: Term, body: Formula) -> Formula {
        Formula::In(Bounded::Ex, x, s, Box::new(body))
    }
    pub fn def(name: &str, args: Vec<Term>) -> Formula {
        Formula::Def(Arc::from(name), args)
    }

    /// Wrap `body` in one quantifier per variable, first variable outermost.
    pub fn quant_block(q: Quant, vars: &[Var], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::quant(q, v.clone(), acc))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Eq(..)
            | Formula::Le(..)
            | Formula::Pred(..)
            | Formula::St(_)
            | Formula::Def(..) => vec![],
            Formula::Not(a) | Formula::Quant(_, _, a) | Formula::In(_, _, _, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut Formula> {
        match (self, i) {
            (Formula::Not(a), 0) | (Formula::Quant(_, _, a), 0) | (Formula::In(_, _, _, a), 0) => {
                Some(a)
            }
            (Formula::And(a, _), 0) | (Formula::Or(a, _), 0) | (Formula::Implies(a, _), 0) => {
                Some(a)
            }
            (Formula::And(_, b), 1) | (Formula::Or(_, b), 1) | (Formula::Implies(_, b), 1) => {
                Some(b)
            }
            _ => None,
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Formula> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at(rest)),
        }
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Formula> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.child_mut(i).and_then(|c| c.at_mut(rest)),
        }
    }

    /// Replace the subformula at `path`.
    pub fn replaced(&self, path: &[usize], new: Formula) -> Option<Formula> {
        let mut out = self.clone();
        *out.at_mut(path)? = new;
        Some(out)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Terms occurring directly in this node (not in subformulas).
    pub fn node_terms(&self) -> Vec<&Term> {
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) => vec![a, b],
            Formula::Pred(_, args) | Formula::Def(_, args) => args.iter().collect(),
            Formula::St(t) => vec![t],
            Formula::In(_, _, t, _) => vec![t],
            _ => vec![],
        }
    }

    /// No standardness construct anywhere; definitions count as external
    /// unless registered as internal.
    pub fn is_internal(&self) -> bool {
        match self {
            Formula::St(_) => false,
            Formula::Quant(q, _, body) => {
                !matches!(q, Quant::AllSt | Quant::ExSt | Quant::AllInf) && body.is_internal()
            }
            Formula::Def(name, _) => super::defs::lookup(name)
                .map(|d| d.internal)
                .unwrap_or(false),
            _ => self.children().iter().all(|c| c.is_internal()),
        }
    }

    pub fn free_vars(&self) -> BTreeMap<Name, FinType> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeMap<Name, FinType>) {
        let add_term = |t: &Term, bound: &Vec<Name>, out: &mut BTreeMap<Name, FinType>| {
            for (n, ty) in t.free_vars() {
                if !bound.contains(&n) {
                    out.entry(n).or_insert(ty);
                }
            }
        };
        match self {
            Formula::Quant(_, x, body) => {
                bound.push(x.name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::In(_, x, s, body) => {
                add_term(s, bound, out);
                bound.push(x.name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for t in self.node_terms() {
                    add_term(t, bound, out);
                }
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn occurs_free(&self, name: &Name) -> bool {
        self.free_vars().contains_key(name)
    }

    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Quant(_, x, _) | Formula::In(_, x, _, _) => {
                out.insert(x.name.clone());
            }
            _ => {}
        }
        for t in self.node_terms() {
            t.all_names(out);
        }
        for c in self.children() {
            c.all_names(out);
        }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.all_names(&mut s);
        s
    }

    /// Simultaneous capture-avoiding substitution of terms for free variables.
    pub fn subst(&self, sigma: &Subst) -> Formula {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Eq(a, b) => Formula::Eq(a.subst(sigma), b.subst(sigma)),
            Formula::Le(a, b) => Formula::Le(a.subst(sigma), b.subst(sigma)),
            Formula::Pred(p, args) => {
                Formula::Pred(p.clone(), args.iter().map(|t| t.subst(sigma)).collect())
            }
            Formula::Def(p, args) => {
                Formula::Def(p.clone(), args.iter().map(|t| t.subst(sigma)).collect())
            }
            Formula::St(t) => Formula::St(t.subst(sigma)),
            Formula::Not(a) => Formula::not(a.subst(sigma)),
            Formula::And(a, b) => Formula::and(a.subst(sigma), b.subst(sigma)),
            Formula::Or(a, b) => Formula::or(a.subst(sigma), b.subst(sigma)),
            Formula::Implies(a, b) => Formula::implies(a.subst(sigma), b.subst(sigma)),
            Formula::Quant(q, x, body) => {
                let (x2, body2) = subst_binder(x, body, sigma);
                Formula::quant(*q, x2, body2)
            }
            Formula::In(bq, x, s, body) => {
                let s2 = s.subst(sigma);
                let (x2, body2) = subst_binder(x, body, sigma);
                Formula::In(*bq, x2, s2, Box::new(body2))
            }
        }
    }

    pub fn subst1(&self, x: &Name, t: &Term) -> Formula {
        let mut sigma = Subst::new();
        sigma.insert(x.clone(), t.clone());
        self.subst(&sigma)
    }

    /// Rename a free variable.
    pub fn rename_free(&self, from: &Var, to: &Var) -> Formula {
        self.subst1(&from.name, &to.term())
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha(self, other, &mut Subst::new(), &mut Subst::new(), &mut 0)
    }
}

fn subst_binder(x: &Var, body: &Formula, sigma: &Subst) -> (Var, Formula) {
    let mut inner = sigma.clone();
    inner.remove(&x.name);
    let fv = body.free_vars();
    inner.retain(|k, _| fv.contains_key(k));
    if inner.is_empty() {
        return (x.clone(), body.clone());
    }
    let range: BTreeSet<Name> = inner
        .values()
        .flat_map(|t| t.free_vars().into_keys())
        .collect();
    if range.contains(&x.name) {
        let mut avoid = range;
        body.all_names(&mut avoid);
        avoid.extend(inner.keys().cloned());
        let fresh = x.renamed(x.name.fresh(&avoid));
        inner.insert(x.name.clone(), fresh.term());
        let b = body.subst(&inner);
        (fresh, b)
    } else {
        (x.clone(), body.subst(&inner))
    }
}

/// Alpha-equivalence by renaming both sides' binders to shared canonical names.
fn alpha(a: &Formula, b: &Formula, ea: &mut Subst, eb: &mut Subst, next: &mut u32) -> bool {
    let canon = |next: &mut u32, ty: &FinType| {
        *next += 1;
        Var {
            name: Name {
                base: Arc::from("#"),
                tick: *next,
            },
            ty: ty.clone(),
        }
    };
    let tm = |t: &Term, e: &Subst| t.subst(e);
    match (a, b) {
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) | (Formula::Le(a1, a2), Formula::Le(b1, b2)) => {
            tm(a1, ea).alpha_eq(&tm(b1, eb)) && tm(a2, ea).alpha_eq(&tm(b2, eb))
        }
        (Formula::Pred(p, xs), Formula::Pred(q, ys))
        | (Formula::Def(p, xs), Formula::Def(q, ys)) => {
            p == q
                && xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys)
                    .all(|(x, y)| tm(x, ea).alpha_eq(&tm(y, eb)))
        }
        (Formula::St(x), Formula::St(y)) => tm(x, ea).alpha_eq(&tm(y, eb)),
        (Formula::Not(x), Formula::Not(y)) => alpha(x, y, ea, eb, next),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => {
            alpha(a1, b1, ea, eb, next) && alpha(a2, b2, ea, eb, next)
        }
        (Formula::Quant(q1, x1, body1), Formula::Quant(q2, x2, body2)) => {
            if q1 != q2 || x1.ty != x2.ty {
                return false;
            }
            let c = canon(next, &x1.ty);
            let (sa, sb) = (
                ea.insert(x1.name.clone(), c.term()),
                eb.insert(x2.name.clone(), c.term()),
            );
            let r = alpha(body1, body2, ea, eb, next);
            restore(ea, &x1.name, sa);
            restore(eb, &x2.name, sb);
            r
        }
        (Formula::In(q1, x1, s1, body1), Formula::In(q2, x2, s2, body2)) => {
            if q1 != q2 || x1.ty != x2.ty || !tm(s1, ea).alpha_eq(&tm(s2, eb)) {
                return false;
            }
            let c = canon(next, &x1.ty);
            let (sa, sb) = (
                ea.insert(x1.name.clone(), c.term()),
                eb.insert(x2.name.clone(), c.term()),
            );
            let r = alpha(body1, body2, ea, eb, next);
            restore(ea, &x1.name, sa);
            restore(eb, &x2.name, sb);
            r
        }
        _ => false,
    }
}

fn restore(e: &mut Subst, name: &Name, old: Option<Term>) {
    match old {
        Some(t) => {
            e.insert(name.clone(), t);
        }
        None => {
            e.remove(name);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::nat("x")
    }
    fn y() -> Var {
        Var::nat("y")
    }

    #[test]
    fn internality() {
        assert!(Formula::eq(x().term(), y().term()).is_internal());
        assert!(!Formula::st(x().term()).is_internal());
        assert!(!Formula::forall_st(x(), Formula::eq(x().term(), x().term())).is_internal());
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = Formula::forall(y(), Formula::eq(x().term(), y().term()));
        let g = f.subst1(&x().name, &y().term());
        match &g {
            Formula::Quant(_, v, body) => {
                assert_eq!(v.name.to_string(), "y'");
                assert_eq!(**body, Formula::eq(y().term(), Var::nat("y'").term()));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn alpha_equivalence() {
        let f = Formula::forall(
            x(),
            Formula::exists(y(), Formula::le(x().term(), y().term())),
        );
        let g = Formula::forall(
            y(),
            Formula::exists(x(), Formula::le(y().term(), x().term())),
        );
        let h = Formula::forall(
            y(),
            Formula::exists(x(), Formula::le(x().term(), y().term())),
        );
        assert!(f.alpha_eq(&g));
        assert!(!f.alpha_eq(&h));
    }

    #[test]
    fn free_variables_of_bounded_quantifiers() {
        let s = Var::new("s", FinType::seq(FinType::nat()));
        let f = Formula::exists_in(x(), s.term(), Formula::eq(x().term(), y().term()));
        let fv: Vec<String> = f.free_vars().keys().map(|n| n.to_string()).collect();
        assert_eq!(fv, vec!["s", "y"]);
    }
}
