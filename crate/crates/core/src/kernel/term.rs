use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use super::types::FinType;

/// A variable name: a base string plus a freshening counter, printed as primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    pub base: Arc<str>,
    pub tick: u32,
}

impl Name {
    pub fn new(base: &str) -> Name {
        Name {
            base: Arc::from(base),
            tick: 0,
        }
    }

    /// Parse `y''` into base `y` and tick 2.
    pub fn parse(s: &str) -> Name {
        let trimmed = s.trim_end_matches('\'');
        let tick = (s.len() - trimmed.len()) as u32;
        if trimmed.is_empty() {
            return Name {
                base: Arc::from(s),
                tick: 0,
            };
        }
        Name {
            base: Arc::from(trimmed),
            tick,
        }
    }

    pub fn bumped(&self, by: u32) -> Name {
        Name {
            base: self.base.clone(),
            tick: self.tick + by,
        }
    }

    /// First variant of `self` (same base, larger tick) not in `avoid`.
    pub fn fresh(&self, avoid: &BTreeSet<Name>) -> Name {
        let mut n = self.clone();
        while avoid.contains(&n) {
            n = n.bumped(1);
        }
        n
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        for _ in 0..self.tick {
            f.write_str("'")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Name,
    pub ty: FinType,
}

impl Var {
    pub fn new(name: &str, ty: FinType) -> Var {
        Var {
            name: Name::parse(name),
            ty,
        }
    }

    pub fn nat(name: &str) -> Var {
        Var::new(name, FinType::Base)
    }

    pub fn term(&self) -> Term {
        Term::Var(self.clone())
    }

    pub fn renamed(&self, name: Name) -> Var {
        Var {
            name,
            ty: self.ty.clone(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Gödel-T terms over finite types, with native finite sequences and named primitives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Zero,
    Succ(Arc<Term>),
    Num(u64),
    Lam(Var, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Rec {
        ty: FinType,
        base: Arc<Term>,
        step: Arc<Term>,
        index: Arc<Term>,
    },
    SeqLit {
        elem: FinType,
        items: Vec<Term>,
    },
    Len(Arc<Term>),
    Idx(Arc<Term>, Arc<Term>),
    Cat(Arc<Term>, Arc<Term>),
    /// Named primitive constant; builtins are definable by recursion, see `eval::builtin_reference`.
    Prim {
        name: Arc<str>,
        ty: FinType,
    },
}

pub type Subst = HashMap<Name, Term>;

impl Term {
    pub fn var(name: &str, ty: FinType) -> Term {
        Term::Var(Var::new(name, ty))
    }

    pub fn num(n: u64) -> Term {
        if n == 0 {
            Term::Zero
        } else {
            Term::Num(n)
        }
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Arc::new(t))
    }

    pub fn lam(x: Var, body: Term) -> Term {
        Term::Lam(x, Arc::new(body))
    }

    pub fn lams(xs: &[Var], body: Term) -> Term {
        xs.iter()
            .rev()
            .fold(body, |acc, x| Term::lam(x.clone(), acc))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn rec(ty: FinType, base: Term, step: Term, index: Term) -> Term {
        Term::Rec {
            ty,
            base: Arc::new(base),
            step: Arc::new(step),
            index: Arc::new(index),
        }
    }

    pub fn seq(elem: FinType, items: Vec<Term>) -> Term {
        Term::SeqLit { elem, items }
    }

    pub fn len(t: Term) -> Term {
        Term::Len(Arc::new(t))
    }

    pub fn idx(s: Term, i: Term) -> Term {
        Term::Idx(Arc::new(s), Arc::new(i))
    }

    pub fn cat(a: Term, b: Term) -> Term {
        Term::Cat(Arc::new(a), Arc::new(b))
    }

    pub fn prim(name: &str, ty: FinType) -> Term {
        Term::Prim {
            name: Arc::from(name),
            ty,
        }
    }

    /// Value of a closed numeral (`0`, literal, or successors of either).
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Term::Zero => Some(0),
            Term::Num(n) => Some(*n),
            Term::Succ(t) => t.as_numeral().and_then(|n| n.checked_add(1)),
            _ => None,
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(a.as_ref());
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn free_vars(&self) -> BTreeMap<Name, FinType> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeMap<Name, FinType>) {
        match self {
            Term::Var(v) => {
                if !bound.contains(&v.name) {
                    out.entry(v.name.clone()).or_insert_with(|| v.ty.clone());
                }
            }
            Term::Zero | Term::Num(_) | Term::Prim { .. } => {}
            Term::Succ(t) | Term::Len(t) => t.collect_free(bound, out),
            Term::Lam(x, b) => {
                bound.push(x.name.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Idx(a, b) | Term::Cat(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Rec {
                base, step, index, ..
            } => {
                base.collect_free(bound, out);
                step.collect_free(bound, out);
                index.collect_free(bound, out);
            }
            Term::SeqLit { items, .. } => {
                for it in items {
                    it.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn occurs_free(&self, name: &Name) -> bool {
        self.free_vars().contains_key(name)
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::Zero | Term::Num(_) | Term::Prim { .. } => {}
            Term::Succ(t) | Term::Len(t) => t.all_names(out),
            Term::Lam(x, b) => {
                out.insert(x.name.clone());
                b.all_names(out);
            }
            Term::App(a, b) | Term::Idx(a, b) | Term::Cat(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::Rec {
                base, step, index, ..
            } => {
                base.all_names(out);
                step.all_names(out);
                index.all_names(out);
            }
            Term::SeqLit { items, .. } => items.iter().for_each(|t| t.all_names(out)),
        }
    }

    /// Simultaneous capture-avoiding substitution; types are not checked here.
    pub fn subst(&self, sigma: &Subst) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        let mut range_fv = BTreeSet::new();
        for t in sigma.values() {
            range_fv.extend(t.free_vars().into_keys());
        }
        self.subst_inner(sigma, &range_fv)
    }

    fn subst_inner(&self, sigma: &Subst, range_fv: &BTreeSet<Name>) -> Term {
        match self {
            Term::Var(v) => sigma.get(&v.name).cloned().unwrap_or_else(|| self.clone()),
            Term::Zero | Term::Num(_) | Term::Prim { .. } => self.clone(),
            Term::Succ(t) => Term::succ(t.subst_inner(sigma, range_fv)),
            Term::Len(t) => Term::len(t.subst_inner(sigma, range_fv)),
            Term::App(a, b) => Term::app(
                a.subst_inner(sigma, range_fv),
                b.subst_inner(sigma, range_fv),
            ),
            Term::Idx(a, b) => Term::idx(
                a.subst_inner(sigma, range_fv),
                b.subst_inner(sigma, range_fv),
            ),
            Term::Cat(a, b) => Term::cat(
                a.subst_inner(sigma, range_fv),
                b.subst_inner(sigma, range_fv),
            ),
            Term::Rec {
                ty,
                base,
                step,
                index,
            } => Term::rec(
                ty.clone(),
                base.subst_inner(sigma, range_fv),
                step.subst_inner(sigma, range_fv),
                index.subst_inner(sigma, range_fv),
            ),
            Term::SeqLit { elem, items } => Term::seq(
                elem.clone(),
                items
                    .iter()
                    .map(|t| t.subst_inner(sigma, range_fv))
                    .collect(),
            ),
            Term::Lam(x, body) => {
                let mut inner: Subst = sigma.clone();
                inner.remove(&x.name);
                let fv = body.free_vars();
                inner.retain(|k, _| fv.contains_key(k));
                if inner.is_empty() {
                    return self.clone();
                }
                let inner_range: BTreeSet<Name> = inner
                    .values()
                    .flat_map(|t| t.free_vars().into_keys())
                    .collect();
                if inner_range.contains(&x.name) {
                    let mut avoid = inner_range.clone();
                    body.all_names(&mut avoid);
                    avoid.extend(inner.keys().cloned());
                    let fresh = x.renamed(x.name.fresh(&avoid));
                    inner.insert(x.name.clone(), fresh.term());
                    let inner_range2: BTreeSet<Name> = inner
                        .values()
                        .flat_map(|t| t.free_vars().into_keys())
                        .collect();
                    Term::lam(fresh, body.subst_inner(&inner, &inner_range2))
                } else {
                    Term::lam(x.clone(), body.subst_inner(&inner, &inner_range))
                }
            }
        }
    }

    /// Substitute `s` for the free occurrences of `x`.
    pub fn subst1(&self, x: &Name, s: &Term) -> Term {
        let mut sigma = Subst::new();
        sigma.insert(x.clone(), s.clone());
        self.subst(&sigma)
    }

    /// Equality up to renaming of bound variables; numerals compare by value.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn alpha(a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    if let (Some(x), Some(y)) = (a.as_numeral(), b.as_numeral()) {
        return x == y;
    }
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let ix = ea.iter().rposition(|n| *n == x.name);
            let iy = eb.iter().rposition(|n| *n == y.name);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j && x.ty == y.ty,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Succ(x), Term::Succ(y)) | (Term::Len(x), Term::Len(y)) => alpha(x, y, ea, eb),
        (Term::Lam(x, bx), Term::Lam(y, by)) => {
            if x.ty != y.ty {
                return false;
            }
            ea.push(x.name.clone());
            eb.push(y.name.clone());
            let r = alpha(bx, by, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Term::App(f, x), Term::App(g, y))
        | (Term::Idx(f, x), Term::Idx(g, y))
        | (Term::Cat(f, x), Term::Cat(g, y)) => alpha(f, g, ea, eb) && alpha(x, y, ea, eb),
        (
            Term::Rec {
                ty: t1,
                base: b1,
                step: s1,
                index: i1,
            },
            Term::Rec {
                ty: t2,
                base: b2,
                step: s2,
                index: i2,
            },
        ) => t1 == t2 && alpha(b1, b2, ea, eb) && alpha(s1, s2, ea, eb) && alpha(i1, i2, ea, eb),
        (
            Term::SeqLit {
                elem: e1,
                items: x1,
            },
            Term::SeqLit {
                elem: e2,
                items: x2,
            },
        ) => {
            e1 == e2 && x1.len() == x2.len() && x1.iter().zip(x2).all(|(p, q)| alpha(p, q, ea, eb))
        }
        (Term::Prim { name: n1, ty: t1 }, Term::Prim { name: n2, ty: t2 }) => n1 == n2 && t1 == t2,
        _ => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_numeral() {
            return write!(f, "{n}");
        }
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::Zero | Term::Num(_) => unreachable!(),
            Term::Succ(t) => write!(f, "(succ {t})"),
            Term::Lam(x, b) => write!(f, "(lam ({} {}) {b})", x.name, x.ty),
            Term::App(..) => {
                let (head, args) = self.spine();
                write!(f, "(app {head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Rec {
                ty,
                base,
                step,
                index,
            } => write!(f, "(rec {ty} {base} {step} {index})"),
            Term::SeqLit { elem, items } => {
                write!(f, "(seq {elem}")?;
                for it in items {
                    write!(f, " {it}")?;
                }
                f.write_str(")")
            }
            Term::Len(t) => write!(f, "(len {t})"),
            Term::Idx(s, i) => write!(f, "(idx {s} {i})"),
            Term::Cat(a, b) => write!(f, "(cat {a} {b})"),
            Term::Prim { name, ty } => {
                if super::eval::builtin_type(name).as_ref() == Some(ty) {
                    write!(f, "(prim {name})")
                } else {
                    write!(f, "(prim {name} {ty})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_ticks() {
        let n = Name::parse("y''");
        assert_eq!(&*n.base, "y");
        assert_eq!(n.tick, 2);
        assert_eq!(n.to_string(), "y''");
    }

    #[test]
    fn capture_avoiding_rename() {
        let x = Var::nat("x");
        let y = Var::nat("y");
        let t = Term::lam(y.clone(), x.term());
        let r = t.subst1(&x.name, &y.term());
        assert_eq!(r, Term::lam(Var::nat("y'"), y.term()));
    }

    #[test]
    fn shadowing_is_respected() {
        let x = Var::nat("x");
        let t = Term::lam(x.clone(), x.term());
        assert_eq!(t.subst1(&x.name, &Term::Zero), t);
    }

    #[test]
    fn alpha_identifies_numerals_and_binders() {
        assert!(Term::succ(Term::succ(Term::Zero)).alpha_eq(&Term::Num(2)));
        let a = Term::lam(Var::nat("a"), Var::nat("a").term());
        let b = Term::lam(Var::nat("b"), Var::nat("b").term());
        assert!(a.alpha_eq(&b));
        let c = Term::lam(Var::nat("b"), Var::nat("a").term());
        assert!(!a.alpha_eq(&c));
    }
}
