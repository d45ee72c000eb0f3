//! Random formulas and structures for property sweeps.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{relativize_st, Formula};
use crate::kernel::{FinType, Name, Term, Var};
use crate::normal_form::{idealize, monotone_collapse, NormalForm};
use crate::oracles::{FiniteStructure, OracleError};

const ATOMS: [&str; 3] = ["P", "Q", "R"];

/// Variables in scope, with a counter for fresh bound names.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub vars: Vec<Var>,
    used: BTreeSet<Name>,
}

impl Scope {
    pub fn new(vars: &[Var]) -> Scope {
        let used = vars.iter().map(|v| v.name.clone()).collect();
        Scope {
            vars: vars.to_vec(),
            used,
        }
    }

    pub fn fresh(&mut self, base: &str, ty: FinType) -> Var {
        let n = Name::new(base).fresh(&self.used);
        self.used.insert(n.clone());
        Var { name: n, ty }
    }

    fn with(&self, v: Var) -> Scope {
        let mut s = self.clone();
        s.used.insert(v.name.clone());
        s.vars.push(v);
        s
    }

    fn of_type(&self, ty: &FinType) -> Vec<&Var> {
        self.vars.iter().filter(|v| &v.ty == ty).collect()
    }
}

fn pick_type(rng: &mut impl Rng) -> FinType {
    match rng.gen_range(0..4) {
        0 => FinType::arrow(FinType::nat(), FinType::nat()),
        1 => FinType::seq(FinType::nat()),
        _ => FinType::nat(),
    }
}

/// A number term over the variables of `scope`.
pub fn gen_term(rng: &mut impl Rng, scope: &Scope, depth: u32) -> Term {
    let nats = scope.of_type(&FinType::nat());
    let fns = scope.of_type(&FinType::arrow(FinType::nat(), FinType::nat()));
    let seqs = scope.of_type(&FinType::seq(FinType::nat()));
    let roll = if depth == 0 {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..7)
    };
    match roll {
        0 | 1 if !nats.is_empty() => nats.choose(rng).unwrap().term(),
        0..=2 => Term::num(rng.gen_range(0..3)),
        3 => Term::succ(gen_term(rng, scope, depth - 1)),
        4 if !fns.is_empty() => Term::app(
            fns.choose(rng).unwrap().term(),
            gen_term(rng, scope, depth - 1),
        ),
        5 if !seqs.is_empty() => Term::len(seqs.choose(rng).unwrap().term()),
        6 if !seqs.is_empty() => Term::idx(
            seqs.choose(rng).unwrap().term(),
            gen_term(rng, scope, depth - 1),
        ),
        _ => gen_term(rng, scope, 0),
    }
}

fn gen_atom(rng: &mut impl Rng, scope: &Scope, depth: u32) -> Formula {
    let d = depth.min(1);
    match rng.gen_range(0..4) {
        0 => Formula::eq(gen_term(rng, scope, d), gen_term(rng, scope, d)),
        1 => Formula::le(gen_term(rng, scope, d), gen_term(rng, scope, d)),
        _ => {
            let n = rng.gen_range(1..=2);
            let args = (0..n).map(|_| gen_term(rng, scope, d)).collect();
            Formula::pred(ATOMS.choose(rng).unwrap(), args)
        }
    }
}

/// An internal formula; bound variables are numbers.
pub fn gen_internal(rng: &mut impl Rng, scope: &mut Scope, depth: u32) -> Formula {
    if depth == 0 {
        return gen_atom(rng, scope, 0);
    }
    match rng.gen_range(0..8) {
        0 => Formula::not(gen_internal(rng, scope, depth - 1)),
        1 => Formula::and(
            gen_internal(rng, scope, depth - 1),
            gen_internal(rng, scope, depth - 1),
        ),
        2 => Formula::or(
            gen_internal(rng, scope, depth - 1),
            gen_internal(rng, scope, depth - 1),
        ),
        3 => Formula::implies(
            gen_internal(rng, scope, depth - 1),
            gen_internal(rng, scope, depth - 1),
        ),
        4 | 5 => {
            let z = scope.fresh("z", FinType::nat());
            let mut inner = scope.with(z.clone());
            let body = gen_internal(rng, &mut inner, depth - 1);
            scope.used.extend(inner.used);
            if rng.gen() {
                Formula::forall(z, body)
            } else {
                Formula::exists(z, body)
            }
        }
        _ => gen_atom(rng, scope, depth),
    }
}

/// `(∀^st x)(∃^st y)φ` with up to two variables per block.
pub fn gen_normal_form(rng: &mut impl Rng) -> NormalForm {
    let mut scope = Scope::default();
    let uvars: Vec<Var> = (0..rng.gen_range(0..=2))
        .map(|_| scope.fresh("x", pick_type(rng)))
        .collect();
    let evars: Vec<Var> = (0..rng.gen_range(0..=2))
        .map(|_| scope.fresh("y", pick_type(rng)))
        .collect();
    scope.vars = uvars.iter().chain(&evars).cloned().collect();
    let depth = rng.gen_range(1..=3);
    let matrix = gen_internal(rng, &mut scope, depth);
    NormalForm::new(uvars, evars, matrix)
}

/// A formula with standardness predicates and standard quantifiers, free
/// only in `scope`.
pub fn gen_external(rng: &mut impl Rng, scope: &mut Scope, depth: u32) -> Formula {
    if depth == 0 {
        let nats = scope.of_type(&FinType::nat());
        return match nats.choose(rng) {
            Some(v) if rng.gen_bool(0.4) => Formula::st(v.term()),
            _ => gen_atom(rng, scope, 0),
        };
    }
    match rng.gen_range(0..7) {
        0 => Formula::not(gen_external(rng, scope, depth - 1)),
        1 => Formula::and(
            gen_external(rng, scope, depth - 1),
            gen_external(rng, scope, depth - 1),
        ),
        2 => Formula::or(
            gen_external(rng, scope, depth - 1),
            gen_external(rng, scope, depth - 1),
        ),
        3 => Formula::implies(
            gen_external(rng, scope, depth - 1),
            gen_external(rng, scope, depth - 1),
        ),
        _ => {
            let z = scope.fresh("z", FinType::nat());
            let mut inner = scope.with(z.clone());
            let body = gen_external(rng, &mut inner, depth - 1);
            scope.used.extend(inner.used);
            match rng.gen_range(0..4) {
                0 => Formula::forall(z, body),
                1 => Formula::exists(z, body),
                2 => Formula::forall_st(z, body),
                _ => Formula::exists_st(z, body),
            }
        }
    }
}

/// `(∀^st a)(∀y)(∃^st x)φ`, the shape idealization rewrites.
pub fn gen_idealize_input(rng: &mut impl Rng) -> Formula {
    let mut scope = Scope::default();
    let a = scope.fresh("a", FinType::nat());
    let y = scope.fresh("y", FinType::nat());
    let x = scope.fresh("x", FinType::nat());
    scope.vars = vec![a.clone(), y.clone(), x.clone()];
    let depth = rng.gen_range(1..=2);
    let phi = gen_internal(rng, &mut scope, depth);
    Formula::forall_st(a, Formula::forall(y, Formula::exists_st(x, phi)))
}

/// A matrix in which `x` occurs only as the upper side of `≤`, hence upward closed in `x`.
fn gen_upward(rng: &mut impl Rng, scope: &mut Scope, x: &Var, depth: u32) -> Formula {
    let others = Scope::new(
        &scope
            .vars
            .iter()
            .filter(|v| v.name != x.name)
            .cloned()
            .collect::<Vec<_>>(),
    );
    if depth == 0 {
        return if rng.gen() {
            Formula::le(gen_term(rng, &others, 1), x.term())
        } else {
            gen_atom(rng, &others, 1)
        };
    }
    match rng.gen_range(0..3) {
        0 => Formula::and(
            gen_upward(rng, scope, x, depth - 1),
            gen_upward(rng, scope, x, depth - 1),
        ),
        1 => Formula::or(
            gen_upward(rng, scope, x, depth - 1),
            gen_upward(rng, scope, x, depth - 1),
        ),
        _ => Formula::le(gen_term(rng, &others, 1), x.term()),
    }
}

/// `(∀^st a)(∃^st w)(∀y)(∃x∈w)φ`; with `upward`, φ is built monotone in `x`.
pub fn gen_collapse_input(rng: &mut impl Rng, upward: bool) -> (Formula, Var, Formula) {
    let mut scope = Scope::default();
    let a = scope.fresh("a", FinType::nat());
    let w = scope.fresh("w", FinType::seq(FinType::nat()));
    let y = scope.fresh("y", FinType::nat());
    let x = scope.fresh("x", FinType::nat());
    scope.vars = vec![a.clone(), y.clone(), x.clone()];
    let depth = rng.gen_range(0..=2);
    let phi = if upward {
        gen_upward(rng, &mut scope, &x, depth)
    } else {
        gen_internal(rng, &mut scope, depth.max(1))
    };
    let f = Formula::forall_st(
        a.clone(),
        Formula::exists_st(
            w.clone(),
            Formula::forall(
                y.clone(),
                Formula::exists_in(x.clone(), w.term(), phi.clone()),
            ),
        ),
    );
    let x2 = scope.fresh("x", FinType::nat());
    let mono = Formula::forall(
        a,
        Formula::forall(
            y,
            Formula::forall(
                x.clone(),
                Formula::forall(
                    x2.clone(),
                    Formula::implies(
                        Formula::and(Formula::le(x.term(), x2.term()), phi.clone()),
                        phi.subst1(&x.name, &x2.term()),
                    ),
                ),
            ),
        ),
    );
    (f, x, mono)
}

/// A degenerate structure whose sequences are long enough to list the whole number domain.
pub fn gen_structure(rng: &mut impl Rng) -> FiniteStructure {
    let mut s = FiniteStructure::random(rng, 3);
    s.seq_len = s.base_size as usize;
    s
}

/// Outcome of one degenerate-semantics comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Agree,
    Disagree {
        before: String,
        after: String,
        detail: String,
    },
    /// The sampled side condition failed, so nothing is claimed.
    Skipped,
}

fn compare(f: &Formula, g: &Formula, s: &FiniteStructure) -> Result<Comparison, OracleError> {
    let (a, b) = (s.eval_closed(f)?, s.eval_closed(g)?);
    Ok(if a == b {
        Comparison::Agree
    } else {
        Comparison::Disagree {
            before: f.to_string(),
            after: g.to_string(),
            detail: format!("M = {}, seed {}: {a} vs {b}", s.base_size, s.atoms.seed),
        }
    })
}

/// One random instance of each transformation, compared on one random structure with `K = M`.
pub fn degenerate_round(rng: &mut impl Rng) -> Result<[Comparison; 3], OracleError> {
    let s = gen_structure(rng);
    let fail = |e: crate::normal_form::NfError| OracleError::BadAtom(e.to_string());

    let f = gen_idealize_input(rng);
    let ideal = compare(&f, &idealize(&f).map_err(fail)?, &s)?;

    let upward = rng.gen_bool(0.7);
    let (g, x, mono) = gen_collapse_input(rng, upward);
    let declared: BTreeSet<String> = [x.name.base.to_string()].into();
    let collapsed = monotone_collapse(&g, &x.name.to_string(), &declared).map_err(fail)?;
    let coll = if s.eval_closed(&mono)? {
        compare(&g, &collapsed, &s)?
    } else {
        Comparison::Skipped
    };

    let mut scope = Scope::default();
    let depth = rng.gen_range(1..=3);
    let h = gen_internal(rng, &mut scope, depth);
    let rel = compare(
        &h,
        &relativize_st(&h).map_err(|e| OracleError::BadAtom(e.to_string()))?,
        &s,
    )?;
    Ok([ideal, coll, rel])
}
