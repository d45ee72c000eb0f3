//! Closed System T terms used to assemble witnesses. All are built from
//! `rec` over sequence length; none needs a primitive list recursor.

use super::syntax::parse_term_str;
use super::term::Term;
use super::types::FinType;

fn build(src: String) -> Term {
    parse_term_str(&src).unwrap_or_else(|e| panic!("combinator source {src}: {e}"))
}

/// `(* N) -> N`: largest entry, 0 on the empty sequence.
pub fn mk_max_seq() -> Term {
    build(
        "(lam (s (* N)) (rec N 0 (lam (i N) (lam (r N) (app (prim max) r (idx s i)))) (len s)))"
            .into(),
    )
}

/// `(acc -> a -> acc) -> acc -> (* a) -> acc`
pub fn fold(elem: &FinType, acc: &FinType) -> Term {
    build(format!(
        "(lam (f (-> {acc} {elem} {acc})) (lam (a {acc}) (lam (s (* {elem})) \
         (rec {acc} a (lam (i N) (lam (r {acc}) (app f r (idx s i)))) (len s)))))"
    ))
}

/// `(a -> b) -> (* a) -> (* b)`
pub fn map(a: &FinType, b: &FinType) -> Term {
    build(format!(
        "(lam (f (-> {a} {b})) (lam (s (* {a})) \
         (rec (* {b}) (seq {b}) (lam (i N) (lam (r (* {b})) (cat r (seq {b} (app f (idx s i)))))) (len s))))"
    ))
}

/// `(* (* a)) -> (* a)`
pub fn flatten(a: &FinType) -> Term {
    build(format!(
        "(lam (s (* (* {a}))) (rec (* {a}) (seq {a}) (lam (i N) (lam (r (* {a})) (cat r (idx s i)))) (len s)))"
    ))
}

/// `if c ≠ 0 then a else b` at any type, as a recursor on c.
pub fn cond_at(ty: &FinType, c: Term, a: Term, b: Term) -> Term {
    let step = Term::lam(
        super::term::Var::nat("_i"),
        Term::lam(
            super::term::Var {
                name: super::term::Name::new("_r"),
                ty: ty.clone(),
            },
            a,
        ),
    );
    Term::rec(ty.clone(), b, step, c)
}

/// `(a -> N) -> (* a) -> (* a)`: the singleton of the first element
/// satisfying the test, or the empty sequence when there is none.
pub fn first_where(a: &FinType) -> Term {
    build(format!(
        "(lam (p (-> {a} N)) (lam (s (* {a})) \
         (rec (* {a}) (seq {a}) (lam (i N) (lam (r (* {a})) \
            (rec (* {a}) \
                 (rec (* {a}) (seq {a}) (lam (j N) (lam (u (* {a})) (seq {a} (idx s i)))) (app p (idx s i))) \
                 (lam (j N) (lam (u (* {a})) r)) \
                 (len r)))) \
          (len s))))"
    ))
}

/// `N -> (* N)`: the sequence 0, 1, ..., n-1.
pub fn range_seq() -> Term {
    build("(lam (n N) (rec (* N) (seq N) (lam (i N) (lam (r (* N)) (cat r (seq N i)))) n))".into())
}

/// `(* N) -> N -> N`: a finite sequence padded with zeros, σ*00...
pub fn pad() -> Term {
    build("(lam (s (* N)) (lam (n N) (idx s n)))".into())
}

/// `(N -> N) -> N -> (* N)`: the initial segment of length n.
pub fn prefix() -> Term {
    build("(lam (a (-> N N)) (lam (n N) (rec (* N) (seq N) (lam (i N) (lam (r (* N)) (cat r (seq N (app a i))))) n)))".into())
}

/// `N -> (* (* N))`: all 0/1 sequences of length L in lexicographic order.
pub fn binary_strings() -> Term {
    let ext = "(lam (t (* N)) (seq (* N) (cat t (seq N 0)) (cat t (seq N 1))))";
    build(format!(
        "(lam (l N) (rec (* (* N)) (seq (* N) (seq N)) (lam (i N) (lam (r (* (* N))) (app {} (app {} {ext} r)))) l))",
        flatten(&FinType::seq(FinType::nat())),
        map(&FinType::seq(FinType::nat()), &FinType::seq(FinType::seq(FinType::nat()))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval::{eval, DEFAULT_FUEL};
    use crate::kernel::typecheck::{typecheck, TypeEnv};

    fn run(t: Term) -> Term {
        eval(&t, DEFAULT_FUEL).unwrap()
    }

    fn nats(xs: &[u64]) -> Term {
        Term::seq(FinType::nat(), xs.iter().map(|&x| Term::num(x)).collect())
    }

    #[test]
    fn max_seq_examples() {
        assert_eq!(run(Term::app(mk_max_seq(), nats(&[]))), Term::Zero);
        assert_eq!(run(Term::app(mk_max_seq(), nats(&[4]))), Term::Num(4));
        assert_eq!(run(Term::app(mk_max_seq(), nats(&[2, 7, 3]))), Term::Num(7));
        assert_eq!(
            run(Term::app(mk_max_seq(), nats(&[1, 9, 9, 2]))),
            Term::Num(9)
        );
    }

    #[test]
    fn all_combinators_are_closed_and_typed() {
        let n = FinType::nat();
        for t in [
            mk_max_seq(),
            fold(&n, &n),
            map(&n, &n),
            flatten(&n),
            first_where(&n),
            range_seq(),
            pad(),
            prefix(),
            binary_strings(),
        ] {
            assert!(t.is_closed());
            typecheck(&t, &TypeEnv::new()).unwrap();
        }
    }

    #[test]
    fn first_where_sentinel() {
        let even = parse_term_str("(lam (x N) (app (prim eq) x 4))").unwrap();
        let r = run(Term::apps(
            first_where(&FinType::nat()),
            [even.clone(), nats(&[1, 4, 3, 4])],
        ));
        assert_eq!(r, nats(&[4]));
        let r = run(Term::apps(
            first_where(&FinType::nat()),
            [even, nats(&[1, 3])],
        ));
        assert_eq!(r, nats(&[]));
    }

    #[test]
    fn binary_strings_enumerate() {
        let r = run(Term::app(binary_strings(), Term::Num(2)));
        assert_eq!(
            r.to_string(),
            "(seq (* N) (seq N 0 0) (seq N 0 1) (seq N 1 0) (seq N 1 1))"
        );
        let r = run(Term::app(binary_strings(), Term::Zero));
        assert_eq!(r.to_string(), "(seq (* N) (seq N))");
    }

    #[test]
    fn fold_and_flatten() {
        let add = parse_term_str("(prim add)").unwrap();
        assert_eq!(
            run(Term::apps(
                fold(&FinType::nat(), &FinType::nat()),
                [add, Term::Num(1), nats(&[2, 3])]
            )),
            Term::Num(6)
        );
        let ss = Term::seq(
            FinType::seq(FinType::nat()),
            vec![nats(&[1]), nats(&[]), nats(&[2, 3])],
        );
        assert_eq!(
            run(Term::app(flatten(&FinType::nat()), ss)),
            nats(&[1, 2, 3])
        );
    }
}
