use super::ExtractError;
use crate::kernel::combinators::first_where;
use crate::kernel::{eval_with, infer_open, FinType, Name, PrimTable, Term, Var};

/// `first_where (λq. [|test q| < 1/k]) cands`: a singleton with the first
/// candidate passing the two-threshold comparison, or the empty sequence.
pub fn selection(elem: &FinType, test: &Term, k: &Term, cands: Term) -> Term {
    let mut avoid = Default::default();
    test.all_names(&mut avoid);
    k.all_names(&mut avoid);
    cands.all_names(&mut avoid);
    let q = Var {
        name: Name::new("q").fresh(&avoid),
        ty: elem.clone(),
    };
    let r = FinType::real();
    let pred = Term::lam(
        q.clone(),
        Term::apps(
            Term::prim(
                "rlt-inv",
                FinType::arrows([&r, &FinType::nat()], FinType::nat()),
            ),
            [Term::app(test.clone(), q.term()), k.clone()],
        ),
    );
    Term::apps(first_where(elem), [pred, cands])
}

/// Evaluate a closed selection and return the chosen candidate.
pub fn select_by_comparison(
    cands: &Term,
    test: &Term,
    k: &Term,
    prims: &PrimTable,
    fuel: u64,
) -> Result<Term, ExtractError> {
    for t in [cands, test, k] {
        if let Some((name, _)) = t.free_vars().into_iter().next() {
            return Err(ExtractError::NotClosed(name.to_string()));
        }
    }
    let ty = infer_open(cands).map_err(|e| ExtractError::TypeMismatch(e.to_string()))?;
    let elem = ty
        .element()
        .cloned()
        .ok_or_else(|| ExtractError::TypeMismatch(format!("candidates have type {ty}")))?;
    let sel = selection(&elem, test, k, cands.clone());
    match eval_with(&sel, fuel, prims).map_err(|e| ExtractError::Eval(e.to_string()))? {
        Term::SeqLit { items, .. } => items.into_iter().next().ok_or(ExtractError::NoCandidate),
        other => Err(ExtractError::TypeMismatch(format!(
            "selection evaluated to {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse_term_str, DEFAULT_FUEL};

    fn t(s: &str) -> Term {
        parse_term_str(s).unwrap()
    }

    #[test]
    fn picks_first_passing() {
        let f = t("(lam (x R) (app (prim rsub) (app (prim rmul) (app (prim rat) 2 1) x) (app (prim rat) 1 1)))");
        let cands = t("(seq R (app (prim rat) 1 5) (app (prim rat) 1 2) (app (prim rat) 3 5))");
        let got = select_by_comparison(&cands, &f, &Term::num(10), &PrimTable::new(), DEFAULT_FUEL)
            .unwrap();
        let half = eval_with(&t("(app (prim rat) 1 2)"), DEFAULT_FUEL, &PrimTable::new()).unwrap();
        assert_eq!(got, half);
    }

    #[test]
    fn empty_is_no_candidate() {
        let f = t("(lam (x R) (app (prim rat) 1 1))");
        let cands = t("(seq R (app (prim rat) 1 5))");
        let err = select_by_comparison(&cands, &f, &Term::num(10), &PrimTable::new(), DEFAULT_FUEL);
        assert_eq!(err, Err(ExtractError::NoCandidate));
        let none = t("(seq R)");
        assert_eq!(
            select_by_comparison(&none, &f, &Term::num(3), &PrimTable::new(), DEFAULT_FUEL),
            Err(ExtractError::NoCandidate)
        );
    }

    #[test]
    fn open_candidates_rejected() {
        let err = select_by_comparison(
            &t("(seq N z)"),
            &t("(lam (x N) x)"),
            &Term::num(1),
            &PrimTable::new(),
            100,
        );
        assert!(matches!(err, Err(ExtractError::NotClosed(_))));
    }
}
