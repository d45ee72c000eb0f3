use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nsx_core::formula::{
    expand_definition, parse_formula, print_closed, registry, relativize_st, Formula,
};
use nsx_core::kernel::combinators::mk_max_seq;
use nsx_core::kernel::{eval, typecheck, FinType, Term, TypeEnv, Var, DEFAULT_FUEL};
use nsx_core::normal_form::{
    idealize, monotone_collapse, nf_implies, recognize, replay, to_normal_form, ImplMode, NfError,
    NormalForm, NormalizeOptions,
};
use nsx_core::oracles::{
    fan_modulus_muc, mu_bounded, riemann_sum, CantorTable, FiniteStructure, Partition, RealExpr, Q,
};
use nsx_core::random::{
    gen_collapse_input, gen_external, gen_idealize_input, gen_internal, gen_normal_form,
    gen_structure, Scope,
};
use nsx_core::sst::sst_translate;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Closed number terms over `add`, `max`, lambdas, recursion and sequences.
fn gen_nat_term(rng: &mut StdRng, ctx: &[Var], depth: u32) -> Term {
    let n = FinType::nat();
    let n2 = FinType::arrows([&n, &n], n.clone());
    let leaf = |rng: &mut StdRng| {
        if !ctx.is_empty() && rng.gen_bool(0.5) {
            ctx[rng.gen_range(0..ctx.len())].term()
        } else {
            Term::num(rng.gen_range(0..20))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Term::succ(gen_nat_term(rng, ctx, d)),
        1 => {
            let op = if rng.gen() { "add" } else { "max" };
            Term::apps(
                Term::prim(op, n2.clone()),
                [gen_nat_term(rng, ctx, d), gen_nat_term(rng, ctx, d)],
            )
        }
        2 => {
            let x = Var::new(&format!("x{}", ctx.len()), n.clone());
            let mut inner = ctx.to_vec();
            inner.push(x.clone());
            Term::app(
                Term::lam(x, gen_nat_term(rng, &inner, d)),
                gen_nat_term(rng, ctx, d),
            )
        }
        3 => {
            let i = Var::new(&format!("i{}", ctx.len()), n.clone());
            let r = Var::new(&format!("r{}", ctx.len()), n.clone());
            let mut inner = ctx.to_vec();
            inner.extend([i.clone(), r.clone()]);
            let step = Term::lams(&[i, r], gen_nat_term(rng, &inner, d));
            Term::rec(
                n.clone(),
                gen_nat_term(rng, ctx, d),
                step,
                Term::num(rng.gen_range(0..5)),
            )
        }
        4 | 5 => {
            let items: Vec<Term> = (0..rng.gen_range(0..4))
                .map(|_| gen_nat_term(rng, ctx, d))
                .collect();
            let s = Term::seq(n.clone(), items);
            if rng.gen() {
                Term::len(s)
            } else {
                Term::idx(s, gen_nat_term(rng, ctx, d))
            }
        }
        _ => leaf(rng),
    }
}

fn nat_normal_form(rng: &mut StdRng) -> NormalForm {
    loop {
        let nf = gen_normal_form(rng);
        if nf
            .uvars
            .iter()
            .chain(&nf.evars)
            .all(|v| v.ty == FinType::nat())
        {
            return nf;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn subject_reduction(seed in any::<u64>()) {
        let t = gen_nat_term(&mut rng(seed), &[], 4);
        let ty = typecheck(&t, &TypeEnv::new()).unwrap();
        let v = eval(&t, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(typecheck(&v, &TypeEnv::new()).unwrap(), ty);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>(), fuel in 1u64..400) {
        let t = gen_nat_term(&mut rng(seed), &[], 4);
        if let (Ok(a), Ok(b)) = (eval(&t, fuel), eval(&t, DEFAULT_FUEL)) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn numerals_are_successor_chains(n in 0u64..=10_000) {
        prop_assert_eq!(eval(&Term::succ(Term::num(n)), 10).unwrap(), Term::num(n + 1));
        let chain = (0..n % 500).fold(Term::Zero, |t, _| Term::succ(t));
        prop_assert_eq!(eval(&chain, DEFAULT_FUEL).unwrap(), Term::num(n % 500));
    }

    #[test]
    fn max_seq_is_an_upper_bound_and_attained(xs in prop::collection::vec(0u64..=1_000_000, 0..=100)) {
        let s = Term::seq(FinType::nat(), xs.iter().map(|&x| Term::num(x)).collect());
        let m = eval(&Term::app(mk_max_seq(), s), DEFAULT_FUEL).unwrap().as_numeral().unwrap();
        prop_assert!(xs.iter().all(|&x| x <= m));
        prop_assert!(xs.is_empty() && m == 0 || xs.contains(&m));
    }

    #[test]
    fn relativize_is_truth_preserving_when_all_standard(seed in any::<u64>()) {
        let mut r = rng(seed);
        let depth = r.gen_range(1..=4);
        let f = gen_internal(&mut r, &mut Scope::default(), depth);
        let s = gen_structure(&mut r);
        prop_assert_eq!(s.eval_closed(&f).unwrap(), s.eval_closed(&relativize_st(&f).unwrap()).unwrap());
    }

    #[test]
    fn strong_implication_implies_weak(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = nat_normal_form(&mut r);
        let b = nat_normal_form(&mut r);
        let mut s = FiniteStructure::new(r.gen_range(1..=2), None);
        s.atoms.seed = r.gen();
        let strong = nf_implies(&a, &b, ImplMode::Strong).to_formula();
        let weak = nf_implies(&a, &b, ImplMode::Weak).to_formula();
        prop_assert!(!s.eval_closed(&strong).unwrap() || s.eval_closed(&weak).unwrap(), "{} / {}", strong, weak);
    }

    #[test]
    fn idealize_sound_when_all_standard(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gen_idealize_input(&mut r);
        let s = gen_structure(&mut r);
        prop_assert_eq!(s.eval_closed(&f).unwrap(), s.eval_closed(&idealize(&f).unwrap()).unwrap());
    }

    #[test]
    fn collapse_sound_where_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let upward = r.gen_bool(0.7);
        let (f, x, mono) = gen_collapse_input(&mut r, upward);
        let s = gen_structure(&mut r);
        let declared: BTreeSet<String> = [x.name.base.to_string()].into();
        let g = monotone_collapse(&f, &x.name.to_string(), &declared).unwrap();
        if s.eval_closed(&mono).unwrap() {
            prop_assert_eq!(s.eval_closed(&f).unwrap(), s.eval_closed(&g).unwrap());
        }
    }

    #[test]
    fn normalization_traces_replay(seed in any::<u64>()) {
        let mut r = rng(seed);
        let depth = r.gen_range(1..=3);
        let f = gen_external(&mut r, &mut Scope::default(), depth);
        let out = to_normal_form(&f, &NormalizeOptions::default());
        prop_assume!(!matches!(out, Err(NfError::NotPure(_))), "outside the fragment");
        let (nf, trace) = out.unwrap();
        replay(&trace).unwrap();
        prop_assert!(recognize(&parse_formula(&print_closed(&nf.to_formula())).unwrap()).is_ok());
    }

    #[test]
    fn translation_is_idempotent_with_internal_matrix(seed in any::<u64>()) {
        let mut r = rng(seed);
        let depth = r.gen_range(1..=3);
        let f = gen_external(&mut r, &mut Scope::default(), depth);
        let once = sst_translate(&f).unwrap().translated;
        prop_assert!(once.matrix.is_internal());
        let twice = sst_translate(&once.to_formula()).unwrap().translated;
        prop_assert!(twice.alpha_eq(&once), "{} then {}", once.to_formula(), twice.to_formula());
    }

    #[test]
    fn normal_forms_translate_to_themselves(seed in any::<u64>()) {
        let nf = gen_normal_form(&mut rng(seed));
        let out = sst_translate(&nf.to_formula()).unwrap().translated;
        prop_assert!(out.alpha_eq(&nf), "{} became {}", nf.to_formula(), out.to_formula());
    }

    #[test]
    fn mu_bounded_is_least(values in prop::collection::vec(0u64..3, 1..40)) {
        let f = |n: u64| values.get(n as usize).copied().unwrap_or(1);
        match mu_bounded(f, values.len() as u64) {
            Ok(n) => {
                prop_assert_eq!(f(n), 0);
                prop_assert!((0..n).all(|i| f(i) != 0));
            }
            Err(_) => prop_assert!(values.iter().all(|&v| v != 0)),
        }
    }

    #[test]
    fn fan_modulus_is_least(depth in 0usize..=4, bits in prop::collection::vec(0u64..3, 16)) {
        let g = CantorTable::from_fn("g", depth, |s| {
            let i = s.iter().take(depth).fold(0usize, |a, &b| 2 * a + b as usize);
            bits[i % bits.len()]
        });
        let n = fan_modulus_muc(&g, depth).unwrap();
        let strings = nsx_core::oracles::fan::strings(depth);
        let cut = |s: &Vec<u64>, m: usize| -> Vec<u64> { s.iter().enumerate().map(|(i, &b)| if i < m { b } else { 0 }).collect() };
        prop_assert!(strings.iter().all(|s| g.at(s) == g.at(&cut(s, n))));
        if n > 0 {
            prop_assert!(strings.iter().any(|s| g.at(s) != g.at(&cut(s, n - 1))));
        }
    }

    #[test]
    fn riemann_sums_agree_on_refinements(n in 1i64..12, m in 1i64..6, c in -5i64..6, d in 1i64..5) {
        let f = RealExpr::x().mul(RealExpr::x()).add(RealExpr::c(c, d).mul(RealExpr::x()));
        let refined: Q = riemann_sum(&f, &Partition::<Q>::uniform_left(n).refine(m));
        prop_assert_eq!(&refined, &riemann_sum(&f, &Partition::<Q>::uniform_left(n * m)));
        let nm = n * m;
        let direct: Q = (0..nm).map(|i| f.eval(&Q::new(i.into(), nm.into())) / Q::from_integer(nm.into())).sum();
        prop_assert_eq!(refined, direct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn print_then_parse_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let depth = r.gen_range(0..=8);
        let f: Formula = gen_external(&mut r, &mut Scope::default(), depth);
        let back = parse_formula(&print_closed(&f)).unwrap();
        prop_assert!(back.alpha_eq(&f), "{}", f);
    }
}

#[test]
fn nonstandard_expansions_are_external() {
    for e in registry().iter().filter(|e| !e.internal) {
        let args: Vec<Term> = e.params.iter().map(Var::term).collect();
        assert!(
            !expand_definition(&e.name, &args).unwrap().is_internal(),
            "{}",
            e.name
        );
        assert!(recognize(&e.normal_form).is_ok(), "{}", e.name);
    }
}
