mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use gdtt_core::frontend::{parse_expr, print_expr};
use gdtt_core::model::eval_at_depth;
use gdtt_core::subst::{advance, clock_subst, subst};
use gdtt_core::syntax::{mk, Clock};
use gdtt_core::{alpha_eq, free_vars, ClockCtx, DSubst, Expr, Name, Term};

const VARS: &[&str] = &["x", "y", "z", "w"];
const CLOCKS: &[&str] = &["k", "j"];

fn clock() -> impl Strategy<Value = Clock> {
    prop_oneof![
        3 => prop::sample::select(CLOCKS).prop_map(Clock::var),
        1 => Just(Clock::Const),
    ]
}

fn var_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(VARS)
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        var_name().prop_map(mk::var),
        Just(mk::zero()),
        Just(Expr::Star.rc()),
        Just(mk::nat()),
    ];
    leaf.prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            (var_name(), inner.clone()).prop_map(|(x, b)| mk::lam(x, b)),
            (var_name(), inner.clone(), inner.clone()).prop_map(|(x, a, b)| mk::lam_ann(x, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| mk::app(f, a)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| mk::pair(a, b)),
            inner.clone().prop_map(|t| Expr::Fst(t).rc()),
            inner.clone().prop_map(mk::succ),
            (var_name(), inner.clone(), inner.clone()).prop_map(|(x, a, b)| mk::pi(x, a, b)),
            (
                clock(),
                prop::collection::vec((var_name(), inner.clone()), 0..3),
                inner.clone()
            )
                .prop_map(|(k, xi, b)| Expr::Next(k, dsubst(xi), b).rc()),
            (
                clock(),
                prop::collection::vec((var_name(), inner.clone()), 0..3),
                inner.clone()
            )
                .prop_map(|(k, xi, b)| Expr::Later(k, dsubst(xi), b).rc()),
            (clock(), var_name(), inner.clone()).prop_map(|(k, x, b)| mk::fix(k, x, b)),
            (prop::sample::select(CLOCKS), inner.clone()).prop_map(|(k, b)| mk::clam(k, b)),
            (prop::sample::select(CLOCKS), inner.clone()).prop_map(|(k, b)| mk::forall(k, b)),
            (prop::sample::select(CLOCKS), inner.clone()).prop_map(|(k, b)| mk::prev(k, b)),
            (inner.clone(), clock()).prop_map(|(t, k)| mk::capp(t, k)),
        ]
    })
}

fn dsubst(entries: Vec<(&str, Term)>) -> DSubst {
    let mut seen = BTreeSet::new();
    let entries = entries
        .into_iter()
        .filter(|(x, _)| seen.insert(*x))
        .map(|(x, t)| (Name::from(x), t))
        .collect();
    DSubst::new(entries).unwrap()
}

fn fv(t: &Term) -> BTreeSet<Name> {
    free_vars(t).terms.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn alpha_eq_is_reflexive_and_symmetric(t in term(), u in term()) {
        prop_assert!(alpha_eq(&t, &t));
        prop_assert_eq!(alpha_eq(&t, &u), alpha_eq(&u, &t));
    }

    #[test]
    fn alpha_eq_is_transitive(t in term(), x in var_name(), y in var_name()) {
        // Two rounds of binder renaming give a chain t ~ t1 ~ t2.
        let t1 = subst(&t, &x.into(), &mk::var(x));
        let t2 = subst(&t1, &y.into(), &mk::var(y));
        prop_assert!(alpha_eq(&t, &t1) && alpha_eq(&t1, &t2));
        prop_assert!(alpha_eq(&t, &t2));
    }

    #[test]
    fn advance_keeps_entries_in_order(xi in prop::collection::vec((var_name(), term()), 0..4)) {
        let xi = dsubst(xi);
        let m = advance(&ClockCtx::new(), &"k".into(), &xi).unwrap();
        let got: Vec<&Name> = m.0.iter().map(|(x, _)| x).collect();
        let want: Vec<&Name> = xi.entries().iter().map(|(x, _)| x).collect();
        prop_assert_eq!(got, want);
        prop_assert!(advance(&ClockCtx::from_names(["k".into()]), &"k".into(), &xi).is_err());
    }

    #[test]
    fn free_vars_respect_alpha(t in term(), x in var_name()) {
        // Substituting a variable for itself renames binders that would
        // capture it, producing an alpha-variant.
        let t2 = subst(&t, &x.into(), &mk::var(x));
        prop_assert!(alpha_eq(&t, &t2));
        prop_assert_eq!(fv(&t), fv(&t2));
    }

    #[test]
    fn subst_free_vars(t in term(), x in var_name(), u in term()) {
        let r = subst(&t, &x.into(), &u);
        let mut bound: BTreeSet<Name> = fv(&t);
        let had_x = bound.remove(x);
        if had_x {
            bound.extend(fv(&u));
        }
        prop_assert!(fv(&r).is_subset(&bound), "{:?} not within {:?}", fv(&r), bound);
        if !had_x {
            prop_assert!(alpha_eq(&r, &t));
        }
    }

    #[test]
    fn subst_composes(t in term(), u in term(), v in term()) {
        // x not free in v, x != y
        let (x, y): (Name, Name) = ("x".into(), "y".into());
        prop_assume!(!fv(&v).contains(&x));
        let l = subst(&subst(&t, &x, &u), &y, &v);
        let r = subst(&subst(&t, &y, &v), &x, &subst(&u, &y, &v));
        prop_assert!(alpha_eq(&l, &r));
    }

    #[test]
    fn clock_subst_commutes_with_subst(t in term(), u in term(), c in clock()) {
        let (x, k): (Name, Name) = ("x".into(), "k".into());
        let l = clock_subst(&subst(&t, &x, &u), &k, &c);
        let r = subst(&clock_subst(&t, &k, &c), &x, &clock_subst(&u, &k, &c));
        prop_assert!(alpha_eq(&l, &r));
    }

    #[test]
    fn clock_subst_removes_clock(t in term()) {
        let r = clock_subst(&t, &"k".into(), &Clock::var("j"));
        prop_assert!(!free_vars(&r).clocks.contains("k"));
    }

    #[test]
    fn printing_round_trips(t in term()) {
        let s = print_expr(&t);
        let back = parse_expr(&s).map_err(|e| TestCaseError::fail(format!("{s}: {e:?}")))?;
        prop_assert!(alpha_eq(&t, &back), "{} reparsed as {}", s, print_expr(&back));
    }
}

// Restriction from stage n to m < n agrees with evaluating at m.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn restriction_is_coherent(n in 1u32..8, m in 1u32..8, def in prop::sample::select(&["ones", "sums", "twos"][..])) {
        prop_assume!(m <= n);
        let s = streams();
        let g = s.kernel.globals.get(def).unwrap();
        let t = Expr::Const(def.into()).rc();
        let hi = eval_at_depth(&s.kernel.globals, &t, &g.ty, n).unwrap();
        let lo = eval_at_depth(&s.kernel.globals, &t, &g.ty, m).unwrap();
        prop_assert_eq!(hi.truncate(m), lo);
    }
}

fn streams() -> &'static gdtt_core::frontend::driver::Session {
    thread_local! {
        static S: &'static gdtt_core::frontend::driver::Session =
            Box::leak(Box::new(common::load(&common::corpus().join("positive/streams.gdtt"))));
    }
    S.with(|s| *s)
}

#[test]
fn conversion_is_reflexive_and_symmetric_on_corpus() {
    for p in common::equalities() {
        let s = common::load(&p);
        for e in &s.equalities {
            let ctx = gdtt_core::Ctx::new(e.clocks.clone());
            for t in [&e.lhs, &e.rhs] {
                s.kernel.fuel().reset();
                assert!(s.kernel.conv_term(&ctx, t, t, &e.ty).unwrap());
            }
            s.kernel.fuel().reset();
            assert!(
                s.kernel.conv_term(&ctx, &e.rhs, &e.lhs, &e.ty).unwrap(),
                "{}:{} is not symmetric",
                common::name_of(&p),
                e.pos
            );
        }
    }
}
