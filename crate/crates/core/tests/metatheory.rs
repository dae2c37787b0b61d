mod common;

use common::*;
use gdtt_core::frontend::driver::flatten;

#[test]
fn substitution_lemma_on_declared_functions() {
    let mut n = 0;
    for p in positive() {
        let mut s = load(&p);
        n += substitution_lemma(&mut s).unwrap();
    }
    assert!(n > 0);
}

#[test]
fn inferred_types_are_well_formed() {
    let mut n = 0;
    for p in positive() {
        n += inferred_types_wf(&load(&p)).unwrap();
    }
    assert!(n > 0);
}

#[test]
fn weakening_by_an_unused_clock() {
    for p in positive().into_iter().chain(equalities()) {
        let items = flatten(&p).unwrap();
        if let Err(f) = check_flat(&weaken_clocks(&items, "kw")) {
            panic!("{}: {f}", p.display());
        }
    }
}

#[test]
fn renaming_a_clock() {
    for p in positive().into_iter().chain(equalities()) {
        let items = flatten(&p).unwrap();
        if let Err(f) = check_flat(&rename_clock(&items, "k", Some("k2"))) {
            panic!("{}: {f}", p.display());
        }
    }
}

#[test]
fn instantiating_a_clock_with_k0() {
    for p in positive().into_iter().chain(equalities()) {
        let items = flatten(&p).unwrap();
        if let Err(f) = check_flat(&rename_clock(&items, "k", None)) {
            panic!("{}: {f}", p.display());
        }
    }
}

#[test]
fn negative_files_stay_negative_under_renaming() {
    for p in negative() {
        let items = flatten(&p).unwrap();
        let f = check_flat(&rename_clock(&items, "k", Some("k2"))).err();
        let f = f.unwrap_or_else(|| panic!("{} accepted after renaming", p.display()));
        assert_eq!(f.type_error().unwrap().rule, expected_rule(&p), "{f}");
    }
}

#[test]
fn inference_is_deterministic() {
    use gdtt_core::frontend::print_expr;
    use gdtt_core::Ctx;
    let s = load(&corpus().join("positive/lifting.gdtt"));
    for d in &s.decls {
        let g = s.kernel.globals.get(d).unwrap();
        let Some(body) = &g.body else { continue };
        let ctx = Ctx::new(g.clocks.clone());
        let once = s.kernel.infer(&ctx, body).map(|(_, ty)| print_expr(&ty));
        let twice = s.kernel.infer(&ctx, body).map(|(_, ty)| print_expr(&ty));
        assert_eq!(once.ok(), twice.ok(), "{d}");
    }
}

// Elaborated declarations print as core syntax that checks again to the
// same terms.
#[test]
fn elaborated_output_rechecks() {
    use gdtt_core::frontend::{parse_expr, print_expr};
    use gdtt_core::{alpha_eq, Ctx};
    let mut n = 0;
    for p in positive() {
        let s = load(&p);
        let k = &s.kernel;
        for d in &s.decls {
            let g = k.globals.get(d).unwrap();
            let ctx = Ctx::new(g.clocks.clone());
            let re = |t| k.resolve_globals(&ctx, &parse_expr(&print_expr(t)).unwrap());
            let ty = k
                .check_ty(&ctx, &re(&g.ty))
                .unwrap_or_else(|e| panic!("{d}: {e:?}"));
            assert!(
                alpha_eq(&ty, &g.ty),
                "{d}: {} vs {}",
                print_expr(&ty),
                print_expr(&g.ty)
            );
            if let Some(b) = &g.body {
                k.set_allow_reflection(true);
                let b2 = k
                    .check(&ctx, &re(b), &ty)
                    .unwrap_or_else(|e| panic!("{d}: {e:?}"));
                k.set_allow_reflection(false);
                assert!(
                    alpha_eq(&b2, b),
                    "{d}: {} vs {}",
                    print_expr(&b2),
                    print_expr(b)
                );
            }
            n += 1;
        }
    }
    assert!(n > 0);
}
