#![allow(clippy::result_large_err)]

mod common;

use std::path::Path;

use common::*;
use gdtt_core::frontend::driver::{flatten, Session};
use gdtt_core::typecheck::TypeErrorKind;

#[test]
fn positive_files_check() {
    for p in positive() {
        let s = load(&p);
        assert!(!s.decls.is_empty(), "{}", p.display());
    }
}

#[test]
fn negative_files_fail_with_their_rule() {
    let files = negative();
    assert!(files.len() >= 10);
    for p in files {
        let want = expected_rule(&p);
        let f = match gdtt_core::frontend::driver::check_path(&p, opts()) {
            Ok(_) => panic!("{} was accepted", p.display()),
            Err((_, f)) => f,
        };
        assert_eq!(f.exit_code(), 1, "{f}");
        assert_eq!(f.type_error().unwrap().rule, want, "{f}");
    }
}

#[test]
fn negative_error_kinds() {
    let kind = |f: &str| {
        let p = corpus().join("negative").join(f);
        let (_, fail) = gdtt_core::frontend::driver::check_path(&p, opts())
            .err()
            .unwrap();
        fail.type_error().unwrap().kind
    };
    assert_eq!(kind("prev_ctx.gdtt"), TypeErrorKind::ClockNotFresh);
    assert_eq!(kind("universe_escape.gdtt"), TypeErrorKind::UniverseEscape);
    assert_eq!(
        kind("reflection_untagged.gdtt"),
        TypeErrorKind::ReflectionRefused
    );
    assert_eq!(
        kind("zipwith_no_peta.gdtt"),
        TypeErrorKind::ConversionFailed
    );
    assert_eq!(kind("dsubst_not_later.gdtt"), TypeErrorKind::NotLaterTyped);
}

#[test]
fn equality_files_check() {
    for p in equalities() {
        let s = load(&p);
        assert!(!s.equalities.is_empty(), "{}", p.display());
    }
}

#[test]
fn every_required_rule_is_exercised() {
    criterion_equalities().unwrap();
}

#[test]
fn flattened_files_check_like_the_originals() {
    for p in positive().into_iter().chain(equalities()) {
        let s = load(&p);
        let mut t = Session::new(opts());
        t.check_flat(&flatten(&p).unwrap()).unwrap();
        assert_eq!(s.decls, t.decls, "{}", p.display());
        assert_eq!(s.equalities.len(), t.equalities.len());
    }
}

fn check_src(src: &str) -> Result<Session, gdtt_core::frontend::driver::Failure> {
    let mut s = Session::new(opts());
    let dir = corpus().join("equalities");
    s.check_str(src, "inline.eq", Some(Path::new(&dir)), true)?;
    Ok(s)
}

#[test]
fn commuting_distinct_streams_runs_out_of_fuel() {
    let src = "#include \"../positive/streams.gdtt\"\n#clocks k\n\
               zipWith cNat cNat cNat plus twos ones == zipWith cNat cNat cNat plus ones twos : Str cNat\n";
    let f = check_src(src).err().unwrap();
    assert_eq!(f.exit_code(), 3, "{f}");
    assert_eq!(f.type_error().unwrap().kind, TypeErrorKind::FuelExhausted);
}

#[test]
fn unequal_numerals_are_rejected() {
    let f = check_src("1 == 2 : Nat\n").err().unwrap();
    assert_eq!(f.exit_code(), 1);
    assert_eq!(f.type_error().unwrap().rule, "TmEq");
}

#[test]
fn duplicate_declarations_are_input_errors() {
    let f = check_src("axiom a : Nat\naxiom a : Nat\n").err().unwrap();
    assert_eq!(f.exit_code(), 2);
}

#[test]
fn reflection_needs_the_tag() {
    let body = "axiom n m : Nat\naxiom p : Id Nat n m\n";
    let tagged = format!(
        "{body}-- needs-reflection\ndef q : Id Nat (succ n) (succ m) := reflect p in refl\n"
    );
    let untagged = format!("{body}def q : Id Nat (succ n) (succ m) := reflect p in refl\n");
    check_src(&tagged).unwrap();
    let f = check_src(&untagged).err().unwrap();
    assert_eq!(
        f.type_error().unwrap().kind,
        TypeErrorKind::ReflectionRefused
    );
}

#[test]
fn trace_lines_name_rule_and_path() {
    let s =
        gdtt_core::frontend::driver::check_path(&corpus().join("equalities/later.eq"), traced())
            .ok()
            .unwrap();
    let lines = s.kernel.take_trace();
    assert!(!lines.is_empty());
    for l in &lines {
        let rest = l.strip_prefix("RULE ").unwrap();
        assert!(rest.contains(" AT "), "{l}");
    }
}

#[test]
fn parse_print_parse_is_a_fixpoint() {
    criterion_roundtrip().unwrap();
}
