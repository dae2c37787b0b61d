mod common;

use common::*;
use gdtt_core::model::{eval_at_depth, prefix_agree, ModelError, ObsValue};
use gdtt_core::Expr;

#[test]
fn ones_to_depth_three() {
    let s = load(&corpus().join("positive/streams.gdtt"));
    assert_eq!(eval_stream(&s, "ones", 3).unwrap(), vec![1, 1, 1]);
    assert_eq!(eval_stream(&s, "ones", 3).unwrap(), take(oracle_ones(), 3));
}

#[test]
fn zipwith_plus_ones_ones_to_depth_three() {
    let s = load(&corpus().join("positive/streams.gdtt"));
    let want = take(oracle_zip(|a, b| a + b, oracle_ones(), oracle_ones()), 3);
    assert_eq!(want, vec![2, 2, 2]);
    assert_eq!(eval_stream(&s, "sums", 3).unwrap(), want);
}

#[test]
fn stream_depth_matches_oracle_length() {
    let s = load(&corpus().join("positive/streams.gdtt"));
    for n in 1..=6 {
        assert_eq!(eval_stream(&s, "twos", n).unwrap(), vec![2; n as usize]);
    }
}

#[test]
fn coinductive_observations() {
    let s = load(&corpus().join("positive/coinductive.gdtt"));
    let nat = |d: &str| {
        let g = s.kernel.globals.get(d).unwrap();
        eval_at_depth(&s.kernel.globals, &Expr::Const(d.into()).rc(), &g.ty, 1)
            .unwrap()
            .value
    };
    assert_eq!(nat("third_odd"), ObsValue::Nat(5));
    assert_eq!(nat("two_tag"), ObsValue::Bool(false));
}

#[test]
fn forced_value_of_clock_quantified_term() {
    let s = load(&corpus().join("positive/clocks.gdtt"));
    let g = s.kernel.globals.get("one").unwrap();
    let v = eval_at_depth(&s.kernel.globals, &Expr::Const("one".into()).rc(), &g.ty, 1).unwrap();
    assert_eq!(v.value, ObsValue::Nat(1));
}

#[test]
fn function_types_are_not_observable() {
    let s = load(&corpus().join("positive/streams.gdtt"));
    let g = s.kernel.globals.get("zipWith").unwrap();
    let t = Expr::Const("zipWith".into()).rc();
    assert!(matches!(
        eval_at_depth(&s.kernel.globals, &t, &g.ty, 2),
        Err(ModelError::NotObservable(_))
    ));
}

#[test]
fn distinct_streams_disagree() {
    let s = load(&corpus().join("positive/streams.gdtt"));
    let ty = s.kernel.globals.get("ones").unwrap().ty.clone();
    let (a, b) = (
        Expr::Const("ones".into()).rc(),
        Expr::Const("twos".into()).rc(),
    );
    assert!(!prefix_agree(&s.kernel.globals, &a, &b, &ty, 3).unwrap());
    assert!(prefix_agree(&s.kernel.globals, &a, &a, &ty, 5).unwrap());
}

#[test]
fn checked_equalities_agree_in_the_model() {
    let (judged, _) = model_agreement(5).unwrap();
    assert!(judged > 0);
}
