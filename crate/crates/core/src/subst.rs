//! Capture-avoiding substitution of terms for term variables and clocks for
//! clock variables, plus the `advance` operation on delayed substitutions.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{free_vars, Clock, ClockCtx, CtxMorphism, DSubst, Expr, Name, Term};

/// Returns `base` if it is not taken, otherwise `base` with the smallest
/// numeric suffix that is not taken. Trailing digits of `base` are dropped
/// first so that repeated freshening does not grow names.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return Arc::from(base);
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|cand| !taken(cand))
        .map(|s| Arc::from(s.as_str()))
        .expect("unbounded supply of names")
}

/// A simultaneous substitution.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    terms: HashMap<Name, Term>,
    clocks: HashMap<Name, Clock>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, x: Name, t: Term) -> Self {
        self.terms.insert(x, t);
        self
    }

    pub fn clock(mut self, k: Name, c: Clock) -> Self {
        self.clocks.insert(k, c);
        self
    }

    pub fn from_morphism(m: &CtxMorphism) -> Self {
        let mut s = Self::new();
        for (x, t) in &m.0 {
            s.terms.insert(x.clone(), t.clone());
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.clocks.is_empty()
    }

    pub fn apply(&self, e: &Term) -> Term {
        if self.is_empty() {
            return e.clone();
        }
        let mut avoid_terms = BTreeSet::new();
        let mut avoid_clocks = BTreeSet::new();
        for t in self.terms.values() {
            let fv = free_vars(t);
            avoid_terms.extend(fv.terms);
            avoid_clocks.extend(fv.clocks);
        }
        for c in self.clocks.values() {
            if let Clock::Var(k) = c {
                avoid_clocks.insert(k.clone());
            }
        }
        let ap = Applier {
            terms: self.terms.clone(),
            clocks: self.clocks.clone(),
            avoid_terms,
            avoid_clocks,
        };
        ap.go(e)
    }
}

pub fn subst(e: &Term, x: &Name, t: &Term) -> Term {
    Substitution::new().term(x.clone(), t.clone()).apply(e)
}

pub fn subst_many(e: &Term, pairs: &[(Name, Term)]) -> Term {
    let mut s = Substitution::new();
    for (x, t) in pairs {
        s.terms.insert(x.clone(), t.clone());
    }
    s.apply(e)
}

pub fn clock_subst(e: &Term, k: &Name, c: &Clock) -> Term {
    Substitution::new().clock(k.clone(), c.clone()).apply(e)
}

pub fn apply_morphism(e: &Term, m: &CtxMorphism) -> Term {
    Substitution::from_morphism(m).apply(e)
}

/// Image of a clock set under a clock renaming. Variables sent to the
/// constant clock disappear; the result is deduplicated.
pub fn clock_ctx_image(d: &ClockCtx, clocks: &HashMap<Name, Clock>) -> ClockCtx {
    ClockCtx::from_names(d.iter().filter_map(|k| match clocks.get(k) {
        None => Some(k.clone()),
        Some(Clock::Var(k2)) => Some(k2.clone()),
        Some(Clock::Const) => None,
    }))
}

struct Applier {
    terms: HashMap<Name, Term>,
    clocks: HashMap<Name, Clock>,
    avoid_terms: BTreeSet<Name>,
    avoid_clocks: BTreeSet<Name>,
}

impl Applier {
    fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.clocks.is_empty()
    }

    fn clock(&self, k: &Clock) -> Clock {
        match k {
            Clock::Var(v) => self.clocks.get(v).cloned().unwrap_or_else(|| k.clone()),
            Clock::Const => Clock::Const,
        }
    }

    /// Prepares the substitution for going under term binders `xs` whose
    /// scope is `bodies`. Returns the possibly renamed binders.
    fn bind(&self, xs: &[Name], bodies: &[&Term]) -> (Applier, Vec<Name>) {
        let mut inner = Applier {
            terms: self.terms.clone(),
            clocks: self.clocks.clone(),
            avoid_terms: self.avoid_terms.clone(),
            avoid_clocks: self.avoid_clocks.clone(),
        };
        for x in xs {
            inner.terms.remove(x);
        }
        let mut body_fv: Option<BTreeSet<Name>> = None;
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            if inner.avoid_terms.contains(x) && !inner.is_empty() {
                let fv = body_fv.get_or_insert_with(|| {
                    bodies
                        .iter()
                        .flat_map(|b| free_vars(b).terms.into_iter())
                        .collect()
                });
                let x2 = fresh_name(x, |c| {
                    inner.avoid_terms.contains(c)
                        || fv.contains(c)
                        || xs.iter().any(|y| &**y == c)
                        || out.iter().any(|y: &Name| &**y == c)
                });
                inner.terms.insert(x.clone(), Expr::Var(x2.clone()).rc());
                inner.avoid_terms.insert(x2.clone());
                out.push(x2);
            } else {
                out.push(x.clone());
            }
        }
        (inner, out)
    }

    fn bind_clock(&self, k: &Name, body: &Term) -> (Applier, Name) {
        let mut inner = Applier {
            terms: self.terms.clone(),
            clocks: self.clocks.clone(),
            avoid_terms: self.avoid_terms.clone(),
            avoid_clocks: self.avoid_clocks.clone(),
        };
        inner.clocks.remove(k);
        if inner.avoid_clocks.contains(k) && !inner.is_empty() {
            let fv = free_vars(body).clocks;
            let k2 = fresh_name(k, |c| inner.avoid_clocks.contains(c) || fv.contains(c));
            inner.clocks.insert(k.clone(), Clock::Var(k2.clone()));
            inner.avoid_clocks.insert(k2.clone());
            (inner, k2)
        } else {
            (inner, k.clone())
        }
    }

    fn opt(&self, t: &Option<Term>) -> Option<Term> {
        t.as_ref().map(|t| self.go(t))
    }

    fn motive(&self, m: &Option<(Name, Term)>) -> Option<(Name, Term)> {
        m.as_ref().map(|(z, c)| {
            let (inner, zs) = self.bind(std::slice::from_ref(z), &[c]);
            (zs[0].clone(), inner.go(c))
        })
    }

    fn dsubst(&self, xi: &DSubst, body: &Term) -> (DSubst, Term) {
        let entries: Vec<Term> = xi.entries().iter().map(|(_, t)| self.go(t)).collect();
        let names: Vec<Name> = xi.entries().iter().map(|(x, _)| x.clone()).collect();
        let (inner, names) = self.bind(&names, &[body]);
        let body = inner.go(body);
        (
            DSubst::from_distinct(names.into_iter().zip(entries).collect()),
            body,
        )
    }

    fn go(&self, e: &Term) -> Term {
        if self.is_empty() {
            return e.clone();
        }
        use Expr::*;
        let out = match &**e {
            Unit | Bool | Nat | Star | True | False | Zero | CUnit | CBool | CNat | Const(_)
            | Refl(None) => return e.clone(),
            Universe(d) => Universe(clock_ctx_image(d, &self.clocks)),
            Var(x) => match self.terms.get(x) {
                Some(t) => return t.clone(),
                None => return e.clone(),
            },
            Pi(x, a, b) => {
                let (inner, xs) = self.bind(std::slice::from_ref(x), &[b]);
                Pi(xs[0].clone(), self.go(a), inner.go(b))
            }
            Sigma(x, a, b) => {
                let (inner, xs) = self.bind(std::slice::from_ref(x), &[b]);
                Sigma(xs[0].clone(), self.go(a), inner.go(b))
            }
            Lam(x, a, b) => {
                let (inner, xs) = self.bind(std::slice::from_ref(x), &[b]);
                Lam(xs[0].clone(), self.opt(a), inner.go(b))
            }
            Id(a, t, u) => Id(self.go(a), self.go(t), self.go(u)),
            El(t) => El(self.go(t)),
            Fst(t) => Fst(self.go(t)),
            Snd(t) => Snd(self.go(t)),
            Succ(t) => Succ(self.go(t)),
            CForall(t) => CForall(self.go(t)),
            Refl(Some(t)) => Refl(Some(self.go(t))),
            App(a, b) => App(self.go(a), self.go(b)),
            Pair(a, b) => Pair(self.go(a), self.go(b)),
            CPi(a, b) => CPi(self.go(a), self.go(b)),
            CSigma(a, b) => CSigma(self.go(a), self.go(b)),
            Reflect(a, b) => Reflect(self.go(a), self.go(b)),
            Ann(a, b) => Ann(self.go(a), self.go(b)),
            Later(k, xi, body) => {
                let (xi, body) = self.dsubst(xi, body);
                Later(self.clock(k), xi, body)
            }
            Next(k, xi, body) => {
                let (xi, body) = self.dsubst(xi, body);
                Next(self.clock(k), xi, body)
            }
            Forall(k, body) => {
                let (inner, k) = self.bind_clock(k, body);
                Forall(k, inner.go(body))
            }
            Prev(k, body) => {
                let (inner, k) = self.bind_clock(k, body);
                Prev(k, inner.go(body))
            }
            ClockAbs(k, body) => {
                let (inner, k) = self.bind_clock(k, body);
                ClockAbs(k, inner.go(body))
            }
            If {
                motive,
                cond,
                then_branch,
                else_branch,
            } => If {
                motive: self.motive(motive),
                cond: self.go(cond),
                then_branch: self.go(then_branch),
                else_branch: self.go(else_branch),
            },
            NatRec {
                motive,
                target,
                zero,
                pred,
                ih,
                step,
            } => {
                let (inner, xs) = self.bind(&[pred.clone(), ih.clone()], &[step]);
                NatRec {
                    motive: self.motive(motive),
                    target: self.go(target),
                    zero: self.go(zero),
                    pred: xs[0].clone(),
                    ih: xs[1].clone(),
                    step: inner.go(step),
                }
            }
            J {
                motive: (x, p, c),
                base,
                proof,
            } => {
                let (inner, xs) = self.bind(&[x.clone(), p.clone()], &[c]);
                J {
                    motive: (xs[0].clone(), xs[1].clone(), inner.go(c)),
                    base: self.go(base),
                    proof: self.go(proof),
                }
            }
            CLater(k, t) => CLater(self.clock(k), self.go(t)),
            Fix(k, x, a, body) => {
                let (inner, xs) = self.bind(std::slice::from_ref(x), &[body]);
                Fix(self.clock(k), xs[0].clone(), self.opt(a), inner.go(body))
            }
            ClockApp(t, k) => ClockApp(self.go(t), self.clock(k)),
        };
        out.rc()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvanceError {
    #[error("clock `{0}` is already in the outer clock context")]
    ClockNotFresh(Name),
}

/// The context morphism `advance(xi)` sending each entry `x <- t` to
/// `(prev k. t)[k]`.
pub fn advance_unchecked(k: &Name, xi: &DSubst) -> CtxMorphism {
    let mut m = CtxMorphism::identity();
    for (x, t) in xi.entries() {
        let p = Expr::ClockApp(Expr::Prev(k.clone(), t.clone()).rc(), Clock::Var(k.clone()));
        m = m.extend(x.clone(), p.rc());
    }
    m
}

/// Like [`advance_unchecked`], for `xi` typed in `delta, k`. Refuses a clock
/// that already belongs to `delta`.
pub fn advance(delta: &ClockCtx, k: &Name, xi: &DSubst) -> Result<CtxMorphism, AdvanceError> {
    if delta.contains(k) {
        return Err(AdvanceError::ClockNotFresh(k.clone()));
    }
    Ok(advance_unchecked(k, xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::mk::*;
    use crate::syntax::{alpha_eq, name};

    #[test]
    fn fresh_names_are_deterministic() {
        assert_eq!(&*fresh_name("x", |c| c == "x"), "x1");
        assert_eq!(&*fresh_name("x1", |c| c == "x1" || c == "x2"), "x3");
        assert_eq!(&*fresh_name("y", |_| false), "y");
    }

    #[test]
    fn capture_is_avoided_under_lambda() {
        // (\y. x)[y/x] = \y1. y
        let e = lam("y", var("x"));
        let r = subst(&e, &name("x"), &var("y"));
        assert!(alpha_eq(&r, &lam("z", var("y"))));
        assert!(!alpha_eq(&r, &lam("y", var("y"))));
    }

    #[test]
    fn capture_is_avoided_under_dsubst() {
        let k = Clock::var("k");
        let e = next(k.clone(), vec![("y", var("s"))], app(var("x"), var("y")));
        let r = subst(&e, &name("x"), &var("y"));
        let expected = next(k, vec![("z", var("s"))], app(var("y"), var("z")));
        assert!(alpha_eq(&r, &expected));
    }

    #[test]
    fn entry_terms_are_substituted_in_outer_scope() {
        let k = Clock::var("k");
        let e = next(k.clone(), vec![("x", var("x"))], var("x"));
        let r = subst(&e, &name("x"), &zero());
        assert!(alpha_eq(&r, &next(k, vec![("x", zero())], var("x"))));
    }

    #[test]
    fn clock_capture_is_avoided() {
        // (clam j. next[k] t @ j)[j/k]
        let e = clam(
            "j",
            next(Clock::var("k"), vec![], capp(var("t"), Clock::var("j"))),
        );
        let r = clock_subst(&e, &name("k"), &Clock::var("j"));
        let expected = clam(
            "i",
            next(Clock::var("j"), vec![], capp(var("t"), Clock::var("i"))),
        );
        assert!(alpha_eq(&r, &expected));
    }

    #[test]
    fn universe_image_drops_constant_and_dedups() {
        let e = universe(&["k", "j"]);
        let r = clock_subst(&e, &name("k"), &Clock::var("j"));
        assert!(alpha_eq(&r, &universe(&["j"])));
        let r = clock_subst(&e, &name("k"), &Clock::Const);
        assert!(alpha_eq(&r, &universe(&["j"])));
    }

    #[test]
    fn advance_maps_entries_to_prev_applications() {
        let xi = DSubst::new(vec![(name("x"), var("t"))]).unwrap();
        let delta = ClockCtx::from_names([name("j")]);
        let m = advance(&delta, &name("k"), &xi).unwrap();
        assert_eq!(m.0.len(), 1);
        assert!(alpha_eq(
            &m.0[0].1,
            &capp(prev("k", var("t")), Clock::var("k"))
        ));
        assert_eq!(
            advance(&delta, &name("j"), &xi),
            Err(AdvanceError::ClockNotFresh(name("j")))
        );
        assert!(advance(&delta, &name("k"), &DSubst::empty())
            .unwrap()
            .is_identity());
    }
}
