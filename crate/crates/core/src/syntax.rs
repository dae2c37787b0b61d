//! Abstract syntax of guarded dependent type theory.
//!
//! Types and terms share one [`Expr`] enum so that substitution, binder
//! handling and printing are written once. The type-sort alternatives are
//! `Unit`, `Bool`, `Nat`, `Pi`, `Sigma`, `Id`, `Universe`, `El`, `Later` and
//! `Forall`; everything else is a term. Variables are named; binders are
//! compared up to renaming by [`alpha_eq`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub type Name = Arc<str>;
pub type Term = Arc<Expr>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A clock: the constant `k0` or a clock variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clock {
    Const,
    Var(Name),
}

impl Clock {
    pub fn var(s: &str) -> Clock {
        Clock::Var(name(s))
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Clock::Const => None,
            Clock::Var(k) => Some(k),
        }
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clock::Const => write!(f, "k0"),
            Clock::Var(k) => write!(f, "{k}"),
        }
    }
}

/// A finite set of clock variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClockCtx(BTreeSet<Name>);

impl ClockCtx {
    pub fn new() -> Self {
        ClockCtx(BTreeSet::new())
    }

    pub fn from_names<I: IntoIterator<Item = Name>>(names: I) -> Self {
        ClockCtx(names.into_iter().collect())
    }

    pub fn contains(&self, k: &str) -> bool {
        self.0.contains(k)
    }

    /// Clock validity: the constant is always valid, variables must be members.
    pub fn is_valid(&self, clock: &Clock) -> bool {
        match clock {
            Clock::Const => true,
            Clock::Var(k) => self.0.contains(k),
        }
    }

    pub fn insert(&mut self, k: Name) -> bool {
        self.0.insert(k)
    }

    pub fn with(&self, k: Name) -> Self {
        let mut out = self.clone();
        out.0.insert(k);
        out
    }

    pub fn without(&self, k: &str) -> Self {
        let mut out = self.clone();
        out.0.remove(k);
        out
    }

    pub fn is_subset(&self, other: &ClockCtx) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &ClockCtx) -> Self {
        ClockCtx(self.0.union(&other.0).cloned().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("delayed substitution binds `{0}` twice")]
pub struct DuplicateEntry(pub Name);

/// An ordered delayed substitution `[x1 <- t1, ..., xn <- tn]`.
///
/// Entry terms live in the outer context; the entry variables scope over
/// the body of the enclosing `Later`/`next` only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DSubst(Vec<(Name, Term)>);

impl DSubst {
    pub fn empty() -> Self {
        DSubst(Vec::new())
    }

    pub fn new(entries: Vec<(Name, Term)>) -> Result<Self, DuplicateEntry> {
        for (i, (x, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(y, _)| y == x) {
                return Err(DuplicateEntry(x.clone()));
            }
        }
        Ok(DSubst(entries))
    }

    /// Builds a delayed substitution whose names are known to be distinct.
    pub(crate) fn from_distinct(entries: Vec<(Name, Term)>) -> Self {
        debug_assert!(DSubst::new(entries.clone()).is_ok());
        DSubst(entries)
    }

    pub fn entries(&self) -> &[(Name, Term)] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<(Name, Term)> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn binds(&self, x: &str) -> bool {
        self.0.iter().any(|(y, _)| &**y == x)
    }
}

/// Abstract syntax of both sorts.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    // Types.
    Unit,
    Bool,
    Nat,
    Pi(Name, Term, Term),
    Sigma(Name, Term, Term),
    Id(Term, Term, Term),
    Universe(ClockCtx),
    El(Term),
    Later(Clock, DSubst, Term),
    Forall(Name, Term),

    // Terms.
    Var(Name),
    /// Reference to a top-level declaration.
    Const(Name),
    Lam(Name, Option<Term>, Term),
    App(Term, Term),
    Pair(Term, Term),
    Fst(Term),
    Snd(Term),
    Star,
    True,
    False,
    If {
        motive: Option<(Name, Term)>,
        cond: Term,
        then_branch: Term,
        else_branch: Term,
    },
    Zero,
    Succ(Term),
    NatRec {
        motive: Option<(Name, Term)>,
        target: Term,
        zero: Term,
        pred: Name,
        ih: Name,
        step: Term,
    },
    Refl(Option<Term>),
    /// Identity elimination `J[x p. C] base proof`.
    J {
        motive: (Name, Name, Term),
        base: Term,
        proof: Term,
    },

    // Codes.
    CUnit,
    CBool,
    CNat,
    /// Code of a dependent function type: domain code and a code family.
    CPi(Term, Term),
    CSigma(Term, Term),
    CLater(Clock, Term),
    CForall(Term),

    // Guarded recursion and clocks.
    Next(Clock, DSubst, Term),
    /// `fix[k] (x : T). body`, with `T` the optional binder type `Later[k] A`.
    Fix(Clock, Name, Option<Term>, Term),
    Prev(Name, Term),
    ClockAbs(Name, Term),
    ClockApp(Term, Clock),
    /// Controlled equality reflection: `reflect p in t`.
    Reflect(Term, Term),
    Ann(Term, Term),
}

impl Expr {
    pub fn rc(self) -> Term {
        Arc::new(self)
    }

    /// True for the alternatives that belong to the type sort.
    pub fn is_type_former(&self) -> bool {
        matches!(
            self,
            Expr::Unit
                | Expr::Bool
                | Expr::Nat
                | Expr::Pi(..)
                | Expr::Sigma(..)
                | Expr::Id(..)
                | Expr::Universe(_)
                | Expr::El(_)
                | Expr::Later(..)
                | Expr::Forall(..)
        )
    }
}

/// Small constructors used throughout the kernel and the tests.
pub mod mk {
    use super::*;

    pub fn var(x: &str) -> Term {
        Expr::Var(name(x)).rc()
    }
    pub fn cnst(x: &str) -> Term {
        Expr::Const(name(x)).rc()
    }
    pub fn app(f: Term, a: Term) -> Term {
        Expr::App(f, a).rc()
    }
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, app)
    }
    pub fn lam(x: &str, body: Term) -> Term {
        Expr::Lam(name(x), None, body).rc()
    }
    pub fn lam_ann(x: &str, ty: Term, body: Term) -> Term {
        Expr::Lam(name(x), Some(ty), body).rc()
    }
    pub fn pi(x: &str, a: Term, b: Term) -> Term {
        Expr::Pi(name(x), a, b).rc()
    }
    pub fn arrow(a: Term, b: Term) -> Term {
        Expr::Pi(name("_"), a, b).rc()
    }
    pub fn sigma(x: &str, a: Term, b: Term) -> Term {
        Expr::Sigma(name(x), a, b).rc()
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Expr::Pair(a, b).rc()
    }
    pub fn nat() -> Term {
        Expr::Nat.rc()
    }
    pub fn zero() -> Term {
        Expr::Zero.rc()
    }
    pub fn succ(t: Term) -> Term {
        Expr::Succ(t).rc()
    }
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(zero(), |acc, _| succ(acc))
    }
    pub fn next(k: Clock, xi: Vec<(&str, Term)>, body: Term) -> Term {
        let entries = xi.into_iter().map(|(x, t)| (name(x), t)).collect();
        Expr::Next(k, DSubst::new(entries).expect("distinct entries"), body).rc()
    }
    pub fn later(k: Clock, xi: Vec<(&str, Term)>, body: Term) -> Term {
        let entries = xi.into_iter().map(|(x, t)| (name(x), t)).collect();
        Expr::Later(k, DSubst::new(entries).expect("distinct entries"), body).rc()
    }
    pub fn fix(k: Clock, x: &str, body: Term) -> Term {
        Expr::Fix(k, name(x), None, body).rc()
    }
    pub fn clam(k: &str, body: Term) -> Term {
        Expr::ClockAbs(name(k), body).rc()
    }
    pub fn capp(t: Term, k: Clock) -> Term {
        Expr::ClockApp(t, k).rc()
    }
    pub fn prev(k: &str, body: Term) -> Term {
        Expr::Prev(name(k), body).rc()
    }
    pub fn forall(k: &str, body: Term) -> Term {
        Expr::Forall(name(k), body).rc()
    }
    pub fn id(a: Term, t: Term, u: Term) -> Term {
        Expr::Id(a, t, u).rc()
    }
    pub fn el(t: Term) -> Term {
        Expr::El(t).rc()
    }
    pub fn universe(clocks: &[&str]) -> Term {
        Expr::Universe(ClockCtx::from_names(clocks.iter().map(|k| name(k)))).rc()
    }
    /// `f <*>[k] t`, i.e. `next[k; g <- f, x <- t] (g x)`.
    pub fn ap(k: Clock, f: Term, t: Term) -> Term {
        next(k, vec![("g", f), ("x", t)], app(var("g"), var("x")))
    }
}

/// An ordered typed context `x1 : A1, ..., xn : An`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Telescope(pub Vec<(Name, Term)>);

impl Telescope {
    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.0.iter().map(|(x, _)| x)
    }
}

/// A context morphism: an assignment of terms to the variables of a target
/// telescope. Variables not mentioned are mapped to themselves, so the empty
/// morphism is the identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CtxMorphism(pub Vec<(Name, Term)>);

impl CtxMorphism {
    pub fn identity() -> Self {
        CtxMorphism(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend(mut self, x: Name, t: Term) -> Self {
        self.0.push((x, t));
        self
    }
}

/// Free term and clock variables of an expression.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub terms: BTreeSet<Name>,
    pub clocks: BTreeSet<Name>,
}

pub fn free_vars(e: &Expr) -> FreeVars {
    let mut fv = FreeVars::default();
    collect_fv(e, &mut Vec::new(), &mut Vec::new(), &mut fv);
    fv
}

fn clock_fv(k: &Clock, cbound: &[Name], fv: &mut FreeVars) {
    if let Clock::Var(k) = k {
        if !cbound.contains(k) {
            fv.clocks.insert(k.clone());
        }
    }
}

fn collect_fv(e: &Expr, bound: &mut Vec<Name>, cbound: &mut Vec<Name>, fv: &mut FreeVars) {
    macro_rules! under {
        ($names:expr, $body:expr) => {{
            let n = bound.len();
            bound.extend($names);
            collect_fv($body, bound, cbound, fv);
            bound.truncate(n);
        }};
    }
    macro_rules! under_clock {
        ($k:expr, $body:expr) => {{
            cbound.push($k.clone());
            collect_fv($body, bound, cbound, fv);
            cbound.pop();
        }};
    }
    match e {
        Expr::Unit
        | Expr::Bool
        | Expr::Nat
        | Expr::Star
        | Expr::True
        | Expr::False
        | Expr::Zero
        | Expr::CUnit
        | Expr::CBool
        | Expr::CNat
        | Expr::Const(_) => {}
        Expr::Universe(d) => {
            for k in d.iter() {
                clock_fv(&Clock::Var(k.clone()), cbound, fv);
            }
        }
        Expr::Var(x) => {
            if !bound.contains(x) {
                fv.terms.insert(x.clone());
            }
        }
        Expr::Pi(x, a, b) | Expr::Sigma(x, a, b) => {
            collect_fv(a, bound, cbound, fv);
            under!([x.clone()], b);
        }
        Expr::Lam(x, ann, b) => {
            if let Some(a) = ann {
                collect_fv(a, bound, cbound, fv);
            }
            under!([x.clone()], b);
        }
        Expr::Id(a, t, u) => {
            collect_fv(a, bound, cbound, fv);
            collect_fv(t, bound, cbound, fv);
            collect_fv(u, bound, cbound, fv);
        }
        Expr::El(t)
        | Expr::Fst(t)
        | Expr::Snd(t)
        | Expr::Succ(t)
        | Expr::CForall(t)
        | Expr::Refl(Some(t)) => collect_fv(t, bound, cbound, fv),
        Expr::Refl(None) => {}
        Expr::App(a, b)
        | Expr::Pair(a, b)
        | Expr::CPi(a, b)
        | Expr::CSigma(a, b)
        | Expr::Reflect(a, b)
        | Expr::Ann(a, b) => {
            collect_fv(a, bound, cbound, fv);
            collect_fv(b, bound, cbound, fv);
        }
        Expr::Later(k, xi, body) | Expr::Next(k, xi, body) => {
            clock_fv(k, cbound, fv);
            for (_, t) in xi.entries() {
                collect_fv(t, bound, cbound, fv);
            }
            under!(xi.entries().iter().map(|(x, _)| x.clone()), body);
        }
        Expr::Forall(k, body) | Expr::Prev(k, body) | Expr::ClockAbs(k, body) => {
            under_clock!(k, body)
        }
        Expr::If {
            motive,
            cond,
            then_branch,
            else_branch,
        } => {
            if let Some((z, c)) = motive {
                under!([z.clone()], c);
            }
            collect_fv(cond, bound, cbound, fv);
            collect_fv(then_branch, bound, cbound, fv);
            collect_fv(else_branch, bound, cbound, fv);
        }
        Expr::NatRec {
            motive,
            target,
            zero,
            pred,
            ih,
            step,
        } => {
            if let Some((z, c)) = motive {
                under!([z.clone()], c);
            }
            collect_fv(target, bound, cbound, fv);
            collect_fv(zero, bound, cbound, fv);
            under!([pred.clone(), ih.clone()], step);
        }
        Expr::J {
            motive: (x, p, c),
            base,
            proof,
        } => {
            under!([x.clone(), p.clone()], c);
            collect_fv(base, bound, cbound, fv);
            collect_fv(proof, bound, cbound, fv);
        }
        Expr::CLater(k, t) => {
            clock_fv(k, cbound, fv);
            collect_fv(t, bound, cbound, fv);
        }
        Expr::Fix(k, x, ann, body) => {
            clock_fv(k, cbound, fv);
            if let Some(a) = ann {
                collect_fv(a, bound, cbound, fv);
            }
            under!([x.clone()], body);
        }
        Expr::ClockApp(t, k) => {
            collect_fv(t, bound, cbound, fv);
            clock_fv(k, cbound, fv);
        }
    }
}

pub fn occurs_free(x: &str, e: &Expr) -> bool {
    free_vars(e).terms.contains(x)
}

pub fn clock_occurs_free(k: &str, e: &Expr) -> bool {
    free_vars(e).clocks.contains(k)
}

/// Equality up to renaming of term binders, delayed-substitution binders
/// and clock binders.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    Alpha::default().eq(a, b)
}

#[derive(Default)]
struct Alpha {
    vars: Vec<(Name, Name)>,
    clocks: Vec<(Name, Name)>,
}

fn lookup_pair(stack: &[(Name, Name)], x: &Name, y: &Name) -> bool {
    let lx = stack.iter().rposition(|(l, _)| l == x);
    let ry = stack.iter().rposition(|(_, r)| r == y);
    match (lx, ry) {
        (None, None) => x == y,
        (Some(i), Some(j)) => i == j,
        _ => false,
    }
}

impl Alpha {
    fn clock(&self, a: &Clock, b: &Clock) -> bool {
        match (a, b) {
            (Clock::Const, Clock::Const) => true,
            (Clock::Var(x), Clock::Var(y)) => lookup_pair(&self.clocks, x, y),
            _ => false,
        }
    }

    fn under(&mut self, pairs: Vec<(Name, Name)>, a: &Expr, b: &Expr) -> bool {
        let n = self.vars.len();
        self.vars.extend(pairs);
        let r = self.eq(a, b);
        self.vars.truncate(n);
        r
    }

    fn under_clock(&mut self, x: &Name, y: &Name, a: &Expr, b: &Expr) -> bool {
        self.clocks.push((x.clone(), y.clone()));
        let r = self.eq(a, b);
        self.clocks.pop();
        r
    }

    fn opt(&mut self, a: &Option<Term>, b: &Option<Term>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => self.eq(a, b),
            _ => false,
        }
    }

    fn motive(&mut self, a: &Option<(Name, Term)>, b: &Option<(Name, Term)>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some((x, c)), Some((y, d))) => self.under(vec![(x.clone(), y.clone())], c, d),
            _ => false,
        }
    }

    fn dsubst(&mut self, xa: &DSubst, ba: &Expr, xb: &DSubst, bb: &Expr) -> bool {
        xa.len() == xb.len()
            && xa
                .entries()
                .iter()
                .zip(xb.entries())
                .all(|((_, t), (_, u))| self.eq(t, u))
            && self.under(
                xa.entries()
                    .iter()
                    .zip(xb.entries())
                    .map(|((x, _), (y, _))| (x.clone(), y.clone()))
                    .collect(),
                ba,
                bb,
            )
    }

    fn eq(&mut self, a: &Expr, b: &Expr) -> bool {
        use Expr::*;
        if std::ptr::eq(a, b) && self.vars.iter().all(|(x, y)| x == y) {
            return true;
        }
        match (a, b) {
            (Unit, Unit)
            | (Bool, Bool)
            | (Nat, Nat)
            | (Star, Star)
            | (True, True)
            | (False, False)
            | (Zero, Zero)
            | (CUnit, CUnit)
            | (CBool, CBool)
            | (CNat, CNat) => true,
            (Universe(d1), Universe(d2)) => {
                d1.len() == d2.len()
                    && d1.iter().all(|k| {
                        d2.iter()
                            .any(|k2| self.clock(&Clock::Var(k.clone()), &Clock::Var(k2.clone())))
                    })
            }
            (Var(x), Var(y)) => lookup_pair(&self.vars, x, y),
            (Const(x), Const(y)) => x == y,
            (Pi(x, a1, b1), Pi(y, a2, b2)) | (Sigma(x, a1, b1), Sigma(y, a2, b2)) => {
                self.eq(a1, a2) && self.under(vec![(x.clone(), y.clone())], b1, b2)
            }
            (Lam(x, a1, b1), Lam(y, a2, b2)) => {
                self.opt(a1, a2) && self.under(vec![(x.clone(), y.clone())], b1, b2)
            }
            (Id(a1, t1, u1), Id(a2, t2, u2)) => {
                self.eq(a1, a2) && self.eq(t1, t2) && self.eq(u1, u2)
            }
            (El(t), El(u))
            | (Fst(t), Fst(u))
            | (Snd(t), Snd(u))
            | (Succ(t), Succ(u))
            | (CForall(t), CForall(u)) => self.eq(t, u),
            (Refl(t), Refl(u)) => self.opt(t, u),
            (App(a1, b1), App(a2, b2))
            | (Pair(a1, b1), Pair(a2, b2))
            | (CPi(a1, b1), CPi(a2, b2))
            | (CSigma(a1, b1), CSigma(a2, b2))
            | (Reflect(a1, b1), Reflect(a2, b2))
            | (Ann(a1, b1), Ann(a2, b2)) => self.eq(a1, a2) && self.eq(b1, b2),
            (Later(k1, x1, b1), Later(k2, x2, b2)) | (Next(k1, x1, b1), Next(k2, x2, b2)) => {
                self.clock(k1, k2) && self.dsubst(x1, b1, x2, b2)
            }
            (Forall(k1, b1), Forall(k2, b2))
            | (Prev(k1, b1), Prev(k2, b2))
            | (ClockAbs(k1, b1), ClockAbs(k2, b2)) => self.under_clock(k1, k2, b1, b2),
            (
                If {
                    motive: m1,
                    cond: c1,
                    then_branch: t1,
                    else_branch: e1,
                },
                If {
                    motive: m2,
                    cond: c2,
                    then_branch: t2,
                    else_branch: e2,
                },
            ) => self.motive(m1, m2) && self.eq(c1, c2) && self.eq(t1, t2) && self.eq(e1, e2),
            (
                NatRec {
                    motive: m1,
                    target: n1,
                    zero: z1,
                    pred: p1,
                    ih: h1,
                    step: s1,
                },
                NatRec {
                    motive: m2,
                    target: n2,
                    zero: z2,
                    pred: p2,
                    ih: h2,
                    step: s2,
                },
            ) => {
                self.motive(m1, m2)
                    && self.eq(n1, n2)
                    && self.eq(z1, z2)
                    && self.under(
                        vec![(p1.clone(), p2.clone()), (h1.clone(), h2.clone())],
                        s1,
                        s2,
                    )
            }
            (
                J {
                    motive: (x1, p1, c1),
                    base: b1,
                    proof: q1,
                },
                J {
                    motive: (x2, p2, c2),
                    base: b2,
                    proof: q2,
                },
            ) => {
                self.under(
                    vec![(x1.clone(), x2.clone()), (p1.clone(), p2.clone())],
                    c1,
                    c2,
                ) && self.eq(b1, b2)
                    && self.eq(q1, q2)
            }
            (CLater(k1, t1), CLater(k2, t2)) => self.clock(k1, k2) && self.eq(t1, t2),
            (Fix(k1, x, a1, b1), Fix(k2, y, a2, b2)) => {
                self.clock(k1, k2)
                    && self.opt(a1, a2)
                    && self.under(vec![(x.clone(), y.clone())], b1, b2)
            }
            (ClockApp(t1, k1), ClockApp(t2, k2)) => self.clock(k1, k2) && self.eq(t1, t2),
            _ => false,
        }
    }
}

/// Rebuilds `e` with `f` applied to each immediate subterm. The second
/// argument of `f` lists the term and clock names bound at that subterm.
pub fn map_children(e: &Expr, f: &mut dyn FnMut(&Term, &[Name]) -> Term) -> Expr {
    use Expr::*;
    let none: &[Name] = &[];
    let ds = |xi: &DSubst, f: &mut dyn FnMut(&Term, &[Name]) -> Term| {
        DSubst::from_distinct(
            xi.entries()
                .iter()
                .map(|(x, t)| (x.clone(), f(t, none)))
                .collect(),
        )
    };
    match e {
        Unit | Bool | Nat | Universe(_) | Var(_) | Const(_) | Star | True | False | Zero
        | CUnit | CBool | CNat | Refl(None) => e.clone(),
        Pi(x, a, b) => Pi(x.clone(), f(a, none), f(b, std::slice::from_ref(x))),
        Sigma(x, a, b) => Sigma(x.clone(), f(a, none), f(b, std::slice::from_ref(x))),
        Id(a, t, u) => Id(f(a, none), f(t, none), f(u, none)),
        El(t) => El(f(t, none)),
        Later(k, xi, b) => {
            let names: Vec<Name> = xi.entries().iter().map(|(x, _)| x.clone()).collect();
            Later(k.clone(), ds(xi, f), f(b, &names))
        }
        Next(k, xi, b) => {
            let names: Vec<Name> = xi.entries().iter().map(|(x, _)| x.clone()).collect();
            Next(k.clone(), ds(xi, f), f(b, &names))
        }
        Forall(c, b) => Forall(c.clone(), f(b, std::slice::from_ref(c))),
        Lam(x, a, b) => Lam(
            x.clone(),
            a.as_ref().map(|a| f(a, none)),
            f(b, std::slice::from_ref(x)),
        ),
        App(a, b) => App(f(a, none), f(b, none)),
        Pair(a, b) => Pair(f(a, none), f(b, none)),
        Fst(t) => Fst(f(t, none)),
        Snd(t) => Snd(f(t, none)),
        Succ(t) => Succ(f(t, none)),
        If {
            motive,
            cond,
            then_branch,
            else_branch,
        } => If {
            motive: motive
                .as_ref()
                .map(|(z, m)| (z.clone(), f(m, std::slice::from_ref(z)))),
            cond: f(cond, none),
            then_branch: f(then_branch, none),
            else_branch: f(else_branch, none),
        },
        NatRec {
            motive,
            target,
            zero,
            pred,
            ih,
            step,
        } => NatRec {
            motive: motive
                .as_ref()
                .map(|(z, m)| (z.clone(), f(m, std::slice::from_ref(z)))),
            target: f(target, none),
            zero: f(zero, none),
            pred: pred.clone(),
            ih: ih.clone(),
            step: f(step, &[pred.clone(), ih.clone()]),
        },
        Refl(Some(a)) => Refl(Some(f(a, none))),
        J {
            motive: (x, p, m),
            base,
            proof,
        } => J {
            motive: (x.clone(), p.clone(), f(m, &[x.clone(), p.clone()])),
            base: f(base, none),
            proof: f(proof, none),
        },
        CPi(a, b) => CPi(f(a, none), f(b, none)),
        CSigma(a, b) => CSigma(f(a, none), f(b, none)),
        CLater(k, t) => CLater(k.clone(), f(t, none)),
        CForall(t) => CForall(f(t, none)),
        Fix(k, x, a, b) => Fix(
            k.clone(),
            x.clone(),
            a.as_ref().map(|a| f(a, none)),
            f(b, std::slice::from_ref(x)),
        ),
        Prev(k, b) => Prev(k.clone(), f(b, std::slice::from_ref(k))),
        ClockAbs(k, b) => ClockAbs(k.clone(), f(b, std::slice::from_ref(k))),
        ClockApp(t, k) => ClockApp(f(t, none), k.clone()),
        Reflect(p, t) => Reflect(f(p, none), f(t, none)),
        Ann(t, a) => Ann(f(t, none), f(a, none)),
    }
}

#[cfg(test)]
mod tests {
    use super::mk::*;
    use super::*;

    fn k() -> Clock {
        Clock::var("k")
    }

    #[test]
    fn fix_binder_renaming() {
        assert!(alpha_eq(&fix(k(), "x", var("x")), &fix(k(), "y", var("y"))));
    }

    #[test]
    fn clock_binder_renaming() {
        let a = clam("k", next(Clock::var("k"), vec![], zero()));
        let b = clam("k2", next(Clock::var("k2"), vec![], zero()));
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn dsubst_scope_distinction() {
        let t = var("t");
        let a = next(k(), vec![("x", t.clone())], var("x"));
        let b = next(k(), vec![("y", t)], var("x"));
        assert!(!alpha_eq(&a, &b));
    }

    #[test]
    fn free_vars_of_next_remove_entry_binders() {
        let e = next(k(), vec![("x", app(var("f"), var("t")))], var("x"));
        let fv = free_vars(&e);
        assert_eq!(fv.terms, [name("f"), name("t")].into_iter().collect());
        assert_eq!(fv.clocks, [name("k")].into_iter().collect());
    }

    #[test]
    fn free_vars_of_prev_remove_clock() {
        let u = next(k(), vec![], capp(var("u"), Clock::var("j")));
        let e = prev("k", u.clone());
        let mut expected = free_vars(&u).clocks;
        expected.remove("k");
        assert_eq!(free_vars(&e).clocks, expected);
        assert_eq!(free_vars(&var("y")).terms.len(), 1);
        assert!(free_vars(&var("y")).clocks.is_empty());
    }

    #[test]
    fn duplicate_entries_rejected() {
        let err = DSubst::new(vec![(name("x"), zero()), (name("x"), zero())]).unwrap_err();
        assert_eq!(err, DuplicateEntry(name("x")));
    }

    #[test]
    fn free_variable_not_confused_with_bound() {
        // \x. y  vs  \y. y
        assert!(!alpha_eq(&lam("x", var("y")), &lam("y", var("y"))));
        // \x. \y. x  vs  \y. \x. y
        assert!(alpha_eq(
            &lam("x", lam("y", var("x"))),
            &lam("y", lam("x", var("y")))
        ));
    }
}
