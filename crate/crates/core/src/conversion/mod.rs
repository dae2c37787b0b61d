//! Definitional equality: weak-head normalisation, delayed-substitution
//! normalisation and the type-directed conversion check.
//!
//! Every query draws on a shared [`Fuel`] budget that is reset when an
//! outermost query starts. Fixed-point unfoldings and reflection rewrites
//! each cost one unit; running out yields `FuelExhausted` rather than a
//! negative answer.

mod conv;
mod dsubst;
mod infer;

use std::cell::Cell;

use crate::subst::{advance_unchecked, apply_morphism, clock_subst, fresh_name, subst};
use crate::syntax::{alpha_eq, free_vars, Clock, DSubst, Expr, Name, Term};
use crate::typecheck::{Ctx, Kernel, TcResult, TypeError, TypeErrorKind};

pub(crate) use dsubst::{Acc, AccError};

pub const DEFAULT_FUEL: u32 = 64;

#[derive(Debug)]
pub struct Fuel {
    limit: u32,
    used: Cell<u32>,
}

impl Fuel {
    pub fn new(limit: u32) -> Self {
        Fuel {
            limit,
            used: Cell::new(0),
        }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn used(&self) -> u32 {
        self.used.get()
    }

    pub fn reset(&self) {
        self.used.set(0);
    }

    /// Consumes one unit; false once the budget is spent.
    pub fn spend(&self) -> bool {
        if self.used.get() >= self.limit {
            return false;
        }
        self.used.set(self.used.get() + 1);
        true
    }
}

/// Resets fuel on entry to an outermost query.
pub(crate) struct QueryGuard<'a>(&'a Kernel);

impl Drop for QueryGuard<'_> {
    fn drop(&mut self) {
        self.0.depth.set(self.0.depth.get() - 1);
    }
}

fn fresh_for(base: &str, terms: &[&Term]) -> Name {
    let mut taken = std::collections::BTreeSet::new();
    for t in terms {
        taken.extend(free_vars(t).terms);
    }
    fresh_name(base, |c| taken.contains(c))
}

impl Kernel {
    pub(crate) fn enter(&self) -> QueryGuard<'_> {
        if self.depth.get() == 0 {
            self.fuel.reset();
        }
        self.depth.set(self.depth.get() + 1);
        QueryGuard(self)
    }

    pub(crate) fn spend(&self, rule: &str) -> TcResult<()> {
        if self.fuel.spend() {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorKind::FuelExhausted,
                rule,
                format!("fuel limit {} reached", self.fuel.limit()),
            ))
        }
    }

    /// Weak-head normal form of a term.
    pub fn whnf(&self, ctx: &Ctx, t: &Term) -> TcResult<Term> {
        let _g = self.enter();
        self.whnf_(ctx, t)
    }

    fn whnf_(&self, ctx: &Ctx, t: &Term) -> TcResult<Term> {
        let r = self.whnf_core(ctx, t)?;
        // A reflected left-hand side may itself be in head form, e.g. a pair.
        for (lhs, rhs) in &ctx.rewrites {
            if alpha_eq(&r, lhs) && !alpha_eq(lhs, rhs) {
                self.spend("Reflect")?;
                self.trace("Reflect");
                return self.whnf_(ctx, rhs);
            }
        }
        Ok(r)
    }

    fn whnf_core(&self, ctx: &Ctx, t: &Term) -> TcResult<Term> {
        use Expr::*;
        match &**t {
            Const(c) => {
                if let Some(b) = self.globals.get(c).and_then(|g| g.body.clone()) {
                    return self.whnf_(ctx, &b);
                }
                self.rewrite(ctx, t.clone())
            }
            Var(_) => self.rewrite(ctx, t.clone()),
            App(f, a) => {
                let fw = self.whnf_(ctx, f)?;
                if let Lam(x, _, b) = &*fw {
                    self.trace("TmEq-Π-β");
                    return self.whnf_(ctx, &subst(b, x, a));
                }
                self.rewrite(ctx, App(fw, a.clone()).rc())
            }
            Fst(p) => {
                let pw = self.whnf_(ctx, p)?;
                if let Pair(a, _) = &*pw {
                    return self.whnf_(ctx, a);
                }
                self.rewrite(ctx, Fst(pw).rc())
            }
            Snd(p) => {
                let pw = self.whnf_(ctx, p)?;
                if let Pair(_, b) = &*pw {
                    return self.whnf_(ctx, b);
                }
                self.rewrite(ctx, Snd(pw).rc())
            }
            If {
                motive,
                cond,
                then_branch,
                else_branch,
            } => {
                let cw = self.whnf_(ctx, cond)?;
                match &*cw {
                    True => self.whnf_(ctx, then_branch),
                    False => self.whnf_(ctx, else_branch),
                    _ => self.rewrite(
                        ctx,
                        If {
                            motive: motive.clone(),
                            cond: cw,
                            then_branch: then_branch.clone(),
                            else_branch: else_branch.clone(),
                        }
                        .rc(),
                    ),
                }
            }
            NatRec {
                motive,
                target,
                zero,
                pred,
                ih,
                step,
            } => {
                let tw = self.whnf_(ctx, target)?;
                match &*tw {
                    Zero => self.whnf_(ctx, zero),
                    Succ(n) => {
                        let rec = NatRec {
                            motive: motive.clone(),
                            target: n.clone(),
                            zero: zero.clone(),
                            pred: pred.clone(),
                            ih: ih.clone(),
                            step: step.clone(),
                        }
                        .rc();
                        let s = crate::subst::subst_many(
                            step,
                            &[(pred.clone(), n.clone()), (ih.clone(), rec)],
                        );
                        self.whnf_(ctx, &s)
                    }
                    _ => self.rewrite(
                        ctx,
                        NatRec {
                            motive: motive.clone(),
                            target: tw,
                            zero: zero.clone(),
                            pred: pred.clone(),
                            ih: ih.clone(),
                            step: step.clone(),
                        }
                        .rc(),
                    ),
                }
            }
            J {
                motive,
                base,
                proof,
            } => {
                let pw = self.whnf_(ctx, proof)?;
                if let Refl(_) = &*pw {
                    return self.whnf_(ctx, base);
                }
                self.rewrite(
                    ctx,
                    J {
                        motive: motive.clone(),
                        base: base.clone(),
                        proof: pw,
                    }
                    .rc(),
                )
            }
            Fix(k, x, _, body) => {
                self.spend("TmEq-Fix")?;
                self.trace("TmEq-Fix");
                let unfolded = subst(body, x, &Next(k.clone(), DSubst::empty(), t.clone()).rc());
                self.whnf_(ctx, &unfolded)
            }
            ClockApp(u, k) => {
                let uw = self.whnf_(ctx, u)?;
                if let ClockAbs(c, b) = &*uw {
                    self.trace("TmEq-∀-β");
                    return self.whnf_(ctx, &clock_subst(b, c, k));
                }
                self.rewrite(ctx, ClockApp(uw, k.clone()).rc())
            }
            Prev(k, body) => {
                let inner = ctx.with_clock(k.clone());
                let bw = self.whnf_(&inner, body)?;
                if let Next(Clock::Var(k2), xi, u) = &*bw {
                    if k2 == k {
                        self.trace("TmEq-prev-β");
                        let m = advance_unchecked(k, xi);
                        return Ok(ClockAbs(k.clone(), apply_morphism(u, &m)).rc());
                    }
                }
                self.rewrite(ctx, Prev(k.clone(), bw).rc())
            }
            Reflect(_, u) | Ann(u, _) => self.whnf_(ctx, u),
            _ => Ok(t.clone()),
        }
    }

    /// Applies a `reflect` rewrite to a stuck term whose head matches a
    /// rewrite's left-hand side.
    fn rewrite(&self, ctx: &Ctx, t: Term) -> TcResult<Term> {
        if ctx.rewrites.is_empty() {
            return Ok(t);
        }
        for (lhs, rhs) in &ctx.rewrites {
            let hit = alpha_eq(&t, lhs) || {
                let mut plain = ctx.clone();
                plain.rewrites.clear();
                self.compare_neutral(&plain, &t, lhs)?.is_some()
            };
            if hit {
                self.spend("Reflect")?;
                self.trace("Reflect");
                return self.whnf_(ctx, rhs);
            }
        }
        Ok(t)
    }

    /// Weak-head normal form of a type: `El` of a canonical code computes,
    /// delayed substitutions are normalised, and identity types over `Later`
    /// and `forall` types are pushed inside.
    pub fn whnf_ty(&self, ctx: &Ctx, ty: &Term) -> TcResult<Term> {
        let _g = self.enter();
        use Expr::*;
        match &**ty {
            El(t) => {
                let tw = self.whnf(ctx, t)?;
                Ok(match &*tw {
                    CUnit => Unit.rc(),
                    CBool => Bool.rc(),
                    CNat => Nat.rc(),
                    CPi(a, f) | CSigma(a, f) => {
                        let (x, body) = open_family(f);
                        let dom = El(a.clone()).rc();
                        let cod = El(body).rc();
                        if matches!(&*tw, CPi(..)) {
                            Pi(x, dom, cod).rc()
                        } else {
                            Sigma(x, dom, cod).rc()
                        }
                    }
                    CLater(k, u) => {
                        let uw = self.whnf(ctx, u)?;
                        let later = match &*uw {
                            Next(k2, xi, b) if k2 == k => {
                                self.trace("TyEq-El-▶");
                                Later(k.clone(), xi.clone(), El(b.clone()).rc())
                            }
                            _ => {
                                let x = fresh_for("x", &[&uw]);
                                Later(
                                    k.clone(),
                                    DSubst::from_distinct(vec![(x.clone(), uw.clone())]),
                                    El(Var(x).rc()).rc(),
                                )
                            }
                        };
                        return self.whnf_ty(ctx, &later.rc());
                    }
                    CForall(u) => {
                        let uw = self.whnf(ctx, u)?;
                        match &*uw {
                            ClockAbs(c, b) => {
                                self.trace("TyEq-∀-el");
                                Forall(c.clone(), El(b.clone()).rc()).rc()
                            }
                            _ => {
                                let c = self.fresh_clock(ctx, "k");
                                Forall(c.clone(), El(ClockApp(uw, Clock::Var(c)).rc()).rc()).rc()
                            }
                        }
                    }
                    _ => El(tw).rc(),
                })
            }
            Later(k, xi, b) => {
                let (xi, b) = self.normalize_dsubst(ctx, k, xi, b, false)?;
                Ok(Later(k.clone(), xi, b).rc())
            }
            Id(a, l, r) => {
                let aw = self.whnf_ty(ctx, a)?;
                match &*aw {
                    Later(k, zeta, b) => {
                        self.trace("TyEq-▶");
                        let mut entries = zeta.entries().to_vec();
                        let lb = self.next_parts(ctx, k, l, &mut entries)?;
                        let rb = self.next_parts(ctx, k, r, &mut entries)?;
                        let t = Later(
                            k.clone(),
                            DSubst::from_distinct(entries),
                            Id(b.clone(), lb, rb).rc(),
                        );
                        self.whnf_ty(ctx, &t.rc())
                    }
                    Forall(c, b) => {
                        self.trace("TyEq-∀-Id");
                        let c2 = self.fresh_clock(ctx, c);
                        let k = Clock::Var(c2.clone());
                        Ok(Forall(
                            c2.clone(),
                            Id(
                                clock_subst(b, c, &k),
                                ClockApp(l.clone(), k.clone()).rc(),
                                ClockApp(r.clone(), k).rc(),
                            )
                            .rc(),
                        )
                        .rc())
                    }
                    _ => Ok(Id(aw, l.clone(), r.clone()).rc()),
                }
            }
            _ => Ok(ty.clone()),
        }
    }

    /// Splits a term of type `Later[k] ...` into delayed-substitution
    /// entries (appended to `entries`, renamed apart) and a body.
    fn next_parts(
        &self,
        ctx: &Ctx,
        k: &Clock,
        t: &Term,
        entries: &mut Vec<(Name, Term)>,
    ) -> TcResult<Term> {
        let tw = self.whnf(ctx, t)?;
        let taken = |entries: &Vec<(Name, Term)>, c: &str| {
            entries.iter().any(|(y, _)| &**y == c) || ctx.binds(c)
        };
        match &*tw {
            Expr::Next(k2, xi, body) if k2 == k => {
                let mut ren = Vec::new();
                for (x, s) in xi.entries() {
                    let y = fresh_name(x, |c| taken(entries, c));
                    ren.push((x.clone(), Expr::Var(y.clone()).rc()));
                    entries.push((y, s.clone()));
                }
                Ok(crate::subst::subst_many(body, &ren))
            }
            _ => {
                let y = fresh_name("x", |c| taken(entries, c));
                entries.push((y.clone(), tw));
                Ok(Expr::Var(y).rc())
            }
        }
    }
}

/// Opens a code family `f` as a binder and body, eta-expanding if `f` is not
/// a lambda.
fn open_family(f: &Term) -> (Name, Term) {
    match &**f {
        Expr::Lam(x, _, b) => (x.clone(), b.clone()),
        _ => {
            let x = fresh_for("x", &[f]);
            (x.clone(), Expr::App(f.clone(), Expr::Var(x).rc()).rc())
        }
    }
}
