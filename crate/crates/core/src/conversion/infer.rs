//! Type synthesis for elaborated terms. The checker has already validated
//! these terms, so only the information needed to reconstruct a type is
//! consulted.

use crate::subst::{advance_unchecked, apply_morphism, clock_subst, subst, subst_many};
use crate::syntax::{Clock, ClockCtx, Expr, Name, Term};
use crate::typecheck::{Ctx, Kernel, TcResult, TypeError, TypeErrorKind};

fn cannot(rule: &str, what: &str) -> TypeError {
    TypeError::new(TypeErrorKind::CannotInfer, rule, what.to_string())
}

impl Kernel {
    /// The type of an elaborated term.
    pub fn type_of(&self, ctx: &Ctx, t: &Term) -> TcResult<Term> {
        let _g = self.enter();
        use Expr::*;
        Ok(match &**t {
            Var(x) => ctx.lookup(x).cloned().ok_or_else(|| {
                TypeError::new(TypeErrorKind::UnboundVariable, "Ty-Var", format!("`{x}`"))
            })?,
            Const(x) => self.globals.get(x).map(|g| g.ty.clone()).ok_or_else(|| {
                TypeError::new(TypeErrorKind::UnboundVariable, "Ty-Var", format!("`{x}`"))
            })?,
            Lam(x, Some(a), b) => {
                let y = ctx.fresh(x);
                let inner = ctx.push(y.clone(), a.clone());
                let b = subst(b, x, &Var(y.clone()).rc());
                Pi(y, a.clone(), self.type_of(&inner, &b)?).rc()
            }
            Lam(_, None, _) => return Err(cannot("Ty-Lam", "unannotated lambda")),
            App(f, a) => {
                let fty = self.type_of(ctx, f)?;
                match &*self.whnf_ty(ctx, &fty)? {
                    Pi(x, _, b) => subst(b, x, a),
                    _ => return Err(cannot("Ty-App", "application of a non-function")),
                }
            }
            Pair(a, b) => Sigma(
                Name::from("_"),
                self.type_of(ctx, a)?,
                self.type_of(ctx, b)?,
            )
            .rc(),
            Fst(p) | Snd(p) => {
                let pty = self.type_of(ctx, p)?;
                match &*self.whnf_ty(ctx, &pty)? {
                    Sigma(x, a, b) => {
                        if matches!(&**t, Fst(_)) {
                            a.clone()
                        } else {
                            subst(b, x, &Fst(p.clone()).rc())
                        }
                    }
                    _ => return Err(cannot("Ty-Σ-E", "projection from a non-pair")),
                }
            }
            Star => Unit.rc(),
            True | False => Bool.rc(),
            Zero | Succ(_) => Nat.rc(),
            If {
                motive: Some((z, m)),
                cond,
                ..
            } => subst(m, z, cond),
            If { motive: None, .. } => return Err(cannot("Ty-If", "if without motive")),
            NatRec {
                motive: Some((z, m)),
                target,
                ..
            } => subst(m, z, target),
            NatRec { motive: None, .. } => {
                return Err(cannot("Ty-NatRec", "natrec without motive"))
            }
            Refl(Some(a)) => Id(self.type_of(ctx, a)?, a.clone(), a.clone()).rc(),
            Refl(None) => return Err(cannot("Id-I", "refl without endpoint")),
            J {
                motive: (x, p, m),
                proof,
                ..
            } => {
                let pty = self.type_of(ctx, proof)?;
                match &*self.whnf_ty(ctx, &pty)? {
                    Id(_, _, r) => {
                        subst_many(m, &[(x.clone(), r.clone()), (p.clone(), proof.clone())])
                    }
                    _ => return Err(cannot("Id-E", "J on a non-identity proof")),
                }
            }
            CUnit | CBool | CNat => Universe(ClockCtx::new()).rc(),
            CPi(a, f) | CSigma(a, f) => {
                let d1 = self.universe_of(ctx, a)?;
                let fty = self.type_of(ctx, f)?;
                let d2 = match &*self.whnf_ty(ctx, &fty)? {
                    Pi(_, _, u) => match &**u {
                        Universe(d) => d.clone(),
                        _ => return Err(cannot("Ty-Π-code", "code family")),
                    },
                    _ => return Err(cannot("Ty-Π-code", "code family")),
                };
                Universe(d1.union(&d2)).rc()
            }
            CLater(_, u) => {
                let uty = self.type_of(ctx, u)?;
                match &*self.whnf_ty(ctx, &uty)? {
                    Later(_, _, b) => match &*self.whnf_ty(ctx, b)? {
                        Universe(d) => Universe(d.clone()).rc(),
                        _ => return Err(cannot("Ty-▶̂", "delayed code")),
                    },
                    _ => return Err(cannot("Ty-▶̂", "delayed code")),
                }
            }
            CForall(u) => {
                let uty = self.type_of(ctx, u)?;
                match &*self.whnf_ty(ctx, &uty)? {
                    Forall(c, b) => match &**b {
                        Universe(d) => Universe(d.without(c)).rc(),
                        _ => return Err(cannot("Ty-∀-code", "clock-indexed code")),
                    },
                    _ => return Err(cannot("Ty-∀-code", "clock-indexed code")),
                }
            }
            Next(k, xi, body) => {
                let mut acc = self.acc_new(ctx, k);
                let ren = match self.acc_add_dsubst(&mut acc, xi)? {
                    Ok(r) => r,
                    Err(_) => return Err(cannot("Ty-Next", "ill-typed delayed substitution")),
                };
                let body = subst_many(body, &ren);
                let bty = self.type_of(&acc.ctx, &body)?;
                Later(k.clone(), acc.dsubst_all(), bty).rc()
            }
            Fix(_, _, Some(ann), _) => match &**ann {
                Later(_, _, a) => a.clone(),
                _ => return Err(cannot("Ty-Fix", "fix binder type")),
            },
            Fix(_, _, None, _) => return Err(cannot("Ty-Fix", "unannotated fix")),
            Prev(k, body) => {
                let (k, body) = if ctx.clocks.contains(k) {
                    let k2 = self.fresh_clock(ctx, k);
                    let b = clock_subst(body, k, &Clock::Var(k2.clone()));
                    (k2, b)
                } else {
                    (k.clone(), body.clone())
                };
                let inner = ctx.with_clock(k.clone());
                let bty = self.type_of(&inner, &body)?;
                match &*self.whnf_ty(&inner, &bty)? {
                    Later(_, xi, a) => {
                        Forall(k.clone(), apply_morphism(a, &advance_unchecked(&k, xi))).rc()
                    }
                    _ => return Err(cannot("Ty-prev", "prev of a non-delayed term")),
                }
            }
            ClockAbs(c, body) => {
                let (c, body) = if ctx.clocks.contains(c) {
                    let c2 = self.fresh_clock(ctx, c);
                    let b = clock_subst(body, c, &Clock::Var(c2.clone()));
                    (c2, b)
                } else {
                    (c.clone(), body.clone())
                };
                let inner = ctx.with_clock(c.clone());
                Forall(c, self.type_of(&inner, &body)?).rc()
            }
            ClockApp(u, k) => {
                let uty = self.type_of(ctx, u)?;
                match &*self.whnf_ty(ctx, &uty)? {
                    Forall(c, b) => clock_subst(b, c, k),
                    _ => return Err(cannot("Ty-app", "clock application")),
                }
            }
            Ann(_, a) => a.clone(),
            Reflect(_, u) => self.type_of(ctx, u)?,
            _ => return Err(cannot("Ty-Var", "a type has no type")),
        })
    }

    fn universe_of(&self, ctx: &Ctx, code: &Term) -> TcResult<ClockCtx> {
        let ty = self.type_of(ctx, code)?;
        match &*self.whnf_ty(ctx, &ty)? {
            Expr::Universe(d) => Ok(d.clone()),
            _ => Err(cannot("El", "not a code")),
        }
    }
}
