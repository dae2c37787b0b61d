//! The judgement forms of the theory, decided by one entry point.

use crate::syntax::{Clock, DSubst, Expr, Name, Term};

use super::{Ctx, Kernel, TcResult, TypeError, TypeErrorKind as K};

/// A judgement to decide. Terms are surface terms; they are elaborated
/// before equality is tested.
#[derive(Clone, Debug)]
pub enum Judgement {
    /// `Delta |- k : clock`
    ClockValid(Clock),
    /// `Delta |- Gamma ctx`
    CtxWf,
    /// `Delta; Gamma |- A type`
    TypeWf(Term),
    /// `Delta; Gamma |- t : A`
    HasType(Term, Term),
    /// `Delta; Gamma |- A = B type`
    TypeEq(Term, Term),
    /// `Delta; Gamma |- t = u : A`
    TermEq(Term, Term, Term),
    /// `Delta; Gamma |- xi : Gamma' ->k` against a telescope of types
    DSubstWf(Clock, DSubst, Vec<(Name, Term)>),
}

impl Kernel {
    /// Decides `j` in `ctx`. `Ok(())` means the judgement holds.
    pub fn judge(&self, ctx: &Ctx, j: &Judgement) -> TcResult<()> {
        match j {
            Judgement::ClockValid(k) => self.check_clock(ctx, k, "Clock"),
            Judgement::CtxWf => {
                let mut c = Ctx::new(ctx.clocks.clone());
                for (x, ty) in &ctx.vars {
                    self.check_ty(&c, ty)?;
                    c = c.push(x.clone(), ty.clone());
                }
                Ok(())
            }
            Judgement::TypeWf(a) => self.check_ty(ctx, a).map(|_| ()),
            Judgement::HasType(t, a) => {
                let a = self.check_ty(ctx, a)?;
                self.check(ctx, t, &a).map(|_| ())
            }
            Judgement::TypeEq(a, b) => {
                let a = self.check_ty(ctx, a)?;
                let b = self.check_ty(ctx, b)?;
                if self.conv_type(ctx, &a, &b)? {
                    Ok(())
                } else {
                    Err(TypeError::mismatch(K::ConversionFailed, "TyEq", &a, &b))
                }
            }
            Judgement::TermEq(t, u, a) => {
                let a = self.check_ty(ctx, a)?;
                let t = self.check(ctx, t, &a)?;
                let u = self.check(ctx, u, &a)?;
                if self.conv_term(ctx, &t, &u, &a)? {
                    Ok(())
                } else {
                    Err(TypeError::mismatch(K::ConversionFailed, "TmEq", &t, &u))
                }
            }
            Judgement::DSubstWf(k, xi, tele) => self.check_dsubst(ctx, k, xi, tele),
        }
    }

    /// Strict check of a delayed substitution against a telescope: entry `i`
    /// must have type `Later[k] A_i` with earlier entries substituted.
    fn check_dsubst(
        &self,
        ctx: &Ctx,
        k: &Clock,
        xi: &DSubst,
        tele: &[(Name, Term)],
    ) -> TcResult<()> {
        self.check_clock(ctx, k, "DS-Cons")?;
        if xi.len() != tele.len() {
            return Err(TypeError::new(
                K::DSubstMismatch,
                "DS-Cons",
                format!(
                    "{} entries for a telescope of length {}",
                    xi.len(),
                    tele.len()
                ),
            ));
        }
        let mut done: Vec<(Name, Term)> = Vec::new();
        for ((_, t), (y, a)) in xi.entries().iter().zip(tele) {
            let later = Expr::Later(k.clone(), DSubst::from_distinct(done.clone()), a.clone()).rc();
            self.check(ctx, t, &later).map_err(|e| match e.kind {
                K::ConversionFailed | K::NotLaterTyped => TypeError {
                    kind: K::DSubstMismatch,
                    rule: "DS-Cons".into(),
                    ..e
                },
                _ => e,
            })?;
            done.push((y.clone(), t.clone()));
        }
        Ok(())
    }
}
