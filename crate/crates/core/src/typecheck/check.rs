//! Bidirectional checking with elaboration. Checking fills in binder
//! annotations, eliminator motives and `refl` endpoints, so that the
//! resulting terms can have their types synthesised by
//! [`Kernel::type_of`].

use std::collections::BTreeSet;

use crate::conversion::AccError;
use crate::frontend::print::print_expr;
use crate::subst::{advance_unchecked, apply_morphism, clock_subst, subst, subst_many};
use crate::syntax::{alpha_eq, free_vars, map_children, Clock, ClockCtx, DSubst, Expr, Name, Term};

use super::{Ctx, Kernel, TcResult, TypeError, TypeErrorKind as K};

fn var(x: &Name) -> Term {
    Expr::Var(x.clone()).rc()
}

fn shape_err(kind: K, rule: &str, expected: &str, actual: &Expr) -> TypeError {
    TypeError {
        kind,
        rule: rule.to_string(),
        expected: Some(expected.to_string()),
        actual: Some(print_expr(actual)),
        message: String::new(),
        decl: None,
    }
}

fn conv_err(rule: &str, expected: &Expr, actual: &Expr) -> TypeError {
    TypeError::mismatch(K::ConversionFailed, rule, expected, actual)
}

/// The code of a type former, when it has one.
pub(crate) fn to_code(t: &Term) -> Option<Term> {
    use Expr::*;
    Some(match &**t {
        Unit => CUnit.rc(),
        Bool => CBool.rc(),
        Nat => CNat.rc(),
        Pi(x, a, b) => CPi(a.clone(), Lam(x.clone(), None, b.clone()).rc()).rc(),
        Sigma(x, a, b) => CSigma(a.clone(), Lam(x.clone(), None, b.clone()).rc()).rc(),
        Later(k, xi, b) => CLater(k.clone(), Next(k.clone(), xi.clone(), b.clone()).rc()).rc(),
        Forall(c, b) => CForall(ClockAbs(c.clone(), b.clone()).rc()).rc(),
        El(t) => t.clone(),
        _ => return None,
    })
}

/// True for terms worth abstracting when computing an eliminator motive.
fn is_stuck_shape(t: &Expr) -> bool {
    matches!(
        t,
        Expr::Var(_)
            | Expr::Const(_)
            | Expr::App(..)
            | Expr::Fst(_)
            | Expr::Snd(_)
            | Expr::ClockApp(..)
            | Expr::If { .. }
            | Expr::NatRec { .. }
            | Expr::J { .. }
            | Expr::Prev(..)
    )
}

/// Replaces subterms alpha-equal to one of `targets` by `rep`, without
/// descending under binders that would capture.
fn abstract_occ(
    e: &Term,
    targets: &[Term],
    rep: &Term,
    blocked: &BTreeSet<Name>,
    found: &mut bool,
) -> Term {
    if targets.iter().any(|t| alpha_eq(e, t)) {
        *found = true;
        return rep.clone();
    }
    map_children(e, &mut |c, binders| {
        if binders.iter().any(|b| blocked.contains(b)) {
            c.clone()
        } else {
            abstract_occ(c, targets, rep, blocked, found)
        }
    })
    .rc()
}

/// Case analysis on a sum: `(if fst s then \a. t else \b. u) (snd s)`.
fn as_case(t: &Expr) -> Option<(&Term, &Term, &Term)> {
    let Expr::App(f, arg) = t else { return None };
    let Expr::If {
        motive: None,
        cond,
        then_branch,
        else_branch,
    } = &**f
    else {
        return None;
    };
    let (Expr::Fst(s1), Expr::Snd(s2)) = (&**cond, &**arg) else {
        return None;
    };
    if !alpha_eq(s1, s2)
        || !matches!(&**then_branch, Expr::Lam(..))
        || !matches!(&**else_branch, Expr::Lam(..))
    {
        return None;
    }
    Some((s1, then_branch, else_branch))
}

impl Kernel {
    /// Checks `t` against `ty`, returning the elaborated term.
    pub fn check(&self, ctx: &Ctx, t: &Term, ty: &Term) -> TcResult<Term> {
        self.chk(ctx, t, ty, "Ty-Conv")
    }

    pub(crate) fn check_clock(&self, ctx: &Ctx, k: &Clock, rule: &str) -> TcResult<()> {
        match k {
            Clock::Const => Ok(()),
            Clock::Var(n) if ctx.clocks.contains(n) => Ok(()),
            Clock::Var(n) => Err(TypeError::new(
                K::UnboundClock,
                rule,
                format!("clock `{n}` is not in scope"),
            )),
        }
    }

    fn by_infer(&self, ctx: &Ctx, t: &Term, ty: &Term, rule: &str) -> TcResult<Term> {
        let (t2, got) = self.infer(ctx, t)?;
        self.expect_sub(ctx, &got, ty, rule)?;
        Ok(t2)
    }

    fn expect_sub(&self, ctx: &Ctx, got: &Term, want: &Term, rule: &str) -> TcResult<()> {
        if self.sub_type(ctx, got, want)? {
            Ok(())
        } else {
            Err(conv_err(rule, want, got))
        }
    }

    fn chk(&self, ctx: &Ctx, t: &Term, ty: &Term, rule: &str) -> TcResult<Term> {
        use Expr::*;
        if let Some((s, tb, eb)) = as_case(t) {
            return self.check_case(ctx, s, tb, eb, ty);
        }
        match &**t {
            Lam(x, ann, body) => {
                let tyw = self.whnf_ty(ctx, ty)?;
                let Pi(y, dom, cod) = &*tyw else {
                    return Err(shape_err(K::ConversionFailed, "Ty-Lam", &print_expr(ty), t));
                };
                let dom = match ann {
                    Some(a) => {
                        let a2 = self.check_ty(ctx, a)?;
                        if !self.conv_type(ctx, &a2, dom)? {
                            return Err(conv_err("Ty-Lam", dom, &a2));
                        }
                        a2
                    }
                    None => dom.clone(),
                };
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), dom.clone());
                let body = subst(body, x, &var(&z));
                let cod = subst(cod, y, &var(&z));
                let b = self.chk(&inner, &body, &cod, "Ty-Lam")?;
                Ok(Lam(z, Some(dom), b).rc())
            }
            Pair(a, b) => {
                let tyw = self.whnf_ty(ctx, ty)?;
                let Sigma(y, d, c) = &*tyw else {
                    return self.by_infer(ctx, t, ty, rule);
                };
                let a2 = self.chk(ctx, a, d, "Ty-Pair")?;
                let c = subst(c, y, &a2);
                let b2 = self.chk(ctx, b, &c, "Ty-Pair")?;
                Ok(Pair(a2, b2).rc())
            }
            If {
                motive: None,
                cond,
                then_branch,
                else_branch,
            } => {
                let cond2 = self.chk(ctx, cond, &Bool.rc(), "Ty-If")?;
                let z = ctx.fresh("b");
                let m = self.generalize(ctx, ty, &cond2, &var(&z))?;
                let then2 = self.chk(ctx, then_branch, &subst(&m, &z, &True.rc()), "Ty-If")?;
                let else2 = self.chk(ctx, else_branch, &subst(&m, &z, &False.rc()), "Ty-If")?;
                Ok(If {
                    motive: Some((z, m)),
                    cond: cond2,
                    then_branch: then2,
                    else_branch: else2,
                }
                .rc())
            }
            NatRec {
                motive: None,
                target,
                zero,
                pred,
                ih,
                step,
            } => {
                let target2 = self.chk(ctx, target, &Nat.rc(), "Ty-NatRec")?;
                let z = ctx.fresh("n");
                let m = self.generalize(ctx, ty, &target2, &var(&z))?;
                self.finish_natrec(ctx, z, m, target2, zero, pred, ih, step)
            }
            Next(k, xi, body) => {
                self.check_clock(ctx, k, "Ty-Next")?;
                let tyw = self.whnf_ty(ctx, ty)?;
                let Later(k2, zeta, b) = &*tyw else {
                    return self.by_infer(ctx, t, ty, rule);
                };
                if k2 != k {
                    return self.by_infer(ctx, t, ty, rule);
                }
                let mut acc = self.acc_new(ctx, k);
                let r0 = match self.acc_add_dsubst(&mut acc, zeta)? {
                    Ok(r) => r,
                    Err(_) => return self.by_infer(ctx, t, ty, rule),
                };
                let b = subst_many(b, &r0);
                let ren = self.elab_entries(ctx, &mut acc, xi)?;
                let body2 = self.chk(&acc.ctx, &subst_many(body, &ren), &b, "Ty-Next")?;
                let xi2 = acc.dsubst_for(&[&body2]);
                if xi2.len() < xi.len() {
                    self.trace("TmEq-Next-Weak");
                }
                Ok(Next(k.clone(), xi2, body2).rc())
            }
            Fix(k, x, ann, body) => {
                self.check_clock(ctx, k, "Ty-Fix")?;
                let later = Later(k.clone(), DSubst::empty(), ty.clone()).rc();
                if let Some(a) = ann {
                    let a2 = self.check_ty(ctx, a)?;
                    if !self.conv_type(ctx, &a2, &later)? {
                        return Err(conv_err("Ty-Fix", &later, &a2));
                    }
                }
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), later.clone());
                let b2 = self.chk(&inner, &subst(body, x, &var(&z)), ty, "Ty-Fix")?;
                Ok(Fix(k.clone(), z, Some(later), b2).rc())
            }
            ClockAbs(c, body) => {
                let tyw = self.whnf_ty(ctx, ty)?;
                let Forall(c2, b) = &*tyw else {
                    return self.by_infer(ctx, t, ty, rule);
                };
                let c3 = self.fresh_clock(ctx, c);
                let k3 = Clock::Var(c3.clone());
                let inner = ctx.with_clock(c3.clone());
                let body = clock_subst(body, c, &k3);
                let b = clock_subst(b, c2, &k3);
                Ok(ClockAbs(c3, self.chk(&inner, &body, &b, "Ty-Λ")?).rc())
            }
            Prev(k, body) => {
                let tyw = self.whnf_ty(ctx, ty)?;
                let Forall(c, b) = &*tyw else {
                    return self.by_infer(ctx, t, ty, rule);
                };
                match self.infer_prev(ctx, k, body) {
                    Ok((t2, got)) => {
                        self.expect_sub(ctx, &got, ty, "Ty-prev")?;
                        Ok(t2)
                    }
                    Err(e) if e.kind == K::CannotInfer => {
                        let (k2, body2, inner) = self.prev_binder(ctx, k, body)?;
                        let kv = Clock::Var(k2.clone());
                        let want = Later(kv.clone(), DSubst::empty(), clock_subst(b, c, &kv)).rc();
                        let b3 = self.chk(&inner, &body2, &want, "Ty-prev")?;
                        Ok(Prev(k2, b3).rc())
                    }
                    Err(e) => Err(e),
                }
            }
            Refl(None) => {
                let tyw = if matches!(&**ty, Id(..)) {
                    ty.clone()
                } else {
                    self.whnf_ty(ctx, ty)?
                };
                if let Forall(k, body) = &*tyw {
                    // Id over forall was pushed inside: check `clam k. refl`.
                    let k2 = self.fresh_clock(ctx, k);
                    let body = clock_subst(body, k, &Clock::Var(k2.clone()));
                    let r = self.chk(&ctx.with_clock(k2.clone()), t, &body, rule)?;
                    return Ok(ClockAbs(k2, r).rc());
                }
                let Id(a, l, r) = &*tyw else {
                    return Err(shape_err(K::ConversionFailed, "Id-I", &print_expr(ty), t));
                };
                if !self.conv_term(ctx, l, r, a)? {
                    return Err(conv_err("Id-I", l, r));
                }
                Ok(Refl(Some(l.clone())).rc())
            }
            Reflect(p, body) => {
                let (p2, inner) = self.reflect_ctx(ctx, p)?;
                let b2 = self.chk(&inner, body, ty, rule)?;
                Ok(Reflect(p2, b2).rc())
            }
            Ann(u, a) => {
                let a2 = self.check_ty(ctx, a)?;
                let u2 = self.chk(ctx, u, &a2, "Ty-Conv")?;
                self.expect_sub(ctx, &a2, ty, rule)?;
                Ok(u2)
            }
            CPi(..) | CSigma(..) | CLater(..) | CForall(..) => {
                let tyw = self.whnf_ty(ctx, ty)?;
                match &*tyw {
                    Universe(d) => self.check_code(ctx, t, d),
                    _ => self.by_infer(ctx, t, ty, rule),
                }
            }
            _ if t.is_type_former() => {
                let tyw = self.whnf_ty(ctx, ty)?;
                match (&*tyw, to_code(t)) {
                    (Universe(_), Some(code)) => self.chk(ctx, &code, ty, rule),
                    _ => self.by_infer(ctx, t, ty, rule),
                }
            }
            _ => self.by_infer(ctx, t, ty, rule),
        }
    }

    fn check_code(&self, ctx: &Ctx, t: &Term, d: &ClockCtx) -> TcResult<Term> {
        use Expr::*;
        let univ = Universe(d.clone()).rc();
        match &**t {
            CPi(a, f) | CSigma(a, f) => {
                let a2 = self.chk(ctx, a, &univ, "Ty-Π-code")?;
                let x = ctx.fresh("x");
                let fam = Pi(x, El(a2.clone()).rc(), univ.clone()).rc();
                let f2 = self.chk(ctx, f, &fam, "Ty-Π-code")?;
                Ok(if matches!(&**t, CPi(..)) {
                    CPi(a2, f2)
                } else {
                    CSigma(a2, f2)
                }
                .rc())
            }
            CLater(k, u) => {
                self.check_clock(ctx, k, "Ty-▶̂")?;
                if let Clock::Var(n) = k {
                    if !d.contains(n) {
                        return Err(TypeError {
                            expected: Some(print_expr(&univ)),
                            actual: Some(print_expr(t)),
                            ..TypeError::new(
                                K::UniverseEscape,
                                "Ty-▶̂",
                                format!("clock `{n}` is not among the universe's clocks"),
                            )
                        });
                    }
                }
                let want = Later(k.clone(), DSubst::empty(), univ).rc();
                Ok(CLater(k.clone(), self.chk(ctx, u, &want, "Ty-▶̂")?).rc())
            }
            CForall(u) => {
                let c = self.fresh_clock(ctx, "k");
                let want = Forall(c.clone(), Universe(d.with(c)).rc()).rc();
                Ok(CForall(self.chk(ctx, u, &want, "Ty-∀-code")?).rc())
            }
            _ => unreachable!("check_code on a non-code"),
        }
    }

    /// Computes an eliminator motive by abstracting occurrences of `target`
    /// (or its weak-head form) in `ty`, unfolding `ty` if none are visible.
    fn generalize(&self, ctx: &Ctx, ty: &Term, target: &Term, rep: &Term) -> TcResult<Term> {
        if !is_stuck_shape(target) {
            return Ok(ty.clone());
        }
        let mut targets = vec![target.clone()];
        let tw = self.whnf(ctx, target)?;
        if !alpha_eq(&tw, target) && is_stuck_shape(&tw) {
            targets.push(tw);
        }
        let mut blocked: BTreeSet<Name> = BTreeSet::new();
        for t in &targets {
            let fv = free_vars(t);
            blocked.extend(fv.terms);
            blocked.extend(fv.clocks);
        }
        blocked.extend(free_vars(rep).terms);
        let mut found = false;
        let r = abstract_occ(ty, &targets, rep, &blocked, &mut found);
        if found {
            return Ok(r);
        }
        let exposed = self.expose(ctx, ty, 3)?;
        let r = abstract_occ(&exposed, &targets, rep, &blocked, &mut found);
        Ok(if found { r } else { ty.clone() })
    }

    /// Weak-head normalises `ty` and the components of its outer binders.
    fn expose(&self, ctx: &Ctx, ty: &Term, depth: u32) -> TcResult<Term> {
        let w = self.whnf_ty(ctx, ty)?;
        if depth == 0 {
            return Ok(w);
        }
        Ok(match &*w {
            Expr::Pi(x, a, b) | Expr::Sigma(x, a, b) => {
                let a2 = self.expose(ctx, a, depth - 1)?;
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), a.clone());
                let b2 = self.expose(&inner, &subst(b, x, &var(&z)), depth - 1)?;
                if matches!(&*w, Expr::Pi(..)) {
                    Expr::Pi(z, a2, b2).rc()
                } else {
                    Expr::Sigma(z, a2, b2).rc()
                }
            }
            _ => w,
        })
    }

    fn sum_parts(&self, ctx: &Ctx, s: &Term) -> TcResult<(Term, Term, Name, Term)> {
        let (s2, sty) = self.infer(ctx, s)?;
        let sw = self.whnf_ty(ctx, &sty)?;
        let Expr::Sigma(w, b, f) = &*sw else {
            return Err(shape_err(K::ConversionFailed, "Ty-If", "a sum type", &sty));
        };
        if !self.conv_type(ctx, b, &Expr::Bool.rc())? {
            return Err(shape_err(K::ConversionFailed, "Ty-If", "a sum type", &sty));
        }
        Ok((s2, sty, w.clone(), f.clone()))
    }

    fn check_case(&self, ctx: &Ctx, s: &Term, tb: &Term, eb: &Term, ty: &Term) -> TcResult<Term> {
        use Expr::*;
        let (s2, _, w, f) = self.sum_parts(ctx, s)?;
        let z = ctx.fresh("b");
        let y = ctx.push(z.clone(), Bool.rc()).fresh("y");
        let pair = Pair(var(&z), var(&y)).rc();
        let gen = self.generalize(ctx, ty, &s2, &pair)?;
        let motive = Pi(y, subst(&f, &w, &var(&z)), gen).rc();
        let then2 = self.chk(ctx, tb, &subst(&motive, &z, &True.rc()), "Ty-If")?;
        let else2 = self.chk(ctx, eb, &subst(&motive, &z, &False.rc()), "Ty-If")?;
        Ok(App(
            If {
                motive: Some((z, motive)),
                cond: Fst(s2.clone()).rc(),
                then_branch: then2,
                else_branch: else2,
            }
            .rc(),
            Snd(s2).rc(),
        )
        .rc())
    }

    fn infer_case(&self, ctx: &Ctx, s: &Term, tb: &Term, eb: &Term) -> TcResult<(Term, Term)> {
        use Expr::*;
        let (s2, _, w, f) = self.sum_parts(ctx, s)?;
        let Lam(a, _, tbody) = &**tb else {
            unreachable!()
        };
        let a2 = ctx.fresh(a);
        let fa = subst(&f, &w, &True.rc());
        let inner = ctx.push(a2.clone(), fa.clone());
        let (tbody2, t1) = self.infer(&inner, &subst(tbody, a, &var(&a2)))?;
        if free_vars(&t1).terms.contains(&a2) {
            return Err(TypeError::new(
                K::CannotInfer,
                "Ty-If",
                "case branch type depends on the payload",
            ));
        }
        let z = ctx.fresh("b");
        let y = ctx.push(z.clone(), Bool.rc()).fresh("y");
        let motive = Pi(y, subst(&f, &w, &var(&z)), t1.clone()).rc();
        let else2 = self.chk(ctx, eb, &subst(&motive, &z, &False.rc()), "Ty-If")?;
        let then2 = Lam(a2, Some(fa), tbody2).rc();
        let t = App(
            If {
                motive: Some((z, motive)),
                cond: Fst(s2.clone()).rc(),
                then_branch: then2,
                else_branch: else2,
            }
            .rc(),
            Snd(s2).rc(),
        )
        .rc();
        Ok((t, t1))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_natrec(
        &self,
        ctx: &Ctx,
        z: Name,
        m: Term,
        target: Term,
        zero: &Term,
        pred: &Name,
        ih: &Name,
        step: &Term,
    ) -> TcResult<Term> {
        use Expr::*;
        let zero2 = self.chk(ctx, zero, &subst(&m, &z, &Zero.rc()), "Ty-NatRec")?;
        let p = ctx.fresh(pred);
        let c1 = ctx.push(p.clone(), Nat.rc());
        let h = c1.fresh(ih);
        let c2 = c1.push(h.clone(), subst(&m, &z, &var(&p)));
        let step = subst_many(step, &[(pred.clone(), var(&p)), (ih.clone(), var(&h))]);
        let step2 = self.chk(&c2, &step, &subst(&m, &z, &Succ(var(&p)).rc()), "Ty-NatRec")?;
        Ok(NatRec {
            motive: Some((z, m)),
            target,
            zero: zero2,
            pred: p,
            ih: h,
            step: step2,
        }
        .rc())
    }

    /// Infers the entries of a user-written delayed substitution into `acc`
    /// and returns the renaming of the user's names.
    fn elab_entries(
        &self,
        ctx: &Ctx,
        acc: &mut crate::conversion::Acc,
        xi: &DSubst,
    ) -> TcResult<Vec<(Name, Term)>> {
        let mut ren = Vec::new();
        for (x, e) in xi.entries() {
            let (e2, ety) = self.infer(ctx, e)?;
            match self.acc_add(acc, x, &e2, Some(&ety))? {
                Ok(v) => ren.push((x.clone(), var(&v))),
                Err(AccError::NotLater) => {
                    return Err(shape_err(
                        K::NotLaterTyped,
                        "DS-Cons",
                        &format!("Later[{}] _", acc.clock),
                        &ety,
                    ))
                }
                Err(AccError::ClockMismatch) => {
                    return Err(shape_err(
                        K::DSubstMismatch,
                        "DS-Cons",
                        &format!("Later[{}] _", acc.clock),
                        &ety,
                    ))
                }
            }
        }
        Ok(ren)
    }

    /// Prepares the clock bound by `prev`: it must be fresh for the typing
    /// context; a name that is only in scope as a clock is renamed apart.
    fn prev_binder(&self, ctx: &Ctx, k: &Name, body: &Term) -> TcResult<(Name, Term, Ctx)> {
        if ctx.clocks.contains(k) {
            if ctx.mentions_clock(k) {
                return Err(TypeError::new(
                    K::ClockNotFresh,
                    "Ty-prev",
                    format!("clock `{k}` occurs in the context"),
                ));
            }
            let k2 = self.fresh_clock(ctx, k);
            let body = clock_subst(body, k, &Clock::Var(k2.clone()));
            let inner = ctx.with_clock(k2.clone());
            Ok((k2, body, inner))
        } else {
            Ok((k.clone(), body.clone(), ctx.with_clock(k.clone())))
        }
    }

    fn infer_prev(&self, ctx: &Ctx, k: &Name, body: &Term) -> TcResult<(Term, Term)> {
        let (k2, body2, inner) = self.prev_binder(ctx, k, body)?;
        let (b3, bty) = self.infer(&inner, &body2)?;
        let bw = self.whnf_ty(&inner, &bty)?;
        match &*bw {
            Expr::Later(Clock::Var(k3), xi, a) if *k3 == k2 => {
                let a = apply_morphism(a, &advance_unchecked(&k2, xi));
                Ok((Expr::Prev(k2.clone(), b3).rc(), Expr::Forall(k2, a).rc()))
            }
            _ => Err(shape_err(
                K::NotLaterTyped,
                "Ty-prev",
                &format!("Later[{k2}] _"),
                &bty,
            )),
        }
    }

    fn reflect_ctx(&self, ctx: &Ctx, p: &Term) -> TcResult<(Term, Ctx)> {
        if !self.allow_reflection.get() {
            return Err(TypeError::new(
                K::ReflectionRefused,
                "Reflect",
                "equality reflection is not enabled for this declaration",
            ));
        }
        let (p2, pty) = self.infer(ctx, p)?;
        // Normalising would push an identity type over `forall` inside.
        let pw = if matches!(&*pty, Expr::Id(..)) {
            pty.clone()
        } else {
            self.whnf_ty(ctx, &pty)?
        };
        let Expr::Id(_, l, r) = &*pw else {
            return Err(shape_err(
                K::ConversionFailed,
                "Reflect",
                "an identity type",
                &pty,
            ));
        };
        let lhs = self.whnf(ctx, l)?;
        Ok((p2, ctx.with_rewrite(lhs, r.clone())))
    }

    /// Replaces free variables that are not bound in `ctx` but name a
    /// declaration by references to it. Binders renamed during checking can
    /// then never capture a global.
    pub fn resolve_globals(&self, ctx: &Ctx, t: &Term) -> Term {
        let mut out = t.clone();
        for x in free_vars(t).terms {
            if ctx.lookup(&x).is_none() && self.globals.contains(&x) {
                out = subst(&out, &x, &Expr::Const(x.clone()).rc());
            }
        }
        out
    }

    fn global_ref(&self, ctx: &Ctx, x: &Name) -> TcResult<(Term, Term)> {
        let Some(g) = self.globals.get(x) else {
            return Err(TypeError::new(
                K::UnboundVariable,
                "Ty-Var",
                format!("`{x}` is not bound"),
            ));
        };
        if let Some(k) = g.clocks.iter().find(|k| !ctx.clocks.contains(k)) {
            return Err(TypeError::new(
                K::UnboundClock,
                "Ty-Var",
                format!("`{x}` needs clock `{k}` in scope"),
            ));
        }
        Ok((Expr::Const(x.clone()).rc(), g.ty.clone()))
    }

    fn expect_universe(&self, ctx: &Ctx, ty: &Term, rule: &str) -> TcResult<ClockCtx> {
        match &*self.whnf_ty(ctx, ty)? {
            Expr::Universe(d) => Ok(d.clone()),
            _ => Err(shape_err(K::ConversionFailed, rule, "a universe", ty)),
        }
    }

    /// Synthesises a type for `t`, returning the elaborated term and type.
    pub fn infer(&self, ctx: &Ctx, t: &Term) -> TcResult<(Term, Term)> {
        use Expr::*;
        if let Some((s, tb, eb)) = as_case(t) {
            return self.infer_case(ctx, s, tb, eb);
        }
        match &**t {
            Var(x) => match ctx.lookup(x) {
                Some(ty) => Ok((t.clone(), ty.clone())),
                None => self.global_ref(ctx, x),
            },
            Const(x) => self.global_ref(ctx, x),
            App(f, a) => {
                let (f2, fty) = self.infer(ctx, f)?;
                let fw = self.whnf_ty(ctx, &fty)?;
                let Pi(x, d, c) = &*fw else {
                    return Err(shape_err(
                        K::ConversionFailed,
                        "Ty-App",
                        "a function type",
                        &fty,
                    ));
                };
                let a2 = self.chk(ctx, a, d, "Ty-App")?;
                let c = subst(c, x, &a2);
                Ok((App(f2, a2).rc(), c))
            }
            Pair(a, b) => {
                let (a2, at) = self.infer(ctx, a)?;
                let (b2, bt) = self.infer(ctx, b)?;
                Ok((Pair(a2, b2).rc(), Sigma(Name::from("_"), at, bt).rc()))
            }
            Fst(p) | Snd(p) => {
                let (p2, pty) = self.infer(ctx, p)?;
                let pw = self.whnf_ty(ctx, &pty)?;
                let Sigma(x, a, b) = &*pw else {
                    return Err(shape_err(
                        K::ConversionFailed,
                        "Ty-Σ-E",
                        "a pair type",
                        &pty,
                    ));
                };
                if matches!(&**t, Fst(_)) {
                    Ok((Fst(p2).rc(), a.clone()))
                } else {
                    let ty = subst(b, x, &Fst(p2.clone()).rc());
                    Ok((Snd(p2).rc(), ty))
                }
            }
            Star => Ok((t.clone(), Unit.rc())),
            True | False => Ok((t.clone(), Bool.rc())),
            Zero => Ok((t.clone(), Nat.rc())),
            Succ(n) => Ok((Succ(self.chk(ctx, n, &Nat.rc(), "Ty-Succ")?).rc(), Nat.rc())),
            If {
                motive,
                cond,
                then_branch,
                else_branch,
            } => {
                let cond2 = self.chk(ctx, cond, &Bool.rc(), "Ty-If")?;
                match motive {
                    Some((z, m)) => {
                        let z2 = ctx.fresh(z);
                        let inner = ctx.push(z2.clone(), Bool.rc());
                        let m2 = self.check_ty(&inner, &subst(m, z, &var(&z2)))?;
                        let then2 =
                            self.chk(ctx, then_branch, &subst(&m2, &z2, &True.rc()), "Ty-If")?;
                        let else2 =
                            self.chk(ctx, else_branch, &subst(&m2, &z2, &False.rc()), "Ty-If")?;
                        let ty = subst(&m2, &z2, &cond2);
                        let t2 = If {
                            motive: Some((z2, m2)),
                            cond: cond2,
                            then_branch: then2,
                            else_branch: else2,
                        };
                        Ok((t2.rc(), ty))
                    }
                    None => {
                        let (then2, t1) = self.infer(ctx, then_branch)?;
                        let else2 = self.chk(ctx, else_branch, &t1, "Ty-If")?;
                        let z = ctx.fresh("b");
                        let t2 = If {
                            motive: Some((z, t1.clone())),
                            cond: cond2,
                            then_branch: then2,
                            else_branch: else2,
                        };
                        Ok((t2.rc(), t1))
                    }
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
                let target2 = self.chk(ctx, target, &Nat.rc(), "Ty-NatRec")?;
                let (z, m) = match motive {
                    Some((z, m)) => {
                        let z2 = ctx.fresh(z);
                        let inner = ctx.push(z2.clone(), Nat.rc());
                        let m2 = self.check_ty(&inner, &subst(m, z, &var(&z2)))?;
                        (z2, m2)
                    }
                    None => {
                        let (_, t0) = self.infer(ctx, zero)?;
                        (ctx.fresh("n"), t0)
                    }
                };
                let ty = subst(&m, &z, &target2);
                let t2 = self.finish_natrec(ctx, z, m, target2, zero, pred, ih, step)?;
                Ok((t2, ty))
            }
            Refl(Some(a)) => {
                let (a2, at) = self.infer(ctx, a)?;
                Ok((Refl(Some(a2.clone())).rc(), Id(at, a2.clone(), a2).rc()))
            }
            Refl(None) => Err(TypeError::new(
                K::CannotInfer,
                "Id-I",
                "refl needs an expected type",
            )),
            J {
                motive: (x, p, m),
                base,
                proof,
            } => {
                let (proof2, pty) = self.infer(ctx, proof)?;
                let pw = self.whnf_ty(ctx, &pty)?;
                let Id(a, l, r) = &*pw else {
                    return Err(shape_err(
                        K::ConversionFailed,
                        "Id-E",
                        "an identity type",
                        &pty,
                    ));
                };
                let x2 = ctx.fresh(x);
                let c1 = ctx.push(x2.clone(), a.clone());
                let p2 = c1.fresh(p);
                let c2 = c1.push(p2.clone(), Id(a.clone(), l.clone(), var(&x2)).rc());
                let m = subst_many(m, &[(x.clone(), var(&x2)), (p.clone(), var(&p2))]);
                let m2 = self.check_ty(&c2, &m)?;
                let refl = Refl(Some(l.clone())).rc();
                let base_ty = subst_many(&m2, &[(x2.clone(), l.clone()), (p2.clone(), refl)]);
                let base2 = self.chk(ctx, base, &base_ty, "Id-E")?;
                let ty = subst_many(
                    &m2,
                    &[(x2.clone(), r.clone()), (p2.clone(), proof2.clone())],
                );
                let t2 = J {
                    motive: (x2, p2, m2),
                    base: base2,
                    proof: proof2,
                };
                Ok((t2.rc(), ty))
            }
            CUnit | CBool | CNat => Ok((t.clone(), Universe(ClockCtx::new()).rc())),
            CPi(a, f) | CSigma(a, f) => {
                let (a2, aty) = self.infer(ctx, a)?;
                let d1 = self.expect_universe(ctx, &aty, "Ty-Π-code")?;
                let dom = El(a2.clone()).rc();
                let (f2, d2) = match &**f {
                    Lam(x, ann, body) => {
                        if let Some(ann) = ann {
                            let ann2 = self.check_ty(ctx, ann)?;
                            if !self.conv_type(ctx, &ann2, &dom)? {
                                return Err(conv_err("Ty-Π-code", &dom, &ann2));
                            }
                        }
                        let x2 = ctx.fresh(x);
                        let inner = ctx.push(x2.clone(), dom.clone());
                        let (b2, bty) = self.infer(&inner, &subst(body, x, &var(&x2)))?;
                        let d2 = self.expect_universe(&inner, &bty, "Ty-Π-code")?;
                        (Lam(x2, Some(dom.clone()), b2).rc(), d2)
                    }
                    _ => {
                        let (f2, fty) = self.infer(ctx, f)?;
                        let fw = self.whnf_ty(ctx, &fty)?;
                        let Pi(_, fd, fc) = &*fw else {
                            return Err(shape_err(
                                K::ConversionFailed,
                                "Ty-Π-code",
                                "a code family",
                                &fty,
                            ));
                        };
                        if !self.conv_type(ctx, fd, &dom)? {
                            return Err(conv_err("Ty-Π-code", &dom, fd));
                        }
                        let d2 = self.expect_universe(ctx, fc, "Ty-Π-code")?;
                        (f2, d2)
                    }
                };
                let t2 = if matches!(&**t, CPi(..)) {
                    CPi(a2, f2)
                } else {
                    CSigma(a2, f2)
                };
                Ok((t2.rc(), Universe(d1.union(&d2)).rc()))
            }
            CLater(k, u) => {
                self.check_clock(ctx, k, "Ty-▶̂")?;
                let (u2, uty) = self.infer(ctx, u)?;
                let uw = self.whnf_ty(ctx, &uty)?;
                let Later(k2, _, b) = &*uw else {
                    return Err(shape_err(
                        K::NotLaterTyped,
                        "Ty-▶̂",
                        &format!("Later[{k}] U{{..}}"),
                        &uty,
                    ));
                };
                if k2 != k {
                    return Err(shape_err(
                        K::NotLaterTyped,
                        "Ty-▶̂",
                        &format!("Later[{k}] U{{..}}"),
                        &uty,
                    ));
                }
                let mut d = self.expect_universe(ctx, b, "Ty-▶̂")?;
                if let Clock::Var(n) = k {
                    d.insert(n.clone());
                }
                Ok((CLater(k.clone(), u2).rc(), Universe(d).rc()))
            }
            CForall(u) => {
                let (u2, uty) = self.infer(ctx, u)?;
                let uw = self.whnf_ty(ctx, &uty)?;
                let Forall(c, b) = &*uw else {
                    return Err(shape_err(
                        K::ConversionFailed,
                        "Ty-∀-code",
                        "forall k. U{k}",
                        &uty,
                    ));
                };
                let d = self.expect_universe(&ctx.with_clock(c.clone()), b, "Ty-∀-code")?;
                Ok((CForall(u2).rc(), Universe(d.without(c)).rc()))
            }
            Next(k, xi, body) => {
                self.check_clock(ctx, k, "Ty-Next")?;
                let mut acc = self.acc_new(ctx, k);
                let ren = self.elab_entries(ctx, &mut acc, xi)?;
                let (b2, bty) = self.infer(&acc.ctx, &subst_many(body, &ren))?;
                let xi2 = acc.dsubst_for(&[&b2]);
                if xi2.len() < xi.len() {
                    self.trace("TmEq-Next-Weak");
                }
                let t2 = Next(k.clone(), xi2, b2);
                let ty = Later(k.clone(), acc.dsubst_all(), bty);
                Ok((t2.rc(), ty.rc()))
            }
            Fix(k, x, ann, body) => {
                self.check_clock(ctx, k, "Ty-Fix")?;
                let Some(ann) = ann else {
                    return Err(TypeError::new(
                        K::CannotInfer,
                        "Ty-Fix",
                        "fix needs an expected type",
                    ));
                };
                let ann2 = self.check_ty(ctx, ann)?;
                let aw = self.whnf_ty(ctx, &ann2)?;
                let a = match &*aw {
                    Later(k2, xi, a) if k2 == k && xi.is_empty() => a.clone(),
                    _ => {
                        return Err(shape_err(
                            K::NotLaterTyped,
                            "Ty-Fix",
                            &format!("Later[{k}] _"),
                            &ann2,
                        ))
                    }
                };
                let later = Later(k.clone(), DSubst::empty(), a.clone()).rc();
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), later.clone());
                let b2 = self.chk(&inner, &subst(body, x, &var(&z)), &a, "Ty-Fix")?;
                Ok((Fix(k.clone(), z, Some(later), b2).rc(), a))
            }
            Prev(k, body) => self.infer_prev(ctx, k, body),
            ClockAbs(c, body) => {
                let c3 = self.fresh_clock(ctx, c);
                let body = clock_subst(body, c, &Clock::Var(c3.clone()));
                let inner = ctx.with_clock(c3.clone());
                let (b2, bty) = self.infer(&inner, &body)?;
                Ok((ClockAbs(c3.clone(), b2).rc(), Forall(c3, bty).rc()))
            }
            ClockApp(u, k) => {
                self.check_clock(ctx, k, "Ty-app")?;
                let (u2, uty) = self.infer(ctx, u)?;
                let uw = self.whnf_ty(ctx, &uty)?;
                let Forall(c, b) = &*uw else {
                    return Err(shape_err(
                        K::ConversionFailed,
                        "Ty-app",
                        "forall k. _",
                        &uty,
                    ));
                };
                Ok((ClockApp(u2, k.clone()).rc(), clock_subst(b, c, k)))
            }
            Lam(x, Some(a), body) => {
                let a2 = self.check_ty(ctx, a)?;
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), a2.clone());
                let (b2, bty) = self.infer(&inner, &subst(body, x, &var(&z)))?;
                Ok((
                    Lam(z.clone(), Some(a2.clone()), b2).rc(),
                    Pi(z, a2, bty).rc(),
                ))
            }
            Lam(_, None, _) => Err(TypeError::new(
                K::CannotInfer,
                "Ty-Lam",
                "lambda needs an annotation or expected type",
            )),
            Ann(u, a) => {
                let a2 = self.check_ty(ctx, a)?;
                let u2 = self.chk(ctx, u, &a2, "Ty-Conv")?;
                Ok((u2, a2))
            }
            Reflect(p, body) => {
                let (p2, inner) = self.reflect_ctx(ctx, p)?;
                let (b2, bty) = self.infer(&inner, body)?;
                Ok((Reflect(p2, b2).rc(), bty))
            }
            Universe(_) | Id(..) => Err(shape_err(
                K::ConversionFailed,
                "Univ",
                "a term with a code",
                t,
            )),
            _ => match to_code(t) {
                Some(code) => self.infer(ctx, &code),
                None => Err(shape_err(
                    K::ConversionFailed,
                    "Univ",
                    "a term with a code",
                    t,
                )),
            },
        }
    }

    /// Checks that `a` is a well-formed type, returning it elaborated.
    pub fn check_ty(&self, ctx: &Ctx, a: &Term) -> TcResult<Term> {
        use Expr::*;
        match &**a {
            Unit | Bool | Nat => Ok(a.clone()),
            Pi(x, d, c) | Sigma(x, d, c) => {
                let d2 = self.check_ty(ctx, d)?;
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), d2.clone());
                let c2 = self.check_ty(&inner, &subst(c, x, &var(&z)))?;
                Ok(if matches!(&**a, Pi(..)) {
                    Pi(z, d2, c2)
                } else {
                    Sigma(z, d2, c2)
                }
                .rc())
            }
            Id(t, l, r) => {
                let t2 = self.check_ty(ctx, t)?;
                let l2 = self.chk(ctx, l, &t2, "Ty-Id")?;
                let r2 = self.chk(ctx, r, &t2, "Ty-Id")?;
                Ok(Id(t2, l2, r2).rc())
            }
            Universe(d) => {
                if let Some(k) = d.iter().find(|k| !ctx.clocks.contains(k)) {
                    return Err(TypeError::new(
                        K::UniverseEscape,
                        "Univ",
                        format!("clock `{k}` of the universe is not in scope"),
                    ));
                }
                Ok(a.clone())
            }
            El(t) => {
                let (t2, tty) = self.infer(ctx, t)?;
                self.expect_universe(ctx, &tty, "El")?;
                Ok(El(t2).rc())
            }
            Later(k, xi, b) => {
                self.check_clock(ctx, k, "Tf-▶")?;
                let mut acc = self.acc_new(ctx, k);
                let ren = self.elab_entries(ctx, &mut acc, xi)?;
                let b2 = self.check_ty(&acc.ctx, &subst_many(b, &ren))?;
                Ok(Later(k.clone(), acc.dsubst_for(&[&b2]), b2).rc())
            }
            Forall(c, b) => {
                let c3 = self.fresh_clock(ctx, c);
                let inner = ctx.with_clock(c3.clone());
                let b2 = self.check_ty(&inner, &clock_subst(b, c, &Clock::Var(c3.clone())))?;
                Ok(Forall(c3, b2).rc())
            }
            _ => {
                let (t2, tty) = self.infer(ctx, a)?;
                self.expect_universe(ctx, &tty, "El")?;
                Ok(El(t2).rc())
            }
        }
    }
}
