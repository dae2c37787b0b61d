//! Type-directed conversion.

use crate::subst::{clock_subst, subst, subst_many};
use crate::syntax::{alpha_eq, clock_occurs_free, free_vars, Clock, DSubst, Expr, Name, Term};
use crate::typecheck::{Ctx, Kernel, TcResult};

fn var(x: &Name) -> Term {
    Expr::Var(x.clone()).rc()
}

impl Kernel {
    /// `ctx |- t == u : ty`.
    pub fn conv_term(&self, ctx: &Ctx, t: &Term, u: &Term, ty: &Term) -> TcResult<bool> {
        let _g = self.enter();
        if alpha_eq(t, u) {
            return Ok(true);
        }
        // Congruence first: eta-expanding two fixed points unfolds forever.
        if let (Expr::Fix(k1, x1, _, b1), Expr::Fix(k2, x2, _, b2)) = (&**t, &**u) {
            if k1 == k2 {
                let y = ctx.fresh(x1);
                let later = Expr::Later(k1.clone(), DSubst::empty(), ty.clone()).rc();
                let inner = ctx.push(y.clone(), later);
                let (b1, b2) = (subst(b1, x1, &var(&y)), subst(b2, x2, &var(&y)));
                if self.conv_term(&inner, &b1, &b2, ty)? {
                    return Ok(true);
                }
            }
        }
        let tyw = self.whnf_ty(ctx, ty)?;
        match &*tyw {
            Expr::Pi(x, a, b) => {
                let y = ctx.fresh(x);
                let inner = ctx.push(y.clone(), a.clone());
                let b = subst(b, x, &var(&y));
                let ta = Expr::App(t.clone(), var(&y)).rc();
                let ua = Expr::App(u.clone(), var(&y)).rc();
                self.conv_term(&inner, &ta, &ua, &b)
            }
            Expr::Sigma(x, a, b) => {
                let t1 = Expr::Fst(t.clone()).rc();
                let u1 = Expr::Fst(u.clone()).rc();
                if !self.with_path("fst", || self.conv_term(ctx, &t1, &u1, a))? {
                    return Ok(false);
                }
                let b = subst(b, x, &t1);
                let t2 = Expr::Snd(t.clone()).rc();
                let u2 = Expr::Snd(u.clone()).rc();
                self.with_path("snd", || self.conv_term(ctx, &t2, &u2, &b))
            }
            Expr::Unit | Expr::Id(..) => Ok(true),
            Expr::Forall(c, b) => {
                self.trace("TmEq-∀-η");
                let c2 = self.fresh_clock(ctx, c);
                let k = Clock::Var(c2.clone());
                let inner = ctx.with_clock(c2);
                let b = clock_subst(b, c, &k);
                let tk = Expr::ClockApp(t.clone(), k.clone()).rc();
                let uk = Expr::ClockApp(u.clone(), k).rc();
                self.conv_term(&inner, &tk, &uk, &b)
            }
            Expr::Later(k, zeta, b) => self.conv_later(ctx, t, u, k, zeta, b, true),
            Expr::Universe(_) => self.conv_code(ctx, t, u),
            _ => self.conv_whnf(ctx, t, u),
        }
    }

    /// Compares two terms at a type with no eta law.
    fn conv_whnf(&self, ctx: &Ctx, t: &Term, u: &Term) -> TcResult<bool> {
        let tw = self.whnf(ctx, t)?;
        let uw = self.whnf(ctx, u)?;
        if alpha_eq(&tw, &uw) {
            return Ok(true);
        }
        match (&*tw, &*uw) {
            (Expr::True, Expr::True) | (Expr::False, Expr::False) | (Expr::Zero, Expr::Zero) => {
                Ok(true)
            }
            (Expr::Succ(a), Expr::Succ(b)) => self.conv_term(ctx, a, b, &Expr::Nat.rc()),
            (Expr::Star, Expr::Star) => Ok(true),
            _ => Ok(self.compare_neutral(ctx, &tw, &uw)?.is_some()),
        }
    }

    /// Compares codes structurally, recursing into their components.
    fn conv_code(&self, ctx: &Ctx, t: &Term, u: &Term) -> TcResult<bool> {
        let tw = self.whnf(ctx, t)?;
        let uw = self.whnf(ctx, u)?;
        if alpha_eq(&tw, &uw) {
            return Ok(true);
        }
        let any_univ = Expr::Universe(ctx.clocks.clone()).rc();
        match (&*tw, &*uw) {
            (Expr::CUnit, Expr::CUnit) | (Expr::CBool, Expr::CBool) | (Expr::CNat, Expr::CNat) => {
                Ok(true)
            }
            (Expr::CPi(a1, f1), Expr::CPi(a2, f2))
            | (Expr::CSigma(a1, f1), Expr::CSigma(a2, f2))
                if std::mem::discriminant(&*tw) == std::mem::discriminant(&*uw) =>
            {
                if !self.conv_code(ctx, a1, a2)? {
                    return Ok(false);
                }
                let x = ctx.fresh("x");
                let fam = Expr::Pi(x, Expr::El(a1.clone()).rc(), any_univ).rc();
                self.conv_term(ctx, f1, f2, &fam)
            }
            (Expr::CLater(k1, t1), Expr::CLater(k2, t2)) => {
                if k1 != k2 {
                    return Ok(false);
                }
                let ty = Expr::Later(k1.clone(), DSubst::empty(), any_univ).rc();
                self.conv_term(ctx, t1, t2, &ty)
            }
            (Expr::CForall(t1), Expr::CForall(t2)) => {
                let c = self.fresh_clock(ctx, "k");
                let univ = Expr::Universe(ctx.clocks.with(c.clone())).rc();
                let ty = Expr::Forall(c, univ).rc();
                self.conv_term(ctx, t1, t2, &ty)
            }
            _ => Ok(self.compare_neutral(ctx, &tw, &uw)?.is_some()),
        }
    }

    /// Presents a term of type `Later[k] ...` as delayed-substitution entries
    /// and a body, eta-expanding terms that are not `next`.
    fn next_view(&self, ctx: &Ctx, k: &Clock, t: &Term) -> TcResult<(DSubst, Term)> {
        let tw = self.whnf(ctx, t)?;
        if let Expr::Next(k2, xi, body) = &*tw {
            if k2 == k {
                let (xi, body) = self.normalize_dsubst(ctx, k, xi, body, true)?;
                if xi.is_empty() {
                    if let (Expr::ClockApp(p, Clock::Var(kv)), Clock::Var(kk)) = (&*body, k) {
                        if kv == kk {
                            let pw = self.whnf(ctx, p)?;
                            if let Expr::Prev(k3, s) = &*pw {
                                self.trace("TmEq-prev-η");
                                let s = clock_subst(s, k3, k);
                                return self.next_view(ctx, k, &s);
                            }
                        }
                    }
                }
                if xi.len() == 1 && matches!(&*body, Expr::Var(v) if *v == xi.entries()[0].0) {
                    self.trace("TmEq-Next-Var");
                }
                return Ok((xi, body));
            }
        }
        let x = ctx.fresh("x");
        Ok((DSubst::from_distinct(vec![(x.clone(), tw)]), var(&x)))
    }

    #[allow(clippy::too_many_arguments)]
    fn conv_later(
        &self,
        ctx: &Ctx,
        t: &Term,
        u: &Term,
        k: &Clock,
        zeta: &DSubst,
        b: &Term,
        allow_comm: bool,
    ) -> TcResult<bool> {
        let (xt, bt) = self.next_view(ctx, k, t)?;
        let (xu, bu) = self.next_view(ctx, k, u)?;
        let is_eta = |xi: &DSubst, body: &Term| {
            xi.len() == 1 && matches!(&**body, Expr::Var(v) if *v == xi.entries()[0].0)
        };
        if is_eta(&xt, &bt) && is_eta(&xu, &bu) {
            let (a, c) = (&xt.entries()[0].1, &xu.entries()[0].1);
            return Ok(self.compare_neutral(ctx, a, c)?.is_some());
        }
        let mut acc = self.acc_new(ctx, k);
        let Ok(r0) = self.acc_add_dsubst(&mut acc, zeta)? else {
            return Ok(false);
        };
        let Ok(rt) = self.acc_add_dsubst(&mut acc, &xt)? else {
            return Ok(false);
        };
        let Ok(ru) = self.acc_add_dsubst(&mut acc, &xu)? else {
            return Ok(false);
        };
        let order = |r: &[(Name, Term)]| r.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>();
        let (ot, ou) = (order(&rt), order(&ru));
        if ot != ou && ot.len() == ou.len() && ot.iter().all(|v| ou.contains(v)) {
            self.trace("TmEq-Next-Exch");
        }
        let b_acc = subst_many(b, &r0);
        let bt2 = subst_many(&bt, &rt);
        let bu2 = subst_many(&bu, &ru);
        if self.with_path("next", || self.conv_term(&acc.ctx, &bt2, &bu2, &b_acc))? {
            return Ok(true);
        }
        if allow_comm {
            for (swap_t, (xi, body)) in [(true, (&xt, &bt)), (false, (&xu, &bu))] {
                if let Some(swapped) = self.comm_swap(k, xi, body) {
                    let (l, r) = if swap_t {
                        (swapped, u.clone())
                    } else {
                        (t.clone(), swapped)
                    };
                    if self.conv_later(ctx, &l, &r, k, zeta, b, false)? {
                        self.trace("TmEq-Next-Comm");
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// `next[xi] (next[xi'] v)` rewritten to `next[xi'] (next[xi] v)` when the
    /// inner entries do not mention the outer variables.
    fn comm_swap(&self, k: &Clock, xi: &DSubst, body: &Term) -> Option<Term> {
        let Expr::Next(k2, inner, v) = &**body else {
            return None;
        };
        if k2 != k || xi.is_empty() {
            return None;
        }
        for (_, s) in inner.entries() {
            let fv = free_vars(s).terms;
            if xi.entries().iter().any(|(x, _)| fv.contains(x)) {
                return None;
            }
        }
        let swapped_inner = Expr::Next(k.clone(), xi.clone(), v.clone()).rc();
        Some(Expr::Next(k.clone(), inner.clone(), swapped_inner).rc())
    }

    /// `ctx |- a == b` for types. With `sub`, universe inclusion is allowed
    /// in covariant positions.
    pub fn conv_type(&self, ctx: &Ctx, a: &Term, b: &Term) -> TcResult<bool> {
        self.conv_type_(ctx, a, b, false)
    }

    pub fn sub_type(&self, ctx: &Ctx, a: &Term, b: &Term) -> TcResult<bool> {
        self.conv_type_(ctx, a, b, true)
    }

    fn conv_type_(&self, ctx: &Ctx, a: &Term, b: &Term, sub: bool) -> TcResult<bool> {
        let _g = self.enter();
        if alpha_eq(a, b) {
            return Ok(true);
        }
        let aw = self.whnf_ty(ctx, a)?;
        let bw = self.whnf_ty(ctx, b)?;
        if alpha_eq(&aw, &bw) {
            return Ok(true);
        }
        use Expr::*;
        match (&*aw, &*bw) {
            (Unit, Unit) | (Bool, Bool) | (Nat, Nat) => Ok(true),
            (Pi(x, a1, b1), Pi(y, a2, b2)) | (Sigma(x, a1, b1), Sigma(y, a2, b2))
                if std::mem::discriminant(&*aw) == std::mem::discriminant(&*bw) =>
            {
                let dom_ok = if matches!(&*aw, Pi(..)) {
                    self.conv_type_(ctx, a1, a2, false)?
                } else {
                    self.conv_type_(ctx, a1, a2, sub)?
                };
                if !dom_ok {
                    return Ok(false);
                }
                let z = ctx.fresh(x);
                let inner = ctx.push(z.clone(), a1.clone());
                let b1 = subst(b1, x, &var(&z));
                let b2 = subst(b2, y, &var(&z));
                self.conv_type_(&inner, &b1, &b2, sub)
            }
            (Id(a1, l1, r1), Id(a2, l2, r2)) => Ok(self.conv_type_(ctx, a1, a2, false)?
                && self.conv_term(ctx, l1, l2, a1)?
                && self.conv_term(ctx, r1, r2, a1)?),
            (Universe(d1), Universe(d2)) => Ok(if sub { d1.is_subset(d2) } else { d1 == d2 }),
            (El(t), El(u)) => Ok(self.compare_neutral(ctx, t, u)?.is_some()),
            (Later(k1, x1, b1), Later(k2, x2, b2)) => {
                if k1 != k2 {
                    return Ok(false);
                }
                let mut acc = self.acc_new(ctx, k1);
                let Ok(r1) = self.acc_add_dsubst(&mut acc, x1)? else {
                    return Ok(false);
                };
                let Ok(r2) = self.acc_add_dsubst(&mut acc, x2)? else {
                    return Ok(false);
                };
                let b1 = subst_many(b1, &r1);
                let b2 = subst_many(b2, &r2);
                self.conv_type_(&acc.ctx, &b1, &b2, sub)
            }
            (Forall(c1, b1), Forall(c2, b2)) => {
                let c = self.fresh_clock(ctx, c1);
                let k = Clock::Var(c.clone());
                let inner = ctx.with_clock(c);
                let b1 = clock_subst(b1, c1, &k);
                let b2 = clock_subst(b2, c2, &k);
                self.conv_type_(&inner, &b1, &b2, sub)
            }
            _ => Ok(false),
        }
    }

    /// Compares two weak-head normal neutral terms; on success returns their
    /// common type.
    pub(crate) fn compare_neutral(&self, ctx: &Ctx, t: &Term, u: &Term) -> TcResult<Option<Term>> {
        if let Some(ty) = self.compare_neutral_structural(ctx, t, u)? {
            return Ok(Some(ty));
        }
        self.compare_fresh(ctx, t, u)
    }

    fn compare_neutral_structural(&self, ctx: &Ctx, t: &Term, u: &Term) -> TcResult<Option<Term>> {
        use Expr::*;
        Ok(match (&**t, &**u) {
            (Var(x), Var(y)) if x == y => ctx.lookup(x).cloned(),
            (Const(x), Const(y)) if x == y => self.globals.get(x).map(|g| g.ty.clone()),
            (App(f1, a1), App(f2, a2)) => {
                let Some(fty) = self.compare_neutral(ctx, f1, f2)? else {
                    return Ok(None);
                };
                let fty = self.whnf_ty(ctx, &fty)?;
                let Pi(x, a, b) = &*fty else {
                    return Ok(None);
                };
                if !self.conv_term(ctx, a1, a2, a)? {
                    return Ok(None);
                }
                Some(subst(b, x, a1))
            }
            (Fst(p1), Fst(p2)) | (Snd(p1), Snd(p2))
                if std::mem::discriminant(&**t) == std::mem::discriminant(&**u) =>
            {
                let Some(pty) = self.compare_neutral(ctx, p1, p2)? else {
                    return Ok(None);
                };
                let pty = self.whnf_ty(ctx, &pty)?;
                let Sigma(x, a, b) = &*pty else {
                    return Ok(None);
                };
                if matches!(&**t, Fst(_)) {
                    Some(a.clone())
                } else {
                    Some(subst(b, x, &Fst(p1.clone()).rc()))
                }
            }
            (ClockApp(v1, k1), ClockApp(v2, k2)) => {
                let Some(vty) = self.compare_neutral(ctx, v1, v2)? else {
                    return Ok(None);
                };
                let vty = self.whnf_ty(ctx, &vty)?;
                let Forall(c, b) = &*vty else {
                    return Ok(None);
                };
                if k1 == k2 {
                    Some(clock_subst(b, c, k1))
                } else if !clock_occurs_free(c, b) {
                    self.trace("TmEq-∀-fresh");
                    Some(b.clone())
                } else {
                    None
                }
            }
            (
                If {
                    motive: m1,
                    cond: c1,
                    then_branch: t1,
                    else_branch: e1,
                },
                If {
                    cond: c2,
                    then_branch: t2,
                    else_branch: e2,
                    ..
                },
            ) => {
                if self.compare_neutral(ctx, c1, c2)?.is_none() {
                    return Ok(None);
                }
                let Some((z, m)) = m1 else {
                    return Ok((alpha_eq(t1, t2) && alpha_eq(e1, e2)).then(|| Unit.rc()));
                };
                let mt = subst(m, z, &True.rc());
                let mf = subst(m, z, &False.rc());
                if self.conv_term(ctx, t1, t2, &mt)? && self.conv_term(ctx, e1, e2, &mf)? {
                    Some(subst(m, z, c1))
                } else {
                    None
                }
            }
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
                    target: n2,
                    zero: z2,
                    pred: p2,
                    ih: h2,
                    step: s2,
                    ..
                },
            ) => {
                if self.compare_neutral(ctx, n1, n2)?.is_none() {
                    return Ok(None);
                }
                let Some((z, m)) = m1 else {
                    return Ok(None);
                };
                if !self.conv_term(ctx, z1, z2, &subst(m, z, &Zero.rc()))? {
                    return Ok(None);
                }
                let p = ctx.fresh(p1);
                let c1 = ctx.push(p.clone(), Nat.rc());
                let h = c1.fresh(h1);
                let c2 = c1.push(h.clone(), subst(m, z, &var(&p)));
                let step1 = subst_many(s1, &[(p1.clone(), var(&p)), (h1.clone(), var(&h))]);
                let step2 = subst_many(s2, &[(p2.clone(), var(&p)), (h2.clone(), var(&h))]);
                let sty = subst(m, z, &Succ(var(&p)).rc());
                if self.conv_term(&c2, &step1, &step2, &sty)? {
                    Some(subst(m, z, n1))
                } else {
                    None
                }
            }
            (
                J {
                    motive: (x1, q1, m1),
                    base: b1,
                    proof: p1,
                },
                J {
                    motive: (x2, q2, m2),
                    base: b2,
                    proof: p2,
                },
            ) => {
                let pty = self.type_of(ctx, p1)?;
                let pty2 = self.type_of(ctx, p2)?;
                if !self.conv_type(ctx, &pty, &pty2)? {
                    return Ok(None);
                }
                let pw = self.whnf_ty(ctx, &pty)?;
                let Id(a, l, r) = &*pw else {
                    return Ok(None);
                };
                let x = ctx.fresh(x1);
                let cx = ctx.push(x.clone(), a.clone());
                let q = cx.fresh(q1);
                let cq = cx.push(q.clone(), Id(a.clone(), l.clone(), var(&x)).rc());
                let m1o = subst_many(m1, &[(x1.clone(), var(&x)), (q1.clone(), var(&q))]);
                let m2o = subst_many(m2, &[(x2.clone(), var(&x)), (q2.clone(), var(&q))]);
                if !self.conv_type(&cq, &m1o, &m2o)? {
                    return Ok(None);
                }
                let refl = Refl(Some(l.clone())).rc();
                let base_ty = subst_many(m1, &[(x1.clone(), l.clone()), (q1.clone(), refl)]);
                if !self.conv_term(ctx, b1, b2, &base_ty)? {
                    return Ok(None);
                }
                Some(subst_many(
                    m1,
                    &[(x1.clone(), r.clone()), (q1.clone(), p1.clone())],
                ))
            }
            (Prev(k1, b1), Prev(k2, b2)) => {
                let c = self.fresh_clock(ctx, k1);
                let kc = Clock::Var(c.clone());
                let inner = ctx.with_clock(c);
                let b1 = clock_subst(b1, k1, &kc);
                let b2 = clock_subst(b2, k2, &kc);
                let bty = self.type_of(&inner, &b1)?;
                if self.conv_term(&inner, &b1, &b2, &bty)? {
                    Some(self.type_of(ctx, t)?)
                } else {
                    None
                }
            }
            _ => None,
        })
    }

    /// Generalised freshness: if `t` and `u` differ only in the clocks at
    /// which some subterms are instantiated, and abstracting those positions
    /// over a fresh clock yields a type not mentioning it, they are equal.
    fn compare_fresh(&self, ctx: &Ctx, t: &Term, u: &Term) -> TcResult<Option<Term>> {
        let c = self.fresh_clock(ctx, "k");
        let mut pair = None;
        let Some(gen) = anti_unify(t, u, &c, &mut pair) else {
            return Ok(None);
        };
        if pair.is_none() {
            return Ok(None);
        }
        let inner = ctx.with_clock(c.clone());
        let ty = match self.type_of(&inner, &gen) {
            Ok(ty) => ty,
            Err(e) if e.kind == crate::TypeErrorKind::FuelExhausted => return Err(e),
            Err(_) => return Ok(None),
        };
        if clock_occurs_free(&c, &ty) {
            return Ok(None);
        }
        self.trace("TmEq-∀-fresh");
        Ok(Some(ty))
    }
}

/// Finds `g` with `g[k1/c] = t` and `g[k2/c] = u` for one pair of clocks
/// `(k1, k2)` recorded in `pair`, following neutral spines only.
fn anti_unify(t: &Term, u: &Term, c: &Name, pair: &mut Option<(Clock, Clock)>) -> Option<Term> {
    use Expr::*;
    match (&**t, &**u) {
        (ClockApp(v1, k1), ClockApp(v2, k2)) => {
            let v = anti_unify(v1, v2, c, pair)?;
            if k1 == k2 {
                return Some(ClockApp(v, k1.clone()).rc());
            }
            match pair {
                None => *pair = Some((k1.clone(), k2.clone())),
                Some((a, b)) if a == k1 && b == k2 => {}
                Some(_) => return None,
            }
            Some(ClockApp(v, Clock::Var(c.clone())).rc())
        }
        (App(f1, a1), App(f2, a2)) if alpha_eq(a1, a2) => {
            Some(App(anti_unify(f1, f2, c, pair)?, a1.clone()).rc())
        }
        (Fst(p1), Fst(p2)) => Some(Fst(anti_unify(p1, p2, c, pair)?).rc()),
        (Snd(p1), Snd(p2)) => Some(Snd(anti_unify(p1, p2, c, pair)?).rc()),
        (
            If {
                motive,
                cond: c1,
                then_branch: t1,
                else_branch: e1,
            },
            If {
                cond: c2,
                then_branch: t2,
                else_branch: e2,
                ..
            },
        ) if alpha_eq(t1, t2) && alpha_eq(e1, e2) => Some(
            If {
                motive: motive.clone(),
                cond: anti_unify(c1, c2, c, pair)?,
                then_branch: t1.clone(),
                else_branch: e1.clone(),
            }
            .rc(),
        ),
        _ => alpha_eq(t, u).then(|| t.clone()),
    }
}
