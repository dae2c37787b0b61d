//! Delayed substitutions: normalisation of `Later`/`next` telescopes and the
//! accumulator that assigns variables to entries when two telescopes are
//! compared or a `next` is typed.
//!
//! Entry terms always live in the outer context. The type of an entry
//! variable is re-derived from the entry's own `Later` type, whose delayed
//! substitution is added to the accumulator first as hidden entries. This is
//! what lets normalisation drop unused entries and inline forced ones
//! without tracking telescope dependencies explicitly.

use std::collections::BTreeSet;

use crate::subst::{fresh_name, subst, subst_many};
use crate::syntax::{alpha_eq, free_vars, Clock, DSubst, Expr, Name, Term};
use crate::typecheck::{Ctx, Kernel, TcResult};

/// Entries collected so far, as variables of `ctx`.
#[derive(Clone, Debug)]
pub(crate) struct Acc {
    pub ctx: Ctx,
    pub outer: Ctx,
    pub clock: Clock,
    /// `(variable, entry term, variable type)`.
    pub entries: Vec<(Name, Term, Term)>,
}

#[derive(Clone, Debug)]
pub(crate) enum AccError {
    /// The entry's type is not a `Later` type.
    NotLater,
    /// The entry is delayed on another clock.
    ClockMismatch,
}

impl Acc {
    /// The delayed substitution of the entries whose variables occur free
    /// in any of `terms`.
    pub fn dsubst_for(&self, terms: &[&Term]) -> DSubst {
        let mut fv = BTreeSet::new();
        for t in terms {
            fv.extend(free_vars(t).terms);
        }
        DSubst::from_distinct(
            self.entries
                .iter()
                .filter(|(v, _, _)| fv.contains(v))
                .map(|(v, t, _)| (v.clone(), t.clone()))
                .collect(),
        )
    }

    pub fn dsubst_all(&self) -> DSubst {
        DSubst::from_distinct(
            self.entries
                .iter()
                .map(|(v, t, _)| (v.clone(), t.clone()))
                .collect(),
        )
    }
}

impl Kernel {
    pub(crate) fn acc_new(&self, ctx: &Ctx, k: &Clock) -> Acc {
        Acc {
            ctx: ctx.clone(),
            outer: ctx.clone(),
            clock: k.clone(),
            entries: Vec::new(),
        }
    }

    /// Adds the entry `t`, returning the variable standing for it. Entries
    /// equal to an existing one reuse its variable.
    pub(crate) fn acc_add(
        &self,
        acc: &mut Acc,
        hint: &str,
        t: &Term,
        ty: Option<&Term>,
    ) -> TcResult<Result<Name, AccError>> {
        if let Some((v, _, _)) = acc.entries.iter().find(|(_, s, _)| alpha_eq(s, t)) {
            return Ok(Ok(v.clone()));
        }
        let ty = match ty {
            Some(ty) => ty.clone(),
            None => self.type_of(&acc.outer, t)?,
        };
        let tyw = self.whnf_ty(&acc.outer, &ty)?;
        let Expr::Later(k, zeta, a) = &*tyw else {
            return Ok(Err(AccError::NotLater));
        };
        if *k != acc.clock {
            return Ok(Err(AccError::ClockMismatch));
        }
        let ren = match self.acc_add_dsubst(acc, zeta)? {
            Ok(r) => r,
            Err(e) => return Ok(Err(e)),
        };
        let a = subst_many(a, &ren);
        for (v, s, sty) in acc.entries.clone() {
            if self.conv_type(&acc.ctx, &sty, &a)? && self.conv_term(&acc.outer, &s, t, &tyw)? {
                self.trace("TyEq-▶-Exch");
                return Ok(Ok(v));
            }
        }
        let v = acc.ctx.fresh(hint);
        acc.ctx = acc.ctx.push(v.clone(), a.clone());
        acc.entries.push((v.clone(), t.clone(), a));
        Ok(Ok(v))
    }

    /// Adds every entry of `xi`; returns the renaming from its variables to
    /// accumulator variables.
    pub(crate) fn acc_add_dsubst(
        &self,
        acc: &mut Acc,
        xi: &DSubst,
    ) -> TcResult<Result<Vec<(Name, Term)>, AccError>> {
        let mut ren = Vec::new();
        for (x, t) in xi.entries() {
            match self.acc_add(acc, x, t, None)? {
                Ok(v) => ren.push((x.clone(), Expr::Var(v).rc())),
                Err(e) => return Ok(Err(e)),
            }
        }
        Ok(Ok(ren))
    }

    /// Normalises a delayed substitution and its body: entries are put in
    /// weak-head form, entries of the form `next[k; zeta] u` are forced into
    /// the body, duplicate entries are merged and unused ones dropped.
    pub(crate) fn normalize_dsubst(
        &self,
        ctx: &Ctx,
        k: &Clock,
        xi: &DSubst,
        body: &Term,
        term_mode: bool,
    ) -> TcResult<(DSubst, Term)> {
        let mut entries: Vec<(Name, Term)> = xi.entries().to_vec();
        let mut body = body.clone();
        'force: loop {
            for i in 0..entries.len() {
                let ew = self.whnf(ctx, &entries[i].1)?;
                entries[i].1 = ew.clone();
                let Expr::Next(k2, inner, u) = &*ew else {
                    continue;
                };
                if k2 != k {
                    continue;
                }
                self.trace(if term_mode {
                    "TmEq-Force"
                } else {
                    "TyEq-Force"
                });
                let x = entries[i].0.clone();
                let body_fv = free_vars(&body).terms;
                let mut ren = Vec::new();
                let mut added: Vec<(Name, Term)> = Vec::new();
                for (y, s) in inner.entries() {
                    let found = entries
                        .iter()
                        .chain(added.iter())
                        .find(|(_, s2)| alpha_eq(s2, s))
                        .map(|(v, _)| v.clone());
                    let v = match found {
                        Some(v) => v,
                        None => {
                            let v = fresh_name(y, |c| {
                                entries.iter().chain(added.iter()).any(|(n, _)| &**n == c)
                                    || ctx.binds(c)
                                    || body_fv.contains(c)
                            });
                            added.push((v.clone(), s.clone()));
                            v
                        }
                    };
                    ren.push((y.clone(), Expr::Var(v).rc()));
                }
                body = subst(&body, &x, &subst_many(u, &ren));
                entries.remove(i);
                for (j, e) in added.into_iter().enumerate() {
                    entries.insert(i + j, e);
                }
                continue 'force;
            }
            break;
        }
        let mut i = 0;
        while i < entries.len() {
            if let Some(j) = (0..i).find(|&j| alpha_eq(&entries[j].1, &entries[i].1)) {
                let keep = Expr::Var(entries[j].0.clone()).rc();
                body = subst(&body, &entries[i].0, &keep);
                entries.remove(i);
            } else {
                i += 1;
            }
        }
        let fv = free_vars(&body).terms;
        let before = entries.len();
        entries.retain(|(x, _)| fv.contains(x));
        if entries.len() != before {
            self.trace(if term_mode {
                "TmEq-Next-Weak"
            } else {
                "TyEq-▶-Weak"
            });
        }
        Ok((DSubst::from_distinct(entries), body))
    }
}

#[cfg(test)]
mod tests {
    use crate::frontend::driver::Session;
    use crate::frontend::parse_expr;
    use crate::syntax::{alpha_eq, Clock, ClockCtx, Expr};
    use crate::typecheck::{Ctx, Options};

    const AXIOMS: &str = "#clocks k\naxiom A B : U{}\naxiom u : A\naxiom f : A -> B\n\
                          axiom t : Later[k] A\naxiom g : Later[k] (A -> B)\n";

    #[test]
    fn normalisation_is_idempotent_and_typed() {
        let mut s = Session::new(Options::default());
        s.check_str(AXIOMS, "t", None, false).unwrap();
        let k = &s.kernel;
        let ctx = Ctx::new(ClockCtx::from_names(["k".into()]));
        let kk = Clock::var("k");
        for (src, ty) in [
            ("next[k; x <- next[k] u] (f x)", "Later[k] B"),
            ("next[k; x <- t, y <- g, z <- t] (y z)", "Later[k] B"),
            (
                "next[k; x <- t, y <- next[k; w <- g] w] (y x)",
                "Later[k] B",
            ),
            ("next[k; x <- t] u", "Later[k] A"),
        ] {
            let ty = k
                .check_ty(&ctx, &k.resolve_globals(&ctx, &parse_expr(ty).unwrap()))
                .unwrap();
            let raw = k.resolve_globals(&ctx, &parse_expr(src).unwrap());
            let Expr::Next(_, xi, body) = &*raw else {
                panic!("{src}")
            };
            let (xi1, b1) = k.normalize_dsubst(&ctx, &kk, xi, body, true).unwrap();
            let (xi2, b2) = k.normalize_dsubst(&ctx, &kk, &xi1, &b1, true).unwrap();
            assert_eq!(xi1.len(), xi2.len(), "{src}");
            assert!(alpha_eq(&b1, &b2), "{src}");
            let out = Expr::Next(kk.clone(), xi1, b1).rc();
            k.fuel().reset();
            let out = k.check(&ctx, &out, &ty).unwrap();
            let orig = k.check(&ctx, &raw, &ty).unwrap();
            assert!(k.conv_term(&ctx, &out, &orig, &ty).unwrap(), "{src}");
        }
    }
}
