//! Pretty-printer producing concrete syntax that the parser reads back.

use crate::syntax::{occurs_free, Clock, DSubst, Expr, Term};

const EXPR: u8 = 0;
const ARROW: u8 = 1;
const SUM: u8 = 2;
const PROD: u8 = 3;
const AP: u8 = 4;
const APP: u8 = 5;
const ATOM: u8 = 6;

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    Printer { out: &mut out }.expr(e, EXPR);
    out
}

struct Printer<'a> {
    out: &'a mut String,
}

fn numeral(e: &Expr) -> Option<u64> {
    let mut n = 0;
    let mut cur = e;
    loop {
        match cur {
            Expr::Zero => return Some(n),
            Expr::Succ(t) => {
                n += 1;
                cur = t;
            }
            _ => return None,
        }
    }
}

/// Recognises `cSigma cBool (\b. if b then A else B)` as the code `A + B`.
fn as_sum(e: &Expr) -> Option<(&Term, &Term)> {
    if let Expr::CSigma(a, f) = e {
        if let (Expr::CBool, Expr::Lam(b, None, body)) = (&**a, &**f) {
            if let Expr::If {
                motive: None,
                cond,
                then_branch,
                else_branch,
            } = &**body
            {
                if matches!(&**cond, Expr::Var(v) if v == b)
                    && !occurs_free(b, then_branch)
                    && !occurs_free(b, else_branch)
                {
                    return Some((then_branch, else_branch));
                }
            }
        }
    }
    None
}

/// Recognises `next[k; g <- f, x <- t] (g x)` as `f <*>[k] t`.
fn as_ap(e: &Expr) -> Option<(&Clock, &Term, &Term)> {
    if let Expr::Next(k, xi, body) = e {
        if let [(g, f), (x, t)] = xi.entries() {
            if let Expr::App(h, a) = &**body {
                if matches!(&**h, Expr::Var(v) if v == g) && matches!(&**a, Expr::Var(v) if v == x)
                {
                    return Some((k, f, t));
                }
            }
        }
    }
    None
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..)
        | Expr::Fix(..)
        | Expr::ClockAbs(..)
        | Expr::Forall(..)
        | Expr::Prev(..)
        | Expr::Reflect(..)
        | Expr::If { .. } => EXPR,
        Expr::Next(..) if as_ap(e).is_some() => AP,
        Expr::Next(..) | Expr::Later(..) => APP,
        Expr::Pi(..) => ARROW,
        Expr::CSigma(..) if as_sum(e).is_some() => SUM,
        Expr::Sigma(..) => PROD,
        Expr::CSigma(_, f) if matches!(&**f, Expr::Lam(x, None, b) if !occurs_free(x, b)) => PROD,
        Expr::App(..)
        | Expr::ClockApp(..)
        | Expr::El(_)
        | Expr::Id(..)
        | Expr::Fst(_)
        | Expr::Snd(_)
        | Expr::CPi(..)
        | Expr::CSigma(..)
        | Expr::CLater(..)
        | Expr::CForall(_)
        | Expr::J { .. } => APP,
        Expr::Succ(_) if numeral(e).is_none() => APP,
        Expr::Refl(Some(_)) => ATOM,
        _ => ATOM,
    }
}

impl Printer<'_> {
    fn s(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn clock(&mut self, k: &Clock) {
        let s = k.to_string();
        self.s(&s);
    }

    fn dsubst(&mut self, k: &Clock, xi: &DSubst) {
        self.s("[");
        self.clock(k);
        for (i, (x, t)) in xi.entries().iter().enumerate() {
            self.s(if i == 0 { "; " } else { ", " });
            self.s(x);
            self.s(" <- ");
            self.expr(t, EXPR);
        }
        self.s("]");
    }

    fn expr(&mut self, e: &Expr, ctx: u8) {
        let paren = level(e) < ctx;
        if paren {
            self.s("(");
        }
        self.raw(e);
        if paren {
            self.s(")");
        }
    }

    fn raw(&mut self, e: &Expr) {
        use Expr::*;
        if let Some(n) = numeral(e) {
            self.s(&n.to_string());
            return;
        }
        if let Some((a, b)) = as_sum(e) {
            self.expr(a, PROD);
            self.s(" + ");
            self.expr(b, SUM);
            return;
        }
        if let Some((k, f, t)) = as_ap(e) {
            self.expr(f, AP);
            self.s(" <*>[");
            self.clock(k);
            self.s("] ");
            self.expr(t, APP);
            return;
        }
        match e {
            Unit => self.s("Unit"),
            Bool => self.s("Bool"),
            Nat => self.s("Nat"),
            Star => self.s("tt"),
            True => self.s("true"),
            False => self.s("false"),
            Zero => self.s("0"),
            CUnit => self.s("cUnit"),
            CBool => self.s("cBool"),
            CNat => self.s("cNat"),
            Refl(None) => self.s("refl"),
            Refl(Some(a)) => {
                self.s("refl{");
                self.expr(a, EXPR);
                self.s("}");
            }
            Var(x) | Const(x) => self.s(x),
            Universe(d) => {
                self.s("U{");
                let names: Vec<&str> = d.iter().map(|k| &**k).collect();
                self.s(&names.join(","));
                self.s("}");
            }
            Pi(x, a, b) => {
                if occurs_free(x, b) {
                    self.s("(");
                    self.s(x);
                    self.s(" : ");
                    self.expr(a, EXPR);
                    self.s(")");
                } else {
                    self.expr(a, SUM);
                }
                self.s(" -> ");
                self.expr(b, ARROW);
            }
            Sigma(x, a, b) => {
                if occurs_free(x, b) {
                    self.s("(");
                    self.s(x);
                    self.s(" : ");
                    self.expr(a, EXPR);
                    self.s(")");
                } else {
                    self.expr(a, AP);
                }
                self.s(" * ");
                self.expr(b, PROD);
            }
            CSigma(a, f) if level(e) == PROD => {
                let Lam(_, None, b) = &**f else {
                    unreachable!()
                };
                self.expr(a, AP);
                self.s(" c* ");
                self.expr(b, PROD);
            }
            Id(a, t, u) => {
                self.s("Id ");
                self.expr(a, ATOM);
                self.s(" ");
                self.expr(t, ATOM);
                self.s(" ");
                self.expr(u, ATOM);
            }
            El(t) => self.prefix("El", &[t]),
            Fst(t) => self.prefix("fst", &[t]),
            Snd(t) => self.prefix("snd", &[t]),
            Succ(t) => self.prefix("succ", &[t]),
            CPi(a, f) => self.prefix("cPi", &[a, f]),
            CSigma(a, f) => self.prefix("cSigma", &[a, f]),
            CForall(t) => self.prefix("cForall", &[t]),
            CLater(k, t) => {
                self.s("cLater[");
                self.clock(k);
                self.s("] ");
                self.expr(t, ATOM);
            }
            Later(k, xi, body) => {
                self.s("Later");
                self.dsubst(k, xi);
                self.s(" ");
                self.expr(body, ATOM);
            }
            Next(k, xi, body) => {
                self.s("next");
                self.dsubst(k, xi);
                self.s(" ");
                self.expr(body, ATOM);
            }
            Forall(k, body) => {
                self.s("forall ");
                self.s(k);
                self.s(". ");
                self.expr(body, EXPR);
            }
            ClockAbs(k, body) => {
                self.s("clam ");
                self.s(k);
                self.s(". ");
                self.expr(body, EXPR);
            }
            Prev(k, body) => {
                self.s("prev[");
                self.s(k);
                self.s("] ");
                self.expr(body, EXPR);
            }
            ClockApp(t, k) => {
                self.expr(t, APP);
                self.s(" @ ");
                self.clock(k);
            }
            Lam(x, ann, body) => {
                self.s("\\");
                match ann {
                    Some(a) => {
                        self.s("(");
                        self.s(x);
                        self.s(" : ");
                        self.expr(a, EXPR);
                        self.s(")");
                    }
                    None => self.s(x),
                }
                self.s(". ");
                self.expr(body, EXPR);
            }
            App(f, a) => {
                self.expr(f, APP);
                self.s(" ");
                self.expr(a, ATOM);
            }
            Pair(a, b) => {
                self.s("(");
                self.expr(a, EXPR);
                self.s(", ");
                self.expr(b, EXPR);
                self.s(")");
            }
            If {
                motive,
                cond,
                then_branch,
                else_branch,
            } => {
                self.s("if");
                if let Some((z, c)) = motive {
                    self.s("[");
                    self.s(z);
                    self.s(". ");
                    self.expr(c, EXPR);
                    self.s("]");
                }
                self.s(" ");
                self.expr(cond, EXPR);
                self.s(" then ");
                self.expr(then_branch, EXPR);
                self.s(" else ");
                self.expr(else_branch, EXPR);
            }
            NatRec {
                motive,
                target,
                zero,
                pred,
                ih,
                step,
            } => {
                self.s("natrec");
                if let Some((z, c)) = motive {
                    self.s("[");
                    self.s(z);
                    self.s(". ");
                    self.expr(c, EXPR);
                    self.s("]");
                }
                self.s(" ");
                self.expr(target, ATOM);
                self.s(" { zero => ");
                self.expr(zero, EXPR);
                self.s(" ; succ ");
                self.s(pred);
                self.s(" ");
                self.s(ih);
                self.s(" => ");
                self.expr(step, EXPR);
                self.s(" }");
            }
            J {
                motive: (x, p, c),
                base,
                proof,
            } => {
                self.s("J[");
                self.s(x);
                self.s(" ");
                self.s(p);
                self.s(". ");
                self.expr(c, EXPR);
                self.s("] ");
                self.expr(base, ATOM);
                self.s(" ");
                self.expr(proof, ATOM);
            }
            Fix(k, x, ann, body) => {
                self.s("fix[");
                self.clock(k);
                self.s("] ");
                match ann {
                    Some(a) => {
                        self.s("(");
                        self.s(x);
                        self.s(" : ");
                        self.expr(a, EXPR);
                        self.s(")");
                    }
                    None => self.s(x),
                }
                self.s(". ");
                self.expr(body, EXPR);
            }
            Reflect(p, t) => {
                self.s("reflect ");
                self.expr(p, EXPR);
                self.s(" in ");
                self.expr(t, EXPR);
            }
            Ann(t, a) => {
                self.s("(");
                self.expr(t, EXPR);
                self.s(" : ");
                self.expr(a, EXPR);
                self.s(")");
            }
        }
    }

    fn prefix(&mut self, head: &str, args: &[&Term]) {
        self.s(head);
        for a in args {
            self.s(" ");
            self.expr(a, ATOM);
        }
    }
}
