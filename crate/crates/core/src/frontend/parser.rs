//! Recursive-descent parser. Sugar is expanded while parsing, so the
//! output is core [`Expr`] syntax.

use crate::subst::fresh_name;
use crate::syntax::{mk, name, occurs_free, Clock, ClockCtx, DSubst, Expr, Name, Term};

use super::lexer::{lex, Tok, Token};
use super::{Item, ItemKind, ParseError, Pos, SourceFile};

const KEYWORDS: &[&str] = &[
    "def", "axiom", "fix", "clam", "forall", "prev", "next", "Later", "if", "then", "else",
    "reflect", "in", "case", "of", "inl", "inr", "El", "Id", "fst", "snd", "succ", "cPi", "cSigma",
    "cLater", "cForall", "J", "refl", "tt", "true", "false", "Unit", "Bool", "Nat", "U", "cUnit",
    "cBool", "cNat", "natrec",
];

pub(crate) struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    end: Pos,
}

type PResult<T> = Result<T, ParseError>;

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [Token], end: Pos) -> Self {
        Parser { toks, i: 0, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => format!(", found {}", describe(t)),
            None => ", found end of input".to_string(),
        };
        Err(ParseError::new(
            self.pos(),
            format!("{}{}", msg.into(), found),
        ))
    }

    fn is(&self, t: &Tok) -> bool {
        self.peek() == Some(t)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.is(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {}", describe(t)))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let n = name(s);
                self.i += 1;
                Ok(n)
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if !is_keyword(s))
    }

    pub(crate) fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub(crate) fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected token")
        }
    }

    fn clock(&mut self) -> PResult<Clock> {
        let k = match self.peek() {
            Some(Tok::Ident(s)) if s == "k0" => Clock::Const,
            Some(Tok::Ident(s)) if !is_keyword(s) => Clock::Var(name(s)),
            _ => return self.err("expected a clock"),
        };
        self.i += 1;
        Ok(k)
    }

    fn clock_var(&mut self) -> PResult<Name> {
        if self.is_kw("k0") {
            return self.err("expected a clock variable");
        }
        self.ident()
    }

    /// `[k]` or `[k; x <- t, ...]`.
    fn dsubst_bracket(&mut self) -> PResult<(Clock, DSubst)> {
        self.expect(&Tok::LBrack)?;
        let k = self.clock()?;
        let mut entries = Vec::new();
        if self.eat(&Tok::Semi) {
            loop {
                let pos = self.pos();
                let x = self.ident()?;
                self.expect(&Tok::LArrow)?;
                let t = self.expr()?;
                if entries.iter().any(|(y, _): &(Name, Term)| *y == x) {
                    return Err(ParseError::new(pos, format!("`{x}` is bound twice")));
                }
                entries.push((x, t));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RBrack)?;
        Ok((k, DSubst::from_distinct(entries)))
    }

    /// If a `(x y : A)` binder group starts here, the index just past its
    /// closing parenthesis.
    fn binder_group_end(&self, at: usize) -> Option<usize> {
        let toks = self.toks;
        if !matches!(toks.get(at).map(|t| &t.tok), Some(Tok::LParen)) {
            return None;
        }
        let mut j = at + 1;
        let mut n = 0;
        while matches!(toks.get(j).map(|t| &t.tok), Some(Tok::Ident(s)) if !is_keyword(s)) {
            j += 1;
            n += 1;
        }
        if n == 0 || !matches!(toks.get(j).map(|t| &t.tok), Some(Tok::Colon)) {
            return None;
        }
        let mut depth = 0;
        while let Some(t) = toks.get(j) {
            match t.tok {
                Tok::LParen | Tok::LBrack | Tok::LBrace => depth += 1,
                Tok::RParen | Tok::RBrack | Tok::RBrace => {
                    if depth == 0 {
                        return matches!(t.tok, Tok::RParen).then_some(j + 1);
                    }
                    depth -= 1;
                }
                _ => {}
            }
            j += 1;
        }
        None
    }

    /// A run of binder groups followed by `follow`, if one starts here.
    fn telescope_before(&self, follow: &[Tok]) -> bool {
        let mut j = self.i;
        let mut any = false;
        while let Some(e) = self.binder_group_end(j) {
            j = e;
            any = true;
        }
        any && matches!(self.toks.get(j), Some(t) if follow.contains(&t.tok))
    }

    fn binder_group(&mut self) -> PResult<Vec<(Name, Term)>> {
        self.expect(&Tok::LParen)?;
        let mut xs = vec![self.ident()?];
        while self.is_ident() {
            xs.push(self.ident()?);
        }
        self.expect(&Tok::Colon)?;
        let a = self.expr()?;
        self.expect(&Tok::RParen)?;
        Ok(xs.into_iter().map(|x| (x, a.clone())).collect())
    }

    fn telescope(&mut self) -> PResult<Vec<(Name, Term)>> {
        let mut out = Vec::new();
        while self.binder_group_end(self.i).is_some() {
            out.extend(self.binder_group()?);
        }
        Ok(out)
    }

    pub(crate) fn expr(&mut self) -> PResult<Term> {
        use Expr::*;
        if self.eat(&Tok::Backslash) {
            let mut binders: Vec<(Name, Option<Term>)> = Vec::new();
            loop {
                if self.is(&Tok::LParen) {
                    binders.extend(self.binder_group()?.into_iter().map(|(x, a)| (x, Some(a))));
                } else if self.is_ident() {
                    binders.push((self.ident()?, None));
                } else {
                    break;
                }
            }
            if binders.is_empty() {
                return self.err("expected a binder after `\\`");
            }
            self.expect(&Tok::Dot)?;
            let body = self.expr()?;
            return Ok(binders
                .into_iter()
                .rev()
                .fold(body, |b, (x, a)| Lam(x, a, b).rc()));
        }
        if self.eat_kw("fix") {
            self.expect(&Tok::LBrack)?;
            let k = self.clock()?;
            self.expect(&Tok::RBrack)?;
            let (x, ann) = if self.eat(&Tok::LParen) {
                let x = self.ident()?;
                self.expect(&Tok::Colon)?;
                let a = self.expr()?;
                self.expect(&Tok::RParen)?;
                (x, Some(a))
            } else {
                (self.ident()?, None)
            };
            self.expect(&Tok::Dot)?;
            let body = self.expr()?;
            return Ok(Fix(k, x, ann, body).rc());
        }
        for kw in ["clam", "forall"] {
            if self.eat_kw(kw) {
                let mut ks = vec![self.clock_var()?];
                while self.is_ident() {
                    ks.push(self.clock_var()?);
                }
                self.expect(&Tok::Dot)?;
                let body = self.expr()?;
                return Ok(ks.into_iter().rev().fold(body, |b, k| {
                    if kw == "clam" {
                        ClockAbs(k, b).rc()
                    } else {
                        Forall(k, b).rc()
                    }
                }));
            }
        }
        if self.eat_kw("prev") {
            self.expect(&Tok::LBrack)?;
            let k = self.clock_var()?;
            self.expect(&Tok::RBrack)?;
            if self.at_end() {
                return self.err("expected the body of `prev`");
            }
            let body = self.expr()?;
            return Ok(Prev(k, body).rc());
        }
        if self.eat_kw("if") {
            let motive = self.motive()?;
            let cond = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(If {
                motive,
                cond,
                then_branch: a,
                else_branch: b,
            }
            .rc());
        }
        if self.eat_kw("reflect") {
            let p = self.expr()?;
            self.expect_kw("in")?;
            let body = self.expr()?;
            return Ok(Reflect(p, body).rc());
        }
        self.arrow()
    }

    fn motive(&mut self) -> PResult<Option<(Name, Term)>> {
        if !self.eat(&Tok::LBrack) {
            return Ok(None);
        }
        let z = self.ident()?;
        self.expect(&Tok::Dot)?;
        let c = self.expr()?;
        self.expect(&Tok::RBrack)?;
        Ok(Some((z, c)))
    }

    fn arrow(&mut self) -> PResult<Term> {
        if self.telescope_before(&[Tok::Arrow]) {
            let tele = self.telescope()?;
            self.expect(&Tok::Arrow)?;
            let b = self.expr()?;
            return Ok(tele
                .into_iter()
                .rev()
                .fold(b, |b, (x, a)| Expr::Pi(x, a, b).rc()));
        }
        let a = self.sum()?;
        if self.eat(&Tok::Arrow) {
            let b = self.expr()?;
            return Ok(Expr::Pi(name("_"), a, b).rc());
        }
        Ok(a)
    }

    fn sum(&mut self) -> PResult<Term> {
        let a = self.prod()?;
        if self.eat(&Tok::Plus) {
            let b = self.sum()?;
            let v = fresh_name("b", |c| occurs_free(c, &a) || occurs_free(c, &b));
            let body = Expr::If {
                motive: None,
                cond: mk::var(&v),
                then_branch: a,
                else_branch: b,
            }
            .rc();
            let fam = Expr::Lam(v, None, body);
            return Ok(Expr::CSigma(Expr::CBool.rc(), fam.rc()).rc());
        }
        Ok(a)
    }

    fn prod(&mut self) -> PResult<Term> {
        if self.telescope_before(&[Tok::Star]) {
            let tele = self.telescope()?;
            self.expect(&Tok::Star)?;
            let b = self.prod_rhs()?;
            return Ok(tele
                .into_iter()
                .rev()
                .fold(b, |b, (x, a)| Expr::Sigma(x, a, b).rc()));
        }
        let a = self.ap()?;
        if self.eat(&Tok::Star) {
            let b = self.prod_rhs()?;
            return Ok(Expr::Sigma(name("_"), a, b).rc());
        }
        if self.eat(&Tok::CStar) {
            let b = self.prod_rhs()?;
            return Ok(Expr::CSigma(a, Expr::Lam(name("_"), None, b).rc()).rc());
        }
        Ok(a)
    }

    /// The right operand of `*` may be a binder form extending to the end.
    fn prod_rhs(&mut self) -> PResult<Term> {
        let binder = match self.peek() {
            Some(Tok::Backslash) => true,
            Some(Tok::Ident(s)) => matches!(
                s.as_str(),
                "fix" | "clam" | "forall" | "prev" | "if" | "reflect"
            ),
            _ => false,
        };
        if binder {
            self.expr()
        } else {
            self.prod()
        }
    }

    fn ap(&mut self) -> PResult<Term> {
        let mut f = self.app()?;
        while self.eat(&Tok::Ap) {
            self.expect(&Tok::LBrack)?;
            let k = self.clock()?;
            self.expect(&Tok::RBrack)?;
            let t = self.app()?;
            f = mk::ap(k, f, t);
        }
        Ok(f)
    }

    fn app(&mut self) -> PResult<Term> {
        use Expr::*;
        let mut head = if self.eat_kw("El") {
            El(self.atom()?).rc()
        } else if self.eat_kw("Id") {
            let a = self.atom()?;
            let t = self.atom()?;
            let u = self.atom()?;
            Id(a, t, u).rc()
        } else if self.eat_kw("fst") {
            Fst(self.atom()?).rc()
        } else if self.eat_kw("snd") {
            Snd(self.atom()?).rc()
        } else if self.eat_kw("succ") {
            Succ(self.atom()?).rc()
        } else if self.eat_kw("inl") {
            Pair(True.rc(), self.atom()?).rc()
        } else if self.eat_kw("inr") {
            Pair(False.rc(), self.atom()?).rc()
        } else if self.eat_kw("cPi") {
            let a = self.atom()?;
            CPi(a, self.atom()?).rc()
        } else if self.eat_kw("cSigma") {
            let a = self.atom()?;
            CSigma(a, self.atom()?).rc()
        } else if self.eat_kw("cLater") {
            self.expect(&Tok::LBrack)?;
            let k = self.clock()?;
            self.expect(&Tok::RBrack)?;
            CLater(k, self.atom()?).rc()
        } else if self.eat_kw("next") {
            let (k, xi) = self.dsubst_bracket()?;
            Next(k, xi, self.atom()?).rc()
        } else if self.eat_kw("Later") {
            let (k, xi) = self.dsubst_bracket()?;
            Later(k, xi, self.atom()?).rc()
        } else if self.eat_kw("cForall") {
            CForall(self.atom()?).rc()
        } else if self.eat_kw("J") {
            self.expect(&Tok::LBrack)?;
            let x = self.ident()?;
            let p = self.ident()?;
            self.expect(&Tok::Dot)?;
            let c = self.expr()?;
            self.expect(&Tok::RBrack)?;
            let base = self.atom()?;
            let proof = self.atom()?;
            J {
                motive: (x, p, c),
                base,
                proof,
            }
            .rc()
        } else {
            self.atom()?
        };
        loop {
            if self.eat(&Tok::At) {
                head = ClockApp(head, self.clock()?).rc();
            } else if self.starts_atom() {
                head = App(head, self.atom()?).rc();
            } else {
                return Ok(head);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                !is_keyword(s)
                    || matches!(
                        s.as_str(),
                        "refl"
                            | "tt"
                            | "true"
                            | "false"
                            | "Unit"
                            | "Bool"
                            | "Nat"
                            | "U"
                            | "cUnit"
                            | "cBool"
                            | "cNat"
                            | "natrec"
                            | "case"
                    )
            }
            Some(Tok::Num(_)) | Some(Tok::LParen) => true,
            _ => false,
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        use Expr::*;
        let simple = |s: &str| -> Option<Expr> {
            Some(match s {
                "tt" => Star,
                "true" => True,
                "false" => False,
                "Unit" => Unit,
                "Bool" => Bool,
                "Nat" => Nat,
                "cUnit" => CUnit,
                "cBool" => CBool,
                "cNat" => CNat,
                _ => return None,
            })
        };
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ok(mk::numeral(n))
            }
            Some(Tok::Ident(s)) => {
                if let Some(e) = simple(&s) {
                    self.i += 1;
                    return Ok(e.rc());
                }
                match s.as_str() {
                    "refl" => {
                        self.i += 1;
                        if self.eat(&Tok::LBrace) {
                            let a = self.expr()?;
                            self.expect(&Tok::RBrace)?;
                            Ok(Refl(Some(a)).rc())
                        } else {
                            Ok(Refl(None).rc())
                        }
                    }
                    "U" => {
                        self.i += 1;
                        self.expect(&Tok::LBrace)?;
                        let mut d = ClockCtx::new();
                        if !self.is(&Tok::RBrace) {
                            loop {
                                d.insert(self.clock_var()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(&Tok::RBrace)?;
                        Ok(Universe(d).rc())
                    }
                    "natrec" => {
                        self.i += 1;
                        self.natrec()
                    }
                    "case" => {
                        self.i += 1;
                        self.case()
                    }
                    _ => Ok(Var(self.ident()?).rc()),
                }
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let a = self.expr()?;
                if self.eat(&Tok::Colon) {
                    let t = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Ann(a, t).rc());
                }
                let mut items = vec![a];
                while self.eat(&Tok::Comma) {
                    items.push(self.expr()?);
                }
                self.expect(&Tok::RParen)?;
                let last = items.pop().unwrap();
                Ok(items.into_iter().rev().fold(last, |b, a| Pair(a, b).rc()))
            }
            _ => self.err("expected an expression"),
        }
    }

    fn natrec(&mut self) -> PResult<Term> {
        let motive = self.motive()?;
        let target = self.atom()?;
        self.expect(&Tok::LBrace)?;
        self.expect_ident_kw("zero")?;
        self.expect(&Tok::FatArrow)?;
        let zero = self.expr()?;
        self.expect(&Tok::Semi)?;
        self.expect_kw("succ")?;
        let pred = self.ident()?;
        let ih = self.ident()?;
        self.expect(&Tok::FatArrow)?;
        let step = self.expr()?;
        self.expect(&Tok::RBrace)?;
        Ok(Expr::NatRec {
            motive,
            target,
            zero,
            pred,
            ih,
            step,
        }
        .rc())
    }

    fn expect_ident_kw(&mut self, w: &str) -> PResult<()> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == w) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected `{w}`"))
        }
    }

    /// `case s of { inl a => t ; inr b => u }`.
    fn case(&mut self) -> PResult<Term> {
        use Expr::*;
        let s = self.expr()?;
        self.expect_kw("of")?;
        self.expect(&Tok::LBrace)?;
        self.expect_kw("inl")?;
        let a = self.ident()?;
        self.expect(&Tok::FatArrow)?;
        let t = self.expr()?;
        self.expect(&Tok::Semi)?;
        self.expect_kw("inr")?;
        let b = self.ident()?;
        self.expect(&Tok::FatArrow)?;
        let u = self.expr()?;
        self.expect(&Tok::RBrace)?;
        let branch = If {
            motive: None,
            cond: Fst(s.clone()).rc(),
            then_branch: Lam(a, None, t).rc(),
            else_branch: Lam(b, None, u).rc(),
        };
        Ok(App(branch.rc(), Snd(s).rc()).rc())
    }

    /// One top-level item; the token slice holds exactly its tokens.
    fn item(&mut self, eq_file: bool) -> PResult<Item> {
        let pos = self.pos();
        let mut needs_reflection = false;
        while self.eat(&Tok::NeedsReflection) {
            needs_reflection = true;
        }
        let pos = if needs_reflection { self.pos() } else { pos };
        let kind = match self.peek().cloned() {
            None => return self.err("expected a declaration"),
            Some(Tok::Directive(d)) if d == "clocks" => {
                self.i += 1;
                let mut ks = Vec::new();
                while !self.at_end() {
                    ks.push(self.clock_var()?);
                }
                ItemKind::Clocks(ks)
            }
            Some(Tok::Directive(d)) if d == "include" => {
                self.i += 1;
                match self.peek().cloned() {
                    Some(Tok::Str(s)) => {
                        self.i += 1;
                        ItemKind::Include(s)
                    }
                    _ => return self.err("expected a quoted path"),
                }
            }
            Some(Tok::Directive(d)) => {
                return Err(ParseError::new(pos, format!("unknown directive `#{d}`")))
            }
            Some(Tok::Ident(s)) if s == "def" => {
                self.i += 1;
                let x = self.ident()?;
                let tele = self.telescope()?;
                self.expect(&Tok::Colon)?;
                let ty = self.expr()?;
                self.expect(&Tok::Define)?;
                let body = self.expr()?;
                let ty = tele
                    .iter()
                    .rev()
                    .fold(ty, |b, (x, a)| Expr::Pi(x.clone(), a.clone(), b).rc());
                let body = tele
                    .into_iter()
                    .rev()
                    .fold(body, |b, (x, a)| Expr::Lam(x, Some(a), b).rc());
                ItemKind::Def {
                    names: vec![x],
                    ty,
                    body: Some(body),
                    needs_reflection,
                }
            }
            Some(Tok::Ident(s)) if s == "axiom" => {
                self.i += 1;
                let mut names = vec![self.ident()?];
                while self.is_ident() {
                    names.push(self.ident()?);
                }
                self.expect(&Tok::Colon)?;
                let ty = self.expr()?;
                ItemKind::Def {
                    names,
                    ty,
                    body: None,
                    needs_reflection,
                }
            }
            _ if eq_file => {
                let lhs = self.expr()?;
                self.expect(&Tok::EqEq)?;
                let rhs = self.expr()?;
                self.expect(&Tok::Colon)?;
                let ty = self.expr()?;
                ItemKind::Equality {
                    lhs,
                    rhs,
                    ty,
                    needs_reflection,
                }
            }
            _ => return self.err("expected `def`, `axiom` or a directive"),
        };
        self.finish()?;
        Ok(Item { kind, pos })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Directive(d) => format!("`#{d}`"),
        Tok::NeedsReflection => "a needs-reflection tag".into(),
        Tok::Backslash => "`\\`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Define => "`:=`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::LArrow => "`<-`".into(),
        Tok::FatArrow => "`=>`".into(),
        Tok::Star => "`*`".into(),
        Tok::CStar => "`c*`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Ap => "`<*>`".into(),
        Tok::At => "`@`".into(),
        Tok::EqEq => "`==`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
    }
}

fn end_pos(src: &str) -> Pos {
    let line = src.matches('\n').count() as u32 + 1;
    let col = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
    Pos { line, col }
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(&toks, end_pos(src));
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a declaration file. Items start in the first column; continuation
/// lines must be indented. Equalities `t == u : A` are accepted when
/// `eq_file` is set.
pub fn parse_source(src: &str, eq_file: bool) -> Result<SourceFile, ParseError> {
    let toks = lex(src)?;
    let end = end_pos(src);
    let mut starts: Vec<usize> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        let prev_is_tag = i > 0 && toks[i - 1].tok == Tok::NeedsReflection;
        if t.pos.col == 1 && !prev_is_tag {
            starts.push(i);
        }
    }
    if let Some(t) = toks.first() {
        if starts.first() != Some(&0) {
            return Err(ParseError::new(
                t.pos,
                "declarations must start in the first column",
            ));
        }
    }
    let mut items = Vec::new();
    for (n, &s) in starts.iter().enumerate() {
        let e = starts.get(n + 1).copied().unwrap_or(toks.len());
        let chunk_end = toks.get(e).map(|t| t.pos).unwrap_or(end);
        let mut p = Parser::new(&toks[s..e], chunk_end);
        items.push(p.item(eq_file)?);
    }
    Ok(SourceFile { items })
}
