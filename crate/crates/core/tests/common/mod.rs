#![allow(dead_code, clippy::result_large_err)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gdtt_core::frontend::driver::{check_path, flatten, Failure, FlatItem, Session};
use gdtt_core::frontend::{parse_source, ItemKind, SourceFile};
use gdtt_core::model::{eval_at_depth, prefix_agree, ModelError, ObsValue};
use gdtt_core::subst::{clock_subst, subst};
use gdtt_core::syntax::Clock;
use gdtt_core::typecheck::{Global, Options, TypeErrorKind};
use gdtt_core::{alpha_eq, free_vars, Ctx, Expr, Name, Term, DEFAULT_FUEL};

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn files(dir: &str, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

pub fn positive() -> Vec<PathBuf> {
    files("positive", "gdtt")
}

pub fn negative() -> Vec<PathBuf> {
    files("negative", "gdtt")
}

pub fn equalities() -> Vec<PathBuf> {
    files("equalities", "eq")
}

pub fn all_sources() -> Vec<PathBuf> {
    let mut v = files("lib", "gdtt");
    v.extend(positive());
    v.extend(negative());
    v.extend(equalities());
    v
}

pub fn opts() -> Options {
    Options {
        fuel: DEFAULT_FUEL,
        ..Options::default()
    }
}

pub fn traced() -> Options {
    Options {
        trace: true,
        ..opts()
    }
}

pub fn name_of(p: &Path) -> String {
    p.file_name().unwrap().to_string_lossy().into_owned()
}

pub fn load(p: &Path) -> Session {
    match check_path(p, opts()) {
        Ok(s) => s,
        Err((_, f)) => panic!("{f}"),
    }
}

/// The rule named on the `-- expect:` line of a negative file.
pub fn expected_rule(p: &Path) -> String {
    let src = std::fs::read_to_string(p).unwrap();
    src.lines()
        .find_map(|l| l.strip_prefix("-- expect:"))
        .unwrap_or_else(|| panic!("{} has no expect line", p.display()))
        .trim()
        .to_string()
}

pub fn parse_file(p: &Path) -> SourceFile {
    let src = std::fs::read_to_string(p).unwrap();
    let eq = p.extension().is_some_and(|e| e == "eq");
    parse_source(&src, eq).unwrap_or_else(|e| panic!("{}: {e:?}", p.display()))
}

fn items_alpha_eq(a: &ItemKind, b: &ItemKind) -> bool {
    let opt = |x: &Option<Term>, y: &Option<Term>| match (x, y) {
        (Some(x), Some(y)) => alpha_eq(x, y),
        (None, None) => true,
        _ => false,
    };
    match (a, b) {
        (ItemKind::Clocks(x), ItemKind::Clocks(y)) => x == y,
        (ItemKind::Include(x), ItemKind::Include(y)) => x == y,
        (
            ItemKind::Def {
                names: n1,
                ty: t1,
                body: b1,
                needs_reflection: r1,
            },
            ItemKind::Def {
                names: n2,
                ty: t2,
                body: b2,
                needs_reflection: r2,
            },
        ) => n1 == n2 && r1 == r2 && alpha_eq(t1, t2) && opt(b1, b2),
        (
            ItemKind::Equality {
                lhs: l1,
                rhs: q1,
                ty: t1,
                needs_reflection: r1,
            },
            ItemKind::Equality {
                lhs: l2,
                rhs: q2,
                ty: t2,
                needs_reflection: r2,
            },
        ) => r1 == r2 && alpha_eq(l1, l2) && alpha_eq(q1, q2) && alpha_eq(t1, t2),
        _ => false,
    }
}

pub fn files_alpha_eq(a: &SourceFile, b: &SourceFile) -> bool {
    a.items.len() == b.items.len()
        && a.items
            .iter()
            .zip(&b.items)
            .all(|(x, y)| items_alpha_eq(&x.kind, &y.kind))
}

/// Applies `f` to every term in a flattened file and `g` to every clock
/// directive.
pub fn map_items(
    items: &[FlatItem],
    f: impl Fn(&Term) -> Term,
    g: impl Fn(&[Name]) -> Vec<Name>,
) -> Vec<FlatItem> {
    items
        .iter()
        .map(|fi| {
            let mut fi = fi.clone();
            fi.item.kind = match &fi.item.kind {
                ItemKind::Clocks(ks) => ItemKind::Clocks(g(ks)),
                ItemKind::Def {
                    names,
                    ty,
                    body,
                    needs_reflection,
                } => ItemKind::Def {
                    names: names.clone(),
                    ty: f(ty),
                    body: body.as_ref().map(&f),
                    needs_reflection: *needs_reflection,
                },
                ItemKind::Equality {
                    lhs,
                    rhs,
                    ty,
                    needs_reflection,
                } => ItemKind::Equality {
                    lhs: f(lhs),
                    rhs: f(rhs),
                    ty: f(ty),
                    needs_reflection: *needs_reflection,
                },
                k => k.clone(),
            };
            fi
        })
        .collect()
}

pub fn check_flat(items: &[FlatItem]) -> Result<Session, Failure> {
    let mut s = Session::new(opts());
    s.check_flat(items)?;
    Ok(s)
}

/// Renames the clock `k` to `to` everywhere, including clock directives.
/// `None` sends `k` to the constant clock.
pub fn rename_clock(items: &[FlatItem], k: &str, to: Option<&str>) -> Vec<FlatItem> {
    let kn: Name = k.into();
    let c = match to {
        Some(j) => Clock::var(j),
        None => Clock::Const,
    };
    map_items(
        items,
        |t| clock_subst(t, &kn, &c),
        |ks| {
            ks.iter()
                .filter_map(|x| match (&**x == k, to) {
                    (false, _) => Some(x.clone()),
                    (true, Some(j)) => Some(j.into()),
                    (true, None) => None,
                })
                .collect()
        },
    )
}

/// Adds the clock `extra` to every clock directive.
pub fn weaken_clocks(items: &[FlatItem], extra: &str) -> Vec<FlatItem> {
    map_items(
        items,
        |t| t.clone(),
        |ks| {
            let mut v = ks.to_vec();
            v.push(extra.into());
            v
        },
    )
}

// ---------------------------------------------------------------------------
// Acceptance criteria. Each returns a one-line summary or the first failure.

pub type Verdict = Result<String, String>;

pub fn criterion_positive() -> Verdict {
    let files = positive();
    let mut decls = 0;
    for p in &files {
        let s = check_path(p, opts()).map_err(|(_, f)| f.to_string())?;
        decls += s.decls.len();
    }
    Ok(format!(
        "{} files, {decls} declarations, fuel {DEFAULT_FUEL}",
        files.len()
    ))
}

pub fn criterion_negative() -> Verdict {
    let files = negative();
    let mut seen = BTreeSet::new();
    for p in &files {
        let want = expected_rule(p);
        match check_path(p, opts()) {
            Ok(_) => return Err(format!("{} was accepted", name_of(p))),
            Err((_, f)) => {
                let got = f.type_error().map(|e| e.rule.clone());
                if got.as_deref() != Some(want.as_str()) {
                    return Err(format!("{}: expected rule {want}, got {f}", name_of(p)));
                }
            }
        }
        seen.insert(name_of(p));
    }
    for must in [
        "fix_nat.gdtt",
        "prev_ctx.gdtt",
        "universe_escape.gdtt",
        "dsubst_not_later.gdtt",
    ] {
        if !seen.contains(must) {
            return Err(format!("missing negative case {must}"));
        }
    }
    if files.len() < 10 {
        return Err(format!("only {} negative cases", files.len()));
    }
    Ok(format!(
        "{} mutations rejected with their rule",
        files.len()
    ))
}

/// Equality rules that the suite must exercise.
pub const REQUIRED_RULES: &[&str] = &[
    "TmEq-Force",
    "TyEq-Force",
    "TmEq-Next-Weak",
    "TyEq-▶-Weak",
    "TmEq-Next-Exch",
    "TyEq-▶-Exch",
    "TmEq-Next-Var",
    "TmEq-Next-Comm",
    "TmEq-Fix",
    "TyEq-El-▶",
    "TyEq-∀-el",
    "TyEq-▶",
    "TyEq-∀-Id",
    "TmEq-∀-β",
    "TmEq-∀-η",
    "TmEq-prev-β",
    "TmEq-prev-η",
    "TmEq-∀-fresh",
];

pub fn rules_used(p: &Path) -> Result<BTreeSet<String>, String> {
    let s = check_path(p, traced()).map_err(|(_, f)| f.to_string())?;
    Ok(s.kernel
        .take_trace()
        .iter()
        .filter_map(|l| {
            l.strip_prefix("RULE ")?
                .split(" AT ")
                .next()
                .map(str::to_string)
        })
        .collect())
}

pub fn criterion_equalities() -> Verdict {
    let mut used = BTreeSet::new();
    let mut count = 0;
    for p in equalities() {
        used.extend(rules_used(&p)?);
        count += load(&p).equalities.len();
    }
    let missing: Vec<&str> = REQUIRED_RULES
        .iter()
        .copied()
        .filter(|r| !used.contains(*r))
        .collect();
    if !missing.is_empty() {
        return Err(format!("rules never used: {}", missing.join(", ")));
    }
    Ok(format!(
        "{count} equalities, {} rules exercised",
        used.len()
    ))
}

/// Equalities the model can judge: no free clocks beyond one, no free
/// variables, and an observable type.
pub fn model_agreement(depth: u32) -> Result<(usize, usize), String> {
    let (mut judged, mut skipped) = (0, 0);
    for p in equalities() {
        let s = load(&p);
        for e in &s.equalities {
            let closed = [&e.lhs, &e.rhs, &e.ty]
                .iter()
                .all(|t| free_vars(t).terms.is_empty());
            if !closed || e.clocks.len() > 1 {
                skipped += 1;
                continue;
            }
            match prefix_agree(&s.kernel.globals, &e.lhs, &e.rhs, &e.ty, depth) {
                Ok(true) => judged += 1,
                Ok(false) => {
                    return Err(format!("{}:{} disagrees in the model", name_of(&p), e.pos))
                }
                Err(ModelError::NotObservable(_) | ModelError::Stuck(_)) => skipped += 1,
                Err(err) => return Err(format!("{}:{} {err}", name_of(&p), e.pos)),
            }
        }
    }
    Ok((judged, skipped))
}

/// Guarded streams unfolded by hand: a head and a thunk for the tail.
pub struct Stream(pub u64, pub Box<dyn Fn() -> Stream>);

pub fn oracle_ones() -> Stream {
    Stream(1, Box::new(oracle_ones))
}

pub fn oracle_zip(f: fn(u64, u64) -> u64, a: Stream, b: Stream) -> Stream {
    let Stream(x, xs) = a;
    let Stream(y, ys) = b;
    Stream(f(x, y), Box::new(move || oracle_zip(f, xs(), ys())))
}

pub fn take(s: Stream, n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut cur = s;
    while out.len() < n {
        out.push(cur.0);
        cur = (cur.1)();
    }
    out
}

pub fn eval_stream(s: &Session, def: &str, depth: u32) -> Result<Vec<u64>, String> {
    let g = s.kernel.globals.get(def).ok_or(format!("no {def}"))?;
    let o = eval_at_depth(
        &s.kernel.globals,
        &Expr::Const(def.into()).rc(),
        &g.ty,
        depth,
    )
    .map_err(|e| e.to_string())?;
    o.stream_prefix()
        .ok_or(format!("{def} is not stream-shaped"))?
        .into_iter()
        .map(|v| match v {
            ObsValue::Nat(n) => Ok(n),
            v => Err(format!("non-numeral head {v:?}")),
        })
        .collect()
}

pub fn criterion_model() -> Verdict {
    let s = load(&corpus().join("positive/streams.gdtt"));
    let want_ones = take(oracle_ones(), 3);
    let want_sums = take(oracle_zip(|a, b| a + b, oracle_ones(), oracle_ones()), 3);
    let ones = eval_stream(&s, "ones", 3)?;
    let sums = eval_stream(&s, "sums", 3)?;
    if ones != [1, 1, 1] || ones != want_ones {
        return Err(format!("eval(ones,3) = {ones:?}"));
    }
    if sums != [2, 2, 2] || sums != want_sums {
        return Err(format!("eval(zipWith plus ones ones,3) = {sums:?}"));
    }
    let (judged, skipped) = model_agreement(5)?;
    if judged == 0 {
        return Err("no equality was observable".into());
    }
    Ok(format!("ones and sums match the oracle; {judged} equalities agree to depth 5, {skipped} not observable"))
}

/// Substitution lemma on every declared function: for `f : (x : A) -> B`
/// with body `\x. b`, a fresh `a : A` gives `b[a/x] : B[a/x]`.
pub fn substitution_lemma(s: &mut Session) -> Result<usize, String> {
    let names: Vec<Name> = s.decls.clone();
    let mut n = 0;
    for d in names {
        let g = s.kernel.globals.get(&d).unwrap().clone();
        let Some(body) = &g.body else { continue };
        let (Expr::Pi(x, a, b), Expr::Lam(y, _, bd)) = (&*g.ty, &**body) else {
            continue;
        };
        let arg: Name = format!("{d}__arg").into();
        s.kernel.add_global(
            &arg,
            Global {
                ty: a.clone(),
                body: None,
                clocks: g.clocks.clone(),
            },
        );
        let c = Expr::Const(arg).rc();
        let ctx = Ctx::new(g.clocks.clone());
        s.kernel.set_allow_reflection(true);
        let r = s.kernel.check(&ctx, &subst(bd, y, &c), &subst(b, x, &c));
        s.kernel.set_allow_reflection(false);
        match r {
            Ok(_) => n += 1,
            Err(e) if e.kind == TypeErrorKind::CannotInfer => {}
            Err(e) => return Err(format!("{d}: {e:?}")),
        }
    }
    Ok(n)
}

/// Every inferable declaration body has a well-formed inferred type.
pub fn inferred_types_wf(s: &Session) -> Result<usize, String> {
    let mut n = 0;
    for d in &s.decls {
        let g = s.kernel.globals.get(d).unwrap();
        let Some(body) = &g.body else { continue };
        let ctx = Ctx::new(g.clocks.clone());
        s.kernel.set_allow_reflection(true);
        let r = s
            .kernel
            .infer(&ctx, body)
            .and_then(|(_, ty)| s.kernel.check_ty(&ctx, &ty));
        s.kernel.set_allow_reflection(false);
        match r {
            Ok(_) => n += 1,
            Err(e) if e.kind == TypeErrorKind::CannotInfer => {}
            Err(e) => return Err(format!("{d}: {e:?}")),
        }
    }
    Ok(n)
}

pub fn criterion_metatheory() -> Verdict {
    let (mut lemma, mut weak, mut renamed, mut wf) = (0, 0, 0, 0);
    for p in positive() {
        let mut s = load(&p);
        lemma += substitution_lemma(&mut s).map_err(|e| format!("{}: {e}", name_of(&p)))?;
        wf += inferred_types_wf(&s).map_err(|e| format!("{}: {e}", name_of(&p)))?;
        let items = flatten(&p).map_err(|f| f.to_string())?;
        check_flat(&weaken_clocks(&items, "kw"))
            .map_err(|f| format!("{} weakened: {f}", name_of(&p)))?;
        weak += 1;
    }
    for p in positive().into_iter().chain(equalities()) {
        let items = flatten(&p).map_err(|f| f.to_string())?;
        for to in [Some("k2"), None] {
            check_flat(&rename_clock(&items, "k", to)).map_err(|f| {
                format!("{} with k sent to {}: {f}", name_of(&p), to.unwrap_or("k0"))
            })?;
            renamed += 1;
        }
    }
    Ok(format!(
        "{lemma} substitution instances, {weak} weakened files, {renamed} clock substitutions, {wf} inferred types"
    ))
}

pub fn criterion_roundtrip() -> Verdict {
    let files = all_sources();
    for p in &files {
        let a = parse_file(p);
        let printed = a.print();
        let eq = p.extension().is_some_and(|e| e == "eq");
        let b = parse_source(&printed, eq).map_err(|e| format!("{}: reparse {e:?}", name_of(p)))?;
        if !files_alpha_eq(&a, &b) {
            return Err(format!("{} changes under print", name_of(p)));
        }
        if b.print() != printed {
            return Err(format!("{} printing is not a fixpoint", name_of(p)));
        }
    }
    Ok(format!("{} files", files.len()))
}
