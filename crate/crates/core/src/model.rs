//! Finite-depth evaluator for the single-clock fragment, interpreting
//! types as families of sets `X1 <- X2 <- ...` over stages.
//!
//! Evaluation is call-by-name over closures and is indexed by the stage
//! `n`. `next` at stage 1 is the unique element; at stage `n + 1` its body
//! is evaluated at stage `n`, with each delayed-substitution variable bound
//! to the predecessor-stage content of its entry. Fixed points unfold once
//! per stage, so evaluation at a finite stage always terminates on
//! well-typed terms. All clocks are identified.
//!
//! This evaluator shares no code with the conversion checker; the tests use
//! it as an independent oracle.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::syntax::{mk, DSubst, Expr, Name, Term};
use crate::typecheck::Globals;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("type is not observable: {0}")]
    NotObservable(String),
    #[error("evaluation is stuck: {0}")]
    Stuck(String),
    #[error("depth must be positive")]
    ZeroDepth,
}

type MResult<T> = Result<T, ModelError>;

/// A first-order element of a stage set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObsValue {
    Star,
    Bool(bool),
    Nat(u64),
    Pair(Box<ObsValue>, Box<ObsValue>),
    /// An element of a `Later` type at a stage above 1.
    Later(Box<ObsValue>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub depth: u32,
    pub value: ObsValue,
}

impl ObsValue {
    fn truncate(&self, m: u32) -> ObsValue {
        match self {
            ObsValue::Later(_) if m <= 1 => ObsValue::Star,
            ObsValue::Later(v) => ObsValue::Later(Box::new(v.truncate(m - 1))),
            ObsValue::Pair(a, b) => {
                ObsValue::Pair(Box::new(a.truncate(m)), Box::new(b.truncate(m)))
            }
            v => v.clone(),
        }
    }
}

impl Observation {
    /// Restriction to an earlier stage `m <= depth`.
    pub fn truncate(&self, m: u32) -> Observation {
        assert!(
            m >= 1 && m <= self.depth,
            "restriction to stage {m} of {}",
            self.depth
        );
        Observation {
            depth: m,
            value: self.value.truncate(m),
        }
    }

    /// The heads of a stream-shaped observation `(h, later (h', ...))`.
    pub fn stream_prefix(&self) -> Option<Vec<ObsValue>> {
        let mut out = Vec::new();
        let mut cur = &self.value;
        loop {
            match cur {
                ObsValue::Pair(h, t) => {
                    out.push((**h).clone());
                    match &**t {
                        ObsValue::Later(rest) => cur = rest,
                        ObsValue::Star => return Some(out),
                        _ => return None,
                    }
                }
                _ => return None,
            }
        }
    }
}

impl fmt::Display for ObsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsValue::Star => write!(f, "★"),
            ObsValue::Bool(b) => write!(f, "{b}"),
            ObsValue::Nat(n) => write!(f, "{n}"),
            ObsValue::Pair(a, b) => write!(f, "({a},{b})"),
            ObsValue::Later(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Observation {
    /// Streams print as `[1,1,1]`, everything else as nested tuples.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stream_prefix() {
            Some(p) if !p.is_empty() => {
                let items: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", items.join(","))
            }
            _ => write!(f, "{}", self.value),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Env(Option<Rc<(Name, Thunk, Env)>>);

impl Env {
    fn bind(&self, x: Name, t: Thunk) -> Env {
        Env(Some(Rc::new((x, t, self.clone()))))
    }

    fn lookup(&self, x: &str) -> Option<&Thunk> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if &*node.0 == x {
                return Some(&node.1);
            }
            cur = &node.2 .0;
        }
        None
    }
}

/// A stage-independent suspended computation.
#[derive(Clone, Debug)]
enum Thunk {
    Code(Term, Env),
    /// The content one stage down of a delayed thunk.
    Inner(Rc<Thunk>),
}

#[derive(Clone, Debug)]
enum Val {
    Star,
    Bool(bool),
    Nat(u64),
    Pair(Thunk, Thunk),
    Lam(Name, Term, Env),
    ClockLam(Term, Env),
    /// `prev`: applied at stage n, its body is read at stage n + 1.
    PrevLam(Term, Env),
    /// `next` at a stage above 1, holding the value one stage down.
    Later(Box<Val>),
    /// The unique element of a `Later` type at stage 1.
    LaterStar,
    Refl,
    // Types and codes.
    TUnit,
    TBool,
    TNat,
    TSigma(Thunk, Name, Term, Env),
    /// Sigma code with a family that is itself a value.
    TSigmaF(Thunk, Thunk),
    /// A type outside the observable fragment.
    TOther(&'static str),
}

struct Eval<'a> {
    globals: &'a Globals,
}

impl Eval<'_> {
    fn force(&self, t: &Thunk, n: u32) -> MResult<Val> {
        match t {
            Thunk::Code(e, env) => self.eval(env, e, n),
            Thunk::Inner(t) => match self.force(t, n + 1)? {
                Val::Later(v) => Ok(*v),
                v => Err(ModelError::Stuck(format!(
                    "expected a delayed value, got {v:?}"
                ))),
            },
        }
    }

    fn delayed(&self, env: &Env, k_body: &Term, xi: &DSubst, n: u32) -> MResult<Val> {
        if n == 1 {
            return Ok(Val::LaterStar);
        }
        let mut inner = env.clone();
        for (x, s) in xi.entries() {
            let th = Thunk::Inner(Rc::new(Thunk::Code(s.clone(), env.clone())));
            inner = inner.bind(x.clone(), th);
        }
        Ok(Val::Later(Box::new(self.eval(&inner, k_body, n - 1)?)))
    }

    fn eval(&self, env: &Env, t: &Term, n: u32) -> MResult<Val> {
        use Expr::*;
        let code = |e: &Term| Thunk::Code(e.clone(), env.clone());
        Ok(match &**t {
            Var(x) => match env.lookup(x) {
                Some(th) => return self.force(&th.clone(), n),
                None => return self.global(x, n),
            },
            Const(x) => return self.global(x, n),
            Star => Val::Star,
            True => Val::Bool(true),
            False => Val::Bool(false),
            Zero => Val::Nat(0),
            Succ(m) => match self.eval(env, m, n)? {
                Val::Nat(k) => Val::Nat(k + 1),
                v => return Err(ModelError::Stuck(format!("succ of {v:?}"))),
            },
            Lam(x, _, b) => Val::Lam(x.clone(), b.clone(), env.clone()),
            App(f, a) => match self.eval(env, f, n)? {
                Val::Lam(x, b, fenv) => return self.eval(&fenv.bind(x, code(a)), &b, n),
                v => return Err(ModelError::Stuck(format!("application of {v:?}"))),
            },
            Pair(a, b) => Val::Pair(code(a), code(b)),
            Fst(p) | Snd(p) => match self.eval(env, p, n)? {
                Val::Pair(a, b) => {
                    return self.force(if matches!(&**t, Fst(_)) { &a } else { &b }, n)
                }
                v => return Err(ModelError::Stuck(format!("projection from {v:?}"))),
            },
            If {
                cond,
                then_branch,
                else_branch,
                ..
            } => match self.eval(env, cond, n)? {
                Val::Bool(true) => return self.eval(env, then_branch, n),
                Val::Bool(false) => return self.eval(env, else_branch, n),
                v => return Err(ModelError::Stuck(format!("if on {v:?}"))),
            },
            NatRec {
                motive,
                target,
                zero,
                pred,
                ih,
                step,
            } => match self.eval(env, target, n)? {
                Val::Nat(0) => return self.eval(env, zero, n),
                Val::Nat(k) => {
                    let p = mk::numeral(k - 1);
                    let rec = NatRec {
                        motive: motive.clone(),
                        target: p.clone(),
                        zero: zero.clone(),
                        pred: pred.clone(),
                        ih: ih.clone(),
                        step: step.clone(),
                    }
                    .rc();
                    let env2 = env
                        .bind(pred.clone(), Thunk::Code(p, Env::default()))
                        .bind(ih.clone(), code(&rec));
                    return self.eval(&env2, step, n);
                }
                v => return Err(ModelError::Stuck(format!("natrec on {v:?}"))),
            },
            Refl(_) => Val::Refl,
            J { base, proof, .. } => match self.eval(env, proof, n)? {
                Val::Refl => return self.eval(env, base, n),
                v => return Err(ModelError::Stuck(format!("J on {v:?}"))),
            },
            Next(_, xi, b) => return self.delayed(env, b, xi, n),
            Fix(k, x, _, b) => {
                let again = Next(k.clone(), DSubst::empty(), t.clone()).rc();
                return self.eval(&env.bind(x.clone(), code(&again)), b, n);
            }
            ClockAbs(_, b) => Val::ClockLam(b.clone(), env.clone()),
            ClockApp(u, _) => match self.eval(env, u, n)? {
                Val::ClockLam(b, cenv) => return self.eval(&cenv, &b, n),
                Val::PrevLam(b, cenv) => match self.eval(&cenv, &b, n + 1)? {
                    Val::Later(v) => *v,
                    v => return Err(ModelError::Stuck(format!("prev of {v:?}"))),
                },
                v => return Err(ModelError::Stuck(format!("clock application of {v:?}"))),
            },
            Prev(_, b) => Val::PrevLam(b.clone(), env.clone()),
            Reflect(_, u) | Ann(u, _) => return self.eval(env, u, n),
            Unit | CUnit => Val::TUnit,
            Bool | CBool => Val::TBool,
            Nat | CNat => Val::TNat,
            Sigma(x, a, b) => Val::TSigma(code(a), x.clone(), b.clone(), env.clone()),
            CSigma(a, f) => Val::TSigmaF(code(a), code(f)),
            El(c) => return self.eval(env, c, n),
            Later(_, xi, b) => return self.delayed(env, b, xi, n),
            CLater(_, u) => return self.eval(env, u, n),
            Pi(..) | CPi(..) => Val::TOther("function type"),
            Forall(..) | CForall(..) => Val::TOther("clock quantifier"),
            Universe(_) => Val::TOther("universe"),
            Id(..) => Val::TOther("identity type"),
        })
    }

    fn global(&self, x: &str, n: u32) -> MResult<Val> {
        match self.globals.get(x).and_then(|g| g.body.as_ref()) {
            Some(b) => self.eval(&Env::default(), b, n),
            None => Err(ModelError::Stuck(format!("`{x}` has no definition"))),
        }
    }

    fn observe(&self, ty: &Val, v: Val, n: u32) -> MResult<ObsValue> {
        Ok(match (ty, v) {
            (Val::TUnit, _) => ObsValue::Star,
            (Val::TBool, Val::Bool(b)) => ObsValue::Bool(b),
            (Val::TNat, Val::Nat(k)) => ObsValue::Nat(k),
            (Val::TSigma(a, x, b, env), Val::Pair(p, q)) => {
                let at = self.force(a, n)?;
                let av = self.force(&p, n)?;
                let bt = self.eval(&env.bind(x.clone(), p), b, n)?;
                let bv = self.force(&q, n)?;
                ObsValue::Pair(
                    Box::new(self.observe(&at, av, n)?),
                    Box::new(self.observe(&bt, bv, n)?),
                )
            }
            (Val::TSigmaF(a, f), Val::Pair(p, q)) => {
                let at = self.force(a, n)?;
                let av = self.force(&p, n)?;
                let bt = match self.force(f, n)? {
                    Val::Lam(x, b, env) => self.eval(&env.bind(x, p), &b, n)?,
                    v => return Err(ModelError::Stuck(format!("code family {v:?}"))),
                };
                let bv = self.force(&q, n)?;
                ObsValue::Pair(
                    Box::new(self.observe(&at, av, n)?),
                    Box::new(self.observe(&bt, bv, n)?),
                )
            }
            (Val::LaterStar, _) => ObsValue::Star,
            (Val::Later(t), Val::Later(v)) => {
                ObsValue::Later(Box::new(self.observe(t, *v, n - 1)?))
            }
            (Val::TOther(what), _) => return Err(ModelError::NotObservable(what.to_string())),
            (t, v) => return Err(ModelError::Stuck(format!("value {v:?} at type {t:?}"))),
        })
    }
}

/// The element of the stage-`n` set of `ty` denoted by the closed term `t`.
pub fn eval_at_depth(
    globals: &Globals,
    t: &Term,
    ty: &Term,
    n: u32,
) -> Result<Observation, ModelError> {
    if n == 0 {
        return Err(ModelError::ZeroDepth);
    }
    let ev = Eval { globals };
    let env = Env::default();
    let tyv = ev.eval(&env, ty, n)?;
    let v = ev.eval(&env, t, n)?;
    Ok(Observation {
        depth: n,
        value: ev.observe(&tyv, v, n)?,
    })
}

/// True iff `t` and `u` have the same observation at every depth up to
/// `max_depth`.
pub fn prefix_agree(
    globals: &Globals,
    t: &Term,
    u: &Term,
    ty: &Term,
    max_depth: u32,
) -> Result<bool, ModelError> {
    for n in 1..=max_depth {
        if eval_at_depth(globals, t, ty, n)? != eval_at_depth(globals, u, ty, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{mk, Clock};

    fn k() -> Clock {
        Clock::var("k")
    }

    #[test]
    fn next_is_star_at_stage_one() {
        let g = Globals::default();
        let t = mk::next(k(), vec![], mk::zero());
        let ty = mk::later(k(), vec![], mk::nat());
        assert_eq!(eval_at_depth(&g, &t, &ty, 1).unwrap().value, ObsValue::Star);
        assert_eq!(
            eval_at_depth(&g, &t, &ty, 2).unwrap().value,
            ObsValue::Later(Box::new(ObsValue::Nat(0)))
        );
    }

    #[test]
    fn function_types_are_not_observable() {
        let g = Globals::default();
        let t = mk::lam("x", mk::var("x"));
        let ty = mk::arrow(mk::nat(), mk::nat());
        assert!(matches!(
            eval_at_depth(&g, &t, &ty, 2),
            Err(ModelError::NotObservable(_))
        ));
    }

    #[test]
    fn truncation_drops_stages() {
        let cell = |h: u64, t: ObsValue| ObsValue::Pair(Box::new(ObsValue::Nat(h)), Box::new(t));
        let later = |v: ObsValue| ObsValue::Later(Box::new(v));
        let o = Observation {
            depth: 3,
            value: cell(1, later(cell(1, later(cell(1, ObsValue::Star))))),
        };
        assert_eq!(o.to_string(), "[1,1,1]");
        assert_eq!(o.truncate(2).to_string(), "[1,1]");
        assert_eq!(o.truncate(1).to_string(), "[1]");
    }
}
