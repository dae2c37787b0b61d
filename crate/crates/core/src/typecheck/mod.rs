//! Typing judgements: contexts, errors, global declarations and the
//! [`Kernel`] that owns them. The bidirectional checker lives in `check`,
//! definitional equality in [`crate::conversion`].

mod check;
mod judgement;

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::conversion::Fuel;
use crate::frontend::print::print_expr;
use crate::subst::fresh_name;
use crate::syntax::{free_vars, ClockCtx, Expr, Name, Term};

pub use judgement::Judgement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnboundVariable,
    UnboundClock,
    UniverseEscape,
    ClockNotFresh,
    NotLaterTyped,
    DSubstMismatch,
    ConversionFailed,
    FuelExhausted,
    ReflectionRefused,
    /// The term needs an annotation to have its type synthesised.
    CannotInfer,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A failed judgement. `rule` names the inference rule whose premise could
/// not be established.
#[derive(Clone, Debug, PartialEq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub rule: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
    pub message: String,
    /// Name of the declaration being checked, filled in by the driver.
    pub decl: Option<String>,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, rule: &str, message: impl Into<String>) -> Self {
        TypeError {
            kind,
            rule: rule.to_string(),
            expected: None,
            actual: None,
            message: message.into(),
            decl: None,
        }
    }

    pub fn mismatch(kind: TypeErrorKind, rule: &str, expected: &Expr, actual: &Expr) -> Self {
        TypeError {
            kind,
            rule: rule.to_string(),
            expected: Some(print_expr(expected)),
            actual: Some(print_expr(actual)),
            message: String::new(),
            decl: None,
        }
    }

    pub fn in_decl(mut self, decl: &str) -> Self {
        if self.decl.is_none() {
            self.decl = Some(decl.to_string());
        }
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.kind)?;
        if let (Some(e), Some(a)) = (&self.expected, &self.actual) {
            write!(f, ": expected {e} got {a}")?;
        }
        if !self.message.is_empty() {
            write!(f, ": {}", self.message)?;
        }
        Ok(())
    }
}

pub type TcResult<T> = Result<T, TypeError>;

/// Typing context `Delta; Gamma`, plus the rewrites introduced by
/// `reflect`.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub clocks: ClockCtx,
    pub vars: Vec<(Name, Term)>,
    pub rewrites: Vec<(Term, Term)>,
}

impl Ctx {
    pub fn new(clocks: ClockCtx) -> Self {
        Ctx {
            clocks,
            ..Ctx::default()
        }
    }

    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.vars
            .iter()
            .rev()
            .find(|(y, _)| &**y == x)
            .map(|(_, t)| t)
    }

    pub fn push(&self, x: Name, ty: Term) -> Ctx {
        let mut c = self.clone();
        c.vars.push((x, ty));
        c
    }

    pub fn with_clock(&self, k: Name) -> Ctx {
        let mut c = self.clone();
        c.clocks.insert(k);
        c
    }

    pub fn with_rewrite(&self, lhs: Term, rhs: Term) -> Ctx {
        let mut c = self.clone();
        c.rewrites.push((lhs, rhs));
        c
    }

    pub fn binds(&self, x: &str) -> bool {
        self.vars.iter().any(|(y, _)| &**y == x)
    }

    /// A variable name not bound in the context.
    pub fn fresh(&self, base: &str) -> Name {
        let base = if base == "_" { "x" } else { base };
        fresh_name(base, |c| self.binds(c))
    }

    /// True if some type in `Gamma` mentions clock `k` free.
    pub fn mentions_clock(&self, k: &str) -> bool {
        self.vars
            .iter()
            .any(|(_, t)| free_vars(t).clocks.iter().any(|c| &**c == k))
    }
}

/// A top-level declaration. `clocks` are the clock variables in scope when
/// it was checked.
#[derive(Clone, Debug)]
pub struct Global {
    pub ty: Term,
    pub body: Option<Term>,
    pub clocks: ClockCtx,
}

#[derive(Clone, Debug, Default)]
pub struct Globals {
    map: HashMap<Name, Global>,
    clock_names: BTreeSet<Name>,
}

impl Globals {
    pub fn get(&self, x: &str) -> Option<&Global> {
        self.map.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.map.contains_key(x)
    }

    pub fn insert(&mut self, x: Name, g: Global) {
        self.clock_names.extend(g.clocks.iter().cloned());
        self.clock_names.extend(free_vars(&g.ty).clocks);
        if let Some(b) = &g.body {
            self.clock_names.extend(free_vars(b).clocks);
        }
        self.map.insert(x, g);
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }
}

/// Checker options.
#[derive(Clone, Debug)]
pub struct Options {
    pub fuel: u32,
    pub trace: bool,
    pub allow_reflection: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fuel: crate::conversion::DEFAULT_FUEL,
            trace: false,
            allow_reflection: false,
        }
    }
}

/// Owns the global environment and the per-query fuel. Not shareable across
/// threads; independent files get independent kernels.
#[derive(Debug)]
pub struct Kernel {
    pub globals: Globals,
    pub(crate) fuel: Fuel,
    pub(crate) depth: Cell<u32>,
    trace: Option<RefCell<Vec<String>>>,
    path: RefCell<Vec<String>>,
    pub(crate) allow_reflection: Cell<bool>,
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::new(Options::default())
    }
}

impl Kernel {
    pub fn new(opts: Options) -> Self {
        Kernel {
            globals: Globals::default(),
            fuel: Fuel::new(opts.fuel),
            depth: Cell::new(0),
            trace: opts.trace.then(|| RefCell::new(Vec::new())),
            path: RefCell::new(Vec::new()),
            allow_reflection: Cell::new(opts.allow_reflection),
        }
    }

    pub fn fuel(&self) -> &Fuel {
        &self.fuel
    }

    pub fn set_allow_reflection(&self, on: bool) {
        self.allow_reflection.set(on);
    }

    pub(crate) fn trace(&self, rule: &str) {
        if let Some(t) = &self.trace {
            let path = self.path.borrow();
            let at = if path.is_empty() {
                "-".to_string()
            } else {
                path.join("/")
            };
            t.borrow_mut().push(format!("RULE {rule} AT {at}"));
        }
    }

    /// Drains the recorded trace lines.
    pub fn take_trace(&self) -> Vec<String> {
        match &self.trace {
            Some(t) => std::mem::take(&mut *t.borrow_mut()),
            None => Vec::new(),
        }
    }

    pub(crate) fn with_path<T>(&self, seg: &str, f: impl FnOnce() -> T) -> T {
        self.path.borrow_mut().push(seg.to_string());
        let r = f();
        self.path.borrow_mut().pop();
        r
    }

    /// A clock name fresh for the context and for every clock mentioned by a
    /// global declaration.
    pub fn fresh_clock(&self, ctx: &Ctx, base: &str) -> Name {
        let taken =
            |c: &str| c == "k0" || ctx.clocks.contains(c) || self.globals.clock_names.contains(c);
        fresh_name(base, taken)
    }

    /// Adds a declaration that is already known to be well typed.
    pub fn add_global(&mut self, x: &str, g: Global) {
        self.globals.insert(Name::from(x), g);
    }
}
