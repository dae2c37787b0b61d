//! Kernel for guarded dependent type theory with clocks, delayed
//! substitutions and clock quantification.
//!
//! The crate is organised around four layers: [`syntax`] and [`subst`] for
//! the raw terms, [`conversion`] for definitional equality, [`typecheck`]
//! for the typing judgements and [`model`] for the finite-depth evaluator.
//! [`frontend`] parses and prints the concrete syntax.

#![allow(clippy::result_large_err)]

pub mod conversion;
pub mod frontend;
pub mod model;
pub mod subst;
pub mod syntax;
pub mod typecheck;

pub use conversion::{Fuel, DEFAULT_FUEL};
pub use syntax::{alpha_eq, free_vars, Clock, ClockCtx, DSubst, Expr, Name, Term};
pub use typecheck::{Ctx, TypeError, TypeErrorKind};
