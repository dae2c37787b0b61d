//! Python bindings: terms, checking sessions and the finite-depth model.

use std::path::Path;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError, PyValueError};
use pyo3::prelude::*;

use gdtt_core::frontend::driver::{Failure, Session as CoreSession};
use gdtt_core::frontend::{parse_expr, parse_source, print_expr};
use gdtt_core::model::{eval_at_depth, prefix_agree};
use gdtt_core::subst::{clock_subst, subst};
use gdtt_core::syntax::Clock;
use gdtt_core::typecheck::Options;
use gdtt_core::{alpha_eq, free_vars, ClockCtx, Ctx, Expr, Term as CoreTerm, DEFAULT_FUEL};

create_exception!(
    gdtt,
    CheckError,
    PyException,
    "A file or query was rejected."
);
create_exception!(gdtt, ParseError, PyException, "Malformed concrete syntax.");

fn check_err(f: Failure) -> PyErr {
    let code = f.exit_code();
    let rule = f.type_error().map(|e| e.rule.clone());
    CheckError::new_err((f.to_string(), code, rule))
}

fn clock_arg(c: Option<&str>) -> Clock {
    match c {
        None | Some("k0") => Clock::Const,
        Some(k) => Clock::var(k),
    }
}

/// An immutable term or type.
#[pyclass(frozen, skip_from_py_object, module = "gdtt")]
#[derive(Clone)]
pub struct Term {
    inner: CoreTerm,
}

#[pymethods]
impl Term {
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Term> {
        parse_expr(src)
            .map(|inner| Term { inner })
            .map_err(|e| ParseError::new_err(format!("{}: {}", e.pos, e.message)))
    }

    fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq(&self.inner, &other.inner)
    }

    /// `(term variables, clock variables)`, both sorted.
    fn free_vars(&self) -> (Vec<String>, Vec<String>) {
        let fv = free_vars(&self.inner);
        let mut ts: Vec<String> = fv.terms.iter().map(|x| x.to_string()).collect();
        let mut ks: Vec<String> = fv.clocks.iter().map(|x| x.to_string()).collect();
        ts.sort();
        ks.sort();
        (ts, ks)
    }

    fn subst(&self, x: &str, t: &Term) -> Term {
        Term {
            inner: subst(&self.inner, &x.into(), &t.inner),
        }
    }

    /// Replaces the clock `k`; `None` or `"k0"` means the constant clock.
    #[pyo3(signature = (k, to=None))]
    fn clock_subst(&self, k: &str, to: Option<&str>) -> Term {
        Term {
            inner: clock_subst(&self.inner, &k.into(), &clock_arg(to)),
        }
    }

    fn __eq__(&self, other: &Term) -> bool {
        self.alpha_eq(other)
    }

    fn __str__(&self) -> String {
        print_expr(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", print_expr(&self.inner))
    }
}

/// A global environment built up by checking files.
#[pyclass(unsendable, module = "gdtt")]
pub struct Session {
    inner: CoreSession,
}

impl Session {
    fn ctx(&self, clocks: Vec<String>) -> Ctx {
        Ctx::new(ClockCtx::from_names(clocks.into_iter().map(Into::into)))
    }

    fn elaborate(&self, ctx: &Ctx, t: &Term) -> CoreTerm {
        self.inner.kernel.resolve_globals(ctx, &t.inner)
    }
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (fuel=DEFAULT_FUEL, trace=false))]
    fn new(fuel: u32, trace: bool) -> Self {
        Session {
            inner: CoreSession::new(Options {
                fuel,
                trace,
                ..Options::default()
            }),
        }
    }

    fn check_file(&mut self, path: &str) -> PyResult<()> {
        self.inner.check_file(Path::new(path)).map_err(check_err)
    }

    /// Checks source text; includes resolve against `dir`.
    #[pyo3(signature = (src, eq=false, name="<string>", dir=None))]
    fn check_source(&mut self, src: &str, eq: bool, name: &str, dir: Option<&str>) -> PyResult<()> {
        self.inner
            .check_str(src, name, dir.map(Path::new), eq)
            .map_err(check_err)
    }

    #[getter]
    fn decls(&self) -> Vec<String> {
        self.inner.decls.iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn equality_count(&self) -> usize {
        self.inner.equalities.len()
    }

    fn type_of(&self, name: &str) -> PyResult<Term> {
        let g = self
            .inner
            .kernel
            .globals
            .get(name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        Ok(Term {
            inner: g.ty.clone(),
        })
    }

    /// Elaborates `t` and returns it with its inferred type.
    #[pyo3(signature = (t, clocks=vec![]))]
    fn infer(&self, t: &Term, clocks: Vec<String>) -> PyResult<(Term, Term)> {
        let ctx = self.ctx(clocks);
        let k = &self.inner.kernel;
        k.fuel().reset();
        let (e, ty) = k
            .infer(&ctx, &self.elaborate(&ctx, t))
            .map_err(|e| CheckError::new_err((format!("{e:?}"), 1, Some(e.rule))))?;
        Ok((Term { inner: e }, Term { inner: ty }))
    }

    /// Definitional equality of two terms at a type.
    #[pyo3(signature = (t, u, ty, clocks=vec![]))]
    fn conv(&self, t: &Term, u: &Term, ty: &Term, clocks: Vec<String>) -> PyResult<bool> {
        let ctx = self.ctx(clocks);
        let k = &self.inner.kernel;
        let err =
            |e: gdtt_core::TypeError| CheckError::new_err((format!("{e:?}"), 1, Some(e.rule)));
        k.fuel().reset();
        let ty = k.check_ty(&ctx, &self.elaborate(&ctx, ty)).map_err(err)?;
        let t = k.check(&ctx, &self.elaborate(&ctx, t), &ty).map_err(err)?;
        let u = k.check(&ctx, &self.elaborate(&ctx, u), &ty).map_err(err)?;
        k.conv_term(&ctx, &t, &u, &ty).map_err(err)
    }

    /// The model's observation of a definition at the given depth.
    fn eval(&self, name: &str, depth: u32) -> PyResult<String> {
        let globals = &self.inner.kernel.globals;
        let g = globals
            .get(name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        eval_at_depth(globals, &Expr::Const(name.into()).rc(), &g.ty, depth)
            .map(|o| o.to_string())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// True iff two definitions of the same type agree at depths 1..=depth.
    fn prefix_agree(&self, a: &str, b: &str, depth: u32) -> PyResult<bool> {
        let globals = &self.inner.kernel.globals;
        let g = globals
            .get(a)
            .ok_or_else(|| PyKeyError::new_err(a.to_string()))?;
        let (ta, tb) = (Expr::Const(a.into()).rc(), Expr::Const(b.into()).rc());
        prefix_agree(globals, &ta, &tb, &g.ty, depth)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn trace(&self) -> Vec<String> {
        self.inner.kernel.take_trace()
    }
}

/// Normalised concrete syntax of a source file.
#[pyfunction]
#[pyo3(signature = (src, eq=false))]
fn format_source(src: &str, eq: bool) -> PyResult<String> {
    parse_source(src, eq)
        .map(|sf| sf.print())
        .map_err(|e| ParseError::new_err(format!("{}: {}", e.pos, e.message)))
}

#[pymodule]
fn gdtt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Term>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(format_source, m)?)?;
    m.add("CheckError", m.py().get_type::<CheckError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("DEFAULT_FUEL", DEFAULT_FUEL)?;
    Ok(())
}
