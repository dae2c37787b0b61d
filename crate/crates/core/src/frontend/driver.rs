//! Checks declaration files against a [`Kernel`].

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::syntax::{ClockCtx, Name, Term};
use crate::typecheck::{Ctx, Global, Kernel, Options, TypeError, TypeErrorKind};

use super::{parse_source, Item, ItemKind, ParseError, Pos};

/// Why checking a file stopped.
#[derive(Clone, Debug)]
pub enum Failure {
    Io {
        file: String,
        message: String,
    },
    Parse {
        file: String,
        error: ParseError,
    },
    Duplicate {
        file: String,
        pos: Pos,
        name: Name,
    },
    Type {
        file: String,
        pos: Pos,
        error: TypeError,
    },
}

impl Failure {
    /// 1 for type errors, 2 for unreadable or malformed input, 3 when fuel
    /// ran out.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Type { error, .. } if error.kind == TypeErrorKind::FuelExhausted => 3,
            Failure::Type { .. } => 1,
            Failure::Io { .. } | Failure::Parse { .. } | Failure::Duplicate { .. } => 2,
        }
    }

    pub fn type_error(&self) -> Option<&TypeError> {
        match self {
            Failure::Type { error, .. } => Some(error),
            _ => None,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io { file, message } => write!(f, "ERROR {file} [Io] {message}"),
            Failure::Parse { file, error } => {
                write!(f, "ERROR {file}:{} [Parse] {}", error.pos, error.message)
            }
            Failure::Duplicate { file, pos, name } => {
                write!(f, "ERROR {file}:{pos} [Decl] `{name}` is already defined")
            }
            Failure::Type { file, pos, error } => {
                write!(f, "ERROR {file}:{pos} [{}]", error.rule)?;
                if let (Some(e), Some(a)) = (&error.expected, &error.actual) {
                    write!(f, " expected {e} got {a}")?;
                }
                write!(f, " ({}", error.kind)?;
                if let Some(d) = &error.decl {
                    write!(f, " in {d}")?;
                }
                if !error.message.is_empty() {
                    write!(f, ": {}", error.message)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An equality that was checked, in elaborated form.
#[derive(Clone, Debug)]
pub struct CheckedEquality {
    pub file: String,
    pub pos: Pos,
    pub lhs: Term,
    pub rhs: Term,
    pub ty: Term,
    pub clocks: ClockCtx,
}

/// A sequence of files checked into one global environment.
pub struct Session {
    pub kernel: Kernel,
    default_reflection: bool,
    clocks: ClockCtx,
    included: HashSet<PathBuf>,
    /// Declarations in checking order.
    pub decls: Vec<Name>,
    pub equalities: Vec<CheckedEquality>,
}

impl Session {
    pub fn new(opts: Options) -> Self {
        Session {
            default_reflection: opts.allow_reflection,
            kernel: Kernel::new(opts),
            clocks: ClockCtx::new(),
            included: HashSet::new(),
            decls: Vec::new(),
            equalities: Vec::new(),
        }
    }

    /// Checks a `.gdtt` or `.eq` file and the files it includes.
    pub fn check_file(&mut self, path: &Path) -> Result<(), Failure> {
        let file = path.display().to_string();
        let canon = path.canonicalize().map_err(|e| Failure::Io {
            file: file.clone(),
            message: e.to_string(),
        })?;
        if !self.included.insert(canon) {
            return Ok(());
        }
        let src = std::fs::read_to_string(path).map_err(|e| Failure::Io {
            file: file.clone(),
            message: e.to_string(),
        })?;
        let eq = path.extension().is_some_and(|e| e == "eq");
        self.check_str(&src, &file, path.parent(), eq)
    }

    /// Checks source text. `dir` resolves includes.
    pub fn check_str(
        &mut self,
        src: &str,
        file: &str,
        dir: Option<&Path>,
        eq: bool,
    ) -> Result<(), Failure> {
        let sf = parse_source(src, eq).map_err(|error| Failure::Parse {
            file: file.to_string(),
            error,
        })?;
        let saved = std::mem::take(&mut self.clocks);
        let r = sf
            .items
            .iter()
            .try_for_each(|item| self.item(&item.kind, item.pos, file, dir));
        self.clocks = saved;
        r
    }

    fn item(
        &mut self,
        kind: &ItemKind,
        pos: Pos,
        file: &str,
        dir: Option<&Path>,
    ) -> Result<(), Failure> {
        let type_err = |error: TypeError| Failure::Type {
            file: file.to_string(),
            pos,
            error,
        };
        match kind {
            ItemKind::Clocks(ks) => {
                self.clocks = ClockCtx::from_names(ks.iter().cloned());
                Ok(())
            }
            ItemKind::Include(p) => {
                let path = dir.map_or_else(|| PathBuf::from(p), |d| d.join(p));
                self.check_file(&path)
            }
            ItemKind::Def {
                names,
                ty,
                body,
                needs_reflection,
            } => {
                if let Some(n) = names.iter().find(|n| self.kernel.globals.contains(n)) {
                    return Err(Failure::Duplicate {
                        file: file.to_string(),
                        pos,
                        name: n.clone(),
                    });
                }
                let ctx = Ctx::new(self.clocks.clone());
                let label = names[0].to_string();
                let k = &self.kernel;
                k.set_allow_reflection(self.default_reflection || *needs_reflection);
                let r = k.with_path(&label, || -> Result<_, TypeError> {
                    let ty2 = k.check_ty(&ctx, &k.resolve_globals(&ctx, ty))?;
                    let body2 = match body {
                        Some(b) => Some(k.check(&ctx, &k.resolve_globals(&ctx, b), &ty2)?),
                        None => None,
                    };
                    Ok((ty2, body2))
                });
                k.set_allow_reflection(self.default_reflection);
                let (ty2, body2) = r.map_err(|e| type_err(e.in_decl(&label)))?;
                for n in names {
                    self.kernel.add_global(
                        n,
                        Global {
                            ty: ty2.clone(),
                            body: body2.clone(),
                            clocks: self.clocks.clone(),
                        },
                    );
                    self.decls.push(n.clone());
                }
                Ok(())
            }
            ItemKind::Equality {
                lhs,
                rhs,
                ty,
                needs_reflection,
            } => {
                let ctx = Ctx::new(self.clocks.clone());
                let label = format!("line {}", pos.line);
                let k = &self.kernel;
                k.set_allow_reflection(self.default_reflection || *needs_reflection);
                let r = k.with_path(&label, || -> Result<_, TypeError> {
                    let ty2 = k.check_ty(&ctx, &k.resolve_globals(&ctx, ty))?;
                    let l = k.check(&ctx, &k.resolve_globals(&ctx, lhs), &ty2)?;
                    let r = k.check(&ctx, &k.resolve_globals(&ctx, rhs), &ty2)?;
                    if !k.conv_term(&ctx, &l, &r, &ty2)? {
                        return Err(TypeError::mismatch(
                            TypeErrorKind::ConversionFailed,
                            "TmEq",
                            &l,
                            &r,
                        ));
                    }
                    Ok((l, r, ty2))
                });
                k.set_allow_reflection(self.default_reflection);
                let (l, r, ty2) = r.map_err(|e| type_err(e.in_decl(&label)))?;
                self.equalities.push(CheckedEquality {
                    file: file.to_string(),
                    pos,
                    lhs: l,
                    rhs: r,
                    ty: ty2,
                    clocks: self.clocks.clone(),
                });
                Ok(())
            }
        }
    }
}

/// An item of a flattened file, with the file it was read from.
#[derive(Clone, Debug)]
pub struct FlatItem {
    pub file: String,
    pub item: Item,
}

/// Reads a file and, in place of each `#include`, the items of the included
/// file. Clock directives are inserted so that every file sees the same clock
/// context as under [`Session::check_file`].
pub fn flatten(path: &Path) -> Result<Vec<FlatItem>, Failure> {
    let mut out = Vec::new();
    flatten_into(path, &mut HashSet::new(), &mut out)?;
    Ok(out)
}

fn flatten_into(
    path: &Path,
    seen: &mut HashSet<PathBuf>,
    out: &mut Vec<FlatItem>,
) -> Result<(), Failure> {
    let file = path.display().to_string();
    let io = |e: std::io::Error| Failure::Io {
        file: file.clone(),
        message: e.to_string(),
    };
    if !seen.insert(path.canonicalize().map_err(io)?) {
        return Ok(());
    }
    let src = std::fs::read_to_string(path).map_err(io)?;
    let eq = path.extension().is_some_and(|e| e == "eq");
    let sf = parse_source(&src, eq).map_err(|error| Failure::Parse {
        file: file.clone(),
        error,
    })?;
    let reset = |ks: &[Name], pos| FlatItem {
        file: file.clone(),
        item: Item {
            kind: ItemKind::Clocks(ks.to_vec()),
            pos,
        },
    };
    let mut clocks: Vec<Name> = Vec::new();
    out.push(reset(&clocks, Pos { line: 1, col: 1 }));
    for item in sf.items {
        match &item.kind {
            ItemKind::Include(p) => {
                let inc = path
                    .parent()
                    .map_or_else(|| PathBuf::from(p), |d| d.join(p));
                flatten_into(&inc, seen, out)?;
                out.push(reset(&clocks, item.pos));
            }
            kind => {
                if let ItemKind::Clocks(ks) = kind {
                    clocks = ks.clone();
                }
                out.push(FlatItem {
                    file: file.clone(),
                    item,
                });
            }
        }
    }
    Ok(())
}

impl Session {
    /// Checks flattened items in order. Includes left in the list resolve
    /// against the working directory.
    pub fn check_flat(&mut self, items: &[FlatItem]) -> Result<(), Failure> {
        items
            .iter()
            .try_for_each(|fi| self.item(&fi.item.kind, fi.item.pos, &fi.file, None))
    }
}

/// Checks one file in a fresh session.
pub fn check_path(path: &Path, opts: Options) -> Result<Session, (Session, Failure)> {
    let mut s = Session::new(opts);
    match s.check_file(path) {
        Ok(()) => Ok(s),
        Err(f) => Err((s, f)),
    }
}
