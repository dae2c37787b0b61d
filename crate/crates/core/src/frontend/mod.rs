//! Concrete syntax: lexing, parsing, printing, and checking of declaration
//! files.

pub mod driver;
mod lexer;
mod parser;
pub mod print;

use std::fmt;

use thiserror::Error;

use crate::syntax::{Name, Term};

pub use parser::{parse_expr, parse_source};
pub use print::print_expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ItemKind {
    /// `#clocks k j`: the clock context for the declarations that follow.
    Clocks(Vec<Name>),
    /// `def x : A := t`, or `axiom x y : A` when `body` is `None`.
    Def {
        names: Vec<Name>,
        ty: Term,
        body: Option<Term>,
        needs_reflection: bool,
    },
    /// `t == u : A`, only in equality files.
    Equality {
        lhs: Term,
        rhs: Term,
        ty: Term,
        needs_reflection: bool,
    },
    /// `#include "path"`, relative to the including file.
    Include(String),
}

#[derive(Clone, Debug)]
pub struct Item {
    pub kind: ItemKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub items: Vec<Item>,
}

impl SourceFile {
    /// Prints the file back in concrete syntax.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match &item.kind {
                ItemKind::Clocks(ks) => {
                    let ks: Vec<&str> = ks.iter().map(|k| &**k).collect();
                    out.push_str(&format!("#clocks {}\n", ks.join(" ")));
                }
                ItemKind::Include(p) => out.push_str(&format!("#include \"{p}\"\n")),
                ItemKind::Def {
                    names,
                    ty,
                    body,
                    needs_reflection,
                } => {
                    if *needs_reflection {
                        out.push_str("-- needs-reflection\n");
                    }
                    let names: Vec<&str> = names.iter().map(|n| &**n).collect();
                    match body {
                        Some(b) => out.push_str(&format!(
                            "def {} : {}\n  := {}\n",
                            names[0],
                            print_expr(ty),
                            print_expr(b)
                        )),
                        None => out.push_str(&format!(
                            "axiom {} : {}\n",
                            names.join(" "),
                            print_expr(ty)
                        )),
                    }
                }
                ItemKind::Equality {
                    lhs,
                    rhs,
                    ty,
                    needs_reflection,
                } => {
                    if *needs_reflection {
                        out.push_str("-- needs-reflection\n");
                    }
                    out.push_str(&format!(
                        "{}\n  == {}\n  : {}\n",
                        print_expr(lhs),
                        print_expr(rhs),
                        print_expr(ty)
                    ));
                }
            }
        }
        out
    }
}
