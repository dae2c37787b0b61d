use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use gdtt_core::frontend::driver::{check_path, Failure, Session};
use gdtt_core::frontend::parse_source;
use gdtt_core::model::eval_at_depth;
use gdtt_core::typecheck::Options;
use gdtt_core::DEFAULT_FUEL;

#[derive(Parser)]
#[command(
    name = "gdtt",
    version,
    about = "Checker for guarded dependent type theory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check declaration files (`.gdtt`) and equality files (`.eq`).
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Fuel for each definitional-equality query.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u32,
        /// Print every equality rule used.
        #[arg(long)]
        trace: bool,
        /// Number of files checked in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate a definition at a finite depth.
    Eval {
        file: PathBuf,
        #[arg(long = "def")]
        name: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u32,
    },
    /// Print a file in normalised concrete syntax.
    Fmt { file: PathBuf },
}

struct Outcome {
    code: u8,
    out: String,
    err: String,
}

fn check_one(path: &Path, fuel: u32, trace: bool) -> Outcome {
    let opts = Options {
        fuel,
        trace,
        ..Options::default()
    };
    let (session, failure): (Session, Option<Failure>) = match check_path(path, opts) {
        Ok(s) => (s, None),
        Err((s, f)) => (s, Some(f)),
    };
    let mut out = String::new();
    for line in session.kernel.take_trace() {
        out.push_str(&line);
        out.push('\n');
    }
    match failure {
        None => {
            out.push_str(&format!(
                "OK {} ({} declarations, {} equalities)\n",
                path.display(),
                session.decls.len(),
                session.equalities.len()
            ));
            Outcome {
                code: 0,
                out,
                err: String::new(),
            }
        }
        Some(f) => Outcome {
            code: f.exit_code() as u8,
            out,
            err: format!("{f}\n"),
        },
    }
}

fn run(cli: Cli) -> u8 {
    match cli.cmd {
        Cmd::Check {
            files,
            fuel,
            trace,
            jobs,
        } => {
            let outcomes: Vec<Outcome> = if jobs > 1 {
                let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("ERROR cannot start worker threads: {e}");
                        return 2;
                    }
                };
                pool.install(|| {
                    files
                        .par_iter()
                        .map(|f| check_one(f, fuel, trace))
                        .collect()
                })
            } else {
                files.iter().map(|f| check_one(f, fuel, trace)).collect()
            };
            let mut code = 0;
            for o in outcomes {
                print!("{}", o.out);
                eprint!("{}", o.err);
                code = code.max(o.code);
            }
            code
        }
        Cmd::Eval {
            file,
            name,
            depth,
            fuel,
        } => {
            let opts = Options {
                fuel,
                ..Options::default()
            };
            let session = match check_path(&file, opts) {
                Ok(s) => s,
                Err((_, f)) => {
                    eprintln!("{f}");
                    return f.exit_code() as u8;
                }
            };
            let Some(g) = session.kernel.globals.get(&name) else {
                eprintln!(
                    "ERROR {} [Eval] no definition named `{name}`",
                    file.display()
                );
                return 1;
            };
            let t = gdtt_core::Expr::Const(name.as_str().into()).rc();
            match eval_at_depth(&session.kernel.globals, &t, &g.ty, depth) {
                Ok(o) => {
                    println!("{o}");
                    0
                }
                Err(e) => {
                    eprintln!("ERROR {} [Eval] {e}", file.display());
                    1
                }
            }
        }
        Cmd::Fmt { file } => {
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("ERROR {} [Io] {e}", file.display());
                    return 2;
                }
            };
            let eq = file.extension().is_some_and(|e| e == "eq");
            match parse_source(&src, eq) {
                Ok(sf) => {
                    print!("{}", sf.print());
                    0
                }
                Err(e) => {
                    eprintln!("ERROR {}:{} [Parse] {}", file.display(), e.pos, e.message);
                    2
                }
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
