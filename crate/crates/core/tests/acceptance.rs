//! One line per acceptance criterion. Exits non-zero if any fails.

mod common;

use common::*;

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 positive corpus", criterion_positive),
        ("2 negative mutations", criterion_negative),
        ("3 equality suite", criterion_equalities),
        ("4 model agreement", criterion_model),
        ("5 metatheory", criterion_metatheory),
        ("6 parse/print round trip", criterion_roundtrip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
