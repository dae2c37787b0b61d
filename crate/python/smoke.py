"""Smoke test for the gdtt extension module.

Either install it (`pip install --no-build-isolation -e crates/py`) or build
it with `cargo build -p gdtt-py --features extension-module`; in the second
case the library is loaded from target/debug, or from GDTT_LIB if set.
"""

import importlib.util
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def load():
    if "GDTT_LIB" not in os.environ:
        try:
            import gdtt

            return gdtt
        except ImportError:
            pass
    lib = Path(os.environ.get("GDTT_LIB", ROOT / "target" / "debug" / "libgdtt.so"))
    found = importlib.util.spec_from_file_location("gdtt", lib)
    mod = importlib.util.module_from_spec(found)
    found.loader.exec_module(mod)
    return mod


def main():
    g = load()

    t = g.Term.parse(r"\x. f x")
    u = g.Term.parse(r"\y. f y")
    assert t.alpha_eq(u) and t == u
    assert t.free_vars() == (["f"], [])
    assert str(t.subst("f", g.Term.parse("h"))) == str(g.Term.parse(r"\x. h x"))
    assert g.Term.parse("next[k] 0").clock_subst("k").free_vars() == ([], [])

    s = g.Session()
    s.check_file(str(CORPUS / "positive" / "streams.gdtt"))
    assert "ones" in s.decls and "zipWith" in s.decls
    assert s.eval("ones", 3) == "[1,1,1]"
    assert s.eval("sums", 3) == "[2,2,2]"
    assert not s.prefix_agree("ones", "twos", 3)

    one = g.Term.parse("succ 0")
    _, ty = s.infer(one)
    assert str(ty) == "Nat"
    assert s.conv(g.Term.parse("hd cNat ones"), one, g.Term.parse("Nat"), ["k"])

    try:
        g.Session().check_file(str(CORPUS / "negative" / "fix_nat.gdtt"))
    except g.CheckError as e:
        _, code, rule = e.args
        assert code == 1 and rule == "Ty-Fix", e.args
    else:
        raise AssertionError("fix at Nat was accepted")

    src = (CORPUS / "positive" / "clocks.gdtt").read_text()
    once = g.format_source(src)
    assert g.format_source(once) == once

    print("python smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
