"""Smoke test for the Python extension: build with
`pip install --no-build-isolation ./crates/python`, then run this file."""

import json
import pathlib

import fxcalc_py

PROGRAMS = pathlib.Path(__file__).resolve().parent.parent / "programs"


def source(name):
    return (PROGRAMS / name).read_text()


def main():
    assert fxcalc_py.run(source("state.mam"), "mam") == "<tru, fls>"
    assert fxcalc_py.run(source("state.eff"), "eff") == "tru"
    assert fxcalc_py.check(source("state.mon"), "mon") == "F (bit * bit) ! []"

    translated = fxcalc_py.translate(source("state.del"), "del", "eff")
    assert fxcalc_py.run("main = " + translated, "eff") == "tru"

    report = json.loads(fxcalc_py.simulate(source("tick.eff"), "eff", "mon", "free-monad"))
    assert report["result"] == "return tru", report["result"]

    try:
        fxcalc_py.check(source("reader_counterexample.eff"), "eff")
    except ValueError as e:
        assert "mismatch" in str(e)
    else:
        raise AssertionError("the translated reader program should not typecheck")
    print("ok")


if __name__ == "__main__":
    main()
