"""Smoke test for the onticlab_py extension.

Build first:
    PYO3_BUILD_EXTENSION_MODULE=1 cargo build -p onticlab-py
then run:
    python3 python/smoke_test.py
"""

import importlib
import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libonticlab_py.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "onticlab_py.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("onticlab_py")
    sys.exit("libonticlab_py.so not found; build with cargo build -p onticlab-py")


def main():
    ol = load()

    probs = dict(ol.mzi_probabilities(1, "pi"))
    assert abs(dict(probs["psi"])["B2"] - 1.0) < 1e-12

    c = ol.Construction(0.5, 3)
    assert c.M == 2 and c.N == 3
    assert c.audit()["unitarity"] < 1e-9
    assert len(c.certificate()["per_n"]) == 4
    composite, zero = c.restricted_deviations()
    assert composite < 1e-9 and zero < 1e-9
    try:
        ol.Construction(0.7, 3)
    except ValueError as e:
        assert "4" in str(e)
    else:
        raise AssertionError("infeasible construction accepted")

    s = ol.Scenario.from_builder("mzi-fig1")
    phi, psi, _ = s.pair
    trace = ol.derive_trace(s, phi, psi)
    verdict = ol.verify_trace(s, json.dumps(trace))
    assert verdict["ok"] and verdict["first"] == phi, verdict
    trace["steps"][-1]["refs"] = []
    assert not ol.verify_trace(s, json.dumps(trace))["ok"]

    report, witness = ol.feasibility_search(s, phi, psi, 4)
    assert report["verdict"] == "unsat" and witness is None
    report, witness = ol.feasibility_search(s, phi, psi, 4, axioms=["completeness", "coverage"])
    assert report["verdict"] == "sat"
    assert witness.classify()["kind"] == "PsiEpistemic"
    assert witness.completeness(s) == []

    model, scenario = ol.Model.toybit()
    assert model.indifference(scenario, "swap", "zero", "set-preserving")["verdict"] == "Ok"
    assert model.indifference(scenario, "swap", "zero")["verdict"] == "Violation"
    back = ol.Model.from_json(model.to_json())
    assert back.states == model.states

    rows = ol.scan([2, 3], [0.4, 0.6])
    assert [r["feasible"] for r in rows] == [True, False, True, True]

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
