"""Smoke test for the entgame Python extension.

Build and install the extension first, for example:

    cd crates/py && maturin develop --release

then run ``python python/smoke_test.py`` from the repository root.
"""

import json
import math
import pathlib
import sys

import entgame

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load(name):
    doc = json.loads((FIXTURES / f"{name}.json").read_text())
    gens = []
    for g in doc["generators"]:
        rows = [[0.0 if v is None else float(v) for v in row] for row in g]
        for x, row in enumerate(rows):
            row[x] = -sum(v for y, v in enumerate(row) if y != x)
        gens.append(rows)
    return doc["pi"], gens


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    failures = []

    def check(name, ok):
        print(f"{name}: {'ok' if ok else 'FAIL'}")
        if not ok:
            failures.append(name)

    pi, gens = load("two_state")
    d = entgame.divergence("kl", gens[0], gens[1], pi)
    check("kl divergence", close(d, 0.287682, 1e-6))

    pi, gens = load("bisection_pair")
    dual = entgame.pi_dual(gens[0], pi)
    check("dual involution", all(
        close(a, b, 1e-12)
        for ra, rb in zip(entgame.pi_dual(dual, pi), gens[0])
        for a, b in zip(ra, rb)
    ))
    p2 = entgame.reversiblize(gens[0], pi, 2.0)
    check("reversiblization is reversible", entgame.is_reversible(p2, pi))
    proj = entgame.f_projection("alpha:2", gens[0], pi)
    check("projection is reversible", entgame.is_reversible(proj["centroid"], pi, 1e-10))

    report = entgame.solve_game("alpha:2", gens, pi, iters=1000)
    check("solve on a dual pair", abs(report["gap"]) <= 1e-12
          and all(close(w, 0.5, 1e-15) for w in report["weights"]))

    c = entgame.weighted_centroid("alpha:2", gens, pi, [0.5, 0.5])
    g = entgame.weighted_centroid("alpha:2", gens, pi, [0.5, 0.5], method="generic")
    check("closed and generic centroids agree", all(
        close(a, b, 1e-9)
        for ra, rb in zip(c["centroid"], g["centroid"])
        for a, b in zip(ra, rb)
    ))

    tv = entgame.weighted_centroid("tv", gens, pi)
    check("tv reports a flat interval", tv["flat_interval"] is not None)

    pi, gens = load("no_pure")
    outcome = entgame.pure_nash_check("alpha:2", gens, pi)
    check("no pure saddle", outcome["exists"] is False)
    oracle = entgame.oracle_dual_max("alpha:2", gens, pi, resolution=1e-2)
    check("oracle dual max", close(oracle["value"], outcome["minimax"], 1e-3))

    pi, gens = load("unique_pure")
    outcome = entgame.pure_nash_check("alpha:2", gens, pi)
    check("unique pure saddle", outcome["exists"] and outcome["saddle"][1] == 0)
    v, per_index = entgame.oracle_pure_values("alpha:2", gens, pi)
    check("pure values", close(v, 0.25, 1e-12) and close(per_index[1], 0.0, 1e-12))

    check("simplex projection", entgame.simplex_project([2.0, 0.0, -1.0]) == [1.0, 0.0, 0.0])
    check("infinite divergence", math.isinf(
        entgame.divergence("kl", [[-1.0, 1.0], [1.0, -1.0]], [[0.0, 0.0], [1.0, -1.0]], [0.5, 0.5])
    ))

    try:
        entgame.divergence("kl", [[-1.0, 2.0], [1.0, -1.0]], gens[0], pi)
        check("bad row sum raises", False)
    except entgame.EntgameError:
        check("bad row sum raises", True)
    try:
        entgame.oracle_dual_max("kl", gens * 2, pi)
        check("too many members raises", False)
    except ValueError:
        check("too many members raises", True)

    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
