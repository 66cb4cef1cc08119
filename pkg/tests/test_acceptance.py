"""Acceptance criteria 1-14, one test each, at the stated tolerances.

Every test prints a single PASS/FAIL line (also collected in the terminal summary).
"""
import json
import math
import time

import numpy as np

from squashed_s7 import classification as cl
from squashed_s7 import deformation as de
from squashed_s7 import twistor as tw
from squashed_s7.cli import Config, render_json, run
from squashed_s7.squashed import (
    VariationParams, random_sphere_points, squashed_structure, star_deviation,
    verify_nearly_parallel,
)
from squashed_s7.symmetry import eta_matrix, get_action

SEED = 42


def test_criterion_01_nearly_parallel(record_criterion):
    t0 = time.perf_counter()
    r = verify_nearly_parallel(n_points=100, n_tuples=20, seed=SEED)
    dt = time.perf_counter() - t0
    ok = r.nearly_parallel < 1e-9 and dt < 10
    assert record_criterion(1, ok, f"d phi - 4 *phi residual {r.nearly_parallel:.2e} (< 1e-9), {dt:.2f} s (< 10 s)")


def test_criterion_02_parametric_identity(record_criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for s, t in rng.uniform(0.3, 2.0, size=(5, 2)):
        r = verify_nearly_parallel(VariationParams(float(s), float(t)), n_points=10, n_tuples=5, seed=SEED)
        worst = max(worst, r.parametric)
    assert record_criterion(2, worst < 1e-9, f"parametric identity residual {worst:.2e} at 5 (s,t) pairs (< 1e-9)")


def test_criterion_03_hodge_duality(record_criterion):
    st = squashed_structure()
    P = random_sphere_points(np.random.default_rng(SEED), 100)
    worst = max(star_deviation(st, p) for p in P)
    assert record_criterion(3, worst < 1e-9, f"stored *phi vs pointwise star {worst:.2e} (< 1e-9)")


def test_criterion_04_plane_classification(record_criterion, plane_enumeration):
    v1 = cl.plane_global_associativity(cl.V1_PLANE, 200, seed=SEED).worst_residual
    v2 = cl.plane_global_associativity(cl.V2_PLANE, 200, seed=SEED).worst_residual
    wit = cl.witness_contraction()
    en = plane_enumeration
    dist = [min((cl.match_reference(t)[1] for t in en.matched.get(k) or []), default=math.inf)
            for k in cl.REFERENCE_PLANE_SOLUTIONS]
    exact = not en.unmatched and max(dist) < 1e-6
    ok = v1 < 1e-9 and v2 < 1e-9 and wit > 1e-3 and exact
    detail = (f"V1 {v1:.2e}, V2 {v2:.2e} (< 1e-9); sol 1 witness {wit:.2e} (> 1e-3); "
              f"enumeration match {max(dist):.2e} (< 1e-6), unmatched {len(en.unmatched)}")
    assert record_criterion(4, ok, detail)


def test_criterion_05_t3_orbit(record_criterion, t3_slice):
    expected = np.array([[0.5, 0.5, 0.5, 0.0, 0.5], [0.5, 0.5, 0.5, 0.0, -0.5]])
    S = t3_slice.solutions
    if len(S):
        D = np.linalg.norm(S[:, None, :] - expected[None, :, :], axis=2)
        haus = float(max(D.min(axis=1).max(), D.min(axis=0).max()))
    else:
        haus = math.inf
    assoc = cl.orbit_is_associative("T3", cl.A1_BASE).residual
    ok = haus < 1e-6 and assoc < 1e-9
    assert record_criterion(5, ok, f"zero set distance {haus:.2e} (< 1e-6), orbit associativity {assoc:.2e} (< 1e-9)")


def test_criterion_06_calibration_values(record_criterion):
    devs = [
        abs(cl.orbit_calibration("SU2_irr", cl.A2_BASE)[0] + 243 / 25),
        abs(cl.orbit_calibration("SU2_irr", cl.A3_BASE)[0] - 513 / 125),
        abs(cl.orbit_calibration("T3", cl.A1_BASE)[0] + 81 / 250),
    ]
    act = get_action("SU2_irr")
    P = random_sphere_points(np.random.default_rng(SEED), 100)
    eta = max(abs(float(np.sum(eta_matrix(act, p) ** 2)) - 9) for p in P)
    ok = max(devs) < 1e-9 and eta < 1e-9
    assert record_criterion(6, ok, f"calibration values {max(devs):.2e}, eta square sum {eta:.2e} (< 1e-9)")


def test_criterion_07_induced_metrics(record_criterion):
    got = cl.orbit_metrics()
    expected = {
        "A2": 27 / 25 * np.diag([5, 5, 3]),
        "A3": 9 / 25 * np.diag([19, 19, 1]),
        "A1": np.diag([3 / 5, 27 / 50, 27 / 50]),
    }
    dev = {k: float(np.abs(got[k] - expected[k]).max()) for k in expected}
    ok = max(dev.values()) < 1e-10
    detail = ", ".join(f"{k} {v:.2e}" for k, v in dev.items()) + " (< 1e-10)"
    assert record_criterion(7, ok, detail)


def test_criterion_08_connection_matrices(record_criterion):
    dev = max(de.connection_deviation(c) for c in de.CASE_TAGS)
    assert record_criterion(8, dev < 1e-9, f"connection matrices max deviation {dev:.2e} (< 1e-9)")


T3_MODES = sorted(tuple(s * x for x in g)
                  for g in [(2, 0, 0), (0, 2, 0), (0, 0, 2), (0, 1, 1), (0, 1, -1)] for s in (1, -1))


def test_criterion_09_deformation_dimensions(record_criterion):
    t0 = time.perf_counter()
    expected = {"L1": 4, "L2": 8, "A2": 16, "A3": 16}
    bad = []
    for case, dim in expected.items():
        for n in (8, 10, 12):
            got = (de.kernel_dimension(case, n), de.brute_force_kernel(case, n))
            if got != (dim, dim):
                bad.append(f"{case}@{n}={got}")
    tk = de.t3_kernel()
    if tk.dimension != 10 or list(tk.modes) != T3_MODES:
        bad.append(f"A1={tk.dimension}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    assert record_criterion(9, ok, f"kernel dimensions {'match' if not bad else bad}, {dt:.2f} s (< 120 s)")


def test_criterion_10_trivial_ranks(record_criterion):
    expected = {"L1": 4, "L2": 8, "A1": 10, "A2": 9, "A3": 10}
    got = {c: de.trivial_deformation_rank(c) for c in expected}
    ok = all(got[c].rank == expected[c] and got[c].gap >= 1e3 for c in expected)
    detail = ", ".join(f"{c} {got[c].rank}/{expected[c]}" for c in expected)
    detail += f"; min gap {min(r.gap for r in got.values()):.1e} (>= 1e3)"
    assert record_criterion(10, ok, detail)


def test_criterion_11_twistor(record_criterion):
    haus = tw.hat_containment("A3", 200, seed=SEED)
    checks = {c: tw.holomorphic_curve_check(c, 100, seed=SEED) for c in ("A1", "A2", "A3")}
    holo = all(r.passed for r in checks.values())
    horiz = all(r.horizontal == (c == "A2") for c, r in checks.items())
    ok = haus < 1e-6 and holo and horiz
    detail = f"hat(A3) to A2 distance {haus:.2e} (< 1e-6); holomorphic {holo}; horizontal for A2 only {horiz}"
    assert record_criterion(11, ok, detail)


def test_criterion_12_veronese(record_criterion):
    r = tw.veronese_stabilizer_check(100, seed=SEED)
    ok = r.multiplicativity < 1e-8 and r.intersection_dimension == 6
    detail = f"multiplicativity {r.multiplicativity:.2e} (< 1e-8), intersection dimension {r.intersection_dimension}"
    assert record_criterion(12, ok, detail)


def test_criterion_13_su2_irr_case1(record_criterion):
    diff = max(abs(cl.su2_irr_case1(m) - cl.su2_irr_case1_closed_form(m)) for m in (1.8, 2.0, 3.0))
    low = min(cl.su2_irr_case1(float(m)) for m in np.linspace(math.sqrt(3) + 1e-3, 20.0, 400))
    ok = diff < 1e-8 and low > 0
    assert record_criterion(13, ok, f"closed form deviation {diff:.2e} (< 1e-8), min above sqrt 3 {low:.3e} (> 0)")


def test_criterion_14_determinism(record_criterion):
    cfg = Config(suite="structure", seed=SEED)
    a = render_json(run("structure", cfg), cfg)
    b = render_json(run("structure", cfg), cfg)
    json.loads(a)
    assert record_criterion(14, a == b, f"two seeded runs give {'identical' if a == b else 'different'} JSON ({len(a)} bytes)")
