import math

import numpy as np
import pytest

from squashed_s7.classification import (
    A1_BASE, A2_BASE, A3_BASE, REFERENCE_METRICS, REFERENCE_PLANE_SOLUTIONS, SMALL_ORBIT_ROOTS,
    V1_PLANE, V2_PLANE, PlaneCandidate, condition_equivalence_audit, e3_closed_form,
    geometric_residual, induced_metric, match_reference, orbit_calibration, orbit_is_associative,
    plane_condition_e1, plane_condition_e2, plane_global_associativity, plane_of,
    su2_irr_case1, su2_irr_case1_closed_form, su2_irr_case2_certificates, su2_small_condition,
    t3_congruence_check, t3_zeta, witness_contraction,
)
from squashed_s7.exterior import c2r, evaluate, tangent_basis
from squashed_s7.squashed import squashed_structure

SQ3 = math.sqrt(3)


def test_candidate_validation():
    with pytest.raises(ValueError):
        PlaneCandidate(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        PlaneCandidate(1.0, 0.0, -1.0)


def test_e3_closed_form(rng):
    for _ in range(10):
        th = rng.uniform(0, math.pi / 2)
        cand = PlaneCandidate(math.cos(th), math.sin(th), abs(rng.normal()), *rng.normal(size=4))
        assert np.allclose(cand.vectors()[3], e3_closed_form(cand), atol=1e-12)


def test_e1_condition_examples(rng):
    assert max(plane_condition_e1(PlaneCandidate(1.0, 0.0, *np.abs(rng.normal(size=5))))) == 0
    c, s = SQ3 / 2, 0.5
    assert max(plane_condition_e1(PlaneCandidate(c, s, 0.3, 0, 0, 0.4, 0.2))) < 1e-12
    assert max(plane_condition_e1(PlaneCandidate(0.8, 0.6, 0.5, 0.3, 0.2, 0.5, 0.7))) > 1e-3


def test_e2_condition_examples():
    assert max(plane_condition_e2(PlaneCandidate(0.8, 0.6, 1.0))) < 1e-12
    assert max(plane_condition_e2(PlaneCandidate(0.8, 0.6, SQ3 / 2, 0, 0, 0, 0.5))) < 1e-12
    assert max(plane_condition_e2(PlaneCandidate(0.8, 0.6, 0.5, 0, 0, 0.5, 0.7))) > 1e-3


@pytest.mark.parametrize("name", sorted(REFERENCE_PLANE_SOLUTIONS))
def test_reference_solutions_satisfy_systems(name):
    cand = PlaneCandidate.from_tuple(REFERENCE_PLANE_SOLUTIONS[name])
    assert max(plane_condition_e1(cand)) < 1e-10
    assert max(plane_condition_e2(cand)) < 1e-10
    E = cand.vectors()
    assert all(geometric_residual(E, l) < 1e-10 for l in range(4))
    assert condition_equivalence_audit(cand, n_samples=10)


def test_match_flipped_sign_symmetry():
    t = list(REFERENCE_PLANE_SOLUTIONS["sol1"])
    t[3] = -t[3]
    assert match_reference(t)[0] == "sol1"
    assert match_reference((0.3, 0.2, 0.1, 0, 0, 0, 0))[0] is None


def test_enumeration_examples(plane_enumeration):
    en = plane_enumeration
    assert en.recovers_reference
    for name in ("sol0", "sol2", "sol5"):
        assert en.matched[name]
    assert not en.unmatched
    assert en.case3_contradiction
    assert all(ok for _, _, ok in en.v2_family)


def test_v1_v2_globally_associative():
    for V in (V1_PLANE, V2_PLANE):
        r = plane_global_associativity(V, n_samples=200, seed=5)
        assert r.passed and r.worst_residual < 1e-9


def test_sol1_plane_fails_globally():
    r = plane_global_associativity(plane_of(REFERENCE_PLANE_SOLUTIONS["sol1"]), n_samples=200, seed=5)
    assert not r.passed and r.worst_residual > 1e-3 and r.witness is not None


def test_sol1_reference_witness():
    # the stated witness triple at (e0 + e1)/sqrt2
    assert witness_contraction() > 1e-3


def test_sol1_permuted_witness():
    st = squashed_structure()
    e0, e1, e2, e3 = plane_of(REFERENCE_PLANE_SOLUTIONS["sol1"])
    r2 = math.sqrt(2)
    p = (e0 + e2) / r2
    triple = [(-e0 + e2) / r2, (e1 - e3) / r2, (e1 + e3) / r2]
    F = tangent_basis(p)
    vals = [evaluate(st.star_phi, p, [*triple, f]) for f in F]
    assert max(abs(v) for v in vals) > 0.3


def test_global_requires_four_vectors():
    with pytest.raises(ValueError):
        plane_global_associativity(V1_PLANE[:3])


def test_t3_zeta_examples():
    assert np.allclose(t3_zeta(c2r([1, 1, 1, 1j]) / 2), 0, atol=1e-15)
    assert np.allclose(t3_zeta(c2r([1, 1, 1, -1j]) / 2), 0, atol=1e-15)
    assert np.max(np.abs(t3_zeta(c2r([1, 1, 1, 1]) / 2))) > 0.1


def test_t3_slice(t3_slice):
    S = t3_slice.solutions
    want = np.array([[0.5, 0.5, 0.5, 0, 0.5], [0.5, 0.5, 0.5, 0, -0.5]])
    assert len(S) == 2
    for w in want:
        assert np.min(np.linalg.norm(S - w, axis=1)) < 1e-6


def test_t3_orbit_and_congruence():
    assert orbit_is_associative("T3", A1_BASE).passed
    assert t3_congruence_check(n=30) < 1e-8


def test_small_orbit_condition():
    r = su2_small_condition(c2r([1, 0, 0, 0]))
    assert r.restricted_residual < 1e-12
    r = su2_small_condition(c2r([0.5, 0, 0.5, math.sqrt(0.5)]))
    assert r.restricted_residual > 1e-3


def test_small_orbit_reference_coefficient():
    r = su2_small_condition(c2r([1, 0, 0, 0]))
    assert r.coefficient == pytest.approx(155 / 54, abs=1e-9)


def test_small_orbit_computed_closed_form(rng):
    for x1 in (0.3, 0.7, 1.0):
        rest = math.sqrt(1 - x1 * x1)
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        w = rest * w / np.linalg.norm(w)
        r = su2_small_condition(c2r([x1, 0, w[0], w[1]]))
        assert r.coefficient == pytest.approx(r.closed_form, abs=1e-12)
        assert r.other_components < 1e-12
    x1 = SMALL_ORBIT_ROOTS[1]
    r = su2_small_condition(c2r([x1, 0, math.sqrt(3 / 8), 0]))
    assert r.restricted_residual < 1e-12
    assert orbit_is_associative("SU2_small", r.base).passed


def test_su2_irr_case1():
    assert su2_irr_case1(2.0) == pytest.approx(528 / (25 * math.sqrt(5)), abs=1e-8)
    for mu in (1.8, 2.0, 3.0, 5.0):
        assert su2_irr_case1(mu) == pytest.approx(su2_irr_case1_closed_form(mu), abs=1e-8)
        assert su2_irr_case1(mu) > 0
    assert 0 < su2_irr_case1(math.sqrt(3) + 1e-6) < 1e-3


def test_case2_certificates():
    c = su2_irr_case2_certificates()
    assert c.phi_A2 == pytest.approx(-243 / 25, abs=1e-9)
    assert c.phi_A3 == pytest.approx(513 / 125, abs=1e-9)
    assert abs(c.phi_A2) == pytest.approx(c.vol_A2, abs=1e-9)
    assert c.phi_A3 == pytest.approx(c.vol_A3, abs=1e-9)
    assert c.offdiag_A2 < 1e-10 and c.offdiag_A3 < 1e-10
    assert c.associative_A2 and c.associative_A3


def test_calibration_on_a1():
    val, vol = orbit_calibration("T3", A1_BASE)
    assert val == pytest.approx(-81 / 250, abs=1e-9)
    assert abs(val) == pytest.approx(vol, abs=1e-9)


def test_induced_metrics_su2_irr():
    assert np.allclose(induced_metric("SU2_irr", A2_BASE), REFERENCE_METRICS["A2"], atol=1e-10)
    assert np.allclose(induced_metric("SU2_irr", A3_BASE), REFERENCE_METRICS["A3"], atol=1e-10)


def test_induced_metric_a1_horizontal_entries():
    G = induced_metric("T3", A1_BASE)
    assert G[1, 1] == pytest.approx(27 / 50, abs=1e-10)
    assert G[2, 2] == pytest.approx(27 / 50, abs=1e-10)
    assert abs(G[0, 1]) + abs(G[0, 2]) + abs(G[1, 2]) < 1e-10
    # F1* is vertical of round length 1, so its squashed length is s^2
    assert G[0, 0] == pytest.approx(9 / 25, abs=1e-12)
