import math

import numpy as np
import pytest

from squashed_s7.classification import A1_BASE
from squashed_s7.exterior import c2r, tangent_basis, wedge
from squashed_s7.model_structures import (
    FlatG2, build_model, cross_product, is_associative, metric_from_phi, spin7_metric_checks,
)
from squashed_s7.sasakian import horizontal_frame, xi
from squashed_s7.squashed import random_sphere_points, random_tangents, squashed_structure
from squashed_s7.symmetry import get_action

E = np.eye(8)


@pytest.fixture(scope="module")
def model():
    return build_model()


def test_phi0_coefficients(model):
    assert model.phi0.constant_coefficient(1, 2, 3) == 1
    assert model.phi0.constant_coefficient(3, 4, 7) == -1
    assert model.phi0.constant_coefficient(3, 5, 6) == -1
    assert model.phi0.constant_coefficient(1, 4, 5) == 1


def test_spin7_decompositions(model):
    assert model.Phi0 == wedge(model.omega0, model.omega0) / 2 + model.Omega0_re
    from squashed_s7.exterior import PolyForm
    assert model.Phi0 == wedge(PolyForm.dx(0), model.phi0) + model.star_phi0


def test_metric_from_flat_phi(model):
    for i in range(1, 8):
        for j in range(1, 8):
            assert metric_from_phi(model.phi0, E[i], E[j]) == pytest.approx(float(i == j), abs=1e-12)


def test_metric_from_squashed_phi():
    st = squashed_structure()
    p = E[0]
    B = tangent_basis(p)
    g = metric_from_phi(st.phi, xi(1, p), xi(1, p), p=p, basis=B)
    assert g == pytest.approx(9 / 25, abs=1e-12)
    X0 = c2r([0, 0, 1, 0])
    assert metric_from_phi(st.phi, X0, X0, p=p, basis=B) == pytest.approx(9 / 5, abs=1e-12)


def test_spin7_checks(model):
    r = spin7_metric_checks(model.Phi0, E[0], E[1])
    assert r.volume_ratio == pytest.approx(14)
    assert r.pair_ratio == pytest.approx(1)
    d = spin7_metric_checks(model.Phi0, E[2], E[2])
    assert d.degenerate and d.pair_ratio == 0


def test_flat_cross_product(model, rng):
    flat = FlatG2()
    m = flat.metric()
    assert np.allclose(cross_product(flat.phi, m, E[1], E[2]), E[3])
    assert np.allclose(cross_product(flat.phi, m, E[4], E[4]), 0)
    for _ in range(500):
        u, v = rng.normal(size=(2, 8))
        u[0] = v[0] = 0
        w = cross_product(flat.phi, m, u, v)
        lhs = w @ w
        rhs = (u @ u) * (v @ v) - (u @ v) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_squashed_cross_product_at_e0(rng):
    st = squashed_structure()
    p = E[0]
    m = st.metric(p)
    for _ in range(5):
        th = rng.uniform(0, math.pi / 2)
        c, s = math.cos(th), math.sin(th)
        A2, A3, B3, A4, B4 = rng.normal(size=5)
        e1 = c2r([1j * c, 0, s, 0])
        e2 = c2r([0, A2, A3 + 1j * B3, A4 + 1j * B4])
        got = 5 / 3 * cross_product(st.phi, m, e1, e2)
        want = c2r([5j * B3 * s, 5 * A4 * s + (-A2 * c + 5 * B4 * s) * 1j,
                    -B3 * c + A3 * c * 1j, (-B4 * c - A2 * s) + A4 * c * 1j])
        assert np.allclose(got, want, atol=1e-12)


def test_fibres_are_associative(rng):
    st = squashed_structure()
    for p in random_sphere_points(rng, 10):
        assert is_associative([xi(i, p) for i in (1, 2, 3)], st, p=p).passed


def test_horizontal_planes_are_not(rng):
    st = squashed_structure()
    for p in random_sphere_points(rng, 5):
        X0 = random_tangents(rng, p, 1)[0]
        X0 = X0 - sum((xi(i, p) @ X0) * xi(i, p) for i in (1, 2, 3))
        H = horizontal_frame(p, X0)
        r = is_associative(list(H[:3]), st, p=p)
        assert not r.passed and r.agree


def test_t3_orbit_triple():
    st = squashed_structure()
    F = get_action("T3").frame(A1_BASE)
    r = is_associative(list(F), st, p=A1_BASE)
    assert r.passed and r.residual < 1e-9


def test_gl3_invariance(rng):
    st = squashed_structure()
    p = E[0]
    span = [xi(i, p) for i in (1, 2, 3)]
    base = is_associative(span, st, p=p)
    for _ in range(5):
        A = rng.normal(size=(3, 3))
        r = is_associative(list(A @ np.array(span)), st, p=p)
        assert r.passed == base.passed
    H = horizontal_frame(p, c2r([0, 0, 1, 0]))
    A = rng.normal(size=(3, 3))
    assert is_associative(list(A @ H[:3]), st, p=p).residual == pytest.approx(
        is_associative(list(H[:3]), st, p=p).residual, rel=1e-8)


def test_dependent_triple_rejected():
    st = squashed_structure()
    p = E[0]
    with pytest.raises(ValueError):
        is_associative([xi(1, p), 2 * xi(1, p), xi(2, p)], st, p=p)
