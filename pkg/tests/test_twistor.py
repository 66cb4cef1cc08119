import numpy as np
import pytest

from squashed_s7.deformation import orbit_samples
from squashed_s7.twistor import (
    ProjectivePoint, a1_membership_residual, calibration_split_residual, distance_to_veronese,
    fibration_residual, fibre_holomorphic_residual, hat_containment, hat_point, hat_transform,
    holomorphic_curve_check, horizontal_part, i1_prime, p1, p1_horizontal, p2, pi_map, s4_to_line, vertical_part,
    veronese_embedding, veronese_stabilizer_check,
)
from squashed_s7.squashed import random_sphere_points, random_tangents


def test_projective_point_normalisation():
    a = ProjectivePoint.from_vector([0, 2j, 1, 0])
    b = ProjectivePoint.from_vector([0, -4, 2j, 0])
    assert np.allclose(a.rep, b.rep)
    assert a.distance(b) < 1e-15
    assert ProjectivePoint.from_vector([1, 0, 0, 0]).distance(
        ProjectivePoint.from_vector([0, 1, 0, 0])) == pytest.approx(1)
    with pytest.raises(ValueError):
        ProjectivePoint.from_vector(np.zeros(4))


def test_fibrations_commute():
    assert fibration_residual(50, seed=1) < 1e-12


def test_pi_lands_on_unit_sphere(rng):
    for x in random_sphere_points(rng, 10):
        assert np.linalg.norm(pi_map(x)) == pytest.approx(1)
        assert np.allclose(s4_to_line(pi_map(x)), p2(p1(x)), atol=1e-10)


def test_i1_prime_is_complex_structure(rng):
    for x in random_sphere_points(rng, 5):
        for v in random_tangents(rng, x, 3):
            v = p1_horizontal(x, v)
            assert np.allclose(i1_prime(x, i1_prime(x, v)), -v, atol=1e-12)


def test_vertical_horizontal_split(rng):
    for x in random_sphere_points(rng, 5):
        for v in random_tangents(rng, x, 3):
            a, b = vertical_part(x, v), horizontal_part(x, v)
            assert a @ b == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("case", ["A1", "A2", "A3"])
def test_orbit_image_is_holomorphic(case):
    chk = holomorphic_curve_check(case, 30, seed=2)
    assert chk.passed and chk.residual < 1e-9
    assert chk.horizontal == (case == "A2")


def test_hat_of_a3_lies_on_twisted_cubic():
    assert hat_containment("A3", 200, seed=0) < 1e-6


def test_hat_of_a1_is_the_a1_torus():
    for pt in hat_transform("A1", 20, seed=4):
        res, im = a1_membership_residual(pt)
        assert res < 1e-9 and im < 0


def test_hat_undefined_on_fibre():
    x, e, _ = orbit_samples("L1", 1, 0)[0]
    with pytest.raises(ValueError):
        hat_point(x, e)


def test_veronese_distance(rng):
    a, b = 0.3 + 0.2j, -0.7j
    c = np.array([a ** 3, b ** 3, np.sqrt(3) * a * b * b, np.sqrt(3) * a * a * b])
    assert distance_to_veronese(ProjectivePoint.from_vector(c)) < 1e-12
    assert distance_to_veronese(ProjectivePoint.from_vector([1, 1, 0, 0])) > 1e-3


def test_veronese_stabilizer():
    chk = veronese_stabilizer_check(50, seed=5)
    assert chk.multiplicativity < 1e-12
    assert chk.identity == 0
    assert chk.curve_preserved < 1e-9
    assert chk.su2_agreement < 1e-12
    assert chk.intersection_dimension == 6


def test_veronese_inverse(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(veronese_embedding(np.linalg.inv(g)) @ veronese_embedding(g), np.eye(4))


def test_calibration_split():
    assert calibration_split_residual(10, seed=6) < 1e-10


def test_fibres_are_holomorphic():
    assert fibre_holomorphic_residual(10, seed=7) < 1e-10
