import csv
import math

import numpy as np
import pytest

from squashed_s7.deformation import (
    CASE_TAGS, IE3, LOWER, REFERENCE_PARAMETERS, RAISE, MatrixCoefficient, assemble_D,
    brute_force_kernel, build_normal_frame, case_parameters, connection_data, connection_deviation,
    det_closed_form, diff_cross_residual, drho, eliminated_system, gamma_eigenvalue,
    hopf_circle_normal_part, kernel_dimension, kernel_solutions, ladder_apply, laplacian_eigenvalue,
    m_gamma, matrix_coefficient_value, reference_normal_frame, stabilizer_dimension, t3_brute_force,
    t3_deck_invariant, t3_kernel, trivial_deformation_rank, write_spectrum_csv, z3_phases,
)
from squashed_s7.squashed import squashed_structure
from squashed_s7.symmetry import SU2_BASIS
from scipy.linalg import expm


@pytest.mark.parametrize("case", CASE_TAGS)
def test_frame_is_adapted(case):
    fr = build_normal_frame(case)
    assert fr.gram_residual < 1e-9
    assert fr.expansion_residual < 1e-9


@pytest.mark.parametrize("case", CASE_TAGS)
def test_reference_frame_matches(case):
    fr = build_normal_frame(case)
    G = squashed_structure().metric_matrix(fr.base)
    overlap = reference_normal_frame(case) @ G @ fr.V.T
    assert np.allclose(overlap, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("case", CASE_TAGS)
def test_connection(case):
    assert connection_deviation(case) < 1e-9
    cd = connection_data(case)
    assert max(cd.skew_residual, cd.reconstruction_residual, cd.levi_civita_residual) < 1e-9


@pytest.mark.parametrize("case", CASE_TAGS)
def test_cross_product_is_parallel_along_orbit(case):
    assert diff_cross_residual(case, 5, seed=3) < 1e-6


@pytest.mark.parametrize("case, lam, mu", [
    ("L1", -1, -1), ("L2", -1, 1 / 3), ("A2", -1, 23 / 9), ("A3", 141 / 19, -1),
])
def test_operator_coefficients(case, lam, mu):
    D = assemble_D(case)
    assert D.lam == pytest.approx(lam, abs=1e-12)
    assert D.mu == pytest.approx(mu, abs=1e-12)


def test_torus_operator_diagonal():
    assert np.allclose(assemble_D("A1").diagonal, np.array([1, 11, 21, 21]) / 9, atol=1e-12)


def test_matrix_coefficient_validation():
    with pytest.raises(ValueError):
        MatrixCoefficient(2, 3)
    with pytest.raises(ValueError):
        MatrixCoefficient(-1, 0)


def test_ladder_examples():
    assert ladder_apply(RAISE, MatrixCoefficient(3, 3)) == (0j, None)
    assert ladder_apply(LOWER, MatrixCoefficient(3, 0)) == (0j, None)
    c, f = ladder_apply(IE3, MatrixCoefficient(6, 5))
    assert c == 4 and f == MatrixCoefficient(6, 5)
    c, f = ladder_apply(RAISE, MatrixCoefficient(2, 1))
    assert c == pytest.approx(2j * math.sqrt(2)) and f == MatrixCoefficient(2, 2)
    with pytest.raises(ValueError):
        ladder_apply("E4", MatrixCoefficient(1, 0))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_ladders_agree_with_drho(n):
    E1, E2, E3 = (drho(E, n) for E in SU2_BASIS)
    ops = {RAISE: -1j * E1 + E2, LOWER: 1j * E1 + E2, IE3: 1j * E3}
    for op, A in ops.items():
        for k in range(n + 1):
            c, f = ladder_apply(op, MatrixCoefficient(n, k))
            expect = np.zeros(n + 1, dtype=complex)
            if f is not None:
                expect[f.k] = c
            assert np.allclose(A[:, k], expect, atol=1e-12), (op, k)


def test_drho_is_derivative_of_rho(rng):
    n, t = 3, 1e-6
    X = SU2_BASIS[0] * 0.3 + SU2_BASIS[2] * 0.7
    f = MatrixCoefficient(n, 1, 2)
    num = (matrix_coefficient_value(f, expm(t * X)) - matrix_coefficient_value(f, expm(-t * X))) / (2 * t)
    assert num == pytest.approx(drho(X, n)[f.j, f.k], abs=1e-6)


@pytest.mark.parametrize("case", ["L2", "A2", "A3"])
def test_reference_parameters(case):
    P, Q = REFERENCE_PARAMETERS[case], case_parameters(case)
    assert P.brackets_residual() < 1e-12
    assert np.allclose([P.p, P.q, P.lam, P.mu], [Q.p, Q.q, Q.lam, Q.mu], atol=1e-12)


@pytest.mark.parametrize("case, n, k", [("L2", 2, 1), ("A2", 6, 5), ("A3", 6, 4)])
def test_gamma_vanishes(case, n, k):
    assert gamma_eigenvalue(REFERENCE_PARAMETERS[case], n, k) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("case, n, k", [("A2", 6, 5), ("A3", 6, 4)])
def test_flipped_linear_sign_misses_zero(case, n, k):
    assert abs(gamma_eigenvalue(REFERENCE_PARAMETERS[case], n, k, flipped_sign=True)) > 1


def test_laplacian_is_nonnegative():
    P = case_parameters("A2")
    assert all(laplacian_eigenvalue(P, n, k) >= -1e-12 for n in range(8) for k in range(n + 1))


@pytest.mark.parametrize("case, ratio", [
    ("L2", -math.sqrt(10) / 5), ("A2", -math.sqrt(10) / 5), ("A3", -math.sqrt(190) / 10),
])
def test_kernel_ratios(case, ratio):
    sols = [s for s in kernel_solutions(case, 10) if s.ratio is not None]
    assert len(sols) == 1
    assert sols[0].ratio == pytest.approx(ratio, abs=1e-10)


def test_z3_phases():
    assert z3_phases("A2") == (0, 1)


@pytest.mark.parametrize("case, dim", [("L1", 4), ("L2", 8), ("A2", 16), ("A3", 16)])
@pytest.mark.parametrize("n_max", [8, 10, 12])
def test_kernel_dimension_matches_brute_force(case, dim, n_max):
    assert kernel_dimension(case, n_max) == dim
    assert brute_force_kernel(case, n_max) == dim


def test_kernel_dimension_needs_margin():
    with pytest.raises(ValueError):
        kernel_dimension("L2", 6)
    with pytest.raises(ValueError):
        brute_force_kernel("L2", 6)


def test_torus_determinant():
    assert det_closed_form((1, 0, 0)) == -432
    assert abs(np.linalg.det(m_gamma((1, 0, 0))) + 432) < 1e-9
    assert abs(np.linalg.det(m_gamma((2, 0, 0)))) < 1e-9
    for g in [(0, 1, 2), (3, -1, 1), (2, 2, 1)]:
        assert np.linalg.det(m_gamma(g)) == pytest.approx(det_closed_form(g), rel=1e-10)


@pytest.mark.parametrize("g", [(0, 1, 1), (1, 1, 0), (2, -1, 3)])
def test_eliminated_system_is_scaled_m_gamma(g):
    E, M = eliminated_system(g), m_gamma(g)
    scale = np.vdot(M.ravel(), E.ravel()) / np.vdot(M.ravel(), M.ravel())
    assert np.allclose(E, scale * M, atol=1e-10)


def test_torus_kernel():
    tk = t3_kernel()
    assert tk.dimension == 10 and len(tk.modes) == 10
    assert tk.det_residual < 1e-10
    assert all(t3_deck_invariant(g) for g in tk.modes)
    assert t3_brute_force() == 10
    assert kernel_dimension("A1") == 10


@pytest.mark.parametrize("case, rank", [("L1", 4), ("L2", 8), ("A1", 10), ("A2", 9), ("A3", 10)])
def test_trivial_deformation_rank(case, rank):
    td = trivial_deformation_rank(case)
    assert td.equation_residual < 1e-6
    assert td.gap > 1e3
    assert td.rank == rank


@pytest.mark.parametrize("case, dim", [("L1", 9), ("L2", 5), ("A1", 3), ("A2", 4), ("A3", 4)])
def test_stabilizer_dimension(case, dim):
    assert stabilizer_dimension(case) == dim


@pytest.mark.parametrize("case", ["A1", "A2", "A3"])
def test_hopf_circle_preserves_orbit(case):
    assert hopf_circle_normal_part(case) < 1e-12


def test_spectrum_csv(tmp_path):
    path = tmp_path / "spec.csv"
    write_spectrum_csv(path, ("L2",), 4)
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == sum(n + 1 for n in range(5))
    hits = [(r["n"], r["k"]) for r in rows if r["in_kernel"] == "1"]
    assert ("2", "1") in hits
    for r in rows:
        if r["in_kernel"] == "1":
            assert abs(float(r["gamma_eigenvalue"])) < 1e-9
