"""Infinitesimal associative deformations of the homogeneous associatives.

For an associative A with normal bundle nu the deformations are the solutions of
D psi = -psi, D psi = sum_i e_i x nabla^perp_{e_i} psi.  On each orbit the normal
bundle is trivialised by equivariant frames, which turns D into a constant
coefficient operator on functions on SU(2) or T^3.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product

import numpy as np
from scipy.linalg import expm, null_space

from .exterior import _arr, c2r, evaluate_batch, realify
from .model_structures import cross_product
from .sasakian import I_MATS, phi_tensor, xi
from .squashed import OrbitField, nabla_tilde, squashed_structure
from .symmetry import (
    SU2_BASIS, diag_map, get_action, irr_map, sp1_from_su2, sp1sp2_generators,
    su2_from_params, t3_element,
)

CASE_TAGS = ("L1", "L2", "A1", "A2", "A3")
SU2_CASES = ("L1", "L2", "A2", "A3")
FRAME_TOL = 1e-9

R5, R6, R15, R19 = math.sqrt(5), math.sqrt(6), math.sqrt(15), math.sqrt(19)

# (e_i x V_j) = sign * V_k, stored as (sign, k) with 1-based k
CROSS_TABLE = (
    ((1, 2), (-1, 1), (1, 4), (-1, 3)),
    ((1, 3), (-1, 4), (-1, 1), (1, 2)),
    ((-1, 4), (-1, 3), (1, 2), (1, 1)),
)


def cross_table_array() -> np.ndarray:
    """X[i, j, k] = coefficient of V_k in e_i x V_j."""
    X = np.zeros((3, 4, 4))
    for i, row in enumerate(CROSS_TABLE):
        for j, (sgn, k) in enumerate(row):
            X[i, j, k - 1] = sgn
    return X


def _symbol_from_cross(X: np.ndarray) -> np.ndarray:
    # (D psi)_l picks up e_i(psi_j) X[i, j, l]
    return np.transpose(X, (0, 2, 1)).copy()


# symbol of D_{lambda, mu}: P[i, l, j] = coefficient of e_i psi_j in row l
D_SYMBOL = _symbol_from_cross(cross_table_array())


# ---------------------------------------------------------------- case data


@dataclass(frozen=True)
class CaseSetup:
    tag: str
    action: str
    base: np.ndarray          # complex 4-vector
    scales: tuple             # e_i = scales[i] * (i-th generator field)
    v1: np.ndarray            # complex 4-vector
    x0: np.ndarray            # horizontal reference vector X_0
    group: str                # "SU2" or "T3"


def _cv(*entries) -> np.ndarray:
    return np.array(entries, dtype=complex)


CASE_SETUPS = {
    "L1": CaseSetup("L1", "Sp1_L", _cv(1, 0, 0, 0), (5 / 3, 5 / 3, -5 / 3),
                    R5 / 3 * _cv(0, 0, 1, 0), _cv(0, 0, 1, 0), "SU2"),
    "L2": CaseSetup("L2", "SU2_diag", _cv(1, 0, 0, 0), (R5 / 3, R5 / 3, -5 / 3),
                    5 / 3 * _cv(0, 1, 0, 0), _cv(0, 0, 1, 0), "SU2"),
    "A1": CaseSetup("A1", "T3", _cv(1, 1, 1, 1j) / 2, (5 / 3, 5 * R6 / 9, -5 * R6 / 9),
                    R5 / 6 * _cv(-1, -1, 1, 1j), _cv(-1, -1, 1, 1j) / 2, "T3"),
    "A2": CaseSetup("A2", "SU2_irr", _cv(1, 0, 0, 0), (R15 / 9, R15 / 9, -5 / 9),
                    5 / 3 * _cv(0, 1, 0, 0), _cv(0, 0, 0, 1), "SU2"),
    "A3": CaseSetup("A3", "SU2_irr", _cv(0, 0, 1, 0), (5 * R19 / 57, 5 * R19 / 57, 5 / 3),
                    R5 / 3 * _cv(1, 0, 0, 0), _cv(1, 0, 0, 0), "SU2"),
}


def _setup(case: str) -> CaseSetup:
    try:
        return CASE_SETUPS[case]
    except KeyError:
        raise ValueError(f"unknown case {case!r}; expected one of {CASE_TAGS}") from None


def _reference_vectors(case: str):
    """xi_1..3 and X_0..3 at the base point of a case."""
    s = _setup(case)
    p, X0 = c2r(s.base), c2r(s.x0)
    xis = {i: xi(i, p) for i in (1, 2, 3)}
    Xs = {0: X0, **{i: phi_tensor(i, p, X0) for i in (1, 2, 3)}}
    return xis, Xs


def reference_normal_frame(case: str) -> np.ndarray:
    """The reference v_1..v_4 for each case, as ambient vectors.

    L1 uses the scale sqrt5/3 of a unit horizontal vector, and the second A3
    vector uses X_2 (X_0 is not orthogonal to v_1).
    """
    xs, X = _reference_vectors(case)
    c = R5 / 3
    if case == "L1":
        return c * np.array([X[0], X[2], X[3], X[1]])
    if case == "L2":
        return np.array([-5 / 3 * xs[2], c * X[2], -c * X[3], -5 / 3 * xs[3]])
    if case == "A1":
        w = math.sqrt(30) / 18
        return np.array([c * X[0], c * X[1], w * (-X[3] + 5 * xs[3]), w * (X[2] + 5 * xs[2])])
    if case == "A2":
        return np.array([-5 / 3 * xs[2], c * X[2], c * X[3], 5 / 3 * xs[3]])
    if case == "A3":
        w = math.sqrt(95) / 57
        return np.array([c * X[0], w * (-5 * math.sqrt(3) * xs[2] + 2 * X[2]),
                         w * (5 * math.sqrt(3) * xs[3] + 2 * X[3]), c * X[1]])
    raise ValueError(f"unknown case {case!r}")


def _conn(scale, rows):
    C = np.zeros((3, 4, 4))
    for i, row in enumerate(rows):
        for j, (coef, k) in enumerate(row):
            C[i, j, k - 1] = coef / scale
    return C


# C[i, j, k] = coefficient of V_k in nabla^perp_{e_i} V_j
REFERENCE_CONNECTIONS = {
    "L1": _conn(3, [[(1, 2), (-1, 1), (1, 4), (-1, 3)],
                    [(1, 3), (-1, 4), (-1, 1), (1, 2)],
                    [(-1, 4), (-1, 3), (1, 2), (1, 1)]]),
    "L2": _conn(3, [[(-1, 2), (1, 1), (-1, 4), (1, 3)],
                    [(-1, 3), (1, 4), (1, 1), (-1, 2)],
                    [(-5, 4), (-1, 3), (1, 2), (5, 1)]]),
    "A1": _conn(9, [[(3, 2), (-3, 1), (-12, 4), (12, 3)],
                    [(-2, 3), (7, 4), (2, 1), (-7, 2)],
                    [(2, 4), (7, 3), (-7, 2), (-2, 1)]]),
    "A2": _conn(9, [[(-3, 2), (3, 1), (-3, 4), (3, 3)],
                    [(-3, 3), (3, 4), (3, 1), (-3, 2)],
                    [(-15, 4), (17, 3), (-17, 2), (15, 1)]]),
    "A3": _conn(57, [[(-31, 2), (31, 1), (-31, 4), (31, 3)],
                     [(-31, 3), (31, 4), (31, 1), (-31, 2)],
                     [(361, 4), (-119, 3), (119, 2), (-361, 1)]]),
}


# ---------------------------------------------------------------- frames


@dataclass(frozen=True)
class NormalFrame:
    case: str
    base: np.ndarray                # real 8-vector
    e: np.ndarray                   # 3 x 8
    V: np.ndarray                   # 4 x 8
    generators: tuple               # real 8x8 generators E_1..E_3 (or F_1..F_3)
    scales: tuple
    cross_table: np.ndarray         # 3 x 4 x 4, computed
    expansion_residual: float
    gram_residual: float

    @property
    def frame(self) -> np.ndarray:
        return np.vstack([self.e, self.V])


def _phi_expansion():
    """Coefficients of phi~ in the frame (e1, e2, e3, V1, ..., V4), indices 0..6."""
    coeffs = {(0, 1, 2): 1.0,
              (0, 3, 4): 1.0, (0, 5, 6): 1.0,
              (1, 3, 5): 1.0, (1, 4, 6): -1.0,     # e2 (V13 + V42)
              (2, 3, 6): -1.0, (2, 4, 5): -1.0}
    return coeffs


def expansion_residual(frame: np.ndarray, p) -> float:
    st = squashed_structure()
    triples = list(combinations(range(7), 3))
    P = np.repeat(_arr(p)[None], len(triples), axis=0)
    Vs = np.array([[frame[a], frame[b], frame[c]] for a, b, c in triples])
    vals = evaluate_batch(st.phi, P, Vs)
    exp = _phi_expansion()
    return float(max(abs(v - exp.get(t, 0.0)) for v, t in zip(vals, triples)))


@lru_cache(maxsize=None)
def build_normal_frame(case: str, tol: float = FRAME_TOL) -> NormalFrame:
    s = _setup(case)
    act = get_action(s.action)
    st = squashed_structure()
    p = c2r(s.base)
    m = st.metric(p)
    G = st.metric_matrix(p)
    e = np.array([c * (A @ p) for c, A in zip(s.scales, act.generators)])
    cr = lambda a, b: cross_product(st.phi, m, a, b)
    if np.abs(cr(e[0], e[1]) - e[2]).max() > tol:
        raise ValueError(f"{case}: e3 != e1 x e2")
    v1 = c2r(s.v1)
    V = np.array([v1, cr(e[0], v1), cr(e[1], v1), -cr(e[2], v1)])
    F = np.vstack([e, V])
    gram_res = float(np.abs(F @ G @ F.T - np.eye(7)).max())
    if gram_res > tol:
        raise ValueError(f"{case}: frame is not g~-orthonormal (residual {gram_res:.2e})")
    X = np.array([[V @ G @ cr(e[i], V[j]) for j in range(4)] for i in range(3)])
    dev = np.abs(X - cross_table_array()).max()
    if dev > tol:
        raise ValueError(f"{case}: cross-product table mismatch ({dev:.2e}); orientation bug")
    return NormalFrame(case, p, e, V, act.generators, s.scales, X, expansion_residual(F, p), gram_res)


# ---------------------------------------------------------------- connection


def _normal_coords(frame: NormalFrame, w, G) -> np.ndarray:
    return np.array([w @ G @ v for v in frame.V])


def _tangent_coords(frame: NormalFrame, w, G) -> np.ndarray:
    return np.array([w @ G @ v for v in frame.e])


def connection_matrix(case: str) -> np.ndarray:
    """C[i, j, k] with nabla~^perp_{e_i} V_j = sum_k C[i, j, k] V_k at the base point."""
    fr = build_normal_frame(case)
    G = squashed_structure().metric_matrix(fr.base)
    C = np.zeros((3, 4, 4))
    for i in range(3):
        for j in range(4):
            w = nabla_tilde(fr.base, fr.e[i], OrbitField(fr.generators, fr.V[j]))
            C[i, j] = _normal_coords(fr, w, G)
    return C


def connection_deviation(case: str) -> float:
    return float(np.abs(connection_matrix(case) - REFERENCE_CONNECTIONS[case]).max())


def tangential_gamma(case: str) -> np.ndarray:
    """Gamma[i, j, k] with nabla~^T_{e_i} e_j = sum_k Gamma[i, j, k] e_k."""
    fr = build_normal_frame(case)
    G = squashed_structure().metric_matrix(fr.base)
    out = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            w = nabla_tilde(fr.base, fr.e[i], OrbitField(fr.generators, fr.e[j]))
            out[i, j] = _tangent_coords(fr, w, G)
    return out


def structure_constants(case: str) -> np.ndarray:
    """c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k (left-invariant fields)."""
    s = _setup(case)
    if s.group == "T3":
        return np.zeros((3, 3, 3))
    basis = [c * E for c, E in zip(s.scales, SU2_BASIS)]
    M = np.array([b.ravel() for b in basis]).T
    c = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            br = basis[i] @ basis[j] - basis[j] @ basis[i]
            c[i, j] = np.linalg.lstsq(M, br.ravel(), rcond=None)[0].real
    return c


def levi_civita_from_brackets(c: np.ndarray) -> np.ndarray:
    """Gamma_ij^k = 1/2 (c_ij^k - c_ik^j - c_jk^i) for a left-invariant orthonormal frame."""
    G = np.zeros((3, 3, 3))
    for i, j, k in product(range(3), repeat=3):
        G[i, j, k] = 0.5 * (c[i, j, k] - c[i, k, j] - c[j, k, i])
    return G


def reconstruct_from_gamma_k(Gamma: np.ndarray, K: np.ndarray) -> np.ndarray:
    """nabla^perp V_2..V_4 from Gamma and K_{ij} = <nabla^perp_{e_i} V_1, V_j>.

    K is indexed K[i, j] for j = 1..4 (column 0 unused).  Rows follow the
    derivative rule for u x eta; the V_4 row has its V_2/V_3 labels in the
    order forced by skew-symmetry.
    """
    C = np.zeros((3, 4, 4))
    d = np.eye(3)
    for i in range(3):
        K2, K3, K4 = K[i, 1], K[i, 2], K[i, 3]
        C[i, 0, 1:] = K[i, 1:]
        C[i, 1, 0] = -K2
        C[i, 1, 2] = Gamma[i, 0, 1] - K4 + d[i, 2]
        C[i, 1, 3] = -Gamma[i, 0, 2] + K3 + d[i, 1]
        C[i, 2, 0] = -K3
        C[i, 2, 1] = Gamma[i, 1, 0] + K4 - d[i, 2]
        C[i, 2, 3] = -Gamma[i, 1, 2] - K2 - d[i, 0]
        C[i, 3, 0] = -K4
        C[i, 3, 1] = -Gamma[i, 2, 0] - K3 - d[i, 1]
        C[i, 3, 2] = -Gamma[i, 2, 1] + K2 + d[i, 0]
    return C


@dataclass(frozen=True)
class ConnectionData:
    Gamma: np.ndarray       # 3x3x3
    K: np.ndarray           # 3x4, column 0 is zero
    symbol: np.ndarray      # 3x4x4
    zeroth: np.ndarray      # 4x4
    skew_residual: float
    reconstruction_residual: float
    levi_civita_residual: float


def zeroth_order(C: np.ndarray, X: np.ndarray | None = None) -> np.ndarray:
    """Z[l, j] = sum_{i,k} C[i, j, k] X[i, k, l]."""
    X = cross_table_array() if X is None else X
    return np.einsum("ijk,ikl->lj", C, X)


def connection_data(case: str) -> ConnectionData:
    C = connection_matrix(case)
    Gam = tangential_gamma(case)
    K = C[:, 0, :].copy()
    skew = float(np.abs(Gam + np.transpose(Gam, (0, 2, 1))).max())
    rec = float(np.abs(reconstruct_from_gamma_k(Gam, K) - C).max())
    lc = float(np.abs(levi_civita_from_brackets(structure_constants(case)) - Gam).max())
    X = build_normal_frame(case).cross_table
    return ConnectionData(Gam, K, _symbol_from_cross(X), zeroth_order(C, X), skew, rec, lc)


def diff_cross_residual(case: str, n_samples: int = 20, seed: int = 0) -> float:
    """Max residual of nabla^perp_X (u x eta) = (nabla^T_X u) x eta + u x nabla^perp_X eta - chi^perp.

    chi(X, u, eta) = X x (u x eta) + g(X, u) eta.  Configurations are random
    combinations of the frame, transported to random orbit points.
    """
    fr = build_normal_frame(case)
    st = squashed_structure()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        g = _random_element(case, rng)
        p = g @ fr.base
        m = st.metric(p)
        G = st.metric_matrix(p)
        e, V = fr.e @ g.T, fr.V @ g.T
        a, b, c = rng.normal(size=3), rng.normal(size=3), rng.normal(size=4)
        Xv, u, eta = a @ e, b @ e, c @ V
        cr = lambda x, y: cross_product(st.phi, m, x, y)
        perp = lambda w: sum((w @ G @ v) * v for v in V)
        tang = lambda w: sum((w @ G @ v) * v for v in e)
        ueta = cr(u, eta)
        lhs = perp(nabla_tilde(p, Xv, OrbitField(fr.generators, ueta)))
        nu = tang(nabla_tilde(p, Xv, OrbitField(fr.generators, u)))
        neta = perp(nabla_tilde(p, Xv, OrbitField(fr.generators, eta)))
        chi = cr(Xv, ueta) + (Xv @ G @ u) * eta
        rhs = cr(nu, eta) + cr(u, neta) - perp(chi)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


# ---------------------------------------------------------------- operator D


@dataclass(frozen=True)
class DOperator:
    case: str
    symbol: np.ndarray          # P[i, l, j]
    zeroth: np.ndarray          # Z[l, j]
    lam: float
    mu: float

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.zeroth).copy()


def assemble_D(case: str, tol: float = FRAME_TOL) -> DOperator:
    cd = connection_data(case)
    dev = np.abs(cd.symbol - D_SYMBOL)
    if dev.max() > tol:
        raise ValueError(f"{case}: first-order part deviates from the D_(lambda,mu) symbol "
                         f"at {np.argwhere(dev > tol).tolist()}")
    Z = cd.zeroth
    off = Z - np.diag(np.diag(Z))
    if np.abs(off).max() > tol:
        raise ValueError(f"{case}: zeroth-order part is not diagonal at "
                         f"{np.argwhere(np.abs(off) > tol).tolist()}")
    d = np.diag(Z)
    lam, mu = float(d[0]), float(d[1])
    if _setup(case).group == "SU2" and (abs(d[3] - lam) > tol or abs(d[2] - mu) > tol):
        bad = [i for i, (x, y) in enumerate(zip(d, (lam, mu, mu, lam))) if abs(x - y) > tol]
        raise ValueError(f"{case}: diagonal {d.tolist()} not of the form (lambda, mu, mu, lambda); "
                         f"deviating entries {bad}")
    return DOperator(case, cd.symbol, Z, lam, mu)


# ---------------------------------------------------------------- Peter-Weyl data


@dataclass(frozen=True)
class MatrixCoefficient:
    """<rho_n(.) v_k, v_j> on SU(2)."""

    n: int
    k: int
    j: int = 0

    def __post_init__(self):
        if self.n < 0 or not (0 <= self.k <= self.n) or not (0 <= self.j <= self.n):
            raise ValueError(f"invalid index triple {(self.n, self.k, self.j)}")


RAISE, LOWER, IE3 = "-iE1+E2", "iE1+E2", "iE3"


def ladder_apply(op: str, f: MatrixCoefficient) -> tuple[complex, MatrixCoefficient | None]:
    """Exact action of a ladder operator; returns (coefficient, target)."""
    n, k = f.n, f.k
    if op == RAISE:
        if k == n:
            return 0j, None
        return 2j * math.sqrt((k + 1) * (n - k)), MatrixCoefficient(n, k + 1, f.j)
    if op == LOWER:
        if k == 0:
            return 0j, None
        return 2j * math.sqrt(k * (n - k + 1)), MatrixCoefficient(n, k - 1, f.j)
    if op == IE3:
        return complex(-n + 2 * k), f
    raise ValueError(f"unknown ladder operator {op!r}")


def drho(X: np.ndarray, n: int) -> np.ndarray:
    """Matrix of d rho_n(X) on the unitary basis v_k = z1^(n-k) z2^k / sqrt(k!(n-k)!).

    Column k holds d rho_n(X) v_k, computed from (dv/dz1, dv/dz2) X^T (z1, z2)^T.
    """
    X = np.asarray(X, dtype=complex)
    A = np.zeros((n + 1, n + 1), dtype=complex)
    norm = [1 / math.sqrt(math.factorial(k) * math.factorial(n - k)) for k in range(n + 1)]
    for k in range(n + 1):
        a, b = n - k, k
        # monomial z1^a z2^b -> terms indexed by the power of z2
        terms = {}
        if a:
            terms[b] = terms.get(b, 0) + a * X[0, 0]
            terms[b + 1] = terms.get(b + 1, 0) + a * X[1, 0]
        if b:
            terms[b - 1] = terms.get(b - 1, 0) + b * X[0, 1]
            terms[b] = terms.get(b, 0) + b * X[1, 1]
        for l, c in terms.items():
            A[l, k] += c * norm[k] / norm[l]
    return A


def rho_matrix(g: np.ndarray, n: int) -> np.ndarray:
    """rho_n(g) on the unitary basis, via (rho(g) f)(z) = f(z g); solved from samples."""
    g = np.asarray(g, dtype=complex)
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(2 * n + 4, 2)) + 1j * rng.normal(size=(2 * n + 4, 2))
    norm = np.array([1 / math.sqrt(math.factorial(k) * math.factorial(n - k)) for k in range(n + 1)])

    def basis(z):
        return norm * z[:, :1] ** (n - np.arange(n + 1)) * z[:, 1:] ** np.arange(n + 1)

    B, Bg = basis(Z), basis(Z @ g)
    return np.linalg.lstsq(B, Bg, rcond=None)[0]


def matrix_coefficient_value(f: MatrixCoefficient, g: np.ndarray) -> complex:
    return complex(rho_matrix(g, f.n)[f.j, f.k])


# ---------------------------------------------------------------- Gamma and kernels


@dataclass(frozen=True)
class CaseParameters:
    p: float
    q: float
    lam: float
    mu: float
    alpha: float = -1.0

    def brackets_residual(self) -> float:
        """[e1,e2] = 2p^2/q e3, [e2,e3] = 2q e1, [e3,e1] = 2q e2 in su(2)."""
        E = SU2_BASIS
        e = (self.p * E[0], self.p * E[1], self.q * E[2])
        br = lambda a, b: a @ b - b @ a
        r = [br(e[0], e[1]) - 2 * self.p ** 2 / self.q * e[2],
             br(e[1], e[2]) - 2 * self.q * e[0],
             br(e[2], e[0]) - 2 * self.q * e[1]]
        return float(max(np.abs(x).max() for x in r))


# reference (p, q, lambda, mu) tuples for the Gamma computation
REFERENCE_PARAMETERS = {
    "L2": CaseParameters(R5 / 3, -5 / 3, -1.0, 1 / 3),
    "A2": CaseParameters(R15 / 9, -5 / 9, -1.0, 23 / 9),
    "A3": CaseParameters(5 * R19 / 57, 5 / 3, 141 / 19, -1.0),
}


def case_parameters(case: str) -> CaseParameters:
    """(p, q) from the frame scales and (lambda, mu) from the assembled operator."""
    s = _setup(case)
    if s.group != "SU2":
        raise ValueError(f"{case} is not an SU(2) orbit")
    if abs(s.scales[0] - s.scales[1]) > 1e-14:
        raise ValueError("frame is not of the form {pE1, pE2, qE3}")
    D = assemble_D(case)
    return CaseParameters(s.scales[0], s.scales[2], D.lam, D.mu)


def gamma_eigenvalue(params: CaseParameters, n: int, k: int, flipped_sign: bool = False) -> float:
    """Eigenvalue of Gamma_{p,q,lambda,mu,alpha} on <rho_n(.) v_k, u>.

    With i e3 acting by q(2k - n) the linear term is +(q(lambda - mu) + 2(p^2 - q^2))(n - 2k).
    flipped_sign=True negates it, to show that the opposite sign misses the kernel.
    """
    p, q, lam, mu, a = params.p, params.q, params.lam, params.mu, params.alpha
    m = n - 2 * k
    lin = (q * (lam - mu) + 2 * (p * p - q * q)) * m
    if flipped_sign:
        lin = -lin
    return (q * q - p * p) * m * m + p * p * (n * n + 2 * n) + lin + (-2 * q + lam - a) * (a - mu)


def laplacian_eigenvalue(params: CaseParameters, n: int, k: int) -> float:
    p, q = params.p, params.q
    return (q * q - p * p) * (n - 2 * k) ** 2 + p * p * (n * n + 2 * n)


def su2_frame_operators(params: CaseParameters, n: int):
    """e_1, e_2, e_3 as matrices on the coefficient space of <rho_n(.) v_k, u>."""
    return tuple(c * drho(E, n) for c, E in zip((params.p, params.p, params.q), SU2_BASIS))


@dataclass(frozen=True)
class KernelSolution:
    n: int
    psi1_mode: int | None       # k of the Psi_1 component
    psi2_mode: int | None       # k of the Psi_2 component
    ratio: complex | None       # Psi_1 coefficient over Psi_2 coefficient
    complex_multiplicity: int   # n + 1 choices of the column vector u
    equivariant: bool = True

    @property
    def real_dimension(self) -> int:
        return 2 * self.complex_multiplicity if self.equivariant else 0


def z3_phases(case: str = "A2", tol: float = 1e-9) -> tuple[int, int]:
    """Phases (r1, r2): h = diag(w, w~) acts on (Psi_1, Psi_2) by (w^r1, w^r2).

    Requires h to fix the base point; the normal frame is then rotated by h.
    """
    fr = build_normal_frame(case)
    s = _setup(case)
    if s.action != "SU2_irr":
        raise ValueError("Z3 symmetry is only defined for the irreducible action")
    w = np.exp(2j * np.pi / 3)
    H = realify(irr_map(np.diag([w, np.conj(w)])))
    if np.abs(H @ fr.base - fr.base).max() > tol:
        raise ValueError(f"{case}: h does not fix the base point")
    R = _frame_rotation(fr, H)
    W = np.array([[1, 0, 0, 1j], [0, 1, -1j, 0]])
    Phi = W @ R @ W.conj().T / 2
    if np.abs(W @ R - Phi @ W).max() > tol or abs(Phi[0, 1]) + abs(Phi[1, 0]) > tol:
        raise ValueError("h does not act diagonally on (Psi_1, Psi_2)")
    out = []
    for z in np.diag(Phi):
        r = int(round(np.angle(z) / (2 * np.pi / 3))) % 3
        if abs(z - w ** r) > tol:
            raise ValueError("phase is not a cube root of unity")
        out.append(r)
    return tuple(out)


def _frame_rotation(fr: NormalFrame, H: np.ndarray) -> np.ndarray:
    """R[k, j] = g~(V_k, H V_j): H V_j = sum_k R[k, j] V_k."""
    G = squashed_structure().metric_matrix(fr.base)
    return np.array([[fr.V[k] @ G @ H @ fr.V[j] for j in range(4)] for k in range(4)])


def _mode_equivariant(n, k, r) -> bool:
    # Psi(g) = w^r Psi(g h) and <rho(gh) v_k, u> = w^(n-2k) <rho(g) v_k, u>
    return (r + n - 2 * k) % 3 == 0


def kernel_solutions(case: str, n_max: int = 10, tol: float = 1e-9,
                     params: CaseParameters | None = None,
                     equivariance: str | None = "auto") -> list[KernelSolution]:
    """Solutions of D psi = alpha psi up to degree n_max from the Gamma reduction.

    Psi_2 = <rho_n v_k, u> is a candidate iff Gamma vanishes on it; Psi_1 is
    then reconstructed from the second equation and the first is re-checked.
    The sector Psi_2 = 0 contributes Psi_1 = <rho_n v_0, u> when q n + lambda = alpha.
    """
    P = case_parameters(case) if params is None else params
    p, q, lam, mu, a = P.p, P.q, P.lam, P.mu, P.alpha
    phases = None
    if equivariance == "auto" and case == "A2":
        equivariance = "Z3"
    if equivariance == "Z3":
        phases = z3_phases(case)
    sols = []
    for n in range(n_max + 1):
        if abs(q * n + lam - a) < tol:
            eq = True if phases is None else _mode_equivariant(n, 0, phases[0])
            sols.append(KernelSolution(n, 0, None, None, n + 1, eq))
        for k in range(n + 1):
            if abs(gamma_eigenvalue(P, n, k)) > tol:
                continue
            d2 = q * (2 * k - n) + mu - a
            if k == n:
                if abs(d2) > tol:
                    continue
                ratio, k1 = None, None
            else:
                ratio = -d2 / (2 * p * math.sqrt((k + 1) * (n - k)))
                k1 = k + 1
                d1 = -q * (2 * k + 2 - n) + lam - a
                if abs(d1 * ratio + 2 * p * math.sqrt((k + 1) * (n - k))) > tol:
                    continue
            eq = True
            if phases is not None:
                eq = _mode_equivariant(n, k, phases[1])
                if k1 is not None and _mode_equivariant(n, k1, phases[0]) != eq:
                    raise ValueError("Psi_1 and Psi_2 components disagree on equivariance")
            sols.append(KernelSolution(n, k1, k, ratio, n + 1, eq))
    return sols


def _stabilized(fn, n_max):
    if n_max < 8:
        raise ValueError("n_max must be at least 8")
    lo, hi = fn(n_max - 2), fn(n_max)
    if lo != hi:
        raise RuntimeError(f"dimension not stabilised: {lo} at n_max-2, {hi} at n_max")
    return hi


def kernel_dimension(case: str, n_max: int = 10, gamma_max: int = 4) -> int:
    """Real dimension of {psi : D psi = -psi}."""
    if case == "A1":
        return t3_kernel(gamma_max).dimension
    return _stabilized(lambda n: sum(s.real_dimension for s in kernel_solutions(case, n)), n_max)


# ---------------------------------------------------------------- brute force


AMBIGUOUS = (1e-10, 1e-6)
RANK_REL = 1e-8


def _kernel_dim(M: np.ndarray) -> int:
    if M.shape[1] == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    top = max(float(s[0]), 1.0) if s.size else 1.0
    rel = np.concatenate([s / top, np.zeros(M.shape[1] - s.size)])
    amb = rel[(rel >= AMBIGUOUS[0]) & (rel <= AMBIGUOUS[1])]
    if amb.size:
        raise RuntimeError(f"singular value {amb[0]:.3e} is ambiguous; increase precision")
    return int(np.sum(rel < RANK_REL))


def _block_operator(symbol, zeroth, e_ops, alpha):
    size = e_ops[0].shape[0]
    M = np.kron(zeroth - alpha * np.eye(4), np.eye(size)).astype(complex)
    for i in range(3):
        M += np.kron(symbol[i], e_ops[i])
    return M


def brute_force_kernel(case: str, n_max: int = 10, alpha: float = -1.0,
                       equivariance: str | None = "auto", gamma_max: int = 4) -> int:
    """Kernel of D - alpha on all matrix coefficients with n <= n_max.

    The operator is assembled from the computed connection and cross table and
    from d rho_n realised on polynomials, so it shares nothing with the Gamma
    reduction.  Each (n, column) block is identical, hence the (n + 1) factor.
    """
    if case == "A1":
        return t3_brute_force(gamma_max, alpha)
    if n_max < 8:
        raise ValueError("n_max must be at least 8")
    fr = build_normal_frame(case)
    cd = connection_data(case)
    symbol, Z = cd.symbol, cd.zeroth
    if equivariance == "auto":
        equivariance = "Z3" if case == "A2" else None
    R = None
    if equivariance == "Z3":
        w = np.exp(2j * np.pi / 3)
        R = _frame_rotation(fr, realify(irr_map(np.diag([w, np.conj(w)]))))
    total = 0
    for n in range(n_max + 1):
        e_ops = tuple(c * drho(E, n) for c, E in zip(fr.scales, SU2_BASIS))
        M = _block_operator(symbol, Z, e_ops, alpha)
        if R is not None:
            T = np.kron(R, np.diag([w ** (n - 2 * k) for k in range(n + 1)]))
            Q = null_space(T - np.eye(T.shape[0]), rcond=1e-10)
            M = M @ Q
        total += (n + 1) * _kernel_dim(M)
    return total


# ---------------------------------------------------------------- the torus case


@dataclass(frozen=True)
class FourierMode:
    gamma: tuple
    M_gamma: np.ndarray


def m_gamma(gamma) -> np.ndarray:
    g1, g2, g3 = gamma
    r = R6
    return np.array([
        [8 - 9 * g1 ** 2, 3 * r * g1 * g3 - 4j * r * g2, -3 * r * g1 * g2 - 4j * r * g3],
        [3 * r * g1 * g3 + 4j * r * g2, -6 * g3 ** 2 + 24, 6 * g2 * g3 - 12j * g1],
        [-3 * r * g1 * g2 + 4j * r * g3, 6 * g2 * g3 + 12j * g1, -6 * g2 ** 2 + 24],
    ], dtype=complex)


def det_closed_form(gamma) -> float:
    g1, g2, g3 = gamma
    return 16 * ((9 * g1 ** 2 + 6 * g2 ** 2 + 6 * g3 ** 2 - 22) ** 2 + 4 * (12 * (g2 ** 2 + g3 ** 2) - 49))


def eliminated_system(gamma) -> np.ndarray:
    """3x3 system on (psi1, psi3, psi4) after eliminating psi2, from the assembled operator."""
    D = assemble_D("A1")
    s = _setup("A1")
    ev = [1j * c * gi for c, gi in zip(s.scales, gamma)]
    A = sum(D.symbol[i] * ev[i] for i in range(3)) + D.zeroth + np.eye(4)
    keep = [0, 2, 3]
    # row 1 reads A[1,1] psi2 + sum_j A[1,j] psi_j = 0
    elim = A[np.ix_(keep, keep)] - np.outer(A[keep, 1], A[1, keep]) / A[1, 1]
    return elim


def t3_deck_invariant(gamma) -> bool:
    """f_gamma is invariant under the kernel (pi, pi, pi) of the torus parametrisation."""
    return sum(gamma) % 2 == 0


@dataclass(frozen=True)
class T3Kernel:
    dimension: int
    modes: tuple
    det_residual: float
    kernel_dims: dict = field(repr=False)


def t3_kernel(gamma_max: int = 4, tol: float = 1e-8) -> T3Kernel:
    if gamma_max < 3:
        raise ValueError("gamma_max must be at least 3")
    modes, det_res, dims = [], 0.0, {}
    rng = range(-gamma_max, gamma_max + 1)
    for g in product(rng, rng, rng):
        M = m_gamma(g)
        cf = det_closed_form(g)
        det_res = max(det_res, abs(np.linalg.det(M) - cf) / max(1.0, abs(cf)))
        s = np.linalg.svd(M, compute_uv=False)
        kd = int(np.sum(s < tol * max(1.0, s[0])))
        if kd not in (0, 1):
            raise RuntimeError(f"dim ker M_gamma = {kd} at gamma = {g}")
        if kd:
            modes.append(g)
            dims[g] = kd
    for g in modes:
        if tuple(-x for x in g) not in dims:
            raise RuntimeError(f"mode {g} has no conjugate partner")
    # C_gamma = conj(C_-gamma): each +- pair carries one complex, i.e. two real, parameters
    dim = sum(dims.values())
    return T3Kernel(dim, tuple(sorted(modes)), float(det_res), dims)


def t3_brute_force(gamma_max: int = 4, alpha: float = -1.0, deck: bool = True) -> int:
    """Kernel of D - alpha on Fourier modes in the box, 4x4 block per mode."""
    D = assemble_D("A1")
    s = _setup("A1")
    total = 0
    rng = range(-gamma_max, gamma_max + 1)
    for g in product(rng, rng, rng):
        if deck and not t3_deck_invariant(g):
            continue
        ev = [1j * c * gi for c, gi in zip(s.scales, g)]
        A = sum(D.symbol[i] * ev[i] for i in range(3)) + D.zeroth - alpha * np.eye(4)
        total += _kernel_dim(A)
    return total


# ---------------------------------------------------------------- trivial deformations


def _element_map(case: str):
    """Homomorphism from SU(2) (2x2) or T^3 parameters to real 8x8 matrices."""
    s = _setup(case)
    if s.action == "Sp1_L":
        return sp1_from_su2
    if s.action == "SU2_diag":
        return lambda g: realify(diag_map(g))
    if s.action == "SU2_irr":
        return lambda g: realify(irr_map(g))
    return lambda th: t3_element(*th)


def _random_element(case: str, rng) -> np.ndarray:
    fm = _element_map(case)
    if _setup(case).group == "T3":
        return fm(rng.uniform(0, 2 * np.pi, size=3))
    return fm(su2_from_params(rng.normal(size=4)))


def orbit_samples(case: str, n: int, seed: int = 0):
    """Random orbit points g p0 with the transported tangent and normal frames."""
    fr = build_normal_frame(case)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g = _random_element(case, rng)
        out.append((g @ fr.base, fr.e @ g.T, fr.V @ g.T))
    return out


def _left_translate(case: str, x, i: int, t: float):
    """Group parameter for x exp(t X_i) with X_i the i-th basis element."""
    if _setup(case).group == "T3":
        y = np.array(x, dtype=float)
        y[i] += t
        return y
    return x @ expm(t * SU2_BASIS[i])


@dataclass(frozen=True)
class TrivialDeformations:
    rank: int
    singular_values: np.ndarray
    gap: float
    equation_residual: float


def _normal_field(case, Y, x):
    fr = build_normal_frame(case)
    g = _element_map(case)(x)
    pt = g @ fr.base
    G = squashed_structure().metric_matrix(pt)
    return np.array([(Y @ pt) @ G @ (g @ v) for v in fr.V])


def trivial_deformation_rank(case: str, n_samples: int = 12, seed: int = 0,
                             check_equation: bool = True, h: float = 1e-4) -> TrivialDeformations:
    """Rank of the normal parts of the 13 Killing fields of Sp(1)Sp(2) along the orbit.

    With check_equation each field is also tested against D psi = -psi by
    central differences along the left-invariant frame.
    """
    s = _setup(case)
    gens = sp1sp2_generators()
    D = assemble_D(case)
    rng = np.random.default_rng(seed)
    if s.group == "T3":
        xs = [rng.uniform(0, 2 * np.pi, size=3) for _ in range(n_samples)]
    else:
        xs = [su2_from_params(rng.normal(size=4)) for _ in range(n_samples)]
    rows, worst = [], 0.0
    for Y in gens:
        row = []
        for x in xs:
            psi = _normal_field(case, Y, x)
            row.append(psi)
            if check_equation:
                dpsi = [s.scales[i] * (_normal_field(case, Y, _left_translate(case, x, i, h))
                                       - _normal_field(case, Y, _left_translate(case, x, i, -h))) / (2 * h)
                        for i in range(3)]
                Dpsi = sum(D.symbol[i] @ dpsi[i] for i in range(3)) + D.zeroth @ psi
                worst = max(worst, float(np.abs(Dpsi + psi).max()))
        rows.append(np.concatenate(row))
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    r = int(np.sum(sv > 1e-8 * sv[0]))
    gap = float(sv[r - 1] / sv[r]) if r < len(sv) and sv[r] > 0 else math.inf
    return TrivialDeformations(r, sv, gap, worst)


def stabilizer_dimension(case: str, n_samples: int = 12, seed: int = 0) -> int:
    """Dimension of the subalgebra of sp(1)+sp(2) whose Killing fields are tangent to the orbit."""
    return len(sp1sp2_generators()) - trivial_deformation_rank(case, n_samples, seed,
                                                               check_equation=False).rank


def hopf_circle_normal_part(case: str, n_samples: int = 10, seed: int = 0) -> float:
    """Max normal component of I_1 x = -xi_1(x) along the orbit.

    Zero means the circle action u -> e^{i t} u preserves the orbit.
    """
    fr = build_normal_frame(case)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        g = _random_element(case, rng)
        x = g @ fr.base
        G = squashed_structure().metric_matrix(x)
        worst = max(worst, max(abs((I_MATS[0] @ x) @ G @ (g @ v)) for v in fr.V))
    return float(worst)


# ---------------------------------------------------------------- spectrum dump


def spectrum_rows(case: str, n_max: int = 10, tol: float = 1e-9):
    P = case_parameters(case)
    kern = {(s.n, s.psi2_mode) for s in kernel_solutions(case, n_max) if s.psi2_mode is not None
            and s.equivariant}
    for n in range(n_max + 1):
        for k in range(n + 1):
            val = gamma_eigenvalue(P, n, k)
            yield case, n, k, val, (n, k) in kern


def write_spectrum_csv(path, cases=SU2_CASES, n_max: int = 10) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "n", "k", "gamma_eigenvalue", "in_kernel"])
        for c in cases:
            for case, n, k, val, ink in spectrum_rows(c, n_max):
                w.writerow([case, n, k, f"{val:.12g}", int(ink)])


__all__ = [
    "CASE_TAGS", "SU2_CASES", "CROSS_TABLE", "D_SYMBOL", "CASE_SETUPS", "REFERENCE_CONNECTIONS",
    "REFERENCE_PARAMETERS", "NormalFrame", "build_normal_frame", "reference_normal_frame",
    "connection_matrix", "connection_deviation", "connection_data", "ConnectionData",
    "tangential_gamma", "structure_constants", "levi_civita_from_brackets",
    "reconstruct_from_gamma_k", "diff_cross_residual", "DOperator", "assemble_D", "zeroth_order",
    "MatrixCoefficient", "RAISE", "LOWER", "IE3", "ladder_apply", "drho", "rho_matrix",
    "matrix_coefficient_value", "CaseParameters", "case_parameters", "gamma_eigenvalue",
    "laplacian_eigenvalue", "su2_frame_operators", "KernelSolution", "kernel_solutions",
    "kernel_dimension", "z3_phases", "brute_force_kernel", "FourierMode", "m_gamma",
    "det_closed_form", "eliminated_system", "t3_kernel", "T3Kernel", "t3_brute_force",
    "t3_deck_invariant", "trivial_deformation_rank", "stabilizer_dimension",
    "hopf_circle_normal_part", "orbit_samples", "TrivialDeformations", "spectrum_rows",
    "write_spectrum_csv",
]
