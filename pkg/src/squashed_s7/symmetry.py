"""The five group actions on S^7, their generators, and related frame data."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import minimize

from .exterior import _arr, conj_matrix, evaluate_batch, realify
from .sasakian import I_MATS, J_COMPLEX, eta_value
from .squashed import random_sphere_points, random_tangents, squashed_structure

SQ3 = np.sqrt(3.0)

# su(2) basis with [E_i, E_{i+1}] = 2 E_{i+2}
SU2_BASIS = (
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[0, 1j], [1j, 0]], dtype=complex),
    np.array([[1j, 0], [0, -1j]], dtype=complex),
)


def su2_element(a: complex, b: complex) -> np.ndarray:
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)


def su2_from_params(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    return su2_element(x[0] + 1j * x[1], x[2] + 1j * x[3])


def _ab(g2):
    g2 = np.asarray(g2, dtype=complex)
    return g2[0, 0], g2[1, 0]


def diag_map(g2) -> np.ndarray:
    a, b = _ab(g2)
    ac, bc = np.conj(a), np.conj(b)
    return np.array([[ac, 0, -b, 0], [0, a, 0, -bc], [bc, 0, a, 0], [0, b, 0, ac]], dtype=complex)


def small_map(g2) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[:2, :2] = g2
    return out


def irr_map(g2) -> np.ndarray:
    a, b = _ab(g2)
    ac, bc = np.conj(a), np.conj(b)
    A2, B2 = abs(a) ** 2, abs(b) ** 2
    return np.array([
        [a ** 3, -bc ** 3, SQ3 * a * bc ** 2, -SQ3 * a ** 2 * bc],
        [b ** 3, ac ** 3, SQ3 * ac ** 2 * b, SQ3 * ac * b ** 2],
        [SQ3 * a * b ** 2, -SQ3 * ac ** 2 * bc, ac * (A2 - 2 * B2), b * (2 * A2 - B2)],
        [SQ3 * a ** 2 * b, SQ3 * ac * bc ** 2, -bc * (2 * A2 - B2), a * (A2 - 2 * B2)],
    ], dtype=complex)


def _mat(entries, diag=None):
    M = np.zeros((4, 4), dtype=complex)
    for (r, c), v in entries.items():
        M[r - 1, c - 1] = v
    if diag is not None:
        M += np.diag(diag)
    return M


DIAG_GENERATORS = (
    _mat({(1, 3): 1, (2, 4): 1, (3, 1): -1, (4, 2): -1}),
    _mat({(1, 3): -1j, (2, 4): 1j, (3, 1): -1j, (4, 2): 1j}),
    _mat({}, [-1j, 1j, 1j, -1j]),
)
SMALL_GENERATORS = tuple(small_map(E) - np.diag([0, 0, 1, 1]) for E in SU2_BASIS)
IRR_GENERATORS = (
    _mat({(1, 4): SQ3, (2, 3): -SQ3, (3, 2): SQ3, (3, 4): -2, (4, 1): -SQ3, (4, 3): 2}),
    _mat({(1, 4): SQ3 * 1j, (2, 3): SQ3 * 1j, (3, 2): SQ3 * 1j, (3, 4): 2j, (4, 1): SQ3 * 1j,
          (4, 3): 2j}),
    _mat({}, [3j, -3j, -1j, 1j]),
)
T3_GENERATORS = (
    np.diag([1j, 1j, 1j, 1j]),
    np.diag([1j, -1j, 0, 0]),
    np.diag([0, 0, 1j, -1j]),
)


def sp1_element(a1: complex, a2: complex) -> np.ndarray:
    """Real matrix of u -> a1 u + a2 J conj(u)."""
    return realify(a1 * np.eye(4)) + realify(a2 * J_COMPLEX) @ conj_matrix(4)


def sp1_from_su2(g2) -> np.ndarray:
    """[[a, -b~], [b, a~]] acts as the quaternion a - b~ j."""
    a, b = _ab(g2)
    return sp1_element(a, -np.conj(b))


def t3_element(alpha, beta, gamma) -> np.ndarray:
    ph = np.exp(1j * np.array([alpha + beta, alpha - beta, alpha + gamma, alpha - gamma]))
    return realify(np.diag(ph))


@dataclass(frozen=True)
class GroupAction:
    tag: str
    generators: tuple              # real 8x8
    group_element_map: Callable    # parameters -> real 8x8
    abelian: bool = False
    complex_generators: tuple = ()

    def generator_field(self, i: int, p) -> np.ndarray:
        return self.generators[i - 1] @ _arr(p)

    def frame(self, p) -> np.ndarray:
        return np.array([G @ _arr(p) for G in self.generators])

    def element(self, params) -> np.ndarray:
        return self.group_element_map(params)


def _su2_action(tag, cgens, cmap):
    return GroupAction(tag, tuple(realify(E) for E in cgens),
                       lambda x: realify(cmap(su2_from_params(x))), False, tuple(cgens))


@lru_cache(maxsize=None)
def get_action(tag: str) -> GroupAction:
    if tag == "Sp1_L":
        gens = (I_MATS[1], I_MATS[2], I_MATS[0])
        return GroupAction(tag, gens, lambda x: sp1_from_su2(su2_from_params(x)))
    if tag == "T3":
        return GroupAction(tag, tuple(realify(F) for F in T3_GENERATORS),
                           lambda x: t3_element(*x), True, T3_GENERATORS)
    if tag == "SU2_diag":
        return _su2_action(tag, DIAG_GENERATORS, diag_map)
    if tag == "SU2_small":
        return _su2_action(tag, SMALL_GENERATORS, small_map)
    if tag == "SU2_irr":
        return _su2_action(tag, IRR_GENERATORS, irr_map)
    raise ValueError(f"unknown action {tag!r}")


ACTION_TAGS = ("Sp1_L", "T3", "SU2_diag", "SU2_small", "SU2_irr")


def generator_field(action, i: int, p) -> np.ndarray:
    action = get_action(action) if isinstance(action, str) else action
    return action.generator_field(i, p)


def structure_constants_residual(action, p, h: float = 1e-5) -> float:
    """Finite-difference brackets of generator fields against [E_j*, E_{j+1}*] = -2 E_{j+2}*."""
    from .sasakian import lie_bracket_fd
    action = get_action(action) if isinstance(action, str) else action
    G = action.generators
    worst = 0.0
    for j in range(3):
        X = lambda x, A=G[j]: A @ x
        Y = lambda x, A=G[(j + 1) % 3]: A @ x
        br = lie_bracket_fd(X, Y, p, h)
        expected = np.zeros(8) if action.abelian else -2 * G[(j + 2) % 3] @ _arr(p)
        worst = max(worst, float(np.max(np.abs(br - expected))))
    return worst


# ---------------------------------------------------------------- Sp(1)Sp(2)


@lru_cache(maxsize=None)
def sp2_basis() -> tuple:
    """Real basis (4x4 complex) of sp(2) = {X in u(4) : X^T J + J X = 0}."""
    rows = []
    n = 4
    # unknown X = A + iB with A, B real 4x4 -> 32 parameters
    basis = []
    for k in range(32):
        e = np.zeros(32)
        e[k] = 1
        X = (e[:16] + 1j * e[16:]).reshape(n, n)
        c1 = X + X.conj().T
        c2 = X.T @ J_COMPLEX + J_COMPLEX @ X
        rows.append(np.concatenate([c1.real.ravel(), c1.imag.ravel(), c2.real.ravel(), c2.imag.ravel()]))
    A = np.array(rows).T
    N = null_space(A)
    for col in N.T:
        basis.append((col[:16] + 1j * col[16:]).reshape(n, n))
    return tuple(basis)


@lru_cache(maxsize=None)
def sp1sp2_generators() -> tuple:
    """13 real 8x8 generators: sp(1) (acting by I_1, I_2, I_3) then sp(2)."""
    return tuple(I_MATS) + tuple(realify(X) for X in sp2_basis())


def random_sp2_element(rng: np.random.Generator) -> np.ndarray:
    B = sp2_basis()
    X = sum(rng.normal() * b for b in B)
    return realify(expm(X))


def random_sp1_element(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return sp1_element(q[0] + 1j * q[1], q[2] + 1j * q[3])


def random_u4_element(rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / abs(np.diag(R)))
    return realify(Q)


def invariance_check(g: np.ndarray, n_points: int = 50, seed: int = 0) -> float:
    """max |g*phi~ - phi~| and |g*g~ - g~| on random tangent tuples."""
    st = squashed_structure()
    rng = np.random.default_rng(seed)
    P = random_sphere_points(rng, n_points)
    V = np.array([random_tangents(rng, p, 3) for p in P])
    gP = P @ g.T
    gV = V @ g.T
    r1 = np.max(np.abs(evaluate_batch(st.phi, gP, gV) - evaluate_batch(st.phi, P, V)))
    r2 = 0.0
    for p, v, gp, gv in zip(P, V, gP, gV):
        a = v @ st.metric_matrix(p) @ v.T
        b = gv @ st.metric_matrix(gp) @ gv.T
        r2 = max(r2, float(np.max(np.abs(a - b))))
    return float(max(r1, r2))


# ---------------------------------------------------------------- M_q


def mq_matrix(a1: complex, a2: complex = 0.0) -> np.ndarray:
    """Rotation of (eta_1, eta_2, eta_3) under u -> q u, q = a1 + a2 j."""
    if abs(abs(a1) ** 2 + abs(a2) ** 2 - 1) > 1e-12:
        raise ValueError("q must be a unit quaternion")
    p = a1 * np.conj(a2)
    return np.array([
        [abs(a1) ** 2 - abs(a2) ** 2, 2 * p.imag, 2 * p.real],
        [2 * (a1 * a2).imag, (a1 ** 2 + a2 ** 2).real, (-a1 ** 2 + a2 ** 2).imag],
        [-2 * (a1 * a2).real, (a1 ** 2 + a2 ** 2).imag, (a1 ** 2 - a2 ** 2).real],
    ])


def mq_pullback_residual(a1, a2, n_points: int = 20, seed: int = 0) -> float:
    """max |q*eta_j - sum_i M_q[j, i] eta_i| on random tangents."""
    g = sp1_element(a1, a2)
    M = mq_matrix(a1, a2)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in random_sphere_points(rng, n_points):
        for v in random_tangents(rng, p, 3):
            pulled = np.array([eta_value(j, g @ p, g @ v) for j in (1, 2, 3)])
            base = np.array([eta_value(j, p, v) for j in (1, 2, 3)])
            worst = max(worst, float(np.max(np.abs(pulled - M @ base))))
    return worst


# ---------------------------------------------------------------- orbit frames


@dataclass(frozen=True)
class OrbitFrame:
    base: np.ndarray
    generator_vectors: np.ndarray
    lambdas: np.ndarray
    element: np.ndarray | None = None


def _offdiag(F):
    G = F @ F.T
    return float(G[0, 1] ** 2 + G[0, 2] ** 2 + G[1, 2] ** 2)


def orbit_lambda_normalize(action, p, order: str | None = None, n_starts: int = 20,
                           seed: int = 0, tol: float = 1e-10) -> OrbitFrame:
    """Move p along its orbit until the generator vectors are round-orthogonal."""
    action = get_action(action) if isinstance(action, str) else action
    p = _arr(p)
    F0 = action.frame(p)
    if np.linalg.matrix_rank(F0, tol=1e-8) < 3:
        raise ValueError("orbit through p is not 3-dimensional")
    if _offdiag(F0) < tol:
        best_g, best = np.eye(8), 0.0
    else:
        rng = np.random.default_rng(seed)
        dim = 3 if action.abelian else 4
        obj = lambda x: _offdiag(action.frame(action.element(x) @ p))
        best, best_g = np.inf, None
        for _ in range(n_starts):
            x0 = rng.normal(size=dim)
            res = minimize(obj, x0, method="BFGS", options={"gtol": 1e-14})
            if res.fun < best:
                best, best_g = res.fun, action.element(res.x)
            if best < tol:
                break
        if best > tol:
            raise RuntimeError(f"no orthogonalising point found (best off-diagonal {best:.3e})")
    q = best_g @ p
    F = action.frame(q)
    lam = np.sum(F * F, axis=1)
    if order in ("asc", "desc"):
        idx = np.argsort(lam)
        if order == "desc":
            idx = idx[::-1]
        F, lam = F[idx], lam[idx]
    return OrbitFrame(q, F, lam, best_g)


def eta_matrix(action, p) -> np.ndarray:
    """M = (eta_i(E_j*)) at p."""
    action = get_action(action) if isinstance(action, str) else action
    return np.array([[eta_value(i, p, action.generator_field(j, p)) for j in (1, 2, 3)] for i in (1, 2, 3)])


def orbit_points(action, p, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random orbit points g p together with the group elements g."""
    action = get_action(action) if isinstance(action, str) else action
    rng = np.random.default_rng(seed)
    gs = []
    for _ in range(n):
        x = rng.uniform(0, 2 * np.pi, size=3) if action.abelian else rng.normal(size=4)
        gs.append(action.element(x))
    gs = np.array(gs)
    return gs @ _arr(p), gs
