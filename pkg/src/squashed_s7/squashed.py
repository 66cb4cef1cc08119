"""Canonical variation of the round S^7 and the squashed nearly parallel G2-structure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .exterior import (
    MetricAtPoint, PolyForm, _arr, evaluate_batch, exterior_derivative, frame_components,
    hodge_star_at, wedge, wedge_all,
)
from .sasakian import XI_MATS, eta_value, phi_tensor, sasakian_data, xi


@dataclass(frozen=True)
class VariationParams:
    s: float
    t: float
    t2: float = field(default=None)

    def __post_init__(self):
        if not (self.s > 0 and self.t > 0):
            raise ValueError("s and t must be positive")
        if self.t2 is None:
            object.__setattr__(self, "t2", self.t * self.t)

    @classmethod
    def squashed(cls) -> "VariationParams":
        return cls(Fraction(3, 5), math.sqrt(9 / 5), Fraction(9, 5))

    @classmethod
    def round(cls) -> "VariationParams":
        return cls(Fraction(1), Fraction(1))


SQUASHED = VariationParams.squashed()


@lru_cache(maxsize=None)
def building_blocks():
    """s,t-independent pieces: eta123, sum eta_i^omega_i, sum omega_i^2, sum eta_jk^omega_i."""
    d = sasakian_data()
    eta, om = d.eta, d.omega
    eta123 = wedge_all(*eta)
    sum_eta_omega = sum((wedge(eta[i], om[i]) for i in range(3)), PolyForm.zero(3))
    sum_omega2 = sum((wedge(om[i], om[i]) for i in range(3)), PolyForm.zero(4))
    sum_etajk_omega = sum((wedge_all(eta[(i + 1) % 3], eta[(i + 2) % 3], om[i]) for i in range(3)),
                          PolyForm.zero(4))
    return {
        "eta123": eta123,
        "sum_eta_omega": sum_eta_omega,
        "sum_omega2": sum_omega2,
        "sum_etajk_omega": sum_etajk_omega,
        "d_eta123": exterior_derivative(eta123),
        "d_sum_eta_omega": exterior_derivative(sum_eta_omega),
    }


def _coef(x):
    return x if isinstance(x, (int, Fraction)) else float(x)


class SquashedStructure:
    """phi = s^3 eta123 + s t^2 sum eta_i ^ omega_i and its companions."""

    def __init__(self, params: VariationParams = SQUASHED):
        self.params = params
        s, t2 = params.s, params.t2
        b = building_blocks()
        self.G1 = b["eta123"] * _coef(s ** 3)
        self.G2 = b["sum_eta_omega"] * _coef(s * t2)
        self.phi = self.G1 + self.G2
        self.starG1 = b["sum_omega2"] * _coef(t2 * t2 / 6)
        self.starG2 = b["sum_etajk_omega"] * _coef(s * s * t2)
        self.star_phi = self.starG1 + self.starG2
        self.dphi = b["d_eta123"] * _coef(s ** 3) + b["d_sum_eta_omega"] * _coef(s * t2)

    # metric
    def metric_matrix(self, p) -> np.ndarray:
        """Ambient matrix of g~ on T_pS^7 (the radial direction is given unit length)."""
        p = _arr(p)
        s2, t2 = float(self.params.s) ** 2, float(self.params.t2)
        Xi = np.array([xi(i, p) for i in (1, 2, 3)])
        P = np.outer(p, p)
        return t2 * (np.eye(8) - P) + (s2 - t2) * Xi.T @ Xi + P

    def metric(self, p) -> MetricAtPoint:
        return MetricAtPoint.from_ambient(p, self.metric_matrix(p))

    def g(self, p, u, v) -> float:
        return float(_arr(u) @ self.metric_matrix(p) @ _arr(v))


@lru_cache(maxsize=None)
def squashed_structure() -> SquashedStructure:
    return SquashedStructure(SQUASHED)


def g_tilde(params: VariationParams, p, u, v) -> float:
    p, u, v = _arr(p), _arr(u), _arr(v)
    s2, t2 = float(params.s) ** 2, float(params.t2)
    vert = sum(eta_value(i, p, u) * eta_value(i, p, v) for i in (1, 2, 3))
    return (s2 - t2) * vert + t2 * float(u @ v)


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    P = rng.normal(size=(n, 8))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def random_tangents(rng: np.random.Generator, p, k: int) -> np.ndarray:
    p = _arr(p)
    V = rng.normal(size=(k, 8))
    V -= np.outer(V @ p, p)
    return V / np.linalg.norm(V, axis=1, keepdims=True)


class NearlyParallelResidual(NamedTuple):
    parametric: float          # against 12/s *G1 + (2s/t^2 + 2/s) *G2
    nearly_parallel: float     # against 4 *phi
    parametric_corrected: float  # against 12s/t^2 *G1 + (2s/t^2 + 2/s) *G2


def verify_nearly_parallel(params: VariationParams = SQUASHED, n_points: int = 100,
                           n_tuples: int = 20, seed: int = 0) -> NearlyParallelResidual:
    st = SquashedStructure(params)
    s, t2 = float(params.s), float(params.t2)
    rng = np.random.default_rng(seed)
    P = random_sphere_points(rng, n_points)
    PP = np.repeat(P, n_tuples, axis=0)
    V = np.array([random_tangents(rng, p, 4) for p in PP])
    dphi = evaluate_batch(st.dphi, PP, V)
    sg1 = evaluate_batch(st.starG1, PP, V)
    sg2 = evaluate_batch(st.starG2, PP, V)
    param = dphi - (12 / s) * sg1 - (2 * s / t2 + 2 / s) * sg2
    near = dphi - 4 * (sg1 + sg2)
    corrected = dphi - (12 * s / t2) * sg1 - (2 * s / t2 + 2 / s) * sg2
    return NearlyParallelResidual(*(float(np.max(np.abs(r))) for r in (param, near, corrected)))


BASE_POINT = np.eye(8)[0]


@lru_cache(maxsize=None)
def sphere_orientation() -> int:
    """Sign making the pointwise star of phi~ equal the stored *phi~ at (1,0,0,0).

    +1 means T_pS^7 is oriented so that (p, frame) is positive in R^8.
    """
    st = squashed_structure()
    m = st.metric(BASE_POINT)
    star = hodge_star_at(st.phi, BASE_POINT, m, orientation=1)
    F = m.orthonormal_frame()
    stored = frame_components(st.star_phi, BASE_POINT, F)
    diff_plus = max(abs(star.components().get(k, 0.0) - float(f.terms[(0,) * 7]))
                    for k, f in stored.terms.items())
    if diff_plus < 1e-9:
        return 1
    return -1


def star_deviation(st: SquashedStructure, p, orientation: int | None = None) -> float:
    """max |(pointwise star of phi) - (stored *phi)| over frame 4-subsets at p."""
    orientation = sphere_orientation() if orientation is None else orientation
    m = st.metric(p)
    star = hodge_star_at(st.phi, p, m, orientation=orientation).components()
    F = m.orthonormal_frame()
    stored = frame_components(st.star_phi, p, F)
    keys = set(star) | set(stored.terms)
    stored_c = {k: float(f.terms[(0,) * 7]) for k, f in stored.terms.items()}
    return max(abs(star.get(k, 0.0) - stored_c.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------- connection


def theta_tensor(p, E1, E2) -> np.ndarray:
    """Theta(E1, E2) = sum eta_i(E1) Phi_i(E2) + eta_i(E2) Phi_i(E1)."""
    return sum(eta_value(i, p, E1) * phi_tensor(i, p, E2) + eta_value(i, p, E2) * phi_tensor(i, p, E1)
               for i in (1, 2, 3))


def A_tensor(p, X, U) -> np.ndarray:
    """A_X U = -sum eta_i(U) Phi_i(X)."""
    return -sum(eta_value(i, p, U) * phi_tensor(i, p, X) for i in (1, 2, 3))


@dataclass(frozen=True)
class OrbitField:
    """V(g p0) = g v along an orbit; the ambient derivative along A p is A V(p)."""

    generators: tuple
    value: np.ndarray

    def derivative(self, p, X) -> np.ndarray:
        p = _arr(p)
        gens = [np.asarray(A) for A in self.generators]
        cols = np.array([A @ p for A in gens]).T
        c, res, rank, _ = np.linalg.lstsq(cols, _arr(X), rcond=None)
        if np.linalg.norm(cols @ c - _arr(X)) > 1e-9 * max(1.0, np.linalg.norm(X)):
            raise ValueError("direction is not tangent to the orbit")
        return sum(ci * (A @ self.value) for ci, A in zip(c, gens))


def _ambient_derivative(p, X, V):
    if isinstance(V, OrbitField):
        return V.derivative(p, X)
    if isinstance(V, tuple) and len(V) == 2:
        return _arr(V[1])
    raise ValueError("vector field needs an equivariant derivative rule")


def nabla_round(p, X, V) -> np.ndarray:
    """Round Levi-Civita: tangential part of the ambient derivative.

    V is an OrbitField or a pair (value, ambient derivative along X).
    """
    p = _arr(p)
    dV = _ambient_derivative(p, X, V)
    return dV - float(dV @ p) * p


def _value(V):
    return V.value if isinstance(V, OrbitField) else _arr(V[0])


def nabla_tilde(p, X, V, params: VariationParams = SQUASHED) -> np.ndarray:
    """nabla~ = nabla + (-1 + s^2/t^2)(A_{X} V^perp + A_{V} X^perp)."""
    p, X = _arr(p), _arr(X)
    coeff = -1.0 + float(params.s) ** 2 / float(params.t2)
    Vv = _value(V)
    corr = A_tensor(p, X, _vert(p, Vv)) + A_tensor(p, Vv, _vert(p, X))
    return nabla_round(p, X, V) + coeff * corr


def _vert(p, v):
    return sum(eta_value(i, p, v) * xi(i, p) for i in (1, 2, 3))


__all__ = [
    "VariationParams", "SQUASHED", "SquashedStructure", "squashed_structure", "g_tilde",
    "verify_nearly_parallel", "sphere_orientation", "star_deviation", "theta_tensor",
    "A_tensor", "OrbitField", "nabla_round", "nabla_tilde", "random_sphere_points",
    "random_tangents", "building_blocks", "XI_MATS",
]
