"""Flat G2 / Spin(7) model forms and the calibration predicates built on them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exterior import (
    MetricAtPoint, PolyForm, Tangent, _arr, contract, dz, evaluate, evaluate_batch,
    frame_components, wedge, wedge_all,
)

DEFAULT_TOL = 1e-9


def _dx(*axes):
    return PolyForm.dx(*axes)


@dataclass(frozen=True)
class ModelForms:
    phi0: PolyForm
    star_phi0: PolyForm
    Phi0: PolyForm
    omega0: PolyForm
    Omega0_re: PolyForm


def build_model() -> ModelForms:
    """phi0 lives on the axes 1..7 of R^8; Phi0 uses all eight axes."""
    phi0 = (_dx(1, 2, 3)
            + wedge(_dx(1), _dx(4, 5) + _dx(6, 7))
            + wedge(_dx(2), _dx(4, 6) - _dx(5, 7))
            - wedge(_dx(3), _dx(4, 7) + _dx(5, 6)))
    star_phi0 = (_dx(4, 5, 6, 7)
                 + wedge(_dx(2, 3), _dx(6, 7) + _dx(4, 5))
                 + wedge(_dx(1, 3), _dx(5, 7) - _dx(4, 6))
                 - wedge(_dx(1, 2), _dx(5, 6) + _dx(4, 7)))
    Phi0 = wedge(_dx(0), phi0) + star_phi0
    omega0 = _dx(0, 1) + _dx(2, 3) + _dx(4, 5) + _dx(6, 7)
    Omega0 = dz(1) ^ dz(2) ^ dz(3) ^ dz(4)
    return ModelForms(phi0, star_phi0, Phi0, omega0, Omega0.re)


class FlatG2:
    """The flat model on R^7 = span(e1..e7) inside R^8."""

    def __init__(self):
        m = build_model()
        self.phi = m.phi0
        self.star_phi = m.star_phi0

    def metric(self, p=None) -> MetricAtPoint:
        basis = np.eye(8)[1:]
        return MetricAtPoint(np.zeros(8), basis, np.eye(7), np.eye(8))


def _coords(basis: np.ndarray, v) -> np.ndarray:
    c, *_ = np.linalg.lstsq(basis.T, _arr(v), rcond=None)
    return c


def metric_from_phi(phi: PolyForm, v1, v2, p=None, basis=None) -> float:
    """g(v1, v2) recovered from 6 g(v1,v2) vol = i(v1)phi ^ i(v2)phi ^ phi.

    ``basis`` spans the 7-dimensional space the form is restricted to
    (default: axes 1..7, the flat model).
    """
    basis = np.eye(8)[1:] if basis is None else np.asarray(basis, dtype=float)
    p = np.zeros(8) if p is None else _arr(p)
    f = frame_components(phi, p, basis)
    n = basis.shape[0]
    e = np.eye(n)
    contr = [contract(f, e[i]) for i in range(n)]
    B = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            top = wedge_all(contr[i], contr[j], f)
            val = float(top.constant_coefficient(*range(n))) / 6.0
            B[i, j] = B[j, i] = val
    det = np.linalg.det(B)
    if abs(det) < 1e-14:
        raise ValueError("degenerate volume: the form is not a G2 form here")
    G = np.sign(det) * B / abs(det) ** (1.0 / 9.0)
    return float(_coords(basis, v1) @ G @ _coords(basis, v2))


class Spin7Check(NamedTuple):
    volume_ratio: float
    pair_ratio: float
    degenerate: bool


def spin7_metric_checks(Phi: PolyForm, w1, w2, p=None) -> Spin7Check:
    p = np.zeros(8) if p is None else _arr(p)
    I8 = np.eye(8)
    top = wedge(Phi, Phi)
    vol = evaluate(top, p, I8)
    w1, w2 = _arr(w1), _arr(w2)
    norm2 = float(w1 @ w1 * (w2 @ w2) - (w1 @ w2) ** 2)
    if norm2 < 1e-14:
        return Spin7Check(vol, 0.0, True)
    beta = contract(contract(Phi, w1), w2)
    val = evaluate(wedge_all(beta, beta, Phi), p, I8)
    return Spin7Check(vol, val / (6.0 * norm2), False)


def cross_product(phi: PolyForm, m: MetricAtPoint, u, v, p=None) -> np.ndarray:
    """u x v defined by g(u x v, w) = phi(u, v, w) on the tangent space of m."""
    p = m.base if p is None else _arr(p)
    B = m.basis
    k = B.shape[0]
    P = np.repeat(p[None], k, axis=0)
    V = np.stack([np.repeat(_arr(u)[None], k, 0), np.repeat(_arr(v)[None], k, 0), B], axis=1)
    rhs = evaluate_batch(phi, P, V)
    try:
        c = np.linalg.solve(m.gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular Gram matrix") from exc
    return c @ B


@dataclass(frozen=True)
class AssociativityResult:
    passed: bool
    residual: float
    star_residual: float
    calibration_residual: float
    agree: bool

    def __iter__(self):
        yield self.passed
        yield self.residual


def orthonormalize(vs, m: MetricAtPoint) -> np.ndarray:
    """Gram-Schmidt in the metric of m; error on (numerically) dependent input."""
    V = np.array([_arr(v) for v in vs], dtype=float)
    G = V @ m.ambient @ V.T
    scale = np.max(np.abs(np.diag(G)))
    ev = np.linalg.eigvalsh(G)
    if scale == 0 or ev[0] < 1e-12 * scale:
        raise ValueError("vectors are linearly dependent")
    L = np.linalg.cholesky(G)
    return np.linalg.solve(L, V)


def is_associative(span, structure, p=None, tol: float = DEFAULT_TOL) -> AssociativityResult:
    """Dual test: *phi(u1,u2,u3,.) = 0 and |phi(u1,u2,u3)| = 1 on an orthonormalised triple."""
    if len(span) != 3:
        raise ValueError("an associative test needs exactly three vectors")
    if p is None:
        first = span[0]
        p = first.base.coords if isinstance(first, Tangent) else np.zeros(8)
    p = _arr(p)
    m = structure.metric(p)
    U = orthonormalize(span, m)
    F = m.orthonormal_frame()
    n = F.shape[0]
    P = np.repeat(p[None], n, axis=0)
    V = np.concatenate([np.repeat(U[None], n, axis=0), F[:, None, :]], axis=1)
    chi = np.abs(evaluate_batch(structure.star_phi, P, V))
    star_res = float(np.max(chi))
    cal = abs(1.0 - abs(evaluate(structure.phi, p, U)))
    a, b = star_res <= tol, cal <= tol
    return AssociativityResult(a and b, max(star_res, cal), star_res, cal, a == b)
