"""The standard 3-Sasakian structure of the round S^7 in C^4."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import (
    PolyForm, PolyScalar, Tangent, _arr, conj_matrix, exterior_derivative, realify, wedge,
)

# J = diag(J', J'), J' = [[0, -1], [1, 0]]
J_COMPLEX = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=complex)


def _quaternionic_matrices():
    # I1 u = i u,  I2 u = J conj(u),  I3 u = i J conj(u)
    C = conj_matrix(4)
    I1 = realify(1j * np.eye(4))
    I2 = realify(J_COMPLEX) @ C
    I3 = realify(1j * J_COMPLEX) @ C
    return I1, I2, I3


I_MATS = _quaternionic_matrices()
J_MATRIX = realify(J_COMPLEX)
XI_MATS = tuple(-I for I in I_MATS)


def _idx(i: int) -> int:
    if i not in (1, 2, 3):
        raise ValueError("index must be 1, 2 or 3")
    return i - 1


def cyc(i: int, shift: int) -> int:
    """Cyclic index i+shift in {1,2,3}."""
    return (i - 1 + shift) % 3 + 1


def xi(i: int, p) -> np.ndarray:
    return XI_MATS[_idx(i)] @ _arr(p)


def xi_tangent(i: int, p) -> Tangent:
    from .exterior import SpherePoint
    sp = p if isinstance(p, SpherePoint) else SpherePoint(_arr(p))
    return Tangent(sp, xi(i, sp.coords))


def eta_value(i: int, p, v) -> float:
    return float(xi(i, p) @ _arr(v))


def phi_tensor(i: int, p, v) -> np.ndarray:
    """Phi_i v = I_i v - eta_i(v) p, the tangential part of I_i v."""
    p, v = _arr(p), _arr(v)
    return I_MATS[_idx(i)] @ v - eta_value(i, p, v) * p


def horizontal_projection(p, v) -> np.ndarray:
    p, v = _arr(p), _arr(v)
    return v - sum(eta_value(i, p, v) * xi(i, p) for i in (1, 2, 3))


def vertical_projection(p, v) -> np.ndarray:
    return _arr(v) - horizontal_projection(p, v)


def horizontal_frame(p, X0) -> np.ndarray:
    """Rows X0, Phi_1 X0, Phi_2 X0, Phi_3 X0 for a horizontal X0."""
    X0 = _arr(X0)
    return np.array([X0] + [phi_tensor(i, p, X0) for i in (1, 2, 3)])


def lie_bracket_fd(X, Y, p, h: float = 1e-5) -> np.ndarray:
    """[X, Y](p) = DY(p) X(p) - DX(p) Y(p) by central differences."""
    p = _arr(p)
    Xp, Yp = X(p), Y(p)
    dY = (Y(p + h * Xp) - Y(p - h * Xp)) / (2 * h)
    dX = (X(p + h * Yp) - X(p - h * Yp)) / (2 * h)
    return dY - dX


def linear_one_form(M: np.ndarray) -> PolyForm:
    """The 1-form v -> <M x, v> with linear coefficients (M integer)."""
    terms = {}
    for a in range(8):
        f = PolyScalar({})
        for b in range(8):
            c = M[a, b]
            if c != 0:
                f = f + PolyScalar.var(b) * int(round(c))
        terms[(a,)] = f
    return PolyForm(1, terms)


@dataclass(frozen=True)
class SasakianData:
    eta: tuple
    d_eta: tuple
    omega: tuple
    J_matrix: np.ndarray

    def xi(self, i, p):
        return xi(i, p)


@lru_cache(maxsize=None)
def sasakian_data() -> SasakianData:
    eta = tuple(linear_one_form(M) for M in XI_MATS)
    d_eta = tuple(exterior_derivative(e) for e in eta)
    omega = tuple(d_eta[i] / 2 + wedge(eta[(i + 1) % 3], eta[(i + 2) % 3]) for i in range(3))
    return SasakianData(eta, d_eta, omega, J_MATRIX)


def eta_forms():
    return sasakian_data().eta


def omega_forms():
    return sasakian_data().omega
