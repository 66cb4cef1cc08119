"""Hopf and twistor fibrations S^7 -> CP^3 -> S^4 and the almost complex structure I1'.

Tangent vectors of CP^3 at p1(x) are handled through their p1-horizontal lifts
at x, i.e. vectors of T_x S^7 orthogonal to x and i x.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .exterior import _arr, c2r, r2c
from .sasakian import I_MATS, J_COMPLEX, xi
from .deformation import orbit_samples

TOL = 1e-9
SQ3 = np.sqrt(3.0)


# ---------------------------------------------------------------- points


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of CP^3: unit representative whose first nonzero entry is real positive."""

    rep: np.ndarray

    @classmethod
    def from_vector(cls, z, tol: float = 1e-12) -> "ProjectivePoint":
        z = np.asarray(z, dtype=complex)
        nrm = np.linalg.norm(z)
        if nrm < tol:
            raise ValueError("zero vector has no projective class")
        z = z / nrm
        lead = next(c for c in z if abs(c) > 1e-8)
        return cls(z * abs(lead) / lead)

    def distance(self, other: "ProjectivePoint") -> float:
        """Chordal distance sqrt(1 - |<a, b>|^2), as the norm of the orthogonal part."""
        b = other.rep
        return float(np.linalg.norm(self.rep - np.vdot(b, self.rep) * b))


def p1(x) -> ProjectivePoint:
    x = _arr(x)
    return ProjectivePoint.from_vector(r2c(x) if x.shape == (8,) else x)


# quaternionic coordinates: (z1, z2) -> z1 + z2 j, acted on from the left by the fibre Sp(1)
def _quat(z1, z2) -> np.ndarray:
    return np.array([z1.real, z1.imag, z2.real, z2.imag])


def _qmul(a, b) -> np.ndarray:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return np.array([a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                     a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                     a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                     a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0])


def _qconj(a) -> np.ndarray:
    return np.array([a[0], -a[1], -a[2], -a[3]])


def pi_map(x) -> np.ndarray:
    """pi: S^7 -> S^4 in R x H: (|qa|^2 - |qb|^2, 2 conj(qa) qb)."""
    z = r2c(_arr(x))
    qa, qb = _quat(z[0], z[1]), _quat(z[2], z[3])
    return np.concatenate([[qa @ qa - qb @ qb], 2 * _qmul(_qconj(qa), qb)])


def quaternionic_line(x) -> np.ndarray:
    """Orthogonal projector (8x8) onto span{x, I1 x, I2 x, I3 x}."""
    x = _arr(x)
    x = x / np.linalg.norm(x)
    B = np.array([x] + [I @ x for I in I_MATS])
    return B.T @ B


def p2(pt: ProjectivePoint) -> np.ndarray:
    """p2: CP^3 -> HP^1, the quaternionic line of any representative."""
    return quaternionic_line(c2r(pt.rep))


def s4_to_line(w) -> np.ndarray:
    """Quaternionic line of a point (t, h) of S^4 in R x H."""
    w = _arr(w)
    t, h = w[0], w[1:]
    if t > -1 + 1e-6:
        qa = np.array([np.sqrt((1 + t) / 2), 0, 0, 0])
        qb = _qmul(qa, h) / (2 * qa[0] ** 2)
    else:
        qb = np.array([np.sqrt((1 - t) / 2), 0, 0, 0])
        # conj(qa) qb = h/2  ->  qa = conj(h qb^{-1} / 2) with qb real
        qa = _qconj(h / (2 * qb[0]))
    z = np.array([qa[0] + 1j * qa[1], qa[2] + 1j * qa[3], qb[0] + 1j * qb[1], qb[2] + 1j * qb[3]])
    return quaternionic_line(c2r(z))


def fibration_residual(n_samples: int = 100, seed: int = 0) -> float:
    """max |p2(p1(x)) - pi(x)| as quaternionic lines."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        x = rng.normal(size=8)
        x /= np.linalg.norm(x)
        worst = max(worst, float(np.abs(p2(p1(x)) - s4_to_line(pi_map(x))).max()))
    return worst


# ---------------------------------------------------------------- I1'


def p1_horizontal(x, v) -> np.ndarray:
    """Lift of p1_* v: remove the x and i x components."""
    x, v = _arr(x), _arr(v)
    ix = I_MATS[0] @ x
    return v - (v @ x) * x - (v @ ix) * ix


def vertical_part(x, v) -> np.ndarray:
    """Component in the lift of the p2-vertical space, span{I2 x, I3 x}."""
    x, v = _arr(x), _arr(v)
    return sum((v @ (I @ x)) * (I @ x) for I in I_MATS[1:])


def horizontal_part(x, v) -> np.ndarray:
    v = p1_horizontal(x, v)
    return v - vertical_part(x, v)


def i1_prime(x, v) -> np.ndarray:
    """I1' = -I1 on the p2-vertical part, +I1 on the horizontal part."""
    v = p1_horizontal(x, v)
    vv = vertical_part(x, v)
    return -I_MATS[0] @ vv + I_MATS[0] @ (v - vv)


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class HolomorphicCheck:
    passed: bool
    residual: float
    horizontal: bool
    horizontal_residual: float
    n_samples: int


def _pushforward(x, tangents, tol=1e-8) -> np.ndarray:
    W = np.array([p1_horizontal(x, t) for t in tangents])
    U, s, Vt = np.linalg.svd(W, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    if r != 2:
        raise ValueError(f"p1-pushforward of the tangent space has rank {r}, not 2")
    return Vt[:2]


def _plane_residual(B, w) -> float:
    return float(np.linalg.norm(w - B.T @ (B @ w)))


def holomorphic_curve_check(case: str, n_samples: int = 50, seed: int = 0,
                            tol: float = TOL) -> HolomorphicCheck:
    """Is p1(orbit) an I1'-holomorphic curve, and is it horizontal for p2?"""
    worst, hworst = 0.0, 0.0
    for x, e, _ in orbit_samples(case, n_samples, seed):
        B = _pushforward(x, e)
        for b in B:
            worst = max(worst, _plane_residual(B, i1_prime(x, b)))
            hworst = max(hworst, float(np.linalg.norm(vertical_part(x, b))))
    return HolomorphicCheck(worst < tol, worst, hworst < tol, hworst, n_samples)


def hat_point(x, tangents, tol: float = 1e-8) -> ProjectivePoint:
    """P(L^perp): L = pr_H(T Sigma) inside the p2-horizontal space at p1(x)."""
    x = _arr(x)
    B = _pushforward(x, tangents)
    H = np.array([horizontal_part(x, b) for b in B])
    s = np.linalg.svd(H, compute_uv=False)
    if s[0] < tol:
        raise ValueError("projection to the horizontal space vanishes")
    if s[1] < tol:
        raise ValueError("projected tangent space is not a complex line")
    # orthonormal basis of the horizontal space, then the complement of L in it
    Q = np.array([x] + [I @ x for I in I_MATS])
    Hb = np.linalg.svd(np.eye(8) - Q.T @ Q)[0][:, :4].T
    Lc = Hb @ H.T                       # L in coordinates of Hb
    perp = np.linalg.svd(Lc.T)[2][2:]   # complement inside R^4
    vs = perp @ Hb
    pts = [ProjectivePoint.from_vector(r2c(v)) for v in vs]
    if pts[0].distance(pts[1]) > 1e-7:
        raise ValueError("L^perp is not a complex line")
    return pts[0]


def hat_transform(case: str = "A3", n_samples: int = 200, seed: int = 0) -> list[ProjectivePoint]:
    return [hat_point(x, e) for x, e, _ in orbit_samples(case, n_samples, seed)]


def _veronese_column(a, b) -> np.ndarray:
    return np.array([a ** 3, b ** 3, SQ3 * a * b * b, SQ3 * a * a * b])


def distance_to_veronese(pt: ProjectivePoint) -> float:
    """Distance from pt to {[g (1,0,0,0)] : g in SU(2)} = {[(a^3, b^3, r3 a b^2, r3 a^2 b)]}."""
    y = pt.rep

    def dist(ab):
        c = _veronese_column(*ab)
        n = np.linalg.norm(c)
        return 1.0 if n == 0 else pt.distance(ProjectivePoint(c / n))

    seeds = []
    if abs(y[0]) > 1e-6:
        seeds.append((1.0, y[3] / (SQ3 * y[0])))
    if abs(y[1]) > 1e-6:
        seeds.append((y[2] / (SQ3 * y[1]), 1.0))
    seeds += [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    best = min(dist(s) for s in seeds)
    if best > 1e-10:
        def f(u):
            c = _veronese_column(u[0] + 1j * u[1], u[2] + 1j * u[3])
            c = c / np.linalg.norm(c)
            ov = np.vdot(c, y)
            return [1 - abs(ov)]
        for s in seeds:
            u0 = [np.real(s[0]), np.imag(s[0]), np.real(s[1]), np.imag(s[1])]
            r = least_squares(f, u0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
            best = min(best, dist((r.x[0] + 1j * r.x[1], r.x[2] + 1j * r.x[3])))
    return float(best)


def a1_membership_residual(pt: ProjectivePoint) -> tuple[float, float]:
    """(residual of |z_i| = 1/2 and Re(z1 z2 z3~ z4~) = 0, Im(z1 z2 z3~ z4~))."""
    z = pt.rep
    w = z[0] * z[1] * np.conj(z[2]) * np.conj(z[3])
    return float(max(np.abs(np.abs(z) - 0.5).max(), abs(w.real))), float(w.imag)


def hat_containment(case: str = "A3", n_samples: int = 200, seed: int = 0) -> float:
    """Max distance from hat(p1(orbit)) to p1(A2)."""
    return max(distance_to_veronese(p) for p in hat_transform(case, n_samples, seed))


# ---------------------------------------------------------------- Veronese stabiliser


def veronese_embedding(g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    a, b, c, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    return np.array([
        [a ** 3, b ** 3, SQ3 * a * b * b, SQ3 * a * a * b],
        [c ** 3, d ** 3, SQ3 * c * d * d, SQ3 * c * c * d],
        [SQ3 * a * c * c, SQ3 * b * d * d, d * (a * d + 2 * b * c), c * (2 * a * d + b * c)],
        [SQ3 * a * a * c, SQ3 * b * b * d, b * (2 * a * d + b * c), a * (a * d + 2 * b * c)],
    ], dtype=complex)


@dataclass(frozen=True)
class VeroneseCheck:
    multiplicativity: float
    identity: float
    curve_preserved: float
    su2_agreement: float
    intersection_dimension: int


def _random_gl2(rng) -> np.ndarray:
    while True:
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(g)) > 0.1:
            return g


def veronese_stabilizer_check(n_pairs: int = 100, seed: int = 0) -> VeroneseCheck:
    from .symmetry import irr_map, su2_from_params
    rng = np.random.default_rng(seed)
    mult = 0.0
    for _ in range(n_pairs):
        g, h = _random_gl2(rng), _random_gl2(rng)
        lhs = veronese_embedding(g @ h)
        rhs = veronese_embedding(g) @ veronese_embedding(h)
        mult = max(mult, float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max())))
    ident = float(np.abs(veronese_embedding(np.eye(2)) - np.eye(4)).max())
    curve = 0.0
    for _ in range(20):
        g = _random_gl2(rng)
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        pt = ProjectivePoint.from_vector(veronese_embedding(g) @ _veronese_column(a, b))
        curve = max(curve, distance_to_veronese(pt))
    su2 = 0.0
    for _ in range(20):
        g = su2_from_params(rng.normal(size=4))
        su2 = max(su2, float(np.abs(veronese_embedding(g) - irr_map(g)).max()))
    return VeroneseCheck(mult, ident, curve, su2, symplectic_intersection_dimension())


def symplectic_intersection_dimension(h: float = 1e-6) -> int:
    """Real dimension of {X in d(Ver)(gl(2,C)) : X^T J + J X = 0}."""
    basis = []
    for r in range(2):
        for c in range(2):
            for unit in (1.0, 1j):
                E = np.zeros((2, 2), dtype=complex)
                E[r, c] = unit
                basis.append((veronese_embedding(np.eye(2) + h * E)
                              - veronese_embedding(np.eye(2) - h * E)) / (2 * h))
    J = J_COMPLEX
    cond = np.array([np.concatenate([(X.T @ J + J @ X).real.ravel(), (X.T @ J + J @ X).imag.ravel()])
                     for X in basis]).T
    img = np.array([np.concatenate([X.real.ravel(), X.imag.ravel()]) for X in basis]).T
    s_img = np.linalg.svd(img, compute_uv=False)
    if np.sum(s_img > 1e-6) != 8:
        raise RuntimeError("differential of the embedding is not injective")
    s = np.linalg.svd(cond, compute_uv=False)
    s = np.concatenate([s, np.zeros(8 - s.size)])
    return int(np.sum(s < 1e-6 * max(1.0, s[0])))


# ---------------------------------------------------------------- calibration split


def calibration_split_residual(n_samples: int = 20, seed: int = 0) -> float:
    """eta~23 - X~01 - X~23 = -G~(I1' ., .) on ker eta_1, at random points.

    eta~ = 3/5 eta, X~^j = 3/sqrt5 X^j with X_j = Phi_j X_0 for a unit horizontal X_0.
    """
    from .sasakian import horizontal_frame, horizontal_projection
    rng = np.random.default_rng(seed)
    worst = 0.0
    a, b = 3 / 5, 3 / np.sqrt(5)
    for _ in range(n_samples):
        x = rng.normal(size=8)
        x /= np.linalg.norm(x)
        r = rng.normal(size=8)
        X0 = horizontal_projection(x, r - (r @ x) * x)
        X0 /= np.linalg.norm(X0)
        Xf = horizontal_frame(x, X0)
        et = lambda i, v: a * float(xi(i, x) @ v)
        Xt = lambda j, v: b * float(Xf[j] @ v)
        w2 = lambda f, g, u, v: f(u) * g(v) - f(v) * g(u)

        def G(u, v):
            return (et(2, u) * et(2, v) + et(3, u) * et(3, v)
                    + sum(Xt(j, u) * Xt(j, v) for j in range(4)))

        for _ in range(5):
            u, v = (p1_horizontal(x, rng.normal(size=8)) for _ in range(2))
            lhs = (w2(lambda w: et(2, w), lambda w: et(3, w), u, v)
                   - w2(lambda w: Xt(0, w), lambda w: Xt(1, w), u, v)
                   - w2(lambda w: Xt(2, w), lambda w: Xt(3, w), u, v))
            worst = max(worst, abs(lhs + G(i1_prime(x, u), v)))
    return worst


def fibre_holomorphic_residual(n_samples: int = 20, seed: int = 0) -> float:
    """p2-fibres through random points: their lifted tangent span{I2 x, I3 x} is I1'-invariant."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        x = rng.normal(size=8)
        x /= np.linalg.norm(x)
        B = np.array([I_MATS[1] @ x, I_MATS[2] @ x])
        for bv in B:
            worst = max(worst, _plane_residual(B, i1_prime(x, bv)))
    return worst


__all__ = [
    "ProjectivePoint", "p1", "p2", "pi_map", "quaternionic_line", "s4_to_line", "fibration_residual",
    "p1_horizontal", "vertical_part", "horizontal_part", "i1_prime", "HolomorphicCheck",
    "holomorphic_curve_check", "hat_point", "hat_transform", "hat_containment",
    "distance_to_veronese", "a1_membership_residual", "veronese_embedding", "VeroneseCheck",
    "veronese_stabilizer_check", "symplectic_intersection_dimension", "calibration_split_residual",
    "fibre_holomorphic_residual",
]
