"""Associative planes V cap S^7 and homogeneous associative orbits in the squashed S^7."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .exterior import _arr, c2r, evaluate, evaluate_batch, r2c, tangent_basis
from .model_structures import cross_product, is_associative
from .squashed import squashed_structure
from .symmetry import eta_matrix, get_action, small_map

SQ3 = math.sqrt(3.0)


# ---------------------------------------------------------------- batched solver


def batched_lm(F, X0: np.ndarray, iters: int = 80, tol: float = 1e-12, h: float = 1e-7,
               damping: float = 1e-9, prune_after: int = 20, prune_level: float = 1e-3):
    """Damped Gauss-Newton on many seeds at once.

    F maps (N, n) -> (N, m). Returns final points, residual norms and a convergence mask.
    Seeds still above prune_level after prune_after steps are stopped (they sit in the
    basin of a nonzero local minimum).
    """
    X = np.array(X0, dtype=float)
    n = X.shape[1]
    lam = np.full(len(X), damping)
    r = F(X)
    nr = np.linalg.norm(r, axis=1)
    alive = np.ones(len(X), dtype=bool)
    for it in range(iters):
        if it == prune_after:
            alive &= nr < prune_level
        active = alive & (nr > tol)
        if not active.any():
            break
        Xa, ra = X[active], r[active]
        J = np.stack([(F(Xa + h * e) - ra) / h for e in np.eye(n)], axis=2)
        JT = np.transpose(J, (0, 2, 1))
        A = JT @ J
        scale = np.trace(A, axis1=1, axis2=2)[:, None, None] / n + 1e-30
        A = A + lam[active][:, None, None] * scale * np.eye(n)
        g = (JT @ ra[..., None])[..., 0]
        try:
            step = np.linalg.solve(A, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = (np.linalg.pinv(A) @ g[..., None])[..., 0]
        Xn = Xa - step
        rn = F(Xn)
        nrn = np.linalg.norm(rn, axis=1)
        better = nrn < nr[active]
        idx = np.flatnonzero(active)
        X[idx[better]] = Xn[better]
        r[idx[better]] = rn[better]
        nr[idx[better]] = nrn[better]
        lam[idx[better]] = np.maximum(lam[idx[better]] / 10, 1e-15)
        lam[idx[~better]] = lam[idx[~better]] * 10
    return X, nr, nr <= tol


def staged_solve(F, seeds: np.ndarray, tol: float = 1e-12, warmup: int = 4,
                 merge_decimals: int = 3):
    """Short damped runs on all seeds, merge seeds that landed together, then finish."""
    X, nr, _ = batched_lm(F, seeds, iters=warmup, tol=tol, prune_after=warmup + 1)
    key = np.round(X, merge_decimals)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    Xf, nrf, ok = batched_lm(F, X[first], tol=tol)
    return Xf, nrf, ok, seeds[first]


def dedup(points: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    out: list[np.ndarray] = []
    for q in points:
        if all(np.max(np.abs(q - o)) > tol for o in out):
            out.append(q)
    return np.array(out) if out else np.zeros((0, points.shape[1] if points.ndim == 2 else 0))


# ---------------------------------------------------------------- plane frames


@dataclass(frozen=True)
class PlaneCandidate:
    c: float
    s: float
    A2: float
    A3: float = 0.0
    B3: float = 0.0
    A4: float = 0.0
    B4: float = 0.0

    def __post_init__(self):
        if abs(self.c ** 2 + self.s ** 2 - 1) > 1e-9:
            raise ValueError("c^2 + s^2 must be 1")
        if self.c < -1e-12 or self.s < -1e-12 or self.A2 < -1e-12:
            raise ValueError("c, s and A2 must be non-negative")

    @classmethod
    def from_tuple(cls, t) -> "PlaneCandidate":
        return cls(*map(float, t))

    def as_tuple(self) -> tuple:
        return (self.c, self.s, self.A2, self.A3, self.B3, self.A4, self.B4)

    def vectors(self) -> np.ndarray:
        """Rows e0, e1, e2, e3 with e3 = 5/3 (e1 x e2) at e0."""
        st = squashed_structure()
        e0 = c2r([1, 0, 0, 0])
        e1 = c2r([self.c * 1j, 0, self.s, 0])
        e2 = c2r([0, self.A2, self.A3 + 1j * self.B3, self.A4 + 1j * self.B4])
        e3 = 5 / 3 * cross_product(st.phi, st.metric(e0), e1, e2)
        return np.array([e0, e1, e2, e3])


def e3_closed_form(cand: PlaneCandidate) -> np.ndarray:
    c, s, A2, A3, B3, A4, B4 = cand.as_tuple()
    return c2r([5 * B3 * s * 1j, 5 * A4 * s + (-A2 * c + 5 * B4 * s) * 1j,
                -B3 * c + A3 * c * 1j, (-B4 * c - A2 * s) + A4 * c * 1j])


def _e1_signed(c, s, A2, A3, B3, A4, B4):
    r1 = 4 * s * (c * c - 3 * s * s) * (c * A2 ** 2 + 3 * c * A4 ** 2 + 3 * c * B4 ** 2 - 2 * s * A2 * B4)
    u = (A3 * A4, A2 * B3, B3 * B4)
    w = (A2 * A3, A3 * B4, B3 * A4)
    r2a = s * (c * (-2 * s * s + c * c) * u[0] - 2 * s ** 3 * u[1] + c * (3 * s * s + c * c) * u[2])
    r2b = s * (3 * s * c * u[0] + (3 * s * s + c * c) * u[1] - 2 * s * c * u[2])
    r3a = s * (s * c * w[0] + (c * c - 2 * s * s) * w[1] - (3 * s * s + c * c) * w[2])
    r3b = s * (c * w[0] - 3 * s * w[1] - 2 * s * w[2])
    return r1, r2a, r2b, r3a, r3b


def _e2_signed(c, s, A2, A3, B3, A4, B4):
    r1 = A4 * (c * A2 * (c * A2 ** 2 - 2 * s * A2 * B4 - 3 * c * A4 ** 2 - 3 * c * B4 ** 2)
               + 6 * B4 * s * (-3 * s * A2 * B4 + 2 * c * A4 ** 2 + 2 * c * B4 ** 2))
    r2 = ((c * c + 3 * s * s) * A2 ** 3 * B4 - 2 * c * s * A2 ** 2 * B4 ** 2
          + 3 * (3 * s * s - c * c) * A2 * A4 ** 2 * B4 - 3 * (c * c + 3 * s * s) * A2 * B4 ** 3
          - 6 * c * s * A4 ** 4 + 6 * c * s * B4 ** 4)
    r3 = s * A2 * A4 * (c * A2 ** 2 - 2 * s * A2 * B4 + 3 * c * A4 ** 2 + 3 * c * B4 ** 2)
    return r1, r2, r3


def plane_condition_e1(cand: PlaneCandidate) -> tuple[float, float, float]:
    """|LHS| of the three e1 systems (the two matrix systems reported by max-abs)."""
    r1, r2a, r2b, r3a, r3b = _e1_signed(*cand.as_tuple())
    return (abs(r1), max(abs(r2a), abs(r2b)), max(abs(r3a), abs(r3b)))


def plane_condition_e2(cand: PlaneCandidate) -> tuple[float, float, float]:
    return tuple(abs(x) for x in _e2_signed(*cand.as_tuple()))


def geometric_residual(vectors: np.ndarray, l: int, signed: bool = False):
    """*phi~(u_a, u_b, u_c, .) at e_l/|e_l|, the u's being the other e's projected to T S^7."""
    st = squashed_structure()
    p = vectors[l] / np.linalg.norm(vectors[l])
    others = [v - (v @ p) * p for k, v in enumerate(vectors) if k != l]
    F = tangent_basis(p)
    V = np.array([[*others, f] for f in F])
    vals = evaluate_batch(st.star_phi, np.repeat(p[None], 7, 0), V)
    return vals if signed else float(np.max(np.abs(vals)))


def condition_equivalence_audit(cand: PlaneCandidate, n_samples: int = 20, seed: int = 0,
                                tol: float = 1e-9) -> bool:
    """Vanishing of the polynomial systems coincides with the geometric test at e1 and e2.

    The check runs at cand and at n_samples random perturbations of it.
    """
    rng = np.random.default_rng(seed)
    cands = [cand]
    for _ in range(n_samples):
        x = np.array(cand.as_tuple()[2:]) + 0.3 * rng.normal(size=5)
        ang = math.atan2(cand.s, cand.c) + 0.3 * rng.normal()
        ang = min(max(ang, 0.0), math.pi / 2)
        x[0] = abs(x[0])
        cands.append(PlaneCandidate(math.cos(ang), math.sin(ang), *x))
    for k in cands:
        E = k.vectors()
        alg1 = max(plane_condition_e1(k)) < tol
        geo1 = geometric_residual(E, 1) < tol
        if alg1 != geo1:
            return False
        # the e2 system is stated for A3 = B3 = 0 and a unit e2
        if abs(k.A3) < 1e-12 and abs(k.B3) < 1e-12 and k.s > 1e-12:
            n = math.sqrt(k.A2 ** 2 + k.A4 ** 2 + k.B4 ** 2)
            kn = PlaneCandidate(k.c, k.s, k.A2 / n, 0.0, 0.0, k.A4 / n, k.B4 / n)
            alg2 = max(plane_condition_e2(kn)) < tol
            geo2 = geometric_residual(kn.vectors(), 2) < tol
            if alg2 != geo2:
                return False
    return True


REFERENCE_PLANE_SOLUTIONS = {
    "sol0": (1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0),
    "sol1": (1.0, 0.0, SQ3 / 2, 0.5, 0.0, 0.0, 0.0),
    "sol2": (SQ3 / 2, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0),
    "sol3": (SQ3 / 2, 0.5, SQ3 / 2, 0.0, 0.0, 0.0, 0.5),
    "sol4": (SQ3 / 2, 0.5, 0.5, 0.0, 0.0, 0.0, SQ3 / 2),
    "sol5": (0.5, SQ3 / 2, SQ3 / 2, 0.0, 0.0, 0.0, 0.5),
}
# (index, sign) flips allowed when matching: A3 in sol1, B4 in sol3
SIGN_SYMMETRIES = {"sol1": (3,), "sol3": (6,)}


def match_reference(t, tol: float = 1e-6) -> tuple[str | None, float]:
    t = np.asarray(t, dtype=float)
    best, best_d = None, np.inf
    for name, ref in REFERENCE_PLANE_SOLUTIONS.items():
        ref = np.array(ref)
        variants = [ref]
        for i in SIGN_SYMMETRIES.get(name, ()):
            v = ref.copy()
            v[i] = -v[i]
            variants.append(v)
        d = min(float(np.max(np.abs(t - v))) for v in variants)
        if d < best_d:
            best, best_d = name, d
    return (best if best_d < tol else None), best_d


@dataclass
class PlaneEnumeration:
    solutions: list                        # (case label, 7-tuple)
    matched: dict                          # reference name -> list of recovered tuples
    unmatched: list
    flagged_cells: list                    # seeds whose Newton run stalled near a root
    v2_family: list                        # (case label, c, verified)
    case3_contradiction: bool
    n_seeds: int = 0

    @property
    def recovers_reference(self) -> bool:
        return not self.unmatched and all(self.matched.get(k) for k in REFERENCE_PLANE_SOLUTIONS)


def _case_1i(step: float, tol: float):
    """s = 0, B3 = A4 = B4 = 0, (A2, A3) = (cos th, sin th) with A2 > 0; condition at e2."""
    def res(th):
        cand = PlaneCandidate(1.0, 0.0, math.cos(th[0]), math.sin(th[0]))
        return geometric_residual(cand.vectors(), 2, signed=True)
    grid = np.arange(-math.pi / 2 + step, math.pi / 2, step)
    vals = np.array([np.linalg.norm(res([t])) for t in grid])
    seeds = [grid[i] for i in range(len(grid))
             if (i == 0 or vals[i] <= vals[i - 1]) and (i == len(grid) - 1 or vals[i] <= vals[i + 1])]
    found, flagged = [], []
    for th0 in seeds:
        out = least_squares(res, [th0], bounds=(-math.pi / 2 + 1e-9, math.pi / 2 - 1e-9),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = float(np.linalg.norm(res(out.x)))
        if r < tol:
            th = out.x[0]
            found.append((1.0, 0.0, math.cos(th), math.sin(th), 0.0, 0.0, 0.0))
        elif r < 1e-4:
            flagged.append(("(1)-(i)", float(th0), r))
    return found, flagged, len(grid)


def _sphere3(al, be):
    return np.cos(al), np.sin(al) * np.cos(be), np.sin(al) * np.sin(be)


def _case_1_ii_iii(step: float, tol: float, chunk: int = 400_000):
    """s > 0, A3 = B3 = 0, A2^2 + A4^2 + B4^2 = 1, e1 and e2 systems together.

    Unknowns (psi, alpha, beta): (c, s) = (cos psi, sin psi), (A2, A4, B4) on the unit sphere.
    """
    def F(X):
        c, s = np.cos(X[:, 0]), np.sin(X[:, 0])
        A2, A4, B4 = _sphere3(X[:, 1], X[:, 2])
        cc, ss, cs = c * c, s * s, c * s
        a2, a4, b4 = A2 * A2, A4 * A4, B4 * B4
        q = c * a2 - 2 * s * A2 * B4 + 3 * c * (a4 + b4)     # bracket shared by e1 and e2
        r1 = 4 * s * (cc - 3 * ss) * q
        e1 = A4 * (c * A2 * (c * a2 - 2 * s * A2 * B4 - 3 * c * (a4 + b4))
                   + 6 * B4 * s * (-3 * s * A2 * B4 + 2 * c * (a4 + b4)))
        e2 = ((cc + 3 * ss) * a2 * A2 * B4 - 2 * cs * a2 * b4 + 3 * (3 * ss - cc) * A2 * a4 * B4
              - 3 * (cc + 3 * ss) * A2 * b4 * B4 - 6 * cs * (a4 * a4 - b4 * b4))
        e3 = s * A2 * A4 * q
        return np.stack([r1, e1, e2, e3], axis=1)

    psi = np.arange(step, math.pi / 2, step)
    al = np.arange(0.0, math.pi / 2, step)
    be = np.arange(0.0, 2 * math.pi, step)
    G = np.stack(np.meshgrid(psi, al, be, indexing="ij"), axis=-1).reshape(-1, 3)
    found, flagged = [], []
    for k in range(0, len(G), chunk):
        X, nr, ok, origin = staged_solve(F, G[k:k + chunk], tol=tol)
        for x in X[ok]:
            c, s = math.cos(x[0]), math.sin(x[0])
            A2, A4, B4 = (float(v) for v in _sphere3(x[1], x[2]))
            if c > 1e-9 and s > 1e-9 and A2 > 1e-9:
                found.append((c, s, A2, 0.0, 0.0, A4, B4))
        stalled = (~ok) & (nr < 1e-4)
        for g, r in zip(origin[stalled], nr[stalled]):
            flagged.append(("(1)-(ii)/(iii)", tuple(float(v) for v in g), float(r)))
    return found, flagged, len(G)


def _round_tuple(t, nd=12):
    return tuple(0.0 if abs(round(v, nd)) == 0 else round(v, nd) for v in t)


def _v2_family(n: int = 7) -> list:
    """Case (2): A2 = 0 and e3 has vanishing first two entries, e.g. B3 s = A4 s = B4 s = 0."""
    V2 = np.array([c2r([1, 0, 0, 0]), c2r([1j, 0, 0, 0]), c2r([0, 0, 1, 0]), c2r([0, 0, 1j, 0])])
    out = []
    for c in np.linspace(0.1, 1.0, n):
        s = math.sqrt(max(0.0, 1 - c * c))
        if s > 1e-12:
            cand = PlaneCandidate(c, s, 0.0, 1.0)
            E = cand.vectors()
            ok = _same_span(E, V2) and all(geometric_residual(E, l) < 1e-9 for l in range(4))
            out.append(("(2) s>0", float(c), bool(ok)))
    # s = 0: e2 = (0, 0, w3, w4) is moved to (0, 0, 1, 0) by an Sp(2) element
    rng = np.random.default_rng(7)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    w /= np.linalg.norm(w)
    cand = PlaneCandidate(1.0, 0.0, 0.0, w[0].real, w[0].imag, w[1].real, w[1].imag)
    E = cand.vectors()
    g = np.eye(4, dtype=complex)
    g[2:, 2:] = [[np.conj(w[0]), np.conj(w[1])], [-w[1], w[0]]]
    from .exterior import realify
    gE = E @ realify(g).T
    out.append(("(2) s=0", 1.0, bool(_same_span(gE, V2))))
    return out


def _same_span(A: np.ndarray, B: np.ndarray, tol: float = 1e-9) -> bool:
    QA = np.linalg.qr(np.asarray(A).T)[0]
    QB = np.linalg.qr(np.asarray(B).T)[0]
    return bool(np.linalg.norm(QA @ QA.T - QB @ QB.T) < tol)


def _case3_contradiction() -> bool:
    """c = 0 forces A2 = 0 and B3 = A4 = B4 = 0, and then e3 = 0."""
    for A3 in (1.0, -1.0):
        cand = PlaneCandidate(0.0, 1.0, 0.0, A3)
        if np.linalg.norm(cand.vectors()[3]) > 1e-12:
            return False
    return True


def enumerate_plane_solutions(step: float = 0.02, tol: float = 1e-12,
                              dedup_tol: float = 1e-6) -> PlaneEnumeration:
    found_i, fl_i, n_i = _case_1i(step, 1e-10)
    found_ii, fl_ii, n_ii = _case_1_ii_iii(step, tol)
    labelled = [("(1)-(i)", t) for t in found_i] + [("(1)-(ii)/(iii)", t) for t in found_ii]
    sols: list = []
    for lab, t in labelled:
        if all(max(abs(a - b) for a, b in zip(t, u)) > dedup_tol for _, u in sols):
            sols.append((lab, t))
    matched: dict = {k: [] for k in REFERENCE_PLANE_SOLUTIONS}
    unmatched = []
    for lab, t in sols:
        name, _ = match_reference(t, dedup_tol)
        if name is None:
            unmatched.append((lab, t))
        else:
            matched[name].append(t)
    return PlaneEnumeration(sols, matched, unmatched, fl_i + fl_ii, _v2_family(),
                            _case3_contradiction(), n_i + n_ii)


# ---------------------------------------------------------------- global tests on V cap S^7


@dataclass(frozen=True)
class GlobalAssociativity:
    passed: bool
    worst_residual: float
    witness: np.ndarray | None

    def __iter__(self):
        yield self.passed
        yield self.worst_residual
        yield self.witness


def plane_global_associativity(V, n_samples: int = 200, seed: int = 0,
                               tol: float = 1e-9) -> GlobalAssociativity:
    """Sample V cap S^7 and test the tangent 3-planes with is_associative."""
    st = squashed_structure()
    Q = np.linalg.qr(np.asarray(V, dtype=float).T)[0].T
    if Q.shape[0] != 4:
        raise ValueError("V must be spanned by four vectors")
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for _ in range(n_samples):
        a = rng.normal(size=4)
        p = (a / np.linalg.norm(a)) @ Q
        T = Q - np.outer(Q @ p, p)
        U = np.linalg.svd(T)[2][:3]
        res = is_associative(list(U), st, p=p, tol=tol)
        if res.residual > worst:
            worst, witness = res.residual, p
    return GlobalAssociativity(worst <= tol, worst, witness if worst > tol else None)


V1_PLANE = np.array([c2r([1, 0, 0, 0]), c2r([1j, 0, 0, 0]), c2r([0, 1, 0, 0]), c2r([0, 1j, 0, 0])])
V2_PLANE = np.array([c2r([1, 0, 0, 0]), c2r([1j, 0, 0, 0]), c2r([0, 0, 1, 0]), c2r([0, 0, 1j, 0])])


def plane_of(t) -> np.ndarray:
    return PlaneCandidate.from_tuple(t).vectors()


def witness_contraction(t=REFERENCE_PLANE_SOLUTIONS["sol1"]) -> float:
    """max |*phi~((-e0+e1)/r2, (e2-e3)/r2, (e2+e3)/r2, .)| at (e0+e1)/r2 over a tangent frame."""
    st = squashed_structure()
    e0, e1, e2, e3 = plane_of(t)
    r2 = math.sqrt(2.0)
    p = (e0 + e1) / r2
    p = p / np.linalg.norm(p)
    triple = [(-e0 + e1) / r2, (e2 - e3) / r2, (e2 + e3) / r2]
    F = tangent_basis(p)
    V = np.array([[*triple, f] for f in F])
    return float(np.max(np.abs(evaluate_batch(st.star_phi, np.repeat(p[None], 7, 0), V))))


# ---------------------------------------------------------------- T^3 orbits


def t3_zeta(p) -> np.ndarray:
    z = r2c(_arr(p))
    z1, z2, z3, z4 = z
    c = np.conj
    im = (z1 * z2 * c(z3) * c(z4)).imag
    first = np.array([-1j * z2 * c(z3) * c(z4), -1j * z1 * c(z3) * c(z4),
                      1j * c(z1) * c(z2) * z4, 1j * c(z1) * c(z2) * z3])
    return first - 4 * im * c(z)


def _slice_point(X):
    """(x1, x2, x3, x4, y4) -> complex point on the slice Sigma."""
    return np.stack([X[:, 0], 0 * X[:, 0], X[:, 1], 0 * X[:, 0], X[:, 2], 0 * X[:, 0],
                     X[:, 3], X[:, 4]], axis=1)


def _zeta_batch(P):
    z = P[:, 0::2] + 1j * P[:, 1::2]
    z1, z2, z3, z4 = z.T
    c = np.conj
    im = (z1 * z2 * c(z3) * c(z4)).imag
    first = np.stack([-1j * z2 * c(z3) * c(z4), -1j * z1 * c(z3) * c(z4),
                      1j * c(z1) * c(z2) * z4, 1j * c(z1) * c(z2) * z3], axis=1)
    return first - 4 * im[:, None] * c(z)


@dataclass
class T3SliceSolutions:
    solutions: np.ndarray        # rows (x1, x2, x3, x4, y4)
    flagged: list
    n_seeds: int


def t3_slice_solve(step: float = 0.1, tol: float = 1e-12, dedup_tol: float = 1e-6,
                   chunk: int = 200_000) -> T3SliceSolutions:
    """Solve zeta = 0 on Sigma = {x1, x2, x3 >= 0, z4 = x4 + i y4} with 3-dimensional orbits."""
    def F(X):
        Z = _zeta_batch(_slice_point(X))
        return np.concatenate([Z.real, Z.imag, (np.sum(X * X, axis=1) - 1)[:, None]], axis=1)

    a = np.arange(step / 2, 1.0, step)
    b = np.arange(-1.0 + step / 2, 1.0, step)
    G = np.stack(np.meshgrid(a, a, a, b, b, indexing="ij"), axis=-1).reshape(-1, 5)
    r2 = np.sum(G * G, axis=1)
    G = G[(r2 >= 0.6) & (r2 <= 1.4)]
    sols, flagged = [], []
    frame = get_action("T3").frame
    for k in range(0, len(G), chunk):
        X, nr, ok, origin = staged_solve(F, G[k:k + chunk], tol=tol)
        keep = ok & (X[:, :3].min(axis=1) > 1e-6)
        for x in X[keep]:
            if np.linalg.matrix_rank(frame(_slice_point(x[None])[0]), tol=1e-8) == 3:
                sols.append(x)
        stalled = (~ok) & (nr < 1e-4)
        flagged.extend(tuple(g) for g in origin[stalled])
    S = dedup(np.array(sols), dedup_tol) if sols else np.zeros((0, 5))
    return T3SliceSolutions(S, flagged, len(G))


K_BLOCK = np.array([[0, -1j], [-1j, 0]])


def t3_congruence_check(n: int = 50, seed: int = 0) -> float:
    """max distance from diag(I, K) . (orbit through (1,1,1,i)/2) to the orbit through (1,1,1,-i)/2."""
    from .exterior import realify
    g = np.eye(4, dtype=complex)
    g[2:, 2:] = K_BLOCK
    G = realify(g)
    act = get_action("T3")
    rng = np.random.default_rng(seed)
    src = c2r(np.array([1, 1, 1, 1j]) / 2)
    dst = r2c(c2r(np.array([1, 1, 1, -1j]) / 2))
    worst = 0.0
    for _ in range(n):
        q = r2c(G @ (act.element(rng.uniform(0, 2 * np.pi, 3)) @ src))
        # membership: |q_j| = 1/2 and a torus element matching the phases exists
        ph = np.angle(q / dst)
        al, be, ga = (ph[0] + ph[1]) / 2, (ph[0] - ph[1]) / 2, None
        ga = (ph[2] - ph[3]) / 2
        cands = []
        for k in range(2):
            a2 = al + k * np.pi
            b2 = be + k * np.pi
            for m in range(2):
                g2 = ga + m * np.pi
                x = r2c(act.element((a2, b2, g2)) @ c2r(dst))
                cands.append(np.max(np.abs(x - q)))
        worst = max(worst, float(min(cands)))
    return worst


# ---------------------------------------------------------------- SU(2) orbits


def induced_metric(action, p) -> np.ndarray:
    """Gram matrix of g~ on the generator vectors at p."""
    act = get_action(action) if isinstance(action, str) else action
    F = act.frame(p)
    return F @ squashed_structure().metric_matrix(p) @ F.T


def orbit_calibration(action, p) -> tuple[float, float]:
    """(phi~(E1*, E2*, E3*), g~-volume of the frame)."""
    act = get_action(action) if isinstance(action, str) else action
    F = act.frame(p)
    st = squashed_structure()
    G = induced_metric(act, p)
    return float(evaluate(st.phi, p, F)), float(math.sqrt(max(np.linalg.det(G), 0.0)))


def orbit_is_associative(action, p, tol: float = 1e-9):
    act = get_action(action) if isinstance(action, str) else action
    return is_associative(list(act.frame(p)), squashed_structure(), p=_arr(p), tol=tol)


@dataclass(frozen=True)
class SmallOrbitCondition:
    coefficient: float           # dx1 coefficient of *phi~(E1*, E2*, E3*, .)
    other_components: float      # max of the remaining ambient components
    restricted_residual: float   # norm of the form restricted to T_p S^7
    reference_coefficient: float   # 5/54 x1^3 (15 + 16 x1^2)
    closed_form: float           # 81/125 x1^3 (5 - 8 x1^2)
    base: np.ndarray


SMALL_ORBIT_ROOTS = (1.0, math.sqrt(5 / 8))


def su2_small_condition(p) -> SmallOrbitCondition:
    """Evaluate the associativity form for the small SU(2) orbit, moving p to (x1, 0, z3, z4)."""
    z = r2c(_arr(p))
    r = np.linalg.norm(z[:2])
    if r < 1e-12:
        raise ValueError("orbit is not 3-dimensional")
    a, b = z[0] / r, z[1] / r
    g = np.array([[np.conj(a), np.conj(b)], [-b, a]])
    q = c2r(small_map(g) @ z)
    x1 = float(q[0])
    st = squashed_structure()
    F = get_action("SU2_small").frame(q)
    amb = np.array([evaluate(st.star_phi, q, np.vstack([F, e])) for e in np.eye(8)])
    restricted = amb - (amb @ q) * q
    return SmallOrbitCondition(float(amb[0]), float(np.max(np.abs(amb[1:]))),
                               float(np.linalg.norm(restricted)),
                               5 / 54 * x1 ** 3 * (15 + 16 * x1 ** 2),
                               81 / 125 * x1 ** 3 * (5 - 8 * x1 ** 2), q)


def su2_irr_case1_closed_form(mu: float) -> float:
    return 24 * mu * (mu * mu - 3) * (3 * mu * mu - 1) * (mu * mu + 1) ** -2.5


def su2_irr_case1(mu: float) -> float:
    """d(det M)_{p0}(v) at p0 = (1, 0, mu, 0)/sqrt(mu^2+1), v = (-mu, 0, 1, 0).

    M = (eta_i(E_j*)) is quadratic in p, so the unit central difference is exact.
    """
    p0 = c2r([1, 0, mu, 0]) / math.sqrt(mu * mu + 1)
    v = c2r([-mu, 0, 1, 0])
    M = eta_matrix("SU2_irr", p0)
    dM = (eta_matrix("SU2_irr", p0 + v) - eta_matrix("SU2_irr", p0 - v)) / 2
    total = 0.0
    for j in range(3):
        Mj = M.copy()
        Mj[:, j] = dM[:, j]
        total += np.linalg.det(Mj)
    return float(total)


@dataclass
class Case2Certificates:
    phi_A2: float
    phi_A3: float
    vol_A2: float
    vol_A3: float
    offdiag_A2: float
    offdiag_A3: float
    gram_A2: np.ndarray
    gram_A3: np.ndarray
    associative_A2: bool
    associative_A3: bool

    def as_dict(self) -> dict:
        return {
            "phi_A2": self.phi_A2, "phi_A3": self.phi_A3,
            "vol_A2": self.vol_A2, "vol_A3": self.vol_A3,
            "offdiag_A2": self.offdiag_A2, "offdiag_A3": self.offdiag_A3,
            "gram_A2": self.gram_A2.tolist(), "gram_A3": self.gram_A3.tolist(),
            "associative_A2": self.associative_A2, "associative_A3": self.associative_A3,
        }


A2_BASE = c2r([1, 0, 0, 0])
A3_BASE = c2r([0, 0, 1, 0])
A1_BASE = c2r(np.array([1, 1, 1, 1j]) / 2)


def _offdiag(G):
    return float(max(abs(G[0, 1]), abs(G[0, 2]), abs(G[1, 2])))


def su2_irr_case2_certificates() -> Case2Certificates:
    G2, G3 = induced_metric("SU2_irr", A2_BASE), induced_metric("SU2_irr", A3_BASE)
    ph2, v2 = orbit_calibration("SU2_irr", A2_BASE)
    ph3, v3 = orbit_calibration("SU2_irr", A3_BASE)
    return Case2Certificates(ph2, ph3, v2, v3, _offdiag(G2), _offdiag(G3), G2, G3,
                             orbit_is_associative("SU2_irr", A2_BASE).passed,
                             orbit_is_associative("SU2_irr", A3_BASE).passed)


REFERENCE_METRICS = {
    "A2": np.diag([27 / 5, 27 / 5, 81 / 25]),
    "A3": np.diag([171 / 25, 171 / 25, 9 / 25]),
    "A1": np.diag([3 / 5, 27 / 50, 27 / 50]),
}


def orbit_metrics() -> dict:
    return {
        "A2": induced_metric("SU2_irr", A2_BASE),
        "A3": induced_metric("SU2_irr", A3_BASE),
        "A1": induced_metric("T3", A1_BASE),
    }
