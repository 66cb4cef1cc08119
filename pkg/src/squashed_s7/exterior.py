"""Polynomial-coefficient exterior calculus on R^8 and pointwise metric operations.

Real coordinates are ordered (x1, y1, x2, y2, x3, y3, x4, y4) with
z_j = x_j + i y_j, so axis 2(j-1) is Re z_j and axis 2(j-1)+1 is Im z_j.
Axis a also plays the role of the coordinate x_a of the flat models on R^7/R^8.

Coefficients are exact (int / Fraction) whenever the inputs are; floats are
accepted and simply make the affected terms inexact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np

NVARS = 8
SPHERE_TOL = 1e-12


def _clean(c):
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    if isinstance(c, bool):
        return Fraction(int(c))
    return c


def _is_zero(c) -> bool:
    return c == 0


def _add_exps(a, b):
    return tuple(x + y for x, y in zip(a, b))


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (0 if it has repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class PolyScalar:
    """Polynomial in NVARS real variables, stored as {exponent tuple: coefficient}."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms=None, nvars: int = NVARS):
        self.nvars = nvars
        out = {}
        if terms:
            for mono, c in terms.items():
                c = _clean(c)
                if not _is_zero(c):
                    out[tuple(mono)] = c
        self.terms = out

    @classmethod
    def const(cls, c, nvars: int = NVARS) -> "PolyScalar":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int = NVARS) -> "PolyScalar":
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1}, nvars)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def _coerce(self, other):
        if isinstance(other, PolyScalar):
            return other
        if isinstance(other, Number):
            return PolyScalar.const(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return PolyScalar(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return PolyScalar({m: -c for m, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            other = _clean(other)
            return PolyScalar({m: c * other for m, c in self.terms.items()}, self.nvars)
        if not isinstance(other, PolyScalar):
            return NotImplemented
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _add_exps(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return PolyScalar(out, self.nvars)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def diff(self, i: int) -> "PolyScalar":
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = c * m[i]
        return PolyScalar(out, self.nvars)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for m, c in self.terms.items():
            total += float(c) * float(np.prod(x ** np.array(m)))
        return total

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.terms.values()), default=0.0)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(m) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


class PolyForm:
    """Differential k-form sum_I f_I dx_I with polynomial f_I and increasing I."""

    __slots__ = ("degree", "terms", "nvars", "_compiled")

    def __init__(self, degree: int, terms=None, nvars: int = NVARS):
        self.degree = degree
        self.nvars = nvars
        self._compiled = None
        out = {}
        if terms:
            for idx, f in terms.items():
                idx = tuple(idx)
                if len(idx) != degree:
                    raise ValueError(f"index {idx} does not match degree {degree}")
                if not isinstance(f, PolyScalar):
                    f = PolyScalar.const(f, nvars)
                if f.is_zero():
                    continue
                s = perm_sign(idx)
                if s == 0:
                    continue
                key = tuple(sorted(idx))
                f = f if s > 0 else -f
                if key in out:
                    f = out[key] + f
                    if f.is_zero():
                        del out[key]
                        continue
                out[key] = f
        self.terms = out

    # constructors
    @classmethod
    def zero(cls, degree: int, nvars: int = NVARS) -> "PolyForm":
        return cls(degree, {}, nvars)

    @classmethod
    def scalar(cls, f, nvars: int = NVARS) -> "PolyForm":
        return cls(0, {(): f}, nvars)

    @classmethod
    def dx(cls, *axes, coeff=1, nvars: int = NVARS) -> "PolyForm":
        return cls(len(axes), {tuple(axes): coeff}, nvars)

    @classmethod
    def from_constant(cls, degree: int, comps: dict, nvars: int = NVARS) -> "PolyForm":
        return cls(degree, {k: PolyScalar.const(v, nvars) for k, v in comps.items()}, nvars)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exact(self) -> bool:
        return all(f.exact for f in self.terms.values())

    def coefficient(self, *axes) -> PolyScalar:
        s = perm_sign(axes)
        f = self.terms.get(tuple(sorted(axes)), PolyScalar(nvars=self.nvars))
        return f if s >= 0 else -f

    def constant_coefficient(self, *axes):
        f = self.coefficient(*axes)
        return f.terms.get((0,) * self.nvars, Fraction(0))

    # algebra
    def _check(self, other):
        if other.degree != self.degree or other.nvars != self.nvars:
            raise ValueError("forms of different degree or dimension")

    def __add__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        self._check(other)
        out = dict(self.terms)
        for k, f in other.terms.items():
            out[k] = out[k] + f if k in out else f
        return PolyForm(self.degree, out, self.nvars)

    def __radd__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return PolyForm(self.degree, {k: -f for k, f in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (Number, PolyScalar)):
            return PolyForm(self.degree, {k: f * other for k, f in self.terms.items()}, self.nvars)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            return self * Fraction(1, other)
        return self * (1.0 / other)

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        if other.degree != self.degree:
            return self.is_zero() and other.is_zero()
        return (self - other).is_zero()

    __hash__ = None

    def max_abs_coeff(self) -> float:
        return max((f.max_abs_coeff() for f in self.terms.values()), default=0.0)

    def __repr__(self):
        if not self.terms:
            return f"0 ({self.degree}-form)"
        return " + ".join(f"({f})dx{''.join(map(str, k))}" for k, f in sorted(self.terms.items()))

    # compiled numeric evaluation
    def compiled(self) -> "_Compiled":
        if self._compiled is None:
            self._compiled = _Compiled(self)
        return self._compiled


class _Compiled:
    """Vectorised float evaluator of a PolyForm."""

    def __init__(self, form: PolyForm):
        self.degree = form.degree
        self.comps = sorted(form.terms)
        monos = sorted({m for f in form.terms.values() for m in f.terms})
        self.exps = np.array(monos, dtype=int).reshape(len(monos), form.nvars)
        pos = {m: i for i, m in enumerate(monos)}
        self.coef = np.zeros((len(self.comps), len(monos)))
        for r, k in enumerate(self.comps):
            for m, c in form.terms[k].terms.items():
                self.coef[r, pos[m]] = float(c)
        self.idx = np.array(self.comps, dtype=int).reshape(len(self.comps), self.degree)

    def coefficients(self, P: np.ndarray) -> np.ndarray:
        """Component values at points P of shape (N, n): returns (N, ncomp)."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if not self.comps:
            return np.zeros((P.shape[0], 0))
        mono = np.prod(P[:, None, :] ** self.exps[None, :, :], axis=2)
        return mono @ self.coef.T

    def evaluate(self, P: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Values at points P (N, n) on vector tuples V (N, k, n)."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        V = np.asarray(V, dtype=float)
        if V.ndim == 2:
            V = V[None]
        if V.shape[1] != self.degree:
            raise ValueError(f"expected {self.degree} vectors, got {V.shape[1]}")
        if not self.comps:
            return np.zeros(P.shape[0])
        c = self.coefficients(P)
        if self.degree == 0:
            return c[:, 0]
        # minors[N, comp, a, b] = V[N, b, idx[comp, a]]
        sub = V[:, :, self.idx]                      # (N, k, ncomp, k)
        minors = np.transpose(sub, (0, 2, 3, 1))      # (N, ncomp, a, b)
        return np.sum(c * np.linalg.det(minors), axis=1)


def wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    """Exterior product; exceeding the dimension gives the zero form."""
    if a.nvars != b.nvars:
        raise ValueError("forms on different spaces")
    k = a.degree + b.degree
    if k > a.nvars:
        return PolyForm.zero(k, a.nvars)
    out = {}
    for I, f in a.terms.items():
        sI = set(I)
        for J, g in b.terms.items():
            if sI.intersection(J):
                continue
            IJ = I + J
            s = perm_sign(IJ)
            key = tuple(sorted(IJ))
            h = f * g if s > 0 else -(f * g)
            out[key] = out[key] + h if key in out else h
    return PolyForm(k, out, a.nvars)


def wedge_all(*forms: PolyForm) -> PolyForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def exterior_derivative(a: PolyForm) -> PolyForm:
    out = {}
    for I, f in a.terms.items():
        for i in range(a.nvars):
            if i in I:
                continue
            g = f.diff(i)
            if g.is_zero():
                continue
            idx = (i,) + I
            s = perm_sign(idx)
            key = tuple(sorted(idx))
            h = g if s > 0 else -g
            out[key] = out[key] + h if key in out else h
    return PolyForm(a.degree + 1, out, a.nvars)


def contract(a: PolyForm, v) -> PolyForm:
    """i(v)a for a constant vector v, keeping polynomial coefficients."""
    if a.degree < 1:
        raise ValueError("cannot contract a 0-form")
    v = [_clean(x) if isinstance(x, int) else x for x in v]
    out = {}
    for I, f in a.terms.items():
        for m, ax in enumerate(I):
            c = v[ax]
            if c == 0:
                continue
            key = I[:m] + I[m + 1:]
            h = f * (c if m % 2 == 0 else -c)
            out[key] = out[key] + h if key in out else h
    return PolyForm(a.degree - 1, out, a.nvars)


def at_point(a: PolyForm, p) -> PolyForm:
    """Freeze coefficients at p, giving a constant-coefficient (float) form."""
    comp = a.compiled()
    vals = comp.coefficients(np.asarray(p, dtype=float))[0]
    return PolyForm.from_constant(a.degree, {k: float(v) for k, v in zip(comp.comps, vals)}, a.nvars)


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(NVARS)
        if abs(np.linalg.norm(c) - 1.0) > SPHERE_TOL * 1e3:
            raise ValueError("point is not on the unit sphere")
        object.__setattr__(self, "coords", c)

    @classmethod
    def normalized(cls, x) -> "SpherePoint":
        x = np.asarray(x, dtype=float).reshape(NVARS)
        return cls(x / np.linalg.norm(x))


@dataclass(frozen=True)
class Tangent:
    base: SpherePoint
    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float).reshape(NVARS)
        scale = max(1.0, float(np.linalg.norm(v)))
        if abs(np.dot(v, self.base.coords)) > 1e-9 * scale:
            raise ValueError("vector is not tangent to the sphere at its base")
        object.__setattr__(self, "vec", v)


def _arr(x) -> np.ndarray:
    if isinstance(x, SpherePoint):
        return x.coords
    if isinstance(x, Tangent):
        return x.vec
    return np.asarray(x, dtype=float)


def interior(a: PolyForm, v) -> PolyForm:
    """i(v)a with coefficients evaluated at v.base when v is a Tangent."""
    if isinstance(v, Tangent):
        return contract(at_point(a, v.base.coords), v.vec)
    return contract(a, np.asarray(v))


def evaluate(a: PolyForm, p, vs) -> float:
    vs = list(vs)
    if len(vs) != a.degree:
        raise ValueError(f"{a.degree}-form evaluated on {len(vs)} vectors")
    p = _arr(p)
    V = np.array([_arr(v) for v in vs]).reshape(1, len(vs), a.nvars)
    return float(a.compiled().evaluate(p[None], V)[0])


def evaluate_batch(a: PolyForm, P, V) -> np.ndarray:
    return a.compiled().evaluate(P, V)


# ---------------------------------------------------------------- pointwise


def tangent_basis(p) -> np.ndarray:
    """Orthonormal basis (rows) of the hyperplane p^perp with det[p; B] > 0."""
    p = _arr(p)
    q, _ = np.linalg.qr(np.column_stack([p, np.eye(len(p))]))
    B = q[:, 1:len(p)].T
    if np.dot(q[:, 0], p) < 0:
        B = -B
    if np.linalg.det(np.vstack([p, B])) < 0:
        B[-1] = -B[-1]
    return B


@dataclass(frozen=True)
class MetricAtPoint:
    """Gram matrix of a metric on the tangent space, with the basis it refers to."""

    base: np.ndarray
    basis: np.ndarray
    gram: np.ndarray
    ambient: np.ndarray

    @classmethod
    def from_ambient(cls, p, G: np.ndarray, basis=None) -> "MetricAtPoint":
        p = _arr(p)
        B = tangent_basis(p) if basis is None else np.asarray(basis, dtype=float)
        gram = B @ G @ B.T
        gram = 0.5 * (gram + gram.T)
        if np.min(np.linalg.eigvalsh(gram)) <= 0:
            raise ValueError("metric is not positive definite on the tangent space")
        return cls(p, B, gram, np.asarray(G, dtype=float))

    def inner(self, u, v) -> float:
        return float(_arr(u) @ self.ambient @ _arr(v))

    def orthonormal_frame(self) -> np.ndarray:
        """Gram-Schmidt frame (rows), same orientation as the basis."""
        try:
            L = np.linalg.cholesky(self.gram)
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular Gram matrix") from exc
        return np.linalg.solve(L, self.basis)


@dataclass(frozen=True)
class PointForm:
    """Alternating tensor on a tangent space, stored in an orthonormal coframe."""

    coframe: np.ndarray        # rows map ambient tangent vectors to frame coordinates
    form: PolyForm             # constant form on R^dim

    def __call__(self, *vs) -> float:
        V = np.array([self.coframe @ _arr(v) for v in vs])
        return evaluate(self.form, np.zeros(self.form.nvars), V)

    def components(self) -> dict:
        return {k: float(f.terms.get((0,) * self.form.nvars, 0)) for k, f in self.form.terms.items()}


@lru_cache(maxsize=None)
def subsets(n: int, k: int):
    return tuple(itertools.combinations(range(n), k))


def frame_components(a: PolyForm, p, frame: np.ndarray) -> PolyForm:
    """Pull the form at p back to the coordinates of the given frame (rows)."""
    frame = np.asarray(frame, dtype=float)
    n = frame.shape[0]
    comp = a.compiled()
    out = {}
    if a.degree == 0:
        return PolyForm.from_constant(0, {(): float(comp.coefficients(_arr(p))[0, 0])}, n)
    subs = subsets(n, a.degree)
    V = np.array([frame[list(I)] for I in subs])
    vals = comp.evaluate(np.repeat(_arr(p)[None], len(subs), axis=0), V)
    for I, val in zip(subs, vals):
        out[I] = float(val)
    return PolyForm.from_constant(a.degree, out, n)


def hodge_star_at(a: PolyForm, p, m: MetricAtPoint, orientation: int = 1) -> PointForm:
    """Pointwise Hodge star on the tangent space of m.

    The orientation is that of (p, basis) in R^8 times ``orientation``.
    """
    F = m.orthonormal_frame()
    n = F.shape[0]
    if a.degree > n:
        raise ValueError("degree exceeds tangent dimension")
    comps = frame_components(a, p, F)
    out = {}
    full = tuple(range(n))
    for I, f in comps.terms.items():
        J = tuple(i for i in full if i not in I)
        c = f.terms.get((0,) * n, 0)
        out[J] = orientation * perm_sign(I + J) * float(c)
    coframe = F @ m.ambient
    return PointForm(coframe, PolyForm.from_constant(n - a.degree, out, n))


def star_of_pointform(pf: PointForm, orientation: int = 1) -> PointForm:
    n = pf.form.nvars
    full = tuple(range(n))
    out = {}
    for I, f in pf.form.terms.items():
        J = tuple(i for i in full if i not in I)
        out[J] = orientation * perm_sign(I + J) * float(f.terms.get((0,) * n, 0))
    return PointForm(pf.coframe, PolyForm.from_constant(n - pf.form.degree, out, n))


# ---------------------------------------------------------------- complex helpers


def c2r(z) -> np.ndarray:
    """C^4 -> R^8 with interleaved (Re, Im) coordinates."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def r2c(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def realify(A) -> np.ndarray:
    """Real 2n x 2n matrix of the complex-linear map z -> A z."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    R = np.zeros((2 * n, 2 * n))
    R[0::2, 0::2] = A.real
    R[0::2, 1::2] = -A.imag
    R[1::2, 0::2] = A.imag
    R[1::2, 1::2] = A.real
    return R


def conj_matrix(n: int = 4) -> np.ndarray:
    """Real matrix of complex conjugation on C^n."""
    return np.diag([1.0, -1.0] * n)


class CForm:
    """Complex-valued form re + i im, used for complex-coordinate identities."""

    __slots__ = ("re", "im")

    def __init__(self, re: PolyForm, im: PolyForm | None = None):
        self.re = re
        self.im = im if im is not None else PolyForm.zero(re.degree, re.nvars)

    @property
    def degree(self) -> int:
        return self.re.degree

    def __add__(self, other):
        return CForm(self.re + other.re, self.im + other.im)

    def __neg__(self):
        return CForm(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, (int, Fraction)):
            a, b = Fraction(c), Fraction(0)
        else:
            # binary floats convert exactly, so dyadic constants like 1/2 or i stay exact
            c = complex(c)
            a, b = Fraction(c.real), Fraction(c.imag)
        return CForm(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def wedge(self, other: "CForm") -> "CForm":
        return CForm(wedge(self.re, other.re) - wedge(self.im, other.im),
                     wedge(self.re, other.im) + wedge(self.im, other.re))

    __xor__ = wedge

    def d(self) -> "CForm":
        return CForm(exterior_derivative(self.re), exterior_derivative(self.im))

    def __eq__(self, other):
        return self.re == other.re and self.im == other.im

    __hash__ = None


def z(j: int) -> CForm:
    """Coordinate function z_j (j = 1..4)."""
    a = 2 * (j - 1)
    return CForm(PolyForm.scalar(PolyScalar.var(a)), PolyForm.scalar(PolyScalar.var(a + 1)))


def zbar(j: int) -> CForm:
    w = z(j)
    return CForm(w.re, -w.im)


def dz(j: int) -> CForm:
    a = 2 * (j - 1)
    return CForm(PolyForm.dx(a), PolyForm.dx(a + 1))


def dzbar(j: int) -> CForm:
    w = dz(j)
    return CForm(w.re, -w.im)
