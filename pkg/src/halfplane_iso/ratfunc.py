"""Polynomials and rational maps over the complex numbers.

Coefficients are stored in ascending degree order.  Everything here is
immutable; arithmetic returns new objects.  Multiplicities of roots are
decided by clustering at tolerance scale rather than by symbolic gcd, since
all inputs are floating point.
"""
from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .config import DEFAULT, Tolerances

_EPS = np.finfo(float).eps


class _PoleMarker:
    """Value returned by scalar evaluation at a pole (the point at infinity)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "POLE"

    def __reduce__(self):
        return (_PoleMarker, ())


POLE = _PoleMarker()


def is_pole(value) -> bool:
    return value is POLE


class RootFindingError(ArithmeticError):
    pass


class DegreeOverflowError(ValueError):
    pass


class PartialFractionError(ArithmeticError):
    def __init__(self, message, condition=math.inf):
        super().__init__(message)
        self.condition = condition


def _as_coeffs(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=complex)).ravel()
    if arr.size == 0:
        arr = np.zeros(1, dtype=complex)
    return arr


def _trim(arr: np.ndarray, rel: float) -> np.ndarray:
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    cut = rel * scale
    n = arr.size
    while n > 1 and abs(arr[n - 1]) <= cut:
        n -= 1
    out = arr[:n].copy()
    mag = np.abs(out)
    out.real[np.abs(out.real) <= rel * mag] = 0.0
    out.imag[np.abs(out.imag) <= rel * mag] = 0.0
    return out


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple
    tol: InitVar[Tolerances] = DEFAULT

    def __post_init__(self, tol):
        arr = _trim(_as_coeffs(self.coeffs), tol.trim)
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in arr))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        roots = list(roots)
        if not roots:
            return cls([lead])
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "Polynomial":
        c = np.zeros(degree + 1, dtype=complex)
        c[degree] = coeff
        return cls(c)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.array)))

    def __call__(self, z):
        return npoly.polyval(z, self.array)

    def __add__(self, other):
        other = _coerce_poly(other)
        return Polynomial(npoly.polyadd(self.array, other.array))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.array)

    def __sub__(self, other):
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) - self

    def __mul__(self, other):
        other = _coerce_poly(other)
        return Polynomial(npoly.polymul(self.array, other.array))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Polynomial([1.0])
        for _ in range(n):
            out = out * self
        return out

    def __divmod__(self, other):
        other = _coerce_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if other.degree > self.degree:
            return Polynomial([0.0]), self
        q, r = npoly.polydiv(self.array, other.array)
        return Polynomial(q), Polynomial(r)

    def derivative(self, order: int = 1) -> "Polynomial":
        if order > self.degree:
            return Polynomial([0.0])
        return Polynomial(npoly.polyder(self.array, order))

    def taylor(self, c: complex) -> np.ndarray:
        """Coefficients of p(c + h) in powers of h."""
        return _taylor_at(self.array, c)

    def reversed_conjugate(self, degree: int | None = None) -> "Polynomial":
        """z**degree * conj(p(1/conj(z)))."""
        degree = self.degree if degree is None else degree
        c = np.zeros(degree + 1, dtype=complex)
        c[: len(self.coeffs)] = np.conj(self.array)
        return Polynomial(c[::-1])

    def deflate(self, c: complex) -> "Polynomial":
        """Quotient of synthetic division by (z - c); the remainder is dropped."""
        a = self.array
        n = a.size - 1
        if n < 1:
            raise ValueError("cannot deflate a constant")
        q = np.zeros(n, dtype=complex)
        q[n - 1] = a[n]
        for k in range(n - 1, 0, -1):
            q[k - 1] = a[k] + c * q[k]
        return Polynomial(q)

    def roots(self, tol: Tolerances = DEFAULT) -> list["Root"]:
        return poly_roots(self, tol)


def _coerce_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial([value])


# --------------------------------------------------------------------------- roots


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int = 1


def _aberth(a: np.ndarray, sweeps: int) -> tuple[np.ndarray, bool]:
    """Simultaneous Aberth-Ehrlich iteration for the monic polynomial ``a``."""
    n = a.size - 1
    da = npoly.polyder(a)
    abs_a = np.abs(a)
    z = _initial_guesses(abs_a)
    converged = np.zeros(n, dtype=bool)
    for _ in range(sweeps):
        pz = npoly.polyval(z, a)
        dpz = npoly.polyval(z, da)
        bound = 8 * _EPS * npoly.polyval(np.abs(z), abs_a)
        converged |= np.abs(pz) <= bound
        if converged.all():
            return z, True
        with np.errstate(divide="ignore", invalid="ignore"):
            w = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = np.sum(1.0 / diff, axis=1) - 1.0
            step = w / (1.0 - w * s)
        step = np.where(np.isfinite(step) & ~converged, step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= 4 * _EPS * np.maximum(np.abs(z), 1e-300)):
            return z, True
    return z, False


def _initial_guesses(abs_a: np.ndarray) -> np.ndarray:
    """Points on circles read off the Newton polygon of log |a_k|.

    Each edge of the upper convex hull from k to l carries l - k roots of
    modulus about (|a_k|/|a_l|)^(1/(l - k)), so roots of wildly different
    sizes all start close to their own scale.
    """
    n = abs_a.size - 1
    ks = [k for k in range(n + 1) if abs_a[k] > 0]
    logs = {k: math.log(abs_a[k]) for k in ks}
    hull: list[int] = []
    for k in ks:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the chord from i to k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    # neighbouring edges whose radii differ by less than 100x share one
    # circle, otherwise unit-length edges leave the starts bunched in angle
    circles: list[list[float]] = []  # [log radius sum, count]
    for i, j in zip(hull, hull[1:]):
        log_r = (logs[i] - logs[j]) / (j - i)
        if circles and abs(log_r - circles[-1][0] / circles[-1][1]) < math.log(100.0):
            circles[-1][0] += log_r * (j - i)
            circles[-1][1] += j - i
        else:
            circles.append([log_r * (j - i), j - i])
    out = []
    for total, count in circles:
        count = int(count)
        phase = 2 * np.pi * np.arange(count) / count + 0.4 + 0.7 * len(out) / max(n, 1)
        out.extend(math.exp(total / count) * np.exp(1j * phase))
    return np.asarray(out, dtype=complex)


def _taylor_at(a: np.ndarray, c: complex) -> np.ndarray:
    t = a.copy()
    n = t.size
    for k in range(n - 1):
        for j in range(n - 2, k - 1, -1):
            t[j] += c * t[j + 1]
    return t


def _cluster(roots: np.ndarray, a: np.ndarray, tol: Tolerances) -> list[Root]:
    groups = [[z] for z in roots]

    def centre(g):
        return complex(np.mean(g))

    # single linkage at tau_cluster scaled to unit order
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                ci, cj = centre(groups[i]), centre(groups[j])
                scale = max(1.0, abs(ci), abs(cj))
                if abs(ci - cj) <= tol.cluster * scale:
                    groups[i] += groups.pop(j)
                    merged = True
                    break
            if merged:
                break

    # validated merge: a group whose spread is within the pseudo-zero radius
    # of an m-fold root at its centroid is one root of multiplicity m
    abs_a = np.abs(a)
    merged = True
    while merged and len(groups) > 1:
        merged = False
        pairs = []
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                ci, cj = centre(groups[i]), centre(groups[j])
                d = abs(ci - cj)
                if d <= 1e-2 * max(1.0, abs(ci), abs(cj)):
                    pairs.append((d, i, j))
        for _, i, j in sorted(pairs):
            g = groups[i] + groups[j]
            m = len(g)
            c = centre(g)
            t = _taylor_at(a, c)
            lead = abs(t[m]) if m < t.size else 0.0
            if lead == 0.0:
                continue
            noise = 1e-12 * npoly.polyval(abs(c), abs_a)
            radius = (noise / lead) ** (1.0 / m)
            if max(abs(z - c) for z in g) <= radius:
                groups[i] = g
                groups.pop(j)
                merged = True
                break

    out = []
    for g in groups:
        m = len(g)
        c = centre(g)
        if m > 1:
            c = _polish_multiple(a, c, m)
        out.append(Root(complex(c), m))
    out.sort(key=lambda r: (round(r.value.real, 12), round(r.value.imag, 12)))
    return out


def _polish_multiple(a: np.ndarray, c: complex, m: int) -> complex:
    """Newton on the (m-1)-th derivative, where an m-fold root is simple."""
    d = npoly.polyder(a, m - 1)
    dd = npoly.polyder(d)
    best, best_val = c, abs(npoly.polyval(c, d))
    z = c
    for _ in range(8):
        dv = npoly.polyval(z, dd)
        if dv == 0:
            break
        z = z - npoly.polyval(z, d) / dv
        val = abs(npoly.polyval(z, d))
        if val < best_val and abs(z - c) <= 1e-3 * max(1.0, abs(c)):
            best, best_val = z, val
    return best


def poly_roots(p: Polynomial, tol: Tolerances = DEFAULT) -> list[Root]:
    """Roots of ``p`` grouped into clusters with multiplicities.

    Raises RootFindingError if the Aberth iteration does not settle within
    ``tol.root_sweeps`` sweeps to a residual of order ``tol.pf`` times the
    coefficient scale.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    a = p.array / p.lead
    # exact zero roots
    nz = 0
    while a[nz] == 0:
        nz += 1
    b = a[nz:]
    found = []
    if b.size > 1:
        z, ok = _aberth(b, tol.root_sweeps)
        resid = np.abs(npoly.polyval(z, b))
        scale = npoly.polyval(np.abs(z), np.abs(b))
        if not ok and np.any(resid > tol.pf * scale):
            raise RootFindingError(
                f"root finding did not converge for polynomial with coefficients {p.coeffs}"
            )
        found = list(z)
    roots = _cluster(np.asarray(found, dtype=complex), b, tol) if found else []
    if nz:
        roots.append(Root(0j, nz))
        roots.sort(key=lambda r: (round(r.value.real, 12), round(r.value.imag, 12)))
    return roots


def flat_roots(roots: Sequence[Root]) -> list[complex]:
    out = []
    for r in roots:
        out.extend([r.value] * r.multiplicity)
    return out


# --------------------------------------------------------------------------- rational maps


def _reduce(num: Polynomial, den: Polynomial, tol: Tolerances) -> tuple[Polynomial, Polynomial]:
    if den.is_zero():
        raise ZeroDivisionError("rational map with zero denominator")
    if num.is_zero():
        return Polynomial([0.0]), Polynomial([1.0])
    if num.degree >= 1 and den.degree >= 1:
        rn = poly_roots(num, tol)
        rd = poly_roots(den, tol)
        for d in rd:
            for k, n in enumerate(rn):
                if n.multiplicity == 0:
                    continue
                if abs(n.value - d.value) <= tol.gcd * max(1.0, abs(d.value)):
                    common = min(n.multiplicity, d.multiplicity)
                    c = 0.5 * (n.value + d.value)
                    for _ in range(common):
                        num = num.deflate(c)
                        den = den.deflate(c)
                    rn[k] = Root(n.value, n.multiplicity - common)
                    break
    lead = den.lead
    return Polynomial(num.array / lead, tol), Polynomial(den.array / lead, tol)


@dataclass(frozen=True)
class RationalMap:
    """num/den with den monic and no common roots (at tolerance ``tol.gcd``)."""

    num: Polynomial
    den: Polynomial = field(default_factory=lambda: Polynomial([1.0]))
    tol: InitVar[Tolerances] = DEFAULT

    def __post_init__(self, tol):
        num, den = _reduce(_coerce_poly_any(self.num), _coerce_poly_any(self.den), tol)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def identity(cls) -> "RationalMap":
        return cls(Polynomial([0.0, 1.0]))

    @classmethod
    def constant(cls, c: complex) -> "RationalMap":
        return cls(Polynomial([c]))

    @classmethod
    def from_coeffs(cls, num, den=(1.0,), tol: Tolerances = DEFAULT) -> "RationalMap":
        return cls(Polynomial(num, tol), Polynomial(den, tol), tol)

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def __call__(self, z):
        """Vectorised evaluation; poles evaluate to complex infinity."""
        z = np.asarray(z, dtype=complex)
        n = self.num(z)
        d = self.den(z)
        scale = npoly.polyval(np.abs(z), np.abs(self.den.array))
        at_pole = np.abs(d) <= DEFAULT.pole * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(at_pole, complex(np.inf, 0.0), n / np.where(at_pole, 1.0, d))
        return out[()] if out.ndim == 0 else out

    def poles(self, tol: Tolerances = DEFAULT) -> list[Root]:
        return poly_roots(self.den, tol) if self.den.degree >= 1 else []

    def zeros(self, tol: Tolerances = DEFAULT) -> list[Root]:
        return poly_roots(self.num, tol) if self.num.degree >= 1 else []

    def real_poles(self, tol: Tolerances = DEFAULT) -> list[float]:
        return sorted(
            r.value.real
            for r in self.poles(tol)
            if abs(r.value.imag) <= tol.real * max(1.0, abs(r.value))
        )

    def preimages(self, y: complex, tol: Tolerances = DEFAULT) -> list[complex]:
        """Solutions of r(z) = y, with multiplicity."""
        p = self.num - y * self.den
        if p.degree < 1:
            return []
        return flat_roots(poly_roots(p, tol))

    def allclose(self, other: "RationalMap", rtol: float = 1e-9) -> bool:
        a = (self.num.array, self.den.array)
        b = (other.num.array, other.den.array)
        if any(x.size != y.size for x, y in zip(a, b)):
            return False
        scale = max(self.num.scale(), self.den.scale(), 1e-300)
        return all(np.max(np.abs(x - y)) <= rtol * scale for x, y in zip(a, b))

    # arithmetic ---------------------------------------------------------------

    def __add__(self, other):
        o = _coerce_map(other)
        return RationalMap(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalMap(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_coerce_map(other))

    def __rsub__(self, other):
        return _coerce_map(other) - self

    def __mul__(self, other):
        o = _coerce_map(other)
        return RationalMap(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_map(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero map")
        return RationalMap(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return _coerce_map(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        return RationalMap(self.num**n, self.den**n)

    def __repr__(self):
        return f"RationalMap(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"


def _coerce_poly_any(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if np.ndim(value) == 0:
        return Polynomial([value])
    return Polynomial(value)


def _coerce_map(value) -> RationalMap:
    if isinstance(value, RationalMap):
        return value
    if isinstance(value, Polynomial):
        return RationalMap(value)
    return RationalMap.constant(value)


def evaluate(r: RationalMap, z: complex, tol: Tolerances = DEFAULT):
    """Scalar evaluation returning ``POLE`` when |den(z)| is below tol.pole * scale."""
    d = complex(r.den(z))
    scale = float(npoly.polyval(abs(z), np.abs(r.den.array)))
    if abs(d) <= tol.pole * scale:
        return POLE
    return complex(r.num(z)) / d


# --------------------------------------------------------------------------- partial fractions


@dataclass(frozen=True)
class PoleTerm:
    pole: complex
    order: int
    coeffs: tuple  # coeffs[j-1] multiplies (z - pole)**(-j)

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def __call__(self, z):
        h = np.asarray(z, dtype=complex) - self.pole
        return sum(c / h ** (j + 1) for j, c in enumerate(self.coeffs))


@dataclass(frozen=True)
class PartialFractionForm:
    poly_part: Polynomial
    terms: tuple
    condition: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.poly_part(z) + sum((t(z) for t in self.terms), np.zeros_like(z))
        return out[()] if out.ndim == 0 else out


def _probe_points(scale: float, count: int = 20, seed: int = 20240501) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rad = scale * rng.uniform(0.7, 2.0, count)
    ang = rng.uniform(0, 2 * np.pi, count)
    return rad * np.exp(1j * ang)


def _series_quotient(r: np.ndarray, q: np.ndarray, m: int) -> np.ndarray:
    g = np.zeros(m, dtype=complex)
    r = np.concatenate([r, np.zeros(m)])
    q = np.concatenate([q, np.zeros(m)])
    for l in range(m):
        acc = r[l] - sum(g[j] * q[l - j] for j in range(l))
        g[l] = acc / q[0]
    return g


def partial_fractions(r: RationalMap, tol: Tolerances = DEFAULT) -> PartialFractionForm:
    quotient, rem = divmod(r.num, r.den)
    if r.den.degree == 0:
        return PartialFractionForm(Polynomial(r.num.array / r.den.lead), ())
    poles = poly_roots(r.den, tol)
    terms = []
    for i, p in enumerate(poles):
        others = flat_roots(poles[:i] + poles[i + 1 :])
        q = Polynomial.from_roots(others) * r.den.lead
        g = _series_quotient(rem.taylor(p.value), q.taylor(p.value), p.multiplicity)
        coeffs = tuple(complex(c) for c in g[::-1])
        terms.append(PoleTerm(p.value, p.multiplicity, coeffs))

    gaps = [
        abs(a.value - b.value) for i, a in enumerate(poles) for b in poles[i + 1 :]
    ]
    biggest = max(abs(c) for t in terms for c in t.coeffs)
    scale = max(1.0, max(abs(p.value) for p in poles))
    cond = (1.0 + biggest) * (1.0 + scale / min(gaps)) if gaps else 1.0 + biggest
    form = PartialFractionForm(quotient, tuple(terms), cond)

    zs = _probe_points(1.0 + scale)
    exact = r(zs)
    approx = form(zs)
    magnitude = np.abs(quotient(zs)) + sum(np.abs(t(zs)) for t in terms) + np.abs(exact)
    err = np.max(np.abs(approx - exact) / np.maximum(magnitude, 1e-300))
    if not err <= tol.pf:
        raise PartialFractionError(
            f"partial fraction reconstruction error {err:.3g} exceeds {tol.pf:g} "
            f"(condition estimate {cond:.3g})",
            cond,
        )
    return form


# --------------------------------------------------------------------------- composition


def compose(outer: RationalMap, inner: RationalMap, tol: Tolerances = DEFAULT) -> RationalMap:
    """outer o inner, with the common denominator power cleared symbolically."""
    n = max(outer.num.degree, outer.den.degree)
    if n * max(inner.num.degree, inner.den.degree, 1) > tol.degree_cap:
        raise DegreeOverflowError(
            f"composition degree {n * inner.degree} exceeds cap {tol.degree_cap}"
        )
    a, b = inner.num, inner.den
    a_pows = [Polynomial([1.0])]
    b_pows = [Polynomial([1.0])]
    for _ in range(n):
        a_pows.append(a_pows[-1] * a)
        b_pows.append(b_pows[-1] * b)

    def clear(p: Polynomial) -> Polynomial:
        out = Polynomial([0.0])
        for k, c in enumerate(p.coeffs):
            if c != 0:
                out = out + c * a_pows[k] * b_pows[n - k]
        return out

    return RationalMap(clear(outer.num), clear(outer.den), tol)


def iterate(r: RationalMap, n: int, tol: Tolerances = DEFAULT) -> RationalMap:
    if n < 0:
        raise ValueError("iterate needs n >= 0")
    if n and r.degree**n > tol.degree_cap:
        raise DegreeOverflowError(f"iterate degree {r.degree}**{n} exceeds cap {tol.degree_cap}")
    out = RationalMap.identity()
    for _ in range(n):
        out = compose(r, out, tol)
    return out
