"""Decision procedure for rational self-maps of the upper half-plane.

For a rational self-map r of the half-plane, C_r is an isometry on H^p iff it
is similar to an isometry iff r is inner with lim r(z)/z = 1, and these are
exactly the maps z + alpha + sum mu_i/(z - gamma_i) with real alpha, distinct
real gamma_i and mu_i < 0.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .conformal import is_inner_halfplane
from .ratfunc import (
    PoleTerm,
    Polynomial,
    RationalMap,
    partial_fractions,
)


class Verdict(str, enum.Enum):
    ISOMETRY_AND_SIMILAR = "ISOMETRY_AND_SIMILAR"
    NOT_SIMILAR = "NOT_SIMILAR"
    INVALID_SYMBOL = "INVALID_SYMBOL"


class Reason(str, enum.Enum):
    NOT_MONIC_LINEAR_PART = "NOT_MONIC_LINEAR_PART"
    REPEATED_POLE = "REPEATED_POLE"
    COMPLEX_POLE = "COMPLEX_POLE"
    NONNEGATIVE_RESIDUE = "NONNEGATIVE_RESIDUE"
    NON_REAL_COEFFICIENT = "NON_REAL_COEFFICIENT"
    # self-map failures
    POLE_IN_HALF_PLANE = "POLE_IN_HALF_PLANE"
    SLOPE_NOT_POSITIVE = "SLOPE_NOT_POSITIVE"
    SUPERLINEAR_GROWTH = "SUPERLINEAR_GROWTH"
    REAL_CONSTANT = "REAL_CONSTANT"
    BOUNDARY_GRID = "BOUNDARY_GRID"
    # classification failures
    NOT_INNER = "NOT_INNER"
    SLOPE_NOT_ONE = "SLOPE_NOT_ONE"


class NotPolyaSzego(ValueError):
    def __init__(self, reason: Reason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason


class WitnessSearchError(ArithmeticError):
    pass


class ClassificationInconsistency(AssertionError):
    """Raised when a map passes condition (3) but has no measure-preserving form.
    That combination is impossible, so this always indicates a bug."""


class UnboundedOperator(ValueError):
    pass


INFINITY = complex(math.inf, 0.0)


@dataclass(frozen=True)
class PolyaSzegoForm:
    sign: int
    alpha: float
    terms: tuple  # (gamma_i, mu_i) pairs, mu_i < 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = z + self.alpha + sum((mu / (z - g) for g, mu in self.terms), np.zeros_like(z))
        out = self.sign * out
        return out[()] if out.ndim == 0 else out

    def to_map(self) -> RationalMap:
        z = RationalMap.identity()
        r = z + self.alpha
        for g, mu in self.terms:
            r = r + mu / (z - g)
        return r if self.sign > 0 else -r


@dataclass(frozen=True)
class NagyBound:
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= 1):
            raise ValueError("Nagy bound k must be finite and >= 1")


@dataclass(frozen=True)
class SelfMapTest:
    self_map: bool
    witness: complex | None = None
    reason: Reason | None = None


@dataclass(frozen=True)
class ClassificationReport:
    inner: bool
    self_map: bool
    slope: complex
    verdict: Verdict
    certificate: PolyaSzegoForm | None = None
    witness: complex | None = None
    witness_reason: Reason | None = None
    failed: tuple = ()
    norm_p: float | None = None
    p: float = 2.0


def asymptotic_slope(r: RationalMap) -> complex:
    """lim r(z)/z as |z| -> infinity: finite, 0, or INFINITY."""
    dn, dd = r.num.degree, r.den.degree
    if r.num.is_zero() or dn <= dd:
        return 0j
    if dn == dd + 1:
        return complex(r.num.lead / r.den.lead)
    return INFINITY


def _is_real(x: complex, scale: float, tol: Tolerances) -> bool:
    return abs(complex(x).imag) <= tol.real * max(1.0, scale)


# --------------------------------------------------------------------------- witnesses


def _search_ray(r, origin, theta, radii, tol, need_upper=True):
    direction = cmath.exp(1j * theta)
    for k in radii:
        z = origin + k * direction
        if need_upper and not z.imag > 0:
            continue
        v = complex(r(z))
        if math.isfinite(v.imag) and v.imag < -tol.witness:
            return z
    return None


def violation_witness(r: RationalMap, term: PoleTerm, tol: Tolerances = DEFAULT) -> complex:
    """A point z in the upper half-plane with Im r(z) < 0 near a bad pole.

    Near a pole of order m, r(z) ~ mu/(z - gamma)^m.  For mu > 0 the ray
    gamma + k e^{i pi/(2m)} sends r to the negative imaginary axis; for mu < 0
    and m >= 2 the ray at angle 3 pi/(2m) does.  k runs over 2^-1 ... 2^-40.
    """
    m, mu = term.order, complex(term.leading)
    real_mu = abs(mu.imag) <= tol.real * max(1.0, abs(mu))
    if m == 1 and real_mu and mu.real < 0:
        raise ValueError("simple pole with negative residue is not a violation")
    if real_mu and mu.real > 0:
        theta = math.pi / (2 * m)
    elif real_mu:
        theta = 3 * math.pi / (2 * m)
    else:
        # Im(mu e^{-i m theta}) = |mu| sin(arg mu - m theta) changes sign at
        # theta = (arg mu - j pi)/m; take the middle of the widest interval in
        # (0, pi) where it is negative (it can be arbitrarily thin)
        phase = cmath.phase(mu)
        cuts = sorted({0.0, math.pi} | {
            (phase - j * math.pi) / m for j in range(-2 * m - 2, 2 * m + 3)
            if 0 < (phase - j * math.pi) / m < math.pi
        })
        spans = [(b - a, (a + b) / 2) for a, b in zip(cuts, cuts[1:])
                 if math.sin(phase - m * (a + b) / 2) < 0]
        if not spans:
            raise WitnessSearchError(f"no admissible ray for term {term}")
        theta = max(spans)[1]
    radii = [2.0**-j for j in range(1, 41)]
    z = _search_ray(r, complex(term.pole), theta, radii, tol)
    if z is None:
        raise WitnessSearchError(
            f"no witness along ray angle {theta:.4f} from pole {term.pole} (order {m}, mu {mu})"
        )
    return z


def _growth_witness(r: RationalMap, poly: Polynomial, tol: Tolerances) -> complex | None:
    """Witness at large |z| from the leading term c z^d of the polynomial part."""
    d = poly.degree
    c = complex(poly.lead)
    radii = [2.0**j for j in range(1, 41)]
    edge = np.geomspace(1e-12, 1e-3, 10)
    grid = np.concatenate([edge, np.linspace(1e-3, math.pi - 1e-3, 721), math.pi - edge])
    lean = np.sin(d * grid + cmath.phase(c))
    thetas = [float(grid[k]) for k in np.argsort(lean)[:8] if lean[k] < 0]
    for theta in thetas:
        z = _search_ray(r, 0j, theta, radii, tol)
        if z is not None:
            return z
    return None


def _grid_witness(r: RationalMap, tol: Tolerances, radius: float = 10.0) -> complex | None:
    xs = np.concatenate([-np.geomspace(1e-4, radius, 200)[::-1], np.geomspace(1e-4, radius, 200)])
    ys = np.geomspace(1e-6, radius, 80)
    grid = (xs[None, :] + 1j * ys[:, None]).ravel()
    vals = r(grid)
    im = np.where(np.isfinite(vals.imag), vals.imag, np.inf)
    k = int(np.argmin(im))
    return complex(grid[k]) if im[k] < -tol.witness else None


def _pole_witness(r: RationalMap, pole: complex, tol: Tolerances) -> complex:
    # in C^+ the whole punctured neighbourhood is available, so any angle works
    roots = [p for p in r.poles(tol) if abs(p.value - pole) < 1e-9 * max(1, abs(pole))]
    m = roots[0].multiplicity if roots else 1
    radii = [min(pole.imag, 1.0) * 2.0**-j for j in range(1, 41)]
    for theta in np.linspace(0, 2 * math.pi, 4 * m + 4, endpoint=False):
        z = _search_ray(r, pole, float(theta), radii, tol)
        if z is not None:
            return z
    raise WitnessSearchError(f"no witness found around pole {pole}")


# --------------------------------------------------------------------------- self-map test


def is_self_map(r: RationalMap, tol: Tolerances = DEFAULT) -> SelfMapTest:
    """Does r map the upper half-plane into itself?  Witness returned on failure."""
    for p in r.poles(tol):
        if p.value.imag > tol.real * max(1.0, abs(p.value)):
            return SelfMapTest(False, _pole_witness(r, p.value, tol), Reason.POLE_IN_HALF_PLANE)

    form = partial_fractions(r, tol)
    poly = form.poly_part
    if poly.degree >= 2:
        return SelfMapTest(False, _growth_witness(r, poly, tol), Reason.SUPERLINEAR_GROWTH)

    beta = complex(poly.coeffs[1]) if poly.degree == 1 else 0j
    scale = max(1.0, abs(beta))
    if poly.degree == 1 and not (_is_real(beta, scale, tol) and beta.real > 0):
        return SelfMapTest(False, _growth_witness(r, poly, tol), Reason.SLOPE_NOT_POSITIVE)

    for term in form.terms:
        gamma = complex(term.pole)
        if abs(gamma.imag) > tol.real * max(1.0, abs(gamma)):
            continue  # lower half-plane pole, harmless
        mu = complex(term.leading)
        real_mu = _is_real(mu, abs(mu), tol)
        if term.order >= 2 or not real_mu or mu.real >= 0:
            if term.order >= 2:
                reason = Reason.REPEATED_POLE
            else:
                reason = Reason.NONNEGATIVE_RESIDUE if real_mu else Reason.NON_REAL_COEFFICIENT
            return SelfMapTest(False, violation_witness(r, term, tol), reason)

    inner = is_inner_halfplane(r, tol).inner
    if inner:
        if poly.degree < 1 and not form.terms:
            return SelfMapTest(False, None, Reason.REAL_CONSTANT)
        return SelfMapTest(True)

    # complex coefficients: sample Im r on a graded boundary grid and inside
    reals = [t.pole.real for t in form.terms]
    R = 10.0 * (1.0 + max((abs(g) for g in reals), default=0.0))
    u = np.linspace(-1, 1, 4096)
    xs = R * np.sign(u) * np.abs(u) ** 3
    for g in reals:
        xs = np.concatenate([xs, g + np.geomspace(1e-6, 1, 64), g - np.geomspace(1e-6, 1, 64)])
    vals = r(xs)
    ok = np.isfinite(vals.imag)
    if np.any(vals.imag[ok] < -tol.witness):
        k = int(np.argmin(np.where(ok, vals.imag, np.inf)))
        # push the boundary point slightly into the half-plane
        for eps in (1e-9, 1e-7, 1e-5, 1e-3):
            z = complex(xs[k] + 1j * eps * max(1.0, abs(xs[k])))
            if complex(r(z)).imag < -tol.witness:
                return SelfMapTest(False, z, Reason.BOUNDARY_GRID)
        return SelfMapTest(False, None, Reason.BOUNDARY_GRID)
    w = _grid_witness(r, tol, R)
    if w is not None:
        return SelfMapTest(False, w, Reason.BOUNDARY_GRID)
    return SelfMapTest(True)


# --------------------------------------------------------------------------- canonical form


def polya_szego_form(r: RationalMap, tol: Tolerances = DEFAULT) -> PolyaSzegoForm:
    """r = sign*(z + alpha + sum mu_i/(z - gamma_i)) with real alpha, gamma_i and mu_i < 0.

    Raises NotPolyaSzego with a reason code otherwise.
    """
    form = partial_fractions(r, tol)
    poly = form.poly_part
    if poly.degree != 1:
        raise NotPolyaSzego(Reason.NOT_MONIC_LINEAR_PART, f"polynomial part has degree {poly.degree}")
    lead = complex(poly.coeffs[1])
    if abs(lead - 1) <= tol.slope:
        sign = 1
    elif abs(lead + 1) <= tol.slope:
        sign = -1
    else:
        raise NotPolyaSzego(Reason.NOT_MONIC_LINEAR_PART, f"leading coefficient {lead}")
    alpha = sign * complex(poly.coeffs[0])
    if not _is_real(alpha, abs(alpha), tol):
        raise NotPolyaSzego(Reason.NON_REAL_COEFFICIENT, f"alpha = {alpha}")

    terms = []
    for term in form.terms:
        gamma = complex(term.pole)
        if term.order > 1:
            raise NotPolyaSzego(Reason.REPEATED_POLE, f"pole {gamma} of order {term.order}")
        if not _is_real(gamma, abs(gamma), tol):
            raise NotPolyaSzego(Reason.COMPLEX_POLE, f"pole {gamma}")
        mu = sign * complex(term.coeffs[0])
        if not _is_real(mu, abs(mu), tol):
            raise NotPolyaSzego(Reason.NON_REAL_COEFFICIENT, f"residue {mu} at {gamma}")
        if mu.real >= 0:
            raise NotPolyaSzego(Reason.NONNEGATIVE_RESIDUE, f"residue {mu.real} at {gamma.real}")
        terms.append((gamma.real, mu.real))
    return PolyaSzegoForm(sign, alpha.real, tuple(sorted(terms)))


# --------------------------------------------------------------------------- verdict


def operator_norm(r: RationalMap, p: float = 2.0, tol: Tolerances = DEFAULT) -> float:
    """||C_r|| on H^p of the half-plane: s^(-1/p) with s = lim r(z)/z."""
    s = asymptotic_slope(r)
    if s == 0 or cmath.isinf(s):
        raise UnboundedOperator(f"slope {s} gives an unbounded composition operator")
    if not (_is_real(s, abs(s), tol) and s.real > 0):
        raise ValueError(f"slope {s} is not real and positive; r is not a self-map")
    return s.real ** (-1.0 / p)


def classify(r: RationalMap, p: float = 2.0, tol: Tolerances = DEFAULT) -> ClassificationReport:
    if not p >= 1 or math.isinf(p):
        raise ValueError("p must lie in [1, inf)")
    inner = is_inner_halfplane(r, tol).inner
    slope = asymptotic_slope(r)
    sm = is_self_map(r, tol)
    if not sm.self_map:
        return ClassificationReport(
            inner, False, slope, Verdict.INVALID_SYMBOL,
            witness=sm.witness, witness_reason=sm.reason, p=p,
        )

    try:
        norm = operator_norm(r, p, tol)
    except UnboundedOperator:
        norm = math.inf

    slope_one = not cmath.isinf(slope) and abs(slope - 1) <= tol.slope
    failed = []
    if not inner:
        failed.append(Reason.NOT_INNER)
    if not slope_one:
        failed.append(Reason.SLOPE_NOT_ONE)
    if failed:
        return ClassificationReport(
            inner, True, slope, Verdict.NOT_SIMILAR, failed=tuple(failed), norm_p=norm, p=p,
        )

    try:
        cert = polya_szego_form(r, tol)
    except NotPolyaSzego as exc:
        raise ClassificationInconsistency(
            f"inner self-map with slope 1 has no measure-preserving form: {exc}"
        ) from exc
    if cert.sign != 1:
        raise ClassificationInconsistency("certificate has sign -1 for a self-map")
    return ClassificationReport(
        inner, True, slope, Verdict.ISOMETRY_AND_SIMILAR, certificate=cert, norm_p=norm, p=p,
    )
