"""Transfer between the unit disc and the upper half-plane.

J(z) = i(1 - z)/(1 + z) carries the disc onto the half-plane and the point
e^{i theta} of the circle to tan(theta/2) on the line.  A half-plane symbol
phi becomes Phi = J^{-1} o phi o J on the disc, and C_phi on H^p of the
half-plane corresponds to the weighted composition operator
f -> ((1 + Phi)/(1 + z))^{2/p} f o Phi on H^p of the disc.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .config import DEFAULT, Tolerances
from .quadrature import QuadResult, adaptive_gauss, graded_edges
from .ratfunc import POLE, Polynomial, RationalMap, compose, is_pole, poly_roots

CAYLEY = RationalMap(Polynomial([1j, -1j]), Polynomial([1.0, 1.0]))
CAYLEY_INVERSE = RationalMap(Polynomial([1j, -1.0]), Polynomial([1j, 1.0]))


def cayley(z):
    """J(z) = i(1 - z)/(1 + z).  Scalar z = -1 gives POLE; arrays get complex inf."""
    if np.ndim(z) == 0:
        if is_pole(z):
            return -1j
        z = complex(z)
        if z == -1:
            return POLE
        return 1j * (1 - z) / (1 + z)
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1j * (1 - z) / (1 + z)
    return np.where(z == -1, complex(np.inf), out)


def cayley_inverse(w):
    """J^{-1}(w) = (i - w)/(i + w).  w = -i gives POLE; POLE (infinity) gives -1."""
    if np.ndim(w) == 0:
        if is_pole(w):
            return -1.0 + 0j
        w = complex(w)
        if w == -1j:
            return POLE
        return (1j - w) / (1j + w)
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1j - w) / (1j + w)
    out = np.where(np.isinf(w), -1.0 + 0j, out)
    return np.where(w == -1j, complex(np.inf), out)


def conjugate_symbol(phi: RationalMap, tol: Tolerances = DEFAULT) -> RationalMap:
    """Phi = J^{-1} o phi o J, as a reduced rational map on the disc."""
    return compose(CAYLEY_INVERSE, compose(phi, CAYLEY, tol), tol)


def _principal_power(base, exponent: float):
    """base**exponent on the principal branch, with the negative real axis
    taken as the limit from the upper half-plane (arg = +pi)."""
    base = np.asarray(base, dtype=complex)
    arg = np.angle(base)
    arg = np.where((base.imag == 0) & (base.real < 0), np.pi, arg)
    with np.errstate(divide="ignore"):
        out = np.exp(exponent * (np.log(np.abs(base)) + 1j * arg))
    return out[()] if out.ndim == 0 else out


def weight(Phi: RationalMap, p: float, z):
    """((1 + Phi(z))/(1 + z))^{2/p}; POLE at z = -1 for scalar input."""
    if np.ndim(z) == 0 and complex(z) == -1:
        return POLE
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (1 + Phi(z)) / (1 + z)
    out = _principal_power(ratio, 2.0 / p)
    return complex(out) if np.ndim(out) == 0 else out


def transfer_isometry_V(f: Callable, p: float) -> Callable:
    """(Vf)(z) = (4 pi)^{1/p} (1 + z)^{-2/p} f(J(z)).

    With t = tan(theta/2) one has dt = 4 pi |1 + z|^{-2} dm(z), so V maps the
    boundary L^p norm on the line onto the normalised one on the circle.
    """
    const = (4 * math.pi) ** (1.0 / p)

    def Vf(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = const * _principal_power(1 + z, -2.0 / p) * np.asarray(f(cayley(z)))
        return out[()] if np.ndim(out) == 0 else out

    return Vf


@dataclass(frozen=True)
class WeightedSymbol:
    """Disc symbol Phi with exponent p; applying it gives L_Phi."""

    symbol: RationalMap
    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must lie in [1, inf)")
        if not maps_disc_into_disc(self.symbol):
            raise ValueError("symbol does not map the disc into itself")

    @classmethod
    def from_halfplane(cls, phi: RationalMap, p: float = 2.0) -> "WeightedSymbol":
        return cls(conjugate_symbol(phi), p)

    def weight(self, z):
        return weight(self.symbol, self.p, z)

    def __call__(self, g: Callable) -> Callable:
        def Lg(z):
            z = np.asarray(z, dtype=complex)
            out = weight(self.symbol, self.p, z) * np.asarray(g(self.symbol(z)))
            return out[()] if np.ndim(out) == 0 else out

        return Lg


def maps_disc_into_disc(Phi: RationalMap, samples: int = 1024, tol: Tolerances = DEFAULT) -> bool:
    poles = Phi.poles(tol)
    if any(abs(r.value) < 1 - tol.boundary for r in poles):
        return False
    theta = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    vals = Phi(np.exp(1j * theta))
    return bool(np.all(np.abs(vals) <= 1 + tol.boundary))


# --------------------------------------------------------------------------- innerness


@dataclass(frozen=True)
class InnerTest:
    inner: bool
    realified: RationalMap | None = None
    evidence: float | None = None         # a real x with r(x) off the real line
    evidence_value: complex | None = None


def is_inner_halfplane(r: RationalMap, tol: Tolerances = DEFAULT) -> InnerTest:
    """r maps the real line into itself iff some unit u makes u*num and u*den real."""
    num, den = r.num.array, r.den.array
    both = np.concatenate([num, den])
    big = both[np.argmax(np.abs(both))]
    u = abs(big) / big
    scale = np.max(np.abs(both))
    if np.max(np.abs((u * both).imag)) <= tol.inner * scale:
        realified = RationalMap(Polynomial((u * num).real), Polynomial((u * den).real))
        return InnerTest(True, realified)
    xs = np.concatenate([[0.0], np.linspace(-10, 10, 401), [-100.0, 100.0]])
    xs = xs[np.abs(r.den(xs)) > 1e-8]
    vals = r(xs)
    k = int(np.argmax(np.abs(vals.imag)))
    if abs(vals[0].imag) >= 0.5 * abs(vals[k].imag):
        k = 0  # prefer the origin when it is nearly as good
    return InnerTest(False, None, float(xs[k]), complex(vals[k]))


@dataclass(frozen=True)
class BlaschkeTest:
    is_blaschke: bool
    identity_residual: float
    min_pole_modulus: float


def is_finite_blaschke(Phi: RationalMap, tol: Tolerances = DEFAULT) -> BlaschkeTest:
    """Rational inner functions of the disc are exactly the finite Blaschke products.

    With P/Q = Phi and N = max(deg P, deg Q), |Phi| = 1 on the circle iff
    P * P^# = Q * Q^# where p^#(z) = z^N conj(p(1/conj z)); poles must lie
    outside the closed disc.
    """
    P, Q = Phi.num, Phi.den
    n = max(P.degree, Q.degree)
    lhs = (P * P.reversed_conjugate(n)).array
    rhs = (Q * Q.reversed_conjugate(n)).array
    size = max(lhs.size, rhs.size)
    lhs = np.pad(lhs, (0, size - lhs.size))
    rhs = np.pad(rhs, (0, size - rhs.size))
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    resid = float(np.max(np.abs(lhs - rhs)) / scale)
    poles = Phi.poles(tol)
    min_mod = min((abs(r.value) for r in poles), default=math.inf)
    ok = resid <= tol.blaschke and min_mod > 1 + tol.blaschke
    return BlaschkeTest(bool(ok), resid, float(min_mod))


def boundary_unimodular_measure(Phi: RationalMap, samples: int = 4096, tol: Tolerances = DEFAULT) -> float:
    if samples < 256:
        raise ValueError("need at least 256 boundary samples")
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    mod = np.abs(Phi(z))
    return float(np.count_nonzero(np.abs(mod - 1) <= tol.boundary) / samples)


# --------------------------------------------------------------------------- outer functions

LogModulus = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Arc:
    """Arc of the circle, angles in radians with start < stop <= start + 2 pi."""

    start: float
    stop: float
    log_modulus: LogModulus = 0.0

    def __post_init__(self):
        if not self.start < self.stop <= self.start + 2 * math.pi + 1e-12:
            raise ValueError(f"bad arc [{self.start}, {self.stop}]")

    def values(self, t):
        if callable(self.log_modulus):
            return np.asarray(self.log_modulus(t), dtype=float)
        return np.full(np.shape(t), float(self.log_modulus))


@dataclass(frozen=True)
class OuterFunctionSpec:
    """Boundary log-modulus given arc by arc; zero off the listed arcs."""

    arcs: tuple

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        for arc in self.arcs:
            if not callable(arc.log_modulus) and not math.isfinite(arc.log_modulus):
                raise ValueError("log-modulus must be bounded on each arc")

    @classmethod
    def two_arc(cls, measure: float, on_arc: float = 1.0, off_arc: float = 0.5) -> "OuterFunctionSpec":
        """|f| = on_arc on an arc of normalised measure ``measure``, off_arc elsewhere."""
        cut = 2 * math.pi * measure
        return cls((
            Arc(0.0, cut, math.log(on_arc)),
            Arc(cut, 2 * math.pi, math.log(off_arc)),
        ))

    def log_modulus(self, t):
        t = np.mod(np.asarray(t, dtype=float), 2 * math.pi)
        out = np.zeros(t.shape)
        for arc in self.arcs:
            s = np.mod(t - arc.start, 2 * math.pi)
            mask = s < arc.stop - arc.start
            if np.any(mask):
                out[mask] = arc.values(arc.start + s[mask])
        return out

    def mean_log_modulus(self) -> float:
        total = 0.0
        for arc in self.arcs:
            if callable(arc.log_modulus):
                total += adaptive_gauss(arc.values, graded_edges(arc.start, arc.stop, [arc.start, arc.stop], 1e-6)).value
            else:
                total += arc.log_modulus * (arc.stop - arc.start)
        return total / (2 * math.pi)


class OuterQuadratureError(ArithmeticError):
    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


def outer_log(spec: OuterFunctionSpec, z: complex, rel_tol: float = 1e-11) -> QuadResult:
    """(1/2pi) * integral of (e^{it} + z)/(e^{it} - z) * log|f(e^{it})| dt."""
    z = complex(z)
    r = abs(z)
    if r >= 1:
        raise ValueError("outer functions are evaluated strictly inside the disc")
    focus = cmath.phase(z) if r > 0 else None
    finest = max(1e-12, (1 - r) / 8)
    value = 0.0 + 0.0j
    error = 0.0
    converged = True
    for arc in spec.arcs:
        # smooth data may still be log-singular at the ends; constants are not
        points = [arc.start, arc.stop] if callable(arc.log_modulus) else []
        if focus is not None:
            # the kernel peaks at arg z with width 1 - |z|
            shift = arc.start + np.mod(focus - arc.start, 2 * math.pi)
            if shift <= arc.stop:
                points.append(shift)
            points += [shift - 2 * math.pi, shift + 2 * math.pi]
        edges = graded_edges(arc.start, arc.stop, points, finest)

        def integrand(t, arc=arc):
            w = np.exp(1j * t)
            return (w + z) / (w - z) * arc.values(t)

        res = adaptive_gauss(integrand, edges, abs_tol=1e-13, rel_tol=rel_tol)
        value += res.value
        error += res.error
        converged &= res.converged
    return QuadResult(value / (2 * math.pi), error / (2 * math.pi), converged)


def build_outer(spec: OuterFunctionSpec, z: complex, rel_tol: float = 1e-11) -> complex:
    res = outer_log(spec, z, rel_tol)
    if not res.converged:
        raise OuterQuadratureError(
            f"Herglotz integral did not converge at z={z} (error estimate {res.error:.3g})",
            res.error,
        )
    return complex(cmath.exp(res.value))


def outer_power_norms(
    spec: OuterFunctionSpec,
    powers: Sequence[int],
    p: float = 2.0,
    radius: float = 1 - 1e-5,
) -> list[QuadResult]:
    """Quadrature of ||f^j||_p^p on the circle of the given radius, for each j.

    |f| is sampled once on a composite Gauss rule graded toward the arc
    endpoints; every power reuses the samples.  The error estimate compares
    each panel with its two halves.
    """
    cuts = sorted({float(np.mod(a.start, 2 * math.pi)) for a in spec.arcs}
                  | {float(np.mod(a.stop, 2 * math.pi)) for a in spec.arcs})
    pts = []
    for c in cuts:
        pts += [c, c + 2 * math.pi, c - 2 * math.pi]
    edges = graded_edges(0.0, 2 * math.pi, pts, (1 - radius) / 16)
    edges = np.unique(np.concatenate([edges, np.linspace(0, 2 * math.pi, 33)]))
    a, b = edges[:-1], edges[1:]
    m = 0.5 * (a + b)
    x, w = np.polynomial.legendre.leggauss(10)

    def nodes(lo, hi):
        return 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]

    panels = [nodes(a, b), nodes(a, m), nodes(m, b)]
    logmod = []
    for t in panels:
        flat = t.ravel()
        vals = np.array([outer_log(spec, radius * np.exp(1j * s)).value.real for s in flat])
        logmod.append(vals.reshape(t.shape))
    out = []
    for j in powers:
        q = [0.5 * (hi - lo) * (np.exp(p * j * lm) @ w) for lm, (lo, hi) in
             zip(logmod, [(a, b), (a, m), (m, b)])]
        whole, halves = q[0], q[1] + q[2]
        val = float(np.sum(halves)) / (2 * math.pi)
        err = float(np.sum(np.abs(whole - halves))) / (2 * math.pi)
        out.append(QuadResult(val, err, True, a.size))
    return out
