"""Independent numerical checks: quadrature on the line and the circle,
measure preservation, Hardy norms, norm orbits of C_r^n and the disc-transfer
equivalence.  Nothing here uses the classifier's algebra.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .classify import NagyBound, is_self_map
from .conformal import (
    OuterFunctionSpec,
    conjugate_symbol,
    is_inner_halfplane,
    outer_power_norms,
    transfer_isometry_V,
    weight,
)
from .config import DEFAULT, Tolerances
from .quadrature import QuadResult, adaptive_gauss, graded_edges, periodic_trapezoid
from .ratfunc import RationalMap

SEED_ENV = "HALFPLANE_ISO_SEED"


class Family(str, enum.Enum):
    POISSON = "POISSON"
    HP_KERNEL = "HP_KERNEL"
    GAUSSIAN = "GAUSSIAN"


@dataclass(frozen=True)
class TestFunction:
    """A probe function with closed-form integrals and norms where they exist.

    POISSON(a, b):    t -> b/pi / ((t - a)^2 + b^2)
    HP_KERNEL(w, m):  z -> 1/(z - conj(w))^m, w in the upper half-plane
    GAUSSIAN(a, s):   t -> exp(-(t - a)^2 / s^2)
    """

    __test__ = False  # keep pytest from collecting this class

    family: Family
    params: tuple

    @classmethod
    def poisson(cls, a: float, b: float) -> "TestFunction":
        if not b > 0:
            raise ValueError("Poisson width must be positive")
        return cls(Family.POISSON, (float(a), float(b)))

    @classmethod
    def hp_kernel(cls, w: complex, m: int = 1) -> "TestFunction":
        w = complex(w)
        if not w.imag > 0 or m < 1:
            raise ValueError("HP_KERNEL needs Im w > 0 and m >= 1")
        return cls(Family.HP_KERNEL, (w, int(m)))

    @classmethod
    def gaussian(cls, a: float, sigma: float) -> "TestFunction":
        if not sigma > 0:
            raise ValueError("Gaussian width must be positive")
        return cls(Family.GAUSSIAN, (float(a), float(sigma)))

    @property
    def name(self) -> str:
        if self.family is Family.HP_KERNEL:
            w, m = self.params
            return f"HP_KERNEL({_fmt(w)},{m})"
        return f"{self.family.value}({self.params[0]:g},{self.params[1]:g})"

    @property
    def center(self) -> float:
        """Where the probe's mass sits on the line."""
        c = self.params[0]
        return c.real if isinstance(c, complex) else c

    @property
    def in_hardy_space(self) -> bool:
        return self.family is Family.HP_KERNEL

    def __call__(self, t):
        t = np.asarray(t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.family is Family.POISSON:
                a, b = self.params
                out = b / np.pi / ((t - a) ** 2 + b**2)
            elif self.family is Family.GAUSSIAN:
                a, s = self.params
                out = np.exp(-((t - a) ** 2) / s**2)
            else:
                w, m = self.params
                out = 1.0 / (t - np.conj(w)) ** m
        return np.where(np.isinf(t), 0.0, out)

    # integrand used for measure preservation: absolutely integrable on the line
    def density(self, t):
        if self.family is Family.HP_KERNEL and self.params[1] == 1:
            return np.abs(self(t)) ** 2
        return self(t)

    def density_integral(self) -> complex:
        if self.family is Family.POISSON:
            return 1.0
        if self.family is Family.GAUSSIAN:
            return self.params[1] * math.sqrt(math.pi)
        w, m = self.params
        if m == 1:
            return math.pi / w.imag  # integral of 1/|x - conj w|^2
        return 0.0  # decays like x^-2 with no poles above the line

    def norm(self, p: float) -> float:
        """Closed-form L^p norm on the line."""
        if self.family is Family.GAUSSIAN:
            return (self.params[1] * math.sqrt(math.pi / p)) ** (1 / p)
        if self.family is Family.POISSON:
            b = self.params[1]
            return ((b / math.pi) ** p * _lorentz_power(b, p)) ** (1 / p)
        w, m = self.params
        return _lorentz_power(w.imag, p * m / 2) ** (1 / p)


def _lorentz_power(b: float, s: float) -> float:
    """Integral over the line of (x^2 + b^2)^(-s), s > 1/2."""
    return math.exp(0.5 * math.log(math.pi) + gammaln(s - 0.5) - gammaln(s) - (2 * s - 1) * math.log(b))


def _fmt(w: complex) -> str:
    return f"{w.real:g}{w.imag:+g}i"


def standard_battery() -> list[TestFunction]:
    return [
        TestFunction.poisson(0, 1),
        TestFunction.poisson(2, 0.5),
        TestFunction.hp_kernel(1j, 1),
        TestFunction.hp_kernel(1 + 2j, 2),
        TestFunction.gaussian(0, 1),
    ]


def kernel_battery() -> list[TestFunction]:
    return [TestFunction.hp_kernel(1j, 1), TestFunction.hp_kernel(1 + 2j, 2), TestFunction.hp_kernel(-0.5 + 0.5j, 1)]


def random_battery(seed: int | None = None, size: int = 5) -> list[TestFunction]:
    if seed is None:
        seed = int(os.environ.get(SEED_ENV, "0"))
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        kind = k % 3
        if kind == 0:
            out.append(TestFunction.poisson(rng.uniform(-3, 3), rng.uniform(0.3, 2)))
        elif kind == 1:
            out.append(TestFunction.hp_kernel(complex(rng.uniform(-3, 3), rng.uniform(0.3, 2)), int(rng.integers(1, 3))))
        else:
            out.append(TestFunction.gaussian(rng.uniform(-3, 3), rng.uniform(0.5, 2)))
    return out


BATTERIES = {"standard": standard_battery, "kernels": kernel_battery, "random": random_battery}


def battery(name: str = "standard") -> list[TestFunction]:
    try:
        return BATTERIES[name]()
    except KeyError:
        raise ValueError(f"unknown battery {name!r}; choose from {sorted(BATTERIES)}") from None


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_depth: int = 50

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")


SETTINGS = QuadratureSettings()


# --------------------------------------------------------------------------- integration


def integrate_line(
    f: Callable, s: QuadratureSettings = SETTINGS, breakpoints: Sequence[float] = ()
) -> QuadResult:
    """Integral of f over the real line after the substitution t = tan(theta/2).

    |theta| <= pi/2 is integrated in theta.  Near theta = +-pi the same
    substitution is written in s = pi - |theta|, t = +-cot(s/2), because
    floats cannot resolve theta close to pi and slowly decaying integrands
    keep mass there.  Cells are graded toward every breakpoint and toward
    t = +-inf; adaptivity does the rest.
    """
    bps = [b for b in breakpoints if math.isfinite(b)]

    def middle(theta):
        t = np.tan(theta / 2)
        return np.asarray(f(t)) * (1 + t * t) / 2

    def tail(sign):
        def h(u):
            t = sign / np.tan(u / 2)
            return np.asarray(f(t)) * (1 + t * t) / 2

        return h

    half = math.pi / 2
    mid_edges = graded_edges(-half, half, [2 * math.atan(b) for b in bps if abs(b) <= 1], 1e-6, levels=6)
    parts = [adaptive_gauss(middle, mid_edges, s.abs_tol, s.rel_tol, s.max_depth)]
    tol = max(s.abs_tol, s.rel_tol * abs(parts[0].value))
    for sign in (1.0, -1.0):
        pts = [2 * math.atan(1 / abs(b)) for b in bps if abs(b) > 1 and b * sign > 0]
        edges = graded_edges(0.0, half, pts + [0.0], 1e-6, levels=6)
        parts.append(adaptive_gauss(tail(sign), edges, tol / 2, s.rel_tol, s.max_depth))
    value = _scalar_sum(p.value for p in parts)
    return QuadResult(
        value, sum(p.error for p in parts), all(p.converged for p in parts), sum(p.intervals for p in parts)
    )


def _scalar_sum(values) -> complex:
    v = complex(sum(values))
    return v.real if v.imag == 0.0 else v


def integrate_circle(
    g: Callable, s: QuadratureSettings = SETTINGS, breakpoints: Sequence[float] | None = None
) -> QuadResult:
    """Integral of g against normalised arc length on the unit circle.

    Without breakpoints the periodic trapezoid sum is refined by halving the
    step; with breakpoints (angles) adaptive Gauss panels are used instead.
    """
    if breakpoints is None:
        return periodic_trapezoid(lambda th: g(np.exp(1j * th)), s.abs_tol, s.rel_tol)
    pts = [float(np.mod(b + math.pi, 2 * math.pi) - math.pi) for b in breakpoints]
    edges = graded_edges(-math.pi, math.pi, pts, 1e-6, levels=6)
    res = adaptive_gauss(lambda th: g(np.exp(1j * th)), edges, s.abs_tol, s.rel_tol, s.max_depth)
    return QuadResult(res.value / (2 * math.pi), res.error / (2 * math.pi), res.converged, res.intervals)


class NotInHardySpace(ValueError):
    pass


def _tail_exponent(f: Callable, p: float) -> float:
    """Decay exponent alpha of |f(t)|^p ~ |t|^-alpha, from both tails."""
    worst = math.inf
    for sgn in (1.0, -1.0):
        t1, t2 = sgn * 1e6, sgn * 1e8
        v1 = abs(complex(np.asarray(f(np.array([t1])))[0])) ** p
        v2 = abs(complex(np.asarray(f(np.array([t2])))[0])) ** p
        if v1 == 0 or v2 == 0:
            continue
        worst = min(worst, -math.log(v2 / v1) / math.log(abs(t2 / t1)))
    return worst


def hardy_norm(
    f: Callable, p: float = 2.0, s: QuadratureSettings = SETTINGS, breakpoints: Sequence[float] = ()
) -> QuadResult:
    """Boundary L^p norm (integral over the line of |f|^p)^(1/p), with error estimate."""
    if _tail_exponent(f, p) <= 1 + 1e-3:
        raise NotInHardySpace("integrand decays too slowly for the line integral to converge")
    res = integrate_line(lambda t: np.abs(f(t)) ** p, s, breakpoints)
    val = max(float(np.real(res.value)), 0.0)
    norm = val ** (1 / p)
    err = norm * res.error / (p * val) if val > 0 else res.error ** (1 / p)
    return QuadResult(norm, err, res.converged, res.intervals)


# --------------------------------------------------------------------------- orbits of r


def _value_at_infinity(r: RationalMap) -> complex:
    dn, dd = r.num.degree, r.den.degree
    if dn > dd:
        return complex(np.inf)
    if dn == dd:
        return complex(r.num.lead / r.den.lead)
    return 0j


def _apply(r: RationalMap, z: np.ndarray, real_line: bool) -> np.ndarray:
    inf = ~np.isfinite(z)
    out = np.asarray(r(np.where(inf, 0.0, z)), dtype=complex)
    out = np.where(inf, _value_at_infinity(r), out)
    if real_line:
        out = out.real.astype(complex)
    return out


def orbit_map(r: RationalMap, n: int, real_line: bool) -> Callable:
    """x -> r(r(...r(x))) by pointwise iteration, passing through infinity."""

    def rn(x):
        z = np.asarray(x, dtype=complex)
        for _ in range(n):
            z = _apply(r, z, real_line)
        return z.real if real_line else z

    return rn


def _preimage_layers(r: RationalMap, start: Sequence[float], n: int, tol: Tolerances) -> list[list[float]]:
    layers = [list(start)]
    for _ in range(n - 1):
        nxt = []
        for y in layers[-1]:
            for z in r.preimages(y, tol):
                if abs(z.imag) <= 1e-9 * max(1.0, abs(z)):
                    nxt.append(z.real)
        layers.append(nxt)
    out, acc = [], []
    for layer in layers:
        acc = sorted(set(acc) | set(layer))
        out.append(acc)
    return out


def orbit_poles(r: RationalMap, n: int, tol: Tolerances = DEFAULT) -> list[list[float]]:
    """Real poles of the iterates r_1 ... r_n, as cumulative lists.

    r_k is infinite where r_{k-1} hits a pole of r, so the poles of r_k are
    those of r_{k-1} plus the (k-1)-fold real preimages of r's real poles.
    """
    return _preimage_layers(r, r.real_poles(tol), n, tol)


def orbit_preimages(r: RationalMap, y: float, n: int, tol: Tolerances = DEFAULT) -> list[list[float]]:
    """Real points x with r_k(x) = y for k = 1..n (cumulative).

    A probe concentrated near y pulls back to bumps around these points whose
    width shrinks like 1/|r_k'|, so they are handed to the quadrature as
    breakpoints.
    """
    first = [z.real for z in r.preimages(y, tol) if abs(z.imag) <= 1e-9 * max(1.0, abs(z))]
    return _preimage_layers(r, first, n, tol)


@dataclass(frozen=True)
class Residual:
    name: str
    lhs: complex
    rhs: complex
    residual: float
    error: float
    converged: bool = True


@dataclass(frozen=True)
class OrbitRow:
    n: int
    name: str
    ratio: float
    error: float
    converged: bool = True


@dataclass(frozen=True)
class OracleReport:
    check: str
    passed: bool
    residuals: tuple = ()
    orbit: tuple = ()
    threshold: float | None = None
    k: float | None = None
    slack: float | None = None
    note: str = ""
    skipped: tuple = ()
    within_horizon: bool | None = None   # every computed ratio inside [1/k, k]
    predicted_exit: int | None = None    # first n outside, observed or extrapolated

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.residuals), default=0.0)

    def ratios(self, name: str | None = None) -> list[float]:
        return [row.ratio for row in self.orbit if name is None or row.name == name]


def _map_parallel(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # keeps input order


def measure_preservation_check(
    r: RationalMap,
    fs: Sequence[TestFunction] | None = None,
    s: QuadratureSettings = SETTINGS,
    threshold: float = 1e-6,
    tol: Tolerances = DEFAULT,
    workers: int = 1,
) -> OracleReport:
    """Compare the integral of f o r over the line with that of f."""
    test = is_inner_halfplane(r, tol)
    if not test.inner:
        raise ValueError(f"measure preservation needs an inner map; r({test.evidence}) = {test.evidence_value}")
    rr = test.realified
    fs = standard_battery() if fs is None else list(fs)
    poles = rr.real_poles(tol)
    rmap = orbit_map(rr, 1, real_line=True)

    def one(f: TestFunction) -> Residual:
        lhs = integrate_line(lambda t: f.density(rmap(t)), s, poles)
        rhs = f.density_integral()
        res = abs(lhs.value - rhs)
        return Residual(f.name, lhs.value, rhs, res, lhs.error, lhs.converged)

    rows = tuple(_map_parallel(one, fs, workers))
    passed = all(row.residual <= threshold for row in rows)
    return OracleReport("measure", passed, residuals=rows, threshold=threshold)


def nagy_probe(
    r: RationalMap,
    p: float = 2.0,
    fs: Sequence[TestFunction] | None = None,
    N: int = 8,
    k: NagyBound | float = NagyBound(10.0),
    s: QuadratureSettings = SETTINGS,
    tol: Tolerances = DEFAULT,
    workers: int = 1,
) -> OracleReport:
    """Table of ||f o r_n||_p / ||f||_p for n = 0..N against the bound k.

    r must be a self-map.  Iterates are applied pointwise, so N is not
    limited by the degree cap.  When r is inner the orbit stays on the real
    line and any probe works; otherwise only Hardy-space probes are
    meaningful and the others are skipped.
    """
    k = k if isinstance(k, NagyBound) else NagyBound(float(k))
    fs = standard_battery() if fs is None else list(fs)
    if not is_self_map(r, tol).self_map:
        raise ValueError("nagy_probe needs a self-map of the half-plane")
    test = is_inner_halfplane(r, tol)
    real_line = test.inner
    rr = test.realified if real_line else r
    skipped = ()
    if not real_line:
        skipped = tuple(f.name for f in fs if not f.in_hardy_space)
        fs = [f for f in fs if f.in_hardy_space]
    poles = orbit_poles(rr, N, tol) if N >= 1 else []

    def one(f: TestFunction):
        base = hardy_norm(f, p, s, [f.center])
        rows = [OrbitRow(0, f.name, 1.0, 0.0, base.converged)]
        centers = orbit_preimages(rr, f.center, N, tol) if N >= 1 else []
        for n in range(1, N + 1):
            rn = orbit_map(rr, n, real_line)
            num = hardy_norm(lambda t: f(rn(t)), p, s, sorted(set(poles[n - 1]) | set(centers[n - 1])))
            ratio = num.value / base.value
            err = ratio * (num.error / num.value + base.error / base.value) if num.value > 0 else math.inf
            rows.append(OrbitRow(n, f.name, ratio, err, num.converged and base.converged))
        return rows

    per_f = _map_parallel(one, fs, workers)
    table = tuple(row for rows in per_f for row in rows)
    slack = 10 * sum(row.error for row in table)
    outside = [row.n for row in table if not 1 / k.k - slack <= row.ratio <= k.k + slack]
    exits = [e for e in (_predicted_exit(rows, k.k, slack) for rows in per_f) if e is not None]
    exit_n = min(outside) if outside else (min(exits) if exits else None)
    passed = exit_n is None
    note = (
        "two-sided power bound on Hilbert space (finite horizon)"
        if p == 2
        else "necessary-condition evidence (p != 2)"
    )
    return OracleReport(
        "nagy", passed, orbit=table, k=k.k, slack=slack, note=note, skipped=skipped,
        within_horizon=not outside, predicted_exit=exit_n,
    )


def _predicted_exit(rows: Sequence[OrbitRow], k: float, slack: float) -> int | None:
    """First n at which a steady power-law drift of the ratios leaves [1/k, k].

    The bound must hold for every n, so a monotone drift that is visible above
    the quadrature noise over the second half of the table already decides
    the probe even when the finite table stays inside the band.
    """
    tail = [row for row in rows if row.n >= max(1, len(rows) // 2)]
    if len(tail) < 3 or not all(0 < row.ratio < math.inf for row in tail):
        return None
    x = np.log([row.n + 1 for row in tail])
    y = np.log([row.ratio for row in tail])
    steps = np.diff(y)
    noise = 10 * max(row.error / row.ratio for row in tail) + slack + 1e-9
    if not (np.all(steps < -noise) or np.all(steps > noise)):
        return None
    a, b = np.polyfit(x, y, 1)
    target = -math.log(k) if a < 0 else math.log(k)
    n_exit = math.exp((target - b) / a) - 1
    return max(int(math.ceil(n_exit)), tail[-1].n + 1) if math.isfinite(n_exit) else None


def transfer_norm_residual(f: TestFunction | Callable, p: float = 2.0, s: QuadratureSettings = SETTINGS) -> Residual:
    """| ||Vf|| on the circle - ||f|| on the line |."""
    Vf = transfer_isometry_V(f, p)
    line = hardy_norm(f, p, s)
    circ = integrate_circle(lambda z: np.abs(Vf(z)) ** p, s, breakpoints=[math.pi])
    disc = float(np.real(circ.value)) ** (1 / p)
    name = f.name if isinstance(f, TestFunction) else getattr(f, "__name__", "f")
    return Residual(name, line.value, disc, abs(line.value - disc), line.error + circ.error, line.converged and circ.converged)


def equivalence_check(
    phi: RationalMap,
    p: float = 2.0,
    fs: Sequence[TestFunction] | None = None,
    s: QuadratureSettings = SETTINGS,
    threshold: float = 1e-6,
    tol: Tolerances = DEFAULT,
) -> OracleReport:
    """||C_phi f|| on the line against ||L_Phi(Vf)|| on the circle, per f."""
    fs = standard_battery() if fs is None else list(fs)
    test = is_inner_halfplane(phi, tol)
    skipped = ()
    if not test.inner:
        skipped = tuple(f.name for f in fs if not f.in_hardy_space)
        fs = [f for f in fs if f.in_hardy_space]
    line_map = test.realified if test.inner else phi
    poles = line_map.real_poles(tol)
    Phi = conjugate_symbol(phi, tol)
    # poles of phi on the line sit at e^{i theta} with tan(theta/2) = pole
    angles = [2 * math.atan(g) for g in poles] + [math.pi]
    rows = []
    for f in fs:
        lhs = hardy_norm(lambda t: f(orbit_map(line_map, 1, test.inner)(t)), p, s, poles)
        Vf = transfer_isometry_V(f, p)

        def g(z, Vf=Vf):
            vals = weight(Phi, p, z) * Vf(Phi(z))
            return np.abs(vals) ** p

        circ = integrate_circle(g, s, breakpoints=angles)
        rhs = float(np.real(circ.value)) ** (1 / p)
        rows.append(Residual(f.name, lhs.value, rhs, abs(lhs.value - rhs), lhs.error + circ.error,
                             lhs.converged and circ.converged))
    rows = tuple(rows)
    passed = all(row.residual <= threshold for row in rows)
    return OracleReport("equivalence", passed, residuals=rows, threshold=threshold, skipped=skipped)


def equivalence_residual(
    phi: RationalMap,
    p: float = 2.0,
    fs: Sequence[TestFunction] | None = None,
    s: QuadratureSettings = SETTINGS,
) -> float:
    return equivalence_check(phi, p, fs, s).max_residual


def outer_limit_check(
    spec: OuterFunctionSpec,
    measure: float,
    powers: Sequence[int] = tuple(range(1, 25)),
    p: float = 2.0,
    threshold: float = 5e-3,
) -> OracleReport:
    """||f^j||_p^p for the outer function of ``spec`` should fall to ``measure``."""
    results = outer_power_norms(spec, powers, p)
    rows = tuple(OrbitRow(j, "outer", r.value, r.error, r.converged) for j, r in zip(powers, results))
    values = [r.ratio for r in rows]
    err = max(r.error for r in rows)
    monotone = all(b <= a + 10 * err + 1e-9 for a, b in zip(values, values[1:]))
    final = abs(values[-1] - measure)
    passed = monotone and final <= threshold
    return OracleReport(
        "outer-limit", passed, orbit=rows, threshold=threshold,
        residuals=(Residual("limit", values[-1], measure, final, err),),
        note="non-increasing" if monotone else "not monotone",
    )
