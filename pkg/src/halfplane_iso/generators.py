"""Random corpora shared by the tests, the acceptance gate and the scripts."""
from __future__ import annotations

import numpy as np

from .classify import PolyaSzegoForm
from .ratfunc import Polynomial, RationalMap


def _separated(rng: np.random.Generator, n: int, lo: float, hi: float, gap: float) -> list[float]:
    while True:
        pts = np.sort(rng.uniform(lo, hi, n))
        if n < 2 or np.min(np.diff(pts)) >= gap:
            return [float(x) for x in pts]


def random_form(rng: np.random.Generator, max_terms: int = 5, sign: int = 1) -> PolyaSzegoForm:
    """z + alpha + sum mu_i/(z - gamma_i): gamma_i in [-10, 10] at least 0.5
    apart, mu_i in [-10, -0.1], alpha in [-5, 5]."""
    n = int(rng.integers(0, max_terms + 1))
    gammas = _separated(rng, n, -10.0, 10.0, 0.5)
    mus = rng.uniform(-10.0, -0.1, n)
    alpha = float(rng.uniform(-5.0, 5.0))
    return PolyaSzegoForm(sign, alpha, tuple((g, float(m)) for g, m in zip(gammas, mus)))


def flip_residue(form: PolyaSzegoForm, rng: np.random.Generator) -> RationalMap:
    """The form with one mu_i replaced by +|mu_i|."""
    terms = list(form.terms)
    j = int(rng.integers(len(terms)))
    g, m = terms[j]
    terms[j] = (g, abs(m))
    return PolyaSzegoForm(form.sign, form.alpha, tuple(terms)).to_map()


def duplicate_pole(form: PolyaSzegoForm, rng: np.random.Generator) -> RationalMap:
    """The form with one simple pole raised to order two (same coefficient)."""
    j = int(rng.integers(len(form.terms)))
    g, m = form.terms[j]
    z = RationalMap.identity()
    return form.to_map() + m / (z - g) ** 2


def perturbed_forms(rng: np.random.Generator, count: int) -> list[RationalMap]:
    """Half with a residue sign flipped, half with a pole duplicated."""
    out = []
    while len(out) < count:
        form = random_form(rng)
        if not form.terms:
            continue
        out.append(flip_residue(form, rng) if len(out) % 2 == 0 else duplicate_pole(form, rng))
    return out


def random_real_rational(rng: np.random.Generator, max_degree: int = 6) -> RationalMap:
    """Real coefficients with deg num = deg den + 1 <= max_degree.

    A third are raw random coefficients, a third are measure-preserving forms
    expanded to coefficients, and a third are those with the lower numerator
    coefficients nudged.  Only the last two kinds ever pass the
    inner/self-map/slope-1 filter in practice.
    """
    kind = int(rng.integers(3))
    if kind == 0:
        d = int(rng.integers(0, max_degree))
        den = np.append(rng.normal(size=d), 1.0)
        num = np.append(rng.normal(size=d + 1), rng.choice([1.0, rng.uniform(0.2, 3.0)]))
        return RationalMap(Polynomial(num), Polynomial(den))
    form = random_form(rng, max_terms=max_degree - 1)
    r = form.to_map()
    if kind == 2 and r.num.degree >= 1:
        num = r.num.array.real.copy()
        num[:-1] += rng.normal(scale=1e-3, size=num.size - 1) * np.maximum(1.0, np.abs(num[:-1]))
        r = RationalMap(Polynomial(num), r.den)
    return r


def blaschke_product(zeros, unimodular: complex = 1.0) -> RationalMap:
    """prod (z - a)/(1 - conj(a) z) times a unimodular constant."""
    z = RationalMap.identity()
    out = RationalMap.constant(unimodular)
    for a in zeros:
        a = complex(a)
        out = out * ((z - a) / (1 - np.conj(a) * z))
    return out


def random_blaschke_zeros(rng: np.random.Generator, max_factors: int = 5, radius: float = 0.9) -> list[complex]:
    n = int(rng.integers(1, max_factors + 1))
    rad = radius * np.sqrt(rng.uniform(0, 1, n))
    ang = rng.uniform(0, 2 * np.pi, n)
    return [complex(x) for x in rad * np.exp(1j * ang)]


def scaled_blaschke(zeros, rng: np.random.Generator, factor: float = 0.99) -> RationalMap:
    """One Blaschke factor multiplied by ``factor``: no longer inner."""
    j = int(rng.integers(len(zeros)))
    z = RationalMap.identity()
    out = RationalMap.constant(1.0)
    for i, a in enumerate(zeros):
        b = (z - a) / (1 - np.conj(a) * z)
        out = out * (factor * b if i == j else b)
    return out
