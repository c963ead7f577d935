"""Property-based checks of the invariants stated for each layer."""
import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from halfplane_iso.classify import (
    PolyaSzegoForm,
    Verdict,
    classify,
    is_self_map,
    polya_szego_form,
)
from halfplane_iso.cli import format_map, parse_map
from halfplane_iso.conformal import (
    boundary_unimodular_measure,
    cayley,
    cayley_inverse,
    conjugate_symbol,
    is_finite_blaschke,
    transfer_isometry_V,
    weight,
)
from halfplane_iso.generators import blaschke_product
from halfplane_iso.ratfunc import Polynomial, RationalMap, compose, flat_roots, iterate, partial_fractions, poly_roots

z = RationalMap.identity()

small = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, small, small)


def separated(values, gap):
    v = sorted(values)
    return all(b - a >= gap for a, b in zip(v, v[1:]))


@st.composite
def forms(draw, sign=1):
    n = draw(st.integers(0, 5))
    gammas = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    assume(separated(gammas, 0.5))
    mus = draw(st.lists(st.floats(-10, -0.1), min_size=n, max_size=n))
    alpha = draw(st.floats(-5, 5))
    return PolyaSzegoForm(sign, alpha, tuple(zip(sorted(gammas), mus)))


@st.composite
def rationals(draw, max_degree=6):
    dn = draw(st.integers(0, max_degree))
    dd = draw(st.integers(0, max_degree))
    num = draw(st.lists(cplx, min_size=dn + 1, max_size=dn + 1))
    den = draw(st.lists(cplx, min_size=dd, max_size=dd)) + [1.0]
    assume(max(abs(c) for c in num) > 0.1 and abs(num[-1]) > 0.1)
    return RationalMap(Polynomial(num), Polynomial(den))


disc_points = st.builds(
    lambda r, t: r * complex(math.cos(t), math.sin(t)), st.floats(0, 0.99), st.floats(0, 2 * math.pi)
)


# -- ratfunc


@given(st.lists(cplx, min_size=1, max_size=8))
def test_roots_recover_coefficients(roots):
    assume(all(abs(a - b) >= 0.1 for i, a in enumerate(roots) for b in roots[i + 1:]))
    p = Polynomial.from_roots(roots)
    back = Polynomial.from_roots(flat_roots(poly_roots(p)))
    assert np.max(np.abs(back.array - p.array)) <= 1e-8 * p.scale()


@given(rationals(), st.lists(cplx, min_size=5, max_size=5))
def test_partial_fraction_reconstruction(r, pts):
    form = partial_fractions(r)
    pts = np.asarray(pts) * 2 + 7.0j  # keep away from the poles
    exact = r(pts)
    assert np.max(np.abs(form(pts) - exact) / np.maximum(np.abs(exact), 1e-12)) <= 1e-8


@given(st.sampled_from([z - 1 / z, z + 1, (z**2 - 2) / z, 0.5 * z + 1j]), st.integers(0, 2), st.integers(0, 2))
def test_iterate_semigroup(r, m, n):
    lhs = iterate(r, m + n)
    rhs = compose(iterate(r, m), iterate(r, n))
    pts = np.array([0.3 + 2j, -1.7 + 0.5j, 4 + 1j])
    assert np.allclose(lhs(pts), rhs(pts), rtol=1e-8)


# -- conformal


@given(disc_points)
def test_cayley_round_trip(w):
    assert abs(cayley_inverse(cayley(w)) - w) <= 1e-12


@given(forms(), st.lists(disc_points, min_size=3, max_size=3), st.floats(1, 4))
def test_transfer_intertwines(form, pts, p):
    # V(C_phi f) = weight * (V f) o Phi for self-maps phi and f in H^p
    phi = form.to_map()
    Phi = conjugate_symbol(phi)
    f = lambda w: 1 / (w + 2j) ** 2  # noqa: E731
    left = transfer_isometry_V(lambda w: f(phi(w)), p)
    right = lambda u: weight(Phi, p, u) * transfer_isometry_V(f, p)(Phi(u))  # noqa: E731
    for u in pts:
        a, b = left(u), right(u)
        assert abs(a - b) <= 1e-8 * max(abs(a), 1e-6)


@given(st.lists(disc_points, min_size=1, max_size=5), st.floats(0, 2 * math.pi))
def test_blaschke_products_and_dichotomy(zeros, rot):
    zeros = [0.9 * a for a in zeros]
    B = blaschke_product(zeros, complex(math.cos(rot), math.sin(rot)))
    assert is_finite_blaschke(B).is_blaschke
    assert boundary_unimodular_measure(B) == 1.0
    C = 0.99 * B
    assert not is_finite_blaschke(C).is_blaschke
    assert boundary_unimodular_measure(C) <= 8 / 4096


@given(rationals(max_degree=4))
def test_boundary_measure_dichotomy(r):
    m = boundary_unimodular_measure(r)
    assert m <= 8 / 4096 or m >= 1 - 8 / 4096


# -- classify


@given(forms())
def test_generator_closure(form):
    rep = classify(form.to_map())
    assert rep.verdict is Verdict.ISOMETRY_AND_SIMILAR
    assert rep.certificate.sign == 1


@given(forms(), st.data())
def test_flipping_a_residue_gives_a_witness(form, data):
    assume(form.terms)
    j = data.draw(st.integers(0, len(form.terms) - 1))
    terms = list(form.terms)
    terms[j] = (terms[j][0], -terms[j][1])
    r = PolyaSzegoForm(1, form.alpha, tuple(terms)).to_map()
    rep = classify(r)
    assert rep.verdict is Verdict.INVALID_SYMBOL
    w = rep.witness
    assert w.imag > 0 and complex(r(w)).imag < -1e-9


@given(forms(sign=-1))
def test_sign_branch(form):
    r = form.to_map()
    assert polya_szego_form(r).sign == -1
    assert not is_self_map(r).self_map


@given(rationals(max_degree=4))
def test_witness_soundness(r):
    t = is_self_map(r)
    if t.witness is not None:
        assert t.witness.imag > 0 and complex(r(t.witness)).imag < 0


@given(rationals(max_degree=4))
def test_verdict_iff_conditions(r):
    rep = classify(r)
    iso = rep.inner and rep.self_map and abs(rep.slope - 1) <= 1e-9
    assert (rep.verdict is Verdict.ISOMETRY_AND_SIMILAR) == iso


# -- cli


@given(rationals(max_degree=5))
def test_print_parse_round_trip(r):
    back = parse_map(format_map(r))
    assert back.allclose(r, 1e-12)
