import math

import numpy as np
import pytest

from halfplane_iso.conformal import (
    Arc,
    OuterFunctionSpec,
    WeightedSymbol,
    boundary_unimodular_measure,
    build_outer,
    cayley,
    cayley_inverse,
    conjugate_symbol,
    is_finite_blaschke,
    is_inner_halfplane,
    maps_disc_into_disc,
    outer_log,
    transfer_isometry_V,
    weight,
)
from halfplane_iso.generators import blaschke_product
from halfplane_iso.ratfunc import POLE, Polynomial, RationalMap

z = RationalMap.identity()


def test_cayley_values():
    assert cayley(0) == 1j
    assert cayley_inverse(1j) == 0
    assert cayley(-1) is POLE
    assert cayley_inverse(POLE) == -1
    assert cayley_inverse(-1j) is POLE
    # J maps e^{i theta} to tan(theta/2)
    th = 0.7
    assert cayley(np.exp(1j * th)) == pytest.approx(math.tan(th / 2))


def test_cayley_round_trip(rng):
    pts = 0.99 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    assert np.max(np.abs(cayley_inverse(cayley(pts)) - pts)) <= 1e-12


@pytest.mark.parametrize("phi", [z, z + 1.5, 2 * z, z - 1 / z, -1 / (z + 1j)])
def test_conjugate_symbol_agrees_pointwise(phi, rng):
    Phi = conjugate_symbol(phi)
    pts = 0.9 * np.sqrt(rng.uniform(0, 1, 20)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20))
    direct = cayley_inverse(phi(cayley(pts)))
    assert np.max(np.abs(Phi(pts) - direct)) <= 1e-8


def test_conjugate_symbol_examples():
    assert conjugate_symbol(z).allclose(z)
    assert conjugate_symbol(z + 0.5)(0) == pytest.approx(cayley_inverse(1j + 0.5))
    assert conjugate_symbol(2 * z)(0) == pytest.approx(-1 / 3)


def test_weight_examples():
    assert weight(z, 2, 0.3 + 0.2j) == pytest.approx(1)
    assert weight(z**2, 2, 0) == pytest.approx(1)
    assert weight(conjugate_symbol(2 * z), 2, 0) == pytest.approx(2 / 3)
    assert weight(z, 2, -1) is POLE


def test_weight_branch_on_negative_axis():
    # ratio -1 exactly: taken from above, so (-1)^(1/2) = i
    Phi = RationalMap(Polynomial([-2.0, -1.0]))  # 1 + Phi(0) = -1
    assert weight(Phi, 4, 0) == pytest.approx(1j)


def test_transfer_maps_hp_kernel_norm():
    from halfplane_iso.oracle import integrate_circle

    Vf = transfer_isometry_V(lambda w: 1 / (w + 1j), 2)
    val = integrate_circle(lambda u: np.abs(Vf(u)) ** 2, breakpoints=[math.pi]).value
    assert abs(val - math.pi) <= 1e-6
    assert transfer_isometry_V(lambda w: 0 * w, 2)(0.3) == 0


def test_weighted_symbol_matches_conjugated_composition(rng):
    # V(C_phi f) = L_Phi(V f) pointwise, phi = z + 1
    phi = z + 1
    f = lambda w: 1 / (w + 1j) ** 2  # noqa: E731
    L = WeightedSymbol.from_halfplane(phi, 2)
    left = transfer_isometry_V(lambda w: f(phi(w)), 2)
    right = L(transfer_isometry_V(f, 2))
    pts = 0.9 * np.sqrt(rng.uniform(0, 1, 20)) * np.exp(2j * np.pi * rng.uniform(0, 1, 20))
    assert np.max(np.abs(left(pts) - right(pts)) / np.abs(left(pts))) <= 1e-8


def test_weighted_symbol_rejects_non_self_map():
    with pytest.raises(ValueError):
        WeightedSymbol(2 * z)
    assert maps_disc_into_disc(conjugate_symbol(z - 1 / z))


def test_inner_examples():
    assert is_inner_halfplane(z - 1 / z).inner
    t = is_inner_halfplane(z + 1j)
    assert not t.inner and t.evidence == 0 and t.evidence_value == pytest.approx(1j)
    u = (1 + 1j) / math.sqrt(2)
    t = is_inner_halfplane(RationalMap(Polynomial([0, u]), Polynomial([u])))
    assert t.inner and t.realified.allclose(z)


def test_inner_with_unit_factor_on_numerator_only():
    # i*z is not inner although its coefficients are "real up to a unit"
    assert not is_inner_halfplane(1j * z).inner


def test_blaschke_examples():
    assert is_finite_blaschke(z**2).is_blaschke
    assert is_finite_blaschke((z - 0.5) / (1 - z / 2)).is_blaschke
    assert not is_finite_blaschke(z / 2).is_blaschke


def test_blaschke_degree_shift_matters():
    # deg P = 1 < deg Q = 2 here: z/(... ) style products need the common N
    B = blaschke_product([0.0, 0.5, -0.3j])
    assert is_finite_blaschke(B).is_blaschke
    assert is_finite_blaschke(1 / ((1 - 0.5 * z) / (z - 0.5))).is_blaschke


def test_blaschke_rejects_pole_inside_disc():
    assert not is_finite_blaschke(1 / z).is_blaschke


def test_boundary_measure_examples():
    assert boundary_unimodular_measure(z**2) == 1.0
    assert boundary_unimodular_measure(z / 2) == 0.0
    # |Phi(e^{it})| = cos(t/2) ~ 1 - t^2/8 touches 1 only at t = 0, but every
    # sample with t^2/8 <= 1e-6 counts: k = -1, 0, 1 on the 4096-point grid
    assert boundary_unimodular_measure((z**2 + z) / 2) == 3 / 4096
    assert boundary_unimodular_measure((z**2 + z) / 2, samples=1024) == 1 / 1024
    with pytest.raises(ValueError):
        boundary_unimodular_measure(z, samples=100)


def test_outer_trivial_and_mean_value():
    assert build_outer(OuterFunctionSpec(()), 0.3) == pytest.approx(1)
    spec = OuterFunctionSpec.two_arc(0.5)
    assert abs(build_outer(spec, 0)) == pytest.approx(math.sqrt(0.5), abs=1e-10)


def test_outer_recovers_one_plus_z():
    spec = OuterFunctionSpec((Arc(-math.pi, math.pi, lambda t: np.log(np.abs(1 + np.exp(1j * t)))),))
    for w in (0.0, 0.5, -0.4 + 0.3j, 0.2j):
        assert abs(abs(build_outer(spec, w)) - abs(1 + w)) <= 1e-6
    res = outer_log(spec, 0.5)
    assert res.converged and res.error < 1e-8


def test_outer_boundary_modulus_matches_prescribed():
    spec = OuterFunctionSpec.two_arc(0.5)
    rho = 1 - 1e-4
    for t, want in ((1.0, 1.0), (4.0, 0.5)):
        assert abs(build_outer(spec, rho * np.exp(1j * t))) == pytest.approx(want, abs=1e-3)


def test_bad_arc_rejected():
    with pytest.raises(ValueError):
        Arc(1.0, 0.5)
    with pytest.raises(ValueError):
        OuterFunctionSpec((Arc(0, 1, math.inf),))
