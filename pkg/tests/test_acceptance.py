"""Acceptance gate.

Each test is one criterion, run at its stated tolerance.  The terminal
summary prints a PASS/FAIL line per criterion; ``detail`` records the
measured numbers so a failure says by how much.
"""
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from cli_corpus import EXIT_CODES, GOLDEN
from halfplane_iso.classify import NagyBound, Verdict, classify, is_self_map, operator_norm, polya_szego_form
from halfplane_iso.cli.main import run
from halfplane_iso.conformal import OuterFunctionSpec, boundary_unimodular_measure, is_finite_blaschke, is_inner_halfplane
from halfplane_iso.generators import (
    blaschke_product,
    perturbed_forms,
    random_blaschke_zeros,
    random_form,
    random_real_rational,
    scaled_blaschke,
)
from halfplane_iso.oracle import (
    TestFunction,
    equivalence_residual,
    measure_preservation_check,
    nagy_probe,
    outer_limit_check,
    standard_battery,
    transfer_norm_residual,
)
from halfplane_iso.ratfunc import RationalMap

z = RationalMap.identity()
GOLDEN_DIR = Path(__file__).parent / "golden"


def note(record_property, text):
    record_property("detail", text)


@pytest.mark.criterion(1, "random measure-preserving forms all classify as isometries")
def test_closure_of_random_forms(record_property):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    forms = [random_form(rng) for _ in range(500)]
    wrong = [f for f in forms if classify(f.to_map()).verdict is not Verdict.ISOMETRY_AND_SIMILAR]
    worst = max(measure_preservation_check(f.to_map()).max_residual for f in forms[:50])
    elapsed = time.perf_counter() - start
    note(record_property, f"{len(wrong)} misclassified, worst residual {worst:.2e}, {elapsed:.1f} s")
    assert not wrong
    assert worst <= 1e-6
    assert elapsed <= 60


@pytest.mark.criterion(2, "inner self-maps of slope one expand to simple poles with negative residues")
def test_filtered_rationals_have_the_form(record_property):
    rng = np.random.default_rng(2)
    kept = failures = 0
    for _ in range(1000):
        r = random_real_rational(rng, max_degree=6)
        assert r.num.degree == r.den.degree + 1 <= 6
        rep = classify(r)
        if not (rep.inner and rep.self_map and abs(rep.slope - 1) <= 1e-9):
            continue
        kept += 1
        form = polya_szego_form(r)
        gammas = [g for g, _ in form.terms]
        ok = (
            form.sign == 1
            and all(mu < 0 for _, mu in form.terms)
            and len(set(gammas)) == len(gammas)
            and all(isinstance(g, float) for g in gammas)
        )
        failures += not ok
    note(record_property, f"{kept} of 1000 passed the filter, {failures} failures")
    assert kept > 0
    assert failures == 0


@pytest.mark.criterion(3, "perturbed forms are rejected with a sound witness")
def test_perturbed_forms_give_witnesses(record_property):
    rng = np.random.default_rng(3)
    worst = -math.inf
    bad = 0
    for r in perturbed_forms(rng, 200):
        rep = classify(r)
        w = rep.witness
        if rep.verdict is not Verdict.INVALID_SYMBOL or w is None:
            bad += 1
            continue
        im = complex(r(w)).imag
        worst = max(worst, im)
        bad += not (w.imag > 0 and im < -1e-9)
    note(record_property, f"{bad} bad of 200, largest Im r(w) = {worst:.3g}")
    assert bad == 0


@pytest.mark.criterion(4, "power-bound probe on a translation and on z - 1/z")
def test_nagy_reference_orbits(record_property):
    kernel = TestFunction.hp_kernel(1j, 1)
    shift = nagy_probe(z + 1j, 2.0, [kernel], 8, NagyBound(10.0))
    # integral of dx / (x^2 + (n+1)^2) = pi/(n+1), over pi for n = 0
    decay = max(abs(row.ratio**2 - 1 / (row.n + 1)) for row in shift.orbit)
    flat = nagy_probe(z - 1 / z, 2.0, None, 8, NagyBound(10.0))
    drift = max(abs(x - 1) for x in flat.ratios())
    note(record_property, f"translation deviation {decay:.2e}, z - 1/z deviation {drift:.2e}")
    assert [row.n for row in shift.orbit] == list(range(9))
    assert decay <= 1e-6
    assert drift <= 1e-4


@pytest.mark.criterion(5, "dilation by two: norm formula against the probe")
def test_dilation_norm(record_property):
    r = 2 * z
    norm = operator_norm(r, 2.0)
    probe = nagy_probe(r, 2.0, standard_battery(), 1, NagyBound(10.0))
    top = max(row.ratio for row in probe.orbit if row.n == 1)
    note(record_property, f"operator_norm {norm!r}, max ratio(1) {top:.10f}")
    assert norm == pytest.approx(2**-0.5, rel=1e-12)
    assert 0.70 <= top <= 0.7072


@pytest.mark.criterion(6, "half-plane and weighted disc operators agree")
def test_equivalence_and_transfer(record_property):
    residuals = {name: equivalence_residual(phi, 2.0) for name, phi in
                 [("z", z), ("z+1", z + 1), ("2z", 2 * z), ("z-1/z", z - 1 / z)]}
    transfer = [transfer_norm_residual(f, 2.0).residual for f in
                (TestFunction.hp_kernel(1j, 1), TestFunction.hp_kernel(1 + 2j, 2))]
    worst = max(residuals.values())
    note(record_property, f"worst equivalence residual {worst:.2e}, worst transfer residual {max(transfer):.2e}")
    assert worst <= 1e-6
    assert max(transfer) <= 1e-6


@pytest.mark.criterion(7, "finite Blaschke test and boundary dichotomy")
def test_blaschke_corpus(record_property):
    rng = np.random.default_rng(7)
    lo, hi = 8 / 4096, 1 - 8 / 4096
    wrong = grey = 0
    for _ in range(50):
        zeros = random_blaschke_zeros(rng)
        rot = complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))
        for Phi, expect in ((blaschke_product(zeros, rot), True), (scaled_blaschke(zeros, rng), False)):
            wrong += is_finite_blaschke(Phi).is_blaschke is not expect
            grey += lo < boundary_unimodular_measure(Phi) < hi
    note(record_property, f"{wrong} wrong Blaschke verdicts, {grey} measures in the grey zone over 100 maps")
    assert wrong == 0
    assert grey == 0


@pytest.mark.criterion(8, "powers of a two-arc outer function fall to the arc measure")
def test_outer_function_limit(record_property):
    rep = outer_limit_check(OuterFunctionSpec.two_arc(0.5), 0.5, range(1, 25), p=2.0, threshold=5e-3)
    last = rep.orbit[-1]
    note(record_property, f"||f^24||^2 = {last.ratio:.6f}, {rep.note}")
    assert last.n == 24
    assert abs(last.ratio - 0.5) <= 5e-3


def _invoke(argv):
    out = io.StringIO()
    code = run(["--deterministic"] + list(argv), stdout=out, stderr=io.StringIO())
    return code, out.getvalue()


@pytest.mark.criterion(9, "deterministic JSON and the exit-code contract")
def test_determinism_and_exit_codes(record_property):
    drift = [name for name, argv in GOLDEN.items()
             if _invoke(argv)[1] != _invoke(argv)[1] or _invoke(argv)[1] != (GOLDEN_DIR / f"{name}.json").read_text()]
    codes = [(argv, code, _invoke(argv)[0]) for argv, code in EXIT_CODES]
    mismatched = [(argv, want, got) for argv, want, got in codes if want != got]
    note(record_property, f"{len(GOLDEN) - len(drift)}/{len(GOLDEN)} goldens stable, "
         f"{len(codes) - len(mismatched)}/{len(codes)} exit codes match")
    assert len(EXIT_CODES) == 20
    assert not drift
    assert not mismatched
