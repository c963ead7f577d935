import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cli_corpus import EXIT_CODES, GOLDEN
from halfplane_iso.cli import ExponentError, ExprSyntaxError, format_map, parse_expr, parse_map
from halfplane_iso.cli.expr import BinOp, Literal, LoweringError, Neg, Power, Var, format_complex
from halfplane_iso.cli.main import run
from halfplane_iso.cli.report import dumps
from halfplane_iso.ratfunc import DegreeOverflowError, Polynomial, RationalMap

GOLDEN_DIR = Path(__file__).parent / "golden"
z = RationalMap.identity()


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(["--deterministic"] + list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


# -- grammar


def test_parse_tree_shapes():
    assert parse_expr("z - 1/z") == BinOp("-", Var(), BinOp("/", Literal(1), Var()))
    assert parse_expr("-z^2") == Neg(Power(Var(), 2))
    assert parse_expr("3+2i") == BinOp("+", Literal(3), Literal(2j))
    assert parse_expr(" ( z ) ") == Var()
    assert parse_expr("1.5e-3i") == Literal(1.5e-3j)


def test_precedence_and_associativity():
    assert parse_map("1 - z - z").allclose(1 - 2 * z)
    assert parse_map("z/2/2").allclose(z / 4)
    assert parse_map("2*z^2").allclose(2 * z**2)


@pytest.mark.parametrize(
    "text, col",
    [("z^-1", 2), ("2z", 1), ("z +", 3), ("(z + 1", 6), ("z $ 1", 2), ("", 0), ("z^", 2), ("z )", 2)],
)
def test_syntax_errors_are_positioned(text, col):
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr(text)
    assert exc.value.position == col
    assert "^" in exc.value.pretty()


@pytest.mark.parametrize("text", ["z^-1", "z^2.5", "z^i", "z^(2)"])
def test_exponent_errors_are_typed(text):
    with pytest.raises(ExponentError):
        parse_expr(text)


def test_input_size_limit():
    with pytest.raises(ExprSyntaxError):
        parse_expr("z+" * 40000 + "z")


def test_lowering_examples():
    r = parse_map("z - 1/z")
    assert r.num.coeffs == (-1, 0, 1) and r.den.coeffs == (0, 1)
    assert parse_map("(z^2+1)/z").allclose(RationalMap(Polynomial([1, 0, 1]), Polynomial([0, 1])))
    assert parse_map("1/(z - i) + 1/(z + i)").allclose(RationalMap(Polynomial([0, 2]), Polynomial([1, 0, 1])))
    with pytest.raises(LoweringError):
        parse_map("(z-z)/(z-z)")
    with pytest.raises(DegreeOverflowError):
        parse_map("z^65")
    with pytest.raises(DegreeOverflowError):
        parse_map("(z^40)*(z^40)")


@pytest.mark.parametrize(
    "r",
    [z - 1 / z, (z**2 + 1) / z, 2j * z + 0.1, -1 / (z + 1j), (z - 0.3) / (1 - 0.3 * z), z**5 - 2.5e-7 * z],
)
def test_print_round_trip(r):
    assert parse_map(format_map(r)) == r


def test_format_complex_literals():
    assert format_complex(2) == "2.0"
    assert format_complex(-2j) == "-2.0i"
    assert format_complex(1 - 0.5j) == "(1.0-0.5i)"
    assert parse_map(format_complex(0.1 + 0.2j)) == RationalMap.constant(0.1 + 0.2j)


# -- json


def test_json_number_formatting():
    text = dumps({"a": 0.1, "b": float("inf"), "c": complex(1, -0.0), "d": -0.0, "e": [1, 2.0], "f": None})
    assert '"a": 0.10000000000000001' in text
    assert '"b": "inf"' in text
    assert '"c": {"re": 1.0, "im": 0.0}' in text
    assert '"d": 0.0' in text
    json.loads(text)


def test_json_field_order_follows_dataclass():
    from halfplane_iso.classify import classify

    keys = list(json.loads(dumps(classify(z))))
    assert keys == ["inner", "self_map", "slope", "verdict", "certificate", "witness",
                    "witness_reason", "failed", "norm_p", "p"]


# -- commands


def test_classify_isometry_report():
    code, out, _ = invoke(["classify", "z - 1/z", "--p", "2"])
    doc = json.loads(out)
    assert code == 0
    assert list(doc) == ["tool", "version", "command", "input", "coefficients", "settings", "result", "wall_time"]
    rep = doc["result"]["report"]
    assert rep["verdict"] == "ISOMETRY_AND_SIMILAR" and rep["certificate"]["sign"] == 1
    assert doc["wall_time"] is None


def test_classify_invalid_symbol_witness():
    code, out, err = invoke(["classify", "z + 1/z", "--p", "2"])
    doc = json.loads(out)
    assert code == 2 and "invalid symbol" in err
    assert doc["result"]["witness_value"]["im"] < 0
    assert doc["result"]["report"]["witness"]["im"] > 0


def test_nagy_example_fails_with_ratio_one_ninth():
    code, out, _ = invoke(["oracle-nagy", "z + i", "--p", "2", "--n", "8", "--k", "10"])
    rep = json.loads(out)["result"]["report"]
    assert code == 0 and rep["passed"] is False
    row = [r for r in rep["orbit"] if r["n"] == 8 and r["name"] == "HP_KERNEL(0+1i,1)"][0]
    assert row["ratio"] ** 2 == pytest.approx(1 / 9, abs=1e-6)


def test_parse_error_report():
    code, out, err = invoke(["classify", "z^-1"])
    doc = json.loads(out)
    assert code == 3 and doc["error"]["kind"] == "ExponentError" and doc["error"]["position"] == 2
    assert "z^-1" in err


def test_config_file_overrides(tmp_path):
    cfg = tmp_path / "tol.cfg"
    cfg.write_text("# looser slope\nslope = 0.01\n")
    code, out, _ = invoke(["classify", "1.001*z", "--config", str(cfg)])
    assert code == 0
    doc = json.loads(out)
    assert doc["settings"]["tolerances"]["slope"] == 0.01
    assert doc["result"]["report"]["verdict"] == "ISOMETRY_AND_SIMILAR"
    cfg.write_text("bogus = 1\n")
    assert invoke(["classify", "z", "--config", str(cfg)])[0] == 3


def test_tol_flag():
    code, out, _ = invoke(["classify", "1.001*z", "--tol", "0.01"])
    assert json.loads(out)["result"]["report"]["verdict"] == "ISOMETRY_AND_SIMILAR"


def test_global_flags_before_subcommand():
    out = io.StringIO()
    run(["--deterministic", "classify", "z"], stdout=out, stderr=io.StringIO())
    assert json.loads(out.getvalue())["wall_time"] is None


def test_wall_time_present_without_flag():
    out = io.StringIO()
    run(["classify", "z"], stdout=out, stderr=io.StringIO())
    assert json.loads(out.getvalue())["wall_time"] >= 0


def test_transfer_reports_pole_of_weight():
    code, out, _ = invoke(["transfer", "2*z", "--samples", "2"])
    doc = json.loads(out)["result"]
    assert code == 0 and doc["maps_disc_into_disc"] is True
    # the second boundary sample is z = -1 where the weight is singular
    assert [row["z"]["re"] for row in doc["samples"]] == [1.0, -1.0, 0.5, -0.5]
    assert doc["samples"][1]["weight"] == "pole"


def test_random_battery_seed_echoed(monkeypatch):
    monkeypatch.setenv("HALFPLANE_ISO_SEED", "3")
    code, out, _ = invoke(["oracle-measure", "z", "--battery", "random"])
    assert code == 0 and json.loads(out)["settings"]["seed"] == 3


@pytest.mark.parametrize("argv, code", EXIT_CODES, ids=[" ".join(a) for a, _ in EXIT_CODES])
def test_exit_code_contract(argv, code):
    assert invoke(argv)[0] == code


def test_usage_error_exit_code():
    from halfplane_iso.cli import main

    assert main(["classify"]) == 3
    assert main(["frobnicate", "z"]) == 3


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_reports(name):
    code, out, _ = invoke(GOLDEN[name])
    path = GOLDEN_DIR / f"{name}.json"
    if os.environ.get("UPDATE_GOLDEN"):
        path.write_text(out)
    assert out == path.read_text()
    assert invoke(GOLDEN[name])[1] == out


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "halfplane_iso", "classify", "z - 1/z", "--deterministic"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["report"]["verdict"] == "ISOMETRY_AND_SIMILAR"


# -- shipped schema

jsonschema = pytest.importorskip("jsonschema")
SCHEMA = json.loads((Path(__file__).parent.parent / "docs" / "schema.json").read_text())


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_goldens_match_schema(name):
    jsonschema.validate(json.loads((GOLDEN_DIR / f"{name}.json").read_text()), SCHEMA)


@pytest.mark.parametrize("argv", [
    ["classify", "z^-1"],
    ["oracle-nagy", "z^2"],
    ["transfer", "z - 1/z", "--samples", "2"],
    ["classify", "1/(z - i)"],
    ["oracle-measure", "z + 1", "--battery", "random"],
])
def test_other_outputs_match_schema(argv):
    jsonschema.validate(json.loads(invoke(argv)[1]), SCHEMA)
