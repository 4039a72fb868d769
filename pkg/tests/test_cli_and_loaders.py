import json
import logging

import numpy as np
import pandas as pd
import pytest

from klain.cli import run
from klain.errors import InvalidShapeParameters, RegistrySpecError, SchemaError
from klain.experiment_runner import parse_t_grid
from klain.exterior_algebra import KVector
from klain.klain_functions import HighestWeightKlain, HodgeDualKlain, QuadraticForm
from klain.lab_utils.data_processor import classify_verdict, concat_tables, split_complex, summarize_residuals
from klain.lab_utils.utils import dump_report, to_jsonable, validate_report_structure
from klain.registry import parse_klain_spec
from klain.shape_loader import load_polytope, load_quadratic


CUBE = {
    "n": 3,
    "vertices": [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)],
}


def write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return str(path)


# --- registry ---------------------------------------------------------------


def test_registry_constants():
    xi = KVector.basis_vector(3, (1, 2))
    assert parse_klain_spec("const:2.5", 3, 2)(xi) == 2.5
    assert parse_klain_spec("const:1+2i")(xi) == 1 + 2j
    with pytest.raises(RegistrySpecError):
        parse_klain_spec("const:abc")


def test_registry_families():
    f = parse_klain_spec("hw:2,0", 4, 2)
    assert isinstance(f, HighestWeightKlain)
    assert f.tag == "hw:2,0"
    assert parse_klain_spec("coord:12^4", 4, 2).tag == "coord:12^4"
    assert parse_klain_spec("coord:1,2^4", 4, 2).tag == "coord:12^4"
    dual = parse_klain_spec("dual:sph:2", 3, 2)
    assert isinstance(dual, HodgeDualKlain)
    assert dual.k == 2
    assert parse_klain_spec("dual:hw:2,0", 4, 2).k == 2


def test_registry_quadratic_forms(tmp_path):
    random_form = parse_klain_spec("quad:random:3", 4, 2)
    assert np.allclose(random_form.form.matrix, QuadraticForm.random(4, 2, seed=3).matrix)
    assert np.allclose(parse_klain_spec("quad:identity", 4, 2).form.matrix, np.eye(6))
    path = write_json(tmp_path / "q.json", {"n": 3, "k": 1, "matrix": np.eye(3).tolist()})
    assert np.allclose(parse_klain_spec(f"quad:{path}", 3, 1).form.matrix, np.eye(3))


@pytest.mark.parametrize(
    "spec,n,k",
    [
        ("hw:2,0", 4, 3),
        ("hw:1,2", 4, 2),
        ("sph:1", 4, 1),
        ("coord:12^3", 4, 2),
        ("coord:123^2", 4, 2),
        ("quad:identity", None, None),
        ("quad:does-not-exist.json", 3, 1),
        ("dual:const:1", None, 2),
        ("zonoid:3", 3, 1),
    ],
)
def test_registry_errors(spec, n, k):
    with pytest.raises(RegistrySpecError):
        parse_klain_spec(spec, n, k)


# --- loaders ----------------------------------------------------------------


def test_load_polytope(tmp_path):
    P = load_polytope(write_json(tmp_path / "cube.json", CUBE))
    assert P.n == 3
    assert len(P.vertices) == 8
    assert P.f_vector() == [8, 12, 6, 1]


@pytest.mark.parametrize(
    "payload,field",
    [
        ({"vertices": CUBE["vertices"]}, "n"),
        ({"n": 0, "vertices": CUBE["vertices"]}, "n"),
        ({"n": 2, "vertices": CUBE["vertices"]}, "vertices"),
        ({"n": 3, "vertices": [[0, 0], [1, 0, 0]]}, "vertices"),
        ({"n": 3, "vertices": CUBE["vertices"] + [[0.5, 0.5, 0.5]]}, "vertices"),
        ({"n": 3, "vertices": CUBE["vertices"] + [[1, 1, 1]]}, "vertices"),
    ],
)
def test_load_polytope_rejects_bad_input(tmp_path, payload, field):
    with pytest.raises(SchemaError) as info:
        load_polytope(write_json(tmp_path / "bad.json", payload))
    assert info.value.field == field
    if field in payload:
        assert info.value.line is not None


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "n": 3,\n  "vertices": [[0, 0, 0],,]\n}\n', encoding="utf-8")
    with pytest.raises(SchemaError) as info:
        load_polytope(str(path))
    assert info.value.line == 3


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_polytope("/nonexistent/cube.json")


def test_load_quadratic(tmp_path, caplog):
    Q = load_quadratic(write_json(tmp_path / "id.json", {"n": 4, "k": 2, "matrix": np.eye(6).tolist()}), 4, 2)
    assert Q.n == 4 and Q.k == 2

    skew = np.eye(3)
    skew[0, 1] = 2.0
    with caplog.at_level(logging.WARNING):
        Q = load_quadratic(write_json(tmp_path / "skew.json", {"n": 3, "k": 1, "matrix": skew.tolist()}))
    assert "not symmetric" in caplog.text
    assert Q.matrix[0, 1] == pytest.approx(1.0)


def test_load_quadratic_rejects_bad_input(tmp_path):
    wrong_size = write_json(tmp_path / "q.json", {"n": 4, "k": 2, "matrix": np.eye(5).tolist()})
    with pytest.raises(SchemaError) as info:
        load_quadratic(wrong_size)
    assert info.value.field == "matrix"
    with pytest.raises(SchemaError) as info:
        load_quadratic(write_json(tmp_path / "id.json", {"n": 3, "k": 1, "matrix": np.eye(3).tolist()}), 4, 1)
    assert info.value.field == "n"


# --- report helpers ---------------------------------------------------------


def test_verdicts_and_serialisation():
    assert classify_verdict(1e-10, 1e-8, 1e-3) == "pass"
    assert classify_verdict(1e-5, 1e-8, 1e-3) == "inconclusive"
    assert classify_verdict(0.1, 1e-8, 1e-3) == "fail"
    assert classify_verdict(float("nan"), 1e-8, 1e-3) == "inconclusive"
    assert to_jsonable({"z": 1 + 2j, "a": np.arange(2), "b": np.float64(0.5)}) == {
        "z": {"re": 1.0, "im": 2.0},
        "a": [0, 1],
        "b": 0.5,
    }
    assert validate_report_structure({"command": "x"}) == (
        False,
        ["subcommand", "seed", "samples", "workers", "tolerance", "values", "verdicts", "wall_clock_sec"],
    )


def test_tables_flatten_complex_columns():
    df = pd.DataFrame({"family": ["a", "b"], "residual": [1 + 1j, 2.0], "abs_residual": [1.4, 2.0]})
    flat = split_complex(df)
    assert list(flat.columns) == ["family", "residual_re", "residual_im", "abs_residual"]
    assert summarize_residuals(df) == {"a": 1.4, "b": 2.0, "overall": 2.0}
    stacked = concat_tables({"one": df, "two": df})
    assert stacked["table"].tolist() == ["one", "one", "two", "two"]
    text = dump_report({"values": {"x": 1.0}}, "csv", {"rows": df})
    assert text.splitlines()[0].startswith("table,")
    with pytest.raises(ValueError):
        dump_report({}, "xml")


def test_t_grid_parsing():
    assert parse_t_grid("0.01:0.001") == [0.01, 0.005, 0.0025, 0.00125]
    assert parse_t_grid(None) == [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    with pytest.raises(InvalidShapeParameters):
        parse_t_grid("0.01:0.02")
    with pytest.raises(InvalidShapeParameters):
        parse_t_grid("0.01:0.009")


# --- command line -----------------------------------------------------------


def run_json(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_cli_intrinsic_cube(capsys):
    code, report = run_json(capsys, "intrinsic", "--shape", "cube", "--n", "4", "--k", "2")
    assert code == 0
    assert report["values"]["value"] == pytest.approx(6.0)
    assert report["subcommand"] == "intrinsic"
    assert validate_report_structure(report)[0]


def test_cli_evaluate_from_files(tmp_path, capsys):
    cube = write_json(tmp_path / "cube.json", CUBE)
    form = write_json(tmp_path / "q.json", {"n": 3, "k": 1, "matrix": np.eye(3).tolist()})
    code, report = run_json(capsys, "evaluate", "--polytope", cube, "--k", "1", "--f", f"quad:{form}")
    assert code == 0
    assert report["values"]["value"] == {"re": pytest.approx(3.0), "im": pytest.approx(0.0)}
    assert report["values"]["angle_methods"] == {"exact:dihedral": 12}


def test_cli_shape_parameters(capsys):
    code, report = run_json(
        capsys, "intrinsic", "--shape", "box", "--n", "3", "--param", "lows=0,0,0", "--param", "highs=1,2,3"
    )
    assert code == 0
    assert report["values"]["intrinsic_volumes"]["3"] == pytest.approx(6.0)


def test_cli_dimension(capsys):
    code, report = run_json(capsys, "dimension", "--n", "4", "--k", "2", "--seed", "3")
    assert code == 0
    assert report["values"]["dimension"] == 20
    assert report["verdicts"]["dimension_formula"] == "pass"


def test_cli_counterexample_n5_hw33(capsys):
    code, report = run_json(capsys, "counterexample", "--case", "n5-hw33", "--trials", "5")
    assert code == 0
    assert report["verdicts"]["closed_form_agreement"] == "pass"
    assert report["values"]["relation_holds_on_all_checked_bases"] is True


def test_cli_counterexample_spherical(capsys):
    code, report = run_json(capsys, "counterexample", "--case", "n3-sph2", "--trials", "5")
    assert code == 0
    assert report["values"]["first_verdict"] == "fail"
    assert report["values"]["relation_holds_on_all_checked_bases"] is False


def test_cli_assert_flag(capsys):
    args = ["relation", "--f", "hw:2,0", "--n", "4", "--trials", "3"]
    code, report = run_json(capsys, *args)
    assert code == 0
    assert report["verdicts"]["relation"] == "fail"
    code, _ = run_json(capsys, *args, "--assert")
    assert code == 1


def test_cli_relation_with_certificate(capsys):
    code, report = run_json(
        capsys, "relation", "--f", "quad:random:2", "--n", "4", "--trials", "3", "--certify", "--assert"
    )
    assert code == 0
    assert report["verdicts"]["relation"] == "pass"
    assert report["values"]["certified"] is True


def test_cli_usage_errors(capsys):
    assert run(["relation", "--f", "hw:2,0"]) == 2
    assert run(["evaluate", "--shape", "cube", "--n", "3"]) == 2
    assert run(["frobnicate"]) == 2
    assert run(["relation", "--n", "4", "--f", "bogus:1"]) == 2
    assert run(["counterexample"]) == 2
    assert run(["intrinsic", "--shape", "cube", "--n", "3", "--samples", "0"]) == 2
    err = capsys.readouterr().err
    assert "RegistrySpecError" in err


def test_cli_csv_and_out_file(tmp_path, capsys):
    assert run(["dimension", "--n", "3", "--k", "1", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("table,key,value")
    assert any(line.startswith("values,dimension,6") for line in lines)

    out = tmp_path / "reports" / "fit.json"
    assert run(["fit", "--f", "quad:identity", "--n", "4", "--k", "2", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["verdicts"]["quadratic_fit"] == "pass"
    assert "wall_clock_sec" in report


def test_cli_one_dimensional_box(capsys):
    code, report = run_json(capsys, "intrinsic", "--shape", "box", "--n", "1", "--param", "lows=0", "--param", "highs=2")
    assert code == 0
    assert report["values"]["intrinsic_volumes"]["1"] == pytest.approx(2.0)


def test_cli_simplex_S_basis_parameter(capsys):
    basis = "0,1,0,1,0,0,0,0,1"
    code, report = run_json(capsys, "shapes", "--shape", "simplex_S", "--n", "3", "--param", f"basis={basis}")
    assert code == 0
    assert report["values"]["f_vector"] == [4, 6, 4, 1]

    assert run(["shapes", "--shape", "simplex_S", "--n", "3", "--param", "basis=1,0,0"]) == 2
    assert run(["shapes", "--shape", "box", "--n", "2", "--param", "lows=a,b"]) == 2
    assert "InvalidShapeParameters" in capsys.readouterr().err


def test_cli_failure_writes_error_report(tmp_path, capsys):
    out = tmp_path / "failed.json"
    argv = ["relation", "--n", "4", "--f", "bogus:1", "--seed", "7", "--out", str(out)]
    assert run(argv) == 2
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["verdicts"] == {"run": "error"}
    assert report["error"].startswith("RegistrySpecError")
    assert report["seed"] == 7
    assert report["command"] == " ".join(argv)
    assert validate_report_structure(report)[0]
