import csv
import io
import json

import jsonschema
import pytest

from distsense.cli import EXIT_CONFIG, EXIT_OK, REPORT_SCHEMA, main, parse_config, ConfigError


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
    return str(path)


def rows_of(text):
    return {r["name"]: r for r in csv.DictReader(io.StringIO(text))}


def test_bounds_table(tmp_path, capsys):
    assert main(["bounds", "--config", write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10})]) == EXIT_OK
    rows = rows_of(capsys.readouterr().out)
    assert float(rows["sql"]["value"]) == pytest.approx(0.025, rel=1e-11)
    assert float(rows["product_squeezed"]["value"]) == pytest.approx(0.00208333333333, rel=1e-11)
    assert float(rows["proposed"]["value"]) == pytest.approx(0.00208333333333, rel=1e-11)
    assert float(rows["heisenberg_envelope"]["value"]) == pytest.approx(0.0025, rel=1e-11)
    assert float(rows["two-group_qcrb"]["value"]) == pytest.approx(0.00208333333333, rel=1e-11)
    assert all(r["formula_ref"] for r in rows.values())


def test_bounds_single_mode(tmp_path, capsys):
    assert main(["bounds", "--config", write(tmp_path, {"weights": [1], "n_total": 1})]) == EXIT_OK
    rows = rows_of(capsys.readouterr().out)
    assert float(rows["sql"]["value"]) == 0.25
    assert float(rows["product_squeezed"]["value"]) == 0.0625


def test_bounds_json_output(tmp_path):
    out = tmp_path / "b.json"
    cfg = {"weights": [0.5, -0.5], "n_total": 10, "output": {"path": str(out), "format": "json"}}
    assert main(["bounds", "--config", write(tmp_path, cfg)]) == EXIT_OK
    names = [r["name"] for r in json.loads(out.read_text())]
    assert names[:4] == ["sql", "product_squeezed", "proposed", "heisenberg_envelope"]


@pytest.mark.parametrize(
    "cfg, needle",
    [
        ({"weights": [0], "n_total": 1}, "field 'weights'"),
        ({"weights": [1, "a"], "n_total": 1}, "weights[1]"),
        ({"weights": [1], "n_total": -1}, "n_total"),
        ({"weights": [1], "n_total": 1, "colour": 3}, "colour"),
        ({"weights": [1], "n_total": 1, "scheme_kind": "magic"}, "scheme_kind"),
        ({"weights": [1, -1], "n_total": 1, "sweep": {"ratios": [2.0]}}, "sweep.ratios[0]"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg, needle):
    assert main(["bounds", "--config", write(tmp_path, cfg)]) == EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_syntax_error_is_line_addressed(tmp_path, capsys):
    path = write(tmp_path, '{"weights": [1],\n "n_total": }')
    assert main(["bounds", "--config", path]) == EXIT_CONFIG
    assert f"{path}:2:" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_parse_config_defaults():
    cfg = parse_config('{"weights": [1, -2], "n_total": 3}')
    assert cfg.scheme_kind == "two-group"
    assert cfg.scheme().weights.neg_modes == (1,)
    with pytest.raises(ConfigError):
        parse_config('{"weights": [1, -2], "n_total": 3, "scheme_kind": "custom-two-mode"}')


def test_custom_scheme_config(tmp_path, capsys):
    cfg = {
        "weights": [0.5, -0.5],
        "n_total": 2.0,
        "scheme_kind": "custom-two-mode",
        "custom_params": {"r1": 0.0, "varphi1": 0.0, "r2": 0.0, "varphi2": 0.0,
                          "alpha1": [1.0, 0.0], "alpha2": [0.0, 1.0], "theta": 0.0},
    }
    assert main(["bounds", "--config", write(tmp_path, cfg)]) == EXIT_OK
    rows = rows_of(capsys.readouterr().out)
    assert float(rows["custom-two-mode_qcrb"]["value"]) == pytest.approx(0.125)


def test_sweep_single_point_matches_bounds(tmp_path):
    out = tmp_path / "s.csv"
    cfg = write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10, "sweep": {"ratios": [1.0], "restarts": 4}})
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == EXIT_OK
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert list(rows[0]) == ["ratio", "qcrb", "theta_opt", "r1", "r2", "a1", "a2", "converged"]
    assert len(rows) == 1
    assert float(rows[0]["qcrb"]) == pytest.approx(0.00208333333333, rel=1e-6)
    out2 = tmp_path / "s2.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out2)]) == EXIT_OK
    assert out2.read_bytes() == raw


def test_sweep_errors(tmp_path):
    three = write(tmp_path, {"weights": [0.5, -0.3, 0.2], "n_total": 10, "sweep": {"ratios": [1.0]}})
    assert main(["sweep", "--config", three]) == EXIT_CONFIG
    no_block = write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10}, "b.json")
    assert main(["sweep", "--config", no_block]) == EXIT_CONFIG
    unsorted = write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10, "sweep": {"ratios": [1.0, 0.5]}}, "c.json")
    assert main(["sweep", "--config", unsorted]) == EXIT_CONFIG


def test_simulate_report(tmp_path):
    cfg = write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10, "simulate": {"nu": 1000, "batches": 10}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["simulate", "--config", cfg, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["seed"] == 0 and report["nu"] == 1000 and report["batches"] == 10
    assert report["crb"] == pytest.approx(0.00208333333333, rel=1e-8)


def test_simulate_rejects_displaced_scheme(tmp_path):
    cfg = write(
        tmp_path,
        {"weights": [0.5, -0.5], "n_total": 10, "scheme_kind": "coherent-product", "simulate": {"nu": 10, "batches": 2}},
    )
    assert main(["simulate", "--config", cfg]) == EXIT_CONFIG
    no_block = write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10}, "b.json")
    assert main(["simulate", "--config", no_block]) == EXIT_CONFIG


def test_noon_table(capsys):
    assert main(["noon", "--n", "4"]) == EXIT_OK
    rows = {r["state"]: r for r in csv.DictReader(io.StringIO(capsys.readouterr().out))}
    assert float(rows["noon"]["correlation"]) == -4.0
    assert float(rows["nnoo"]["correlation"]) == 4.0
    assert rows["noon"]["bound_plus"] == "not-estimable"
    assert main(["noon", "--n", "0"]) == EXIT_CONFIG


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    from distsense import cli
    from distsense.errors import NumericalFailure

    def boom(*args, **kwargs):
        raise NumericalFailure("allocation bisection did not converge")

    monkeypatch.setattr(cli.bounds, "product_squeezed_bound", boom)
    assert main(["bounds", "--config", write(tmp_path, {"weights": [0.5, -0.5], "n_total": 10})]) == cli.EXIT_NUMERICAL
