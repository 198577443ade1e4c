import json
import math
from pathlib import Path

import numpy as np
import pytest

from mortarfem import cli
from mortarfem.cli import ConfigError, config_from_dict, load_config, main, parse_config
from mortarfem.report import ReportRow, csv_to_rows, rows_to_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_table1_preset():
    cfg = load_config(None, "table1")
    assert cfg.partition == "lshape"
    assert cfg.n_subdomains == 3
    assert cfg.alphas == (1.0, 10.0, 10.0)
    assert cfg.degrees == (1, 1, 1)
    assert cfg.n_list == (6, 8, 10, 12, 14)
    assert cfg.consistency_flux
    assert cfg.time_step(1 / 8) == 1 / 64


def test_shipped_table1_config_matches_preset():
    a = parse_config(CONFIGS / "table1.toml")
    b = load_config(None, "table1")
    assert a.problem() == b.problem()
    assert (a.T, a.n_list, a.r_rule) == (b.T, b.n_list, b.r_rule)


@pytest.mark.parametrize("name", ["table1", "smooth_k2", "explicit_rects", "project"])
def test_shipped_configs_parse(name):
    parse_config(CONFIGS / f"{name}.toml")


def test_explicit_config_fields():
    cfg = parse_config(CONFIGS / "explicit_rects.toml")
    assert cfg.partition == ((0.0, 0.5, 0.0, 1.0), (0.5, 1.0, 0.0, 1.0))
    assert cfg.meshes[1].nx == 4 and cfg.meshes[1].ny == 7
    assert cfg.mortar == {0: 1}
    system = cfg.problem().system(cfg.n)
    assert system.interfaces[0].mortar_side == 1


def test_alpha_length_mismatch():
    with pytest.raises(ConfigError, match="alpha"):
        config_from_dict({"partition": "lshape", "alpha": [1.0, 2.0]})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.toml")


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text('partition = "lshape"\ndegree = = 2\n')
    with pytest.raises(ConfigError, match="line 2"):
        parse_config(p)


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"r": -0.1}, "r"),
        ({"T": 0}, "T"),
        ({"degree": 0}, "degree"),
        ({"n_list": [4, 0]}, "n_list"),
        ({"bogus": 1}, "bogus"),
        ({"s": 5}, "s"),
        ({"partition": "triangle"}, "partition"),
        ({"initial_data": "random"}, "initial_data"),
        ({"mortar": {"0": 7}}, "mortar"),
        ({"subdomain": [{"rect": [0, 1, 0, 1]}, {"rect": [0.5, 1.5, 0, 1]}]}, "partition"),
    ],
)
def test_validation_names_field(raw, field):
    with pytest.raises(ConfigError, match=field):
        config_from_dict(raw)


def test_csv_round_trip_is_lossless(rng):
    rows = [
        ReportRow(*rng.standard_normal(7).tolist(), p_x=float("nan"), n_dofs=17),
        ReportRow(1 / 3, 1 / 9, math.pi, math.e, 1e-300, float("nan"), 2.0**-52, n_dofs=0),
    ]
    back = csv_to_rows(rows_to_csv(rows))
    for a, b in zip(rows, back):
        for k, v in vars(a).items():
            w = getattr(b, k)
            assert (math.isnan(v) and math.isnan(w)) or v == w


def test_solve_table1_first_row(tmp_path):
    assert main(["solve", "--preset", "table1", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert 0.026451 / 3 <= summary["error_l2"] <= 3 * 0.026451
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["final_time"] == 1.0 and meta["preset"] == "table1" and len(meta["config_sha256"]) == 64
    lines = (tmp_path / "solution.csv").read_text().splitlines()
    assert lines[0] == "x,y,value" and len(lines) > 100
    # no samples inside the removed quadrant
    pts = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert not np.any((pts[:, 0] > 1e-9) & (pts[:, 1] > 1e-9))


def test_solve_zero_data(tmp_path):
    assert main(["solve", "--preset", "zero", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["max_abs_solution"] <= 1e-14


def test_convergence_outputs_and_determinism(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "table1"\nn_list = [6, 8, 10]\n')
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["convergence", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["convergence", "--config", str(cfg), "--out", str(b), "--threads", "3"]) == 0
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()
    rows = csv_to_rows((a / "convergence.csv").read_text())
    assert [r.h for r in rows] == sorted((r.h for r in rows), reverse=True)
    for prev, row in zip(rows, rows[1:]):
        assert row.p == pytest.approx(math.log(prev.error_l2 / row.error_l2) / math.log(prev.h / row.h), rel=1e-12)
        assert row.q == pytest.approx(math.log(prev.error_l2 / row.error_l2) / math.log(prev.r / row.r), rel=1e-12)
    svg = (a / "convergence.svg").read_text()
    assert svg.startswith("<?xml") and 'version="1.1"' in svg and "slope" in svg


def test_single_resolution_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "table1"\nn_list = [6]\n')
    assert main(["convergence", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "need >= 2 resolutions" in capsys.readouterr().err


def test_exit_code_config_error(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "missing.toml"), "--out", str(tmp_path)]) == 1
    assert main(["solve", "--out", str(tmp_path)]) == 1


def test_exit_code_numerical_failure(tmp_path, monkeypatch):
    from mortarfem.solvers import NotPositiveDefinite

    def boom(*a, **k):
        raise NotPositiveDefinite("forced")

    monkeypatch.setattr(cli, "initial_data", boom)
    assert main(["solve", "--preset", "zero", "--out", str(tmp_path)]) == 2


def test_negative_norm_rejects_k1(tmp_path, capsys):
    assert main(["negative-norm", "--preset", "table1", "--out", str(tmp_path)]) == 1
    assert "k >= 2" in capsys.readouterr().err


def test_project_demo(tmp_path):
    assert main(["project", "--config", str(CONFIGS / "project.toml"), "--out", str(tmp_path), "--seed", "7"]) == 0
    res = json.loads((tmp_path / "projection.json").read_text())
    assert res["coefficients"] == pytest.approx([1 / 3], abs=1e-14)
    assert res["idempotence_error"] <= 1e-11


def test_negative_norm_and_time_commands(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "smooth-k2"\nn_list = [4, 8]\ntime_n = 4\ntime_r = [0.1, 0.05]\n')
    assert main(["negative-norm", "--config", str(cfg), "--out", str(tmp_path / "n")]) == 0
    rows = csv_to_rows((tmp_path / "n" / "negative_norm.csv").read_text())
    assert rows[1].p_neg > rows[1].p
    assert main(["time-convergence", "--config", str(cfg), "--out", str(tmp_path / "t")]) == 0
    rows = csv_to_rows((tmp_path / "t" / "time_convergence.csv").read_text())
    assert [r.r for r in rows] == [0.1, 0.05]
