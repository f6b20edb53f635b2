import csv
import json
import os

import numpy as np
import pytest

from tomography.cli import main
from tomography.config import ConfigError, load_config, parse_config
from tomography.grid import RunRow, SuccessGrid
from tomography.runner import (GRID_HEADER, RUNS_HEADER, THRESH_HEADER, WORKERS_ENV,
                               affine_scaling_fit, csv_text, execute, resolve_workers, run_sweep)

SMALL_NN = {"hidden": [12], "dims": [0, 2, 8], "burn_in": [0, 4],
            "data": {"num_classes": 3, "samples_per_class": 30, "input_dim": 4},
            "accuracy_thresholds": [0.4, 0.8], "loss_thresholds": [0.5, 1.0],
            "optimizer": {"epochs": 1, "batch_size": 32},
            "full_optimizer": {"epochs": 1, "batch_size": 32, "learning_rate": 0.01}}


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


# ---------------------------------------------------------------- config

def test_unknown_key_reported_with_path():
    with pytest.raises(ConfigError, match=r"network\.optimizer\.momentum"):
        parse_config({"kind": "nn-sweep", "network": {"optimizer": {"momentum": 0.9}}})


@pytest.mark.parametrize("doc, field", [
    ({"kind": "quadratic-sweep", "delta": 1.0}, "delta"),
    ({"kind": "quadratic-sweep", "runs": 0}, "runs"),
    ({"kind": "quadratic-sweep", "quadratic": {"epsilons": []}}, "quadratic.epsilons"),
    ({"kind": "nn-sweep", "network": {"dims": []}}, "network.dims"),
    ({"kind": "teleport"}, "kind"),
])
def test_invalid_fields(doc, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config(doc)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)


def test_defaults_and_overrides():
    cfg = parse_config({"kind": "quadratic-sweep"})
    assert cfg.delta == 0.1 and cfg.experiment == "quadratic-sweep"
    assert cfg.quadratic.dim_grid() == list(range(1, 101))
    assert cfg.with_overrides(seed=5).seed == 5
    with pytest.raises(ConfigError):
        cfg.with_overrides(runs=-1)


def test_workers_env_override(monkeypatch):
    cfg = parse_config({"kind": "width-estimate", "workers": 3})
    assert resolve_workers(cfg) == 3
    monkeypatch.setenv(WORKERS_ENV, "5")
    assert resolve_workers(cfg) == 5
    assert resolve_workers(cfg, 2) == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        resolve_workers(cfg)


# ---------------------------------------------------------------- runner

def _square(x):
    return x * x


def test_execute_preserves_job_order():
    jobs = [(_square, i) for i in range(7)]
    assert execute(jobs, 1) == execute(jobs, 3) == [i * i for i in range(7)]


def test_csv_formatting():
    text = csv_text(("a", "b", "c"), [(1, 0.1, None), (2, float("nan"), True)])
    assert text == "a,b,c\n1,0.1,\n2,,true\n"


def test_affine_fit_exact_line():
    s = np.array([0.3, 0.5, 0.9])
    fit = affine_scaling_fit(2 * s, s)
    assert fit["constant"] == pytest.approx(2.0) and fit["r_squared"] == pytest.approx(1.0)
    assert fit["max_relative_deviation"] == pytest.approx(0.0, abs=1e-12)


def test_quadratic_sweep_outputs(tmp_path):
    cfg = parse_config({"kind": "quadratic-sweep", "runs": 10,
                        "quadratic": {"dims": [10, 30, 50, 70, 90]}, "svg": True})
    res = run_sweep(cfg, tmp_path / "q")
    runs = read_csv(tmp_path / "q" / "runs.csv")
    assert tuple(runs[0]) == RUNS_HEADER and len(runs) == 1 + 50
    grid = read_csv(tmp_path / "q" / "grid.csv")
    assert tuple(grid[0]) == GRID_HEADER
    thr = read_csv(tmp_path / "q" / "thresholds.csv")
    assert tuple(thr[0]) == THRESH_HEADER
    assert (tmp_path / "q" / "phase.svg").exists()
    meta = json.loads((tmp_path / "q" / "metadata.json").read_text())
    assert "workers" not in meta["config"] and len(meta["eigenvalues"]) == 100
    # a 0 -> 1 band exists at the smallest epsilon
    p = res.grids["loss"].p_success[0][:, 0]
    assert p[0] == 0.0 and p[-1] == 1.0


def test_grid_recomputable_from_runs_csv(tmp_path):
    cfg = parse_config({"kind": "quadratic-sweep", "runs": 6,
                        "quadratic": {"dims": [20, 50, 80], "epsilons": [0.01, 0.1, 1.0]}})
    run_sweep(cfg, tmp_path)
    rows = [RunRow(r[0], r[1], int(r[2]), int(r[3]), int(r[4]), int(r[5]), float(r[6]))
            for r in read_csv(tmp_path / "runs.csv")[1:]]
    grid = SuccessGrid.from_rows(rows, [0.01, 0.1, 1.0], "loss")
    expected = csv_text(GRID_HEADER, grid.rows())
    assert (tmp_path / "grid.csv").read_text() == expected


def test_unreached_threshold_is_empty_field(tmp_path):
    cfg = parse_config({"kind": "quadratic-sweep", "runs": 3,
                        "quadratic": {"dims": [1, 2], "epsilons": [1e-9, 100.0]}})
    run_sweep(cfg, tmp_path)
    thr = read_csv(tmp_path / "thresholds.csv")
    assert thr[1][4] == "" and thr[2][4] == "1"


def test_single_cell_single_record(tmp_path):
    cfg = parse_config({"kind": "quadratic-sweep", "runs": 1,
                        "quadratic": {"dims": [5], "epsilons": [0.1]}})
    res = run_sweep(cfg, tmp_path)
    assert len(res.grids["loss"].records) == 1


def test_nn_sweep_deterministic_across_workers(tmp_path):
    doc = {"kind": "nn-sweep", "runs": 2, "network": SMALL_NN}
    cfg = parse_config(doc)
    run_sweep(cfg, tmp_path / "a", workers=1)
    run_sweep(cfg, tmp_path / "b", workers=2)
    run_sweep(cfg, tmp_path / "c", workers=1)
    for name in ("runs.csv", "grid.csv", "thresholds.csv", "metadata.json"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    runs = read_csv(tmp_path / "a" / "runs.csv")
    assert {r[1] for r in runs[1:]} == {"random", "burn-in"}
    assert len(runs) == 1 + 2 * 3 * 2


def test_nn_sweep_d0_reports_offset_accuracy(tmp_path):
    cfg = parse_config({"kind": "nn-sweep", "runs": 2, "network": SMALL_NN})
    run_sweep(cfg, tmp_path)
    meta = json.loads((tmp_path / "metadata.json").read_text())
    runs = read_csv(tmp_path / "runs.csv")[1:]
    for t in ("0", "4"):
        d0 = [float(r[7]) for r in runs if r[2] == t and r[3] == "0"]
        assert np.mean(d0) == pytest.approx(meta["offset_accuracy"][t]["mean_accuracy_at_d0"])


def test_lottery_and_ticket_sweeps(tmp_path):
    net = dict(SMALL_NN, dims=[1, 4], keep_fractions=[1.0, 0.05])
    run_sweep(parse_config({"kind": "lottery", "runs": 2, "network": net}), tmp_path / "l")
    curves = read_csv(tmp_path / "l" / "curves.csv")
    assert curves[0] == ["kind", "run", "d", "compression_ratio", "best_acc", "running_max_acc"]
    assert {r[0] for r in curves[1:]} == {"lottery", "random"}
    assert len(read_csv(tmp_path / "l" / "spectra.csv")) > 1
    run_sweep(parse_config({"kind": "ticket", "runs": 1, "network": net}), tmp_path / "t")
    tickets = read_csv(tmp_path / "t" / "tickets.csv")
    assert [r[1] for r in tickets[1:]] == ["1.0", "0.05"]


def test_geometry_sweeps(tmp_path):
    run_sweep(parse_config({"kind": "width-estimate", "width": {"num_gaussians": 500}}),
              tmp_path / "w")
    widths = read_csv(tmp_path / "w" / "widths.csv")
    assert len(widths) == 14
    cfg = parse_config({"kind": "affine-distance",
                        "affine": {"D": 20, "pairs": [[5, 5], [10, 10], [12, 9]], "trials": 20}})
    run_sweep(cfg, tmp_path / "a")
    dist = read_csv(tmp_path / "a" / "distances.csv")
    assert float(dist[2][3]) < 1e-8 and float(dist[3][3]) < 1e-8


# ---------------------------------------------------------------- CLI

def test_cli_success(tmp_path, capsys):
    cfg = write_config(tmp_path, {"kind": "quadratic-sweep", "runs": 2,
                                  "quadratic": {"dims": [10, 60]}})
    code = main(["quadratic-sweep", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--seed", "3", "--workers", "1", "--svg"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert "phase.svg" in summary["files"]
    meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
    assert meta["config"]["seed"] == 3


def test_cli_config_errors(tmp_path, capsys):
    cfg = write_config(tmp_path, {"kind": "quadratic-sweep", "bogus": 1})
    assert main(["quadratic-sweep", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err
    cfg = write_config(tmp_path, {"kind": "nn-sweep"}, "nn.json")
    assert main(["quadratic-sweep", "--config", str(cfg)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["quadratic-sweep", "--workers", "two"])
    assert exc.value.code == 2


def test_cli_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path, {"kind": "width-estimate", "width": {"num_gaussians": 10}})
    assert main(["width-estimate", "--config", str(cfg), "--out", str(blocker / "sub")]) == 3
    assert "i/o error" in capsys.readouterr().err


def test_cli_runtime_error(tmp_path, capsys):
    net = dict(SMALL_NN, linearized=True, linearize_max_bytes=64)
    cfg = write_config(tmp_path, {"kind": "nn-sweep", "runs": 1, "network": net})
    assert main(["nn-sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4
    assert "MiB" in capsys.readouterr().err


def test_cli_truncated_idx_is_io_error(tmp_path):
    (tmp_path / "img").write_bytes(bytes.fromhex("00000803000000020000000200000003") + bytes(5))
    (tmp_path / "lab").write_bytes(bytes.fromhex("0000080100000002") + bytes([0, 1]))
    net = dict(SMALL_NN, data={"source": "idx", "images": str(tmp_path / "img"),
                               "labels": str(tmp_path / "lab"), "num_classes": 3})
    cfg = write_config(tmp_path, {"kind": "nn-sweep", "runs": 1, "network": net})
    assert main(["nn-sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_cli_outputs_are_utf8(tmp_path):
    cfg = write_config(tmp_path, {"kind": "affine-distance",
                                  "affine": {"D": 10, "pairs": [[2, 3]], "trials": 5}})
    assert main(["affine-distance", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    for name in os.listdir(tmp_path / "o"):
        (tmp_path / "o" / name).read_bytes().decode("utf-8")
