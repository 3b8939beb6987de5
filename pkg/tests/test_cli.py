import json
import math
import os

import numpy as np
import pytest

from sagnacsim.cli import main, read_trace_csv
from sagnacsim.config import RunConfig, canonical_text, parse
from sagnacsim.correlator import FringeTrace, count_fringes, visibility

DEFAULT_CFG = "# all defaults\n"


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(args):
    return main([str(a) for a in args])


def test_simulate_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = write_cfg(tmp_path, DEFAULT_CFG)
    assert run(["--out-dir", tmp_path, "simulate", cfg]) == 0
    out = capsys.readouterr().out
    assert "N = 8" in out
    assert "fringe_count = 8" in out
    assert "visibility = 1.0" in out

    header, cols = read_trace_csv(tmp_path / "trace.csv")
    assert header[0] == "zeta"
    assert header[-1] == "product"
    assert cols["zeta"].size == 4096
    assert len(header) == 1 + 8 + 1  # zeta, 4 blocks x 2 detectors, product

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["metrics"]["order"] == 8
    assert manifest["metrics"]["fringe_count"] == 8
    assert manifest["tool_version"]
    assert manifest["timestamps"]["created"].startswith("2023-11-14")
    echoed = parse(manifest["config_echo"])
    assert isinstance(echoed, RunConfig)


def test_simulate_metrics_recomputable_from_csv(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = write_cfg(tmp_path, DEFAULT_CFG)
    assert run(["--out-dir", tmp_path, "simulate", cfg]) == 0
    _, cols = read_trace_csv(tmp_path / "trace.csv")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    trace = FringeTrace(cols["zeta"], cols["product"])
    assert visibility(trace) == manifest["metrics"]["visibility"]
    assert count_fringes(trace) == manifest["metrics"]["fringe_count"]


def test_simulate_override_doubles_fringes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, DEFAULT_CFG)
    assert run(["--out-dir", tmp_path, "--override", "bank.block_count=8",
                "simulate", cfg]) == 0
    assert "fringe_count = 16" in capsys.readouterr().out


def test_simulate_missing_file(tmp_path, capsys):
    assert run(["--out-dir", tmp_path, "simulate", tmp_path / "absent.cfg"]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_simulate_parse_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[bank]\nblock_count = zero\n")
    assert run(["--out-dir", tmp_path, "simulate", cfg]) == 1
    err = capsys.readouterr().err
    assert "2:15" in err and "expected integer" in err


def test_simulate_validation_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[bank]\nblock_count = 16\n[sweep]\npoints = 512\n")
    assert run(["--out-dir", tmp_path, "simulate", cfg]) == 1
    assert "below 64*N" in capsys.readouterr().err


def test_simulate_configured_outputs(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = write_cfg(tmp_path, "\n".join([
        "[output]", "format = csv", "path = t.csv",
        "[output]", "format = json", "path = m.json",
        "[output]", "format = svg", "path = chart.svg", "",
    ]))
    assert run(["--out-dir", tmp_path, "simulate", cfg]) == 0
    assert (tmp_path / "t.csv").exists()
    assert (tmp_path / "m.json").exists()
    svg = (tmp_path / "chart.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_simulate_poisson_detection_columns(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = write_cfg(tmp_path, "[detection]\nkind = poisson\nphotons_per_channel = 1e9\n")
    assert run(["--seed", 5, "--out-dir", tmp_path, "simulate", cfg]) == 0
    header, cols = read_trace_csv(tmp_path / "trace.csv")
    assert "det_product" in header
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["metrics"]["detected_visibility"] >= 0.999
    assert manifest["seed"] == 5


def test_reproduce_fig3(tmp_path):
    assert run(["--out-dir", tmp_path, "reproduce", "fig3"]) == 0
    header, cols = read_trace_csv(tmp_path / "fig3.csv")
    assert set(header) == {"zeta", "r10_product", "r10_closed",
                           "r100_product", "r100_closed"}
    assert np.max(np.abs(cols["r10_product"] - cols["r10_closed"])) <= 1e-9
    assert np.max(np.abs(cols["r100_product"] - cols["r100_closed"])) <= 1e-9
    assert (tmp_path / "fig3.svg").exists()


def test_reproduce_fig2(tmp_path):
    assert run(["--out-dir", tmp_path, "reproduce", "fig2"]) == 0
    for panel in ("fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f"):
        assert (tmp_path / f"{panel}.csv").exists()
        assert (tmp_path / f"{panel}.svg").exists()
    header, _ = read_trace_csv(tmp_path / "fig2a.csv")
    assert len(header) == 257  # zeta + 256 blocks
    _, cols = read_trace_csv(tmp_path / "fig2e.csv")
    assert count_fringes(FringeTrace(cols["zeta"], cols["N=4"])) == 4
    assert count_fringes(FringeTrace(cols["zeta"], cols["N=8"])) == 8
    _, cols = read_trace_csv(tmp_path / "fig2f.csv")
    assert count_fringes(FringeTrace(cols["zeta"], cols["N=16"])) == 16


def test_noise_demo(tmp_path, capsys):
    assert run(["--seed", 3, "--out-dir", tmp_path, "noise-demo",
                "--sigma", 1.0, "--samples", 400, "--points", 256]) == 0
    payload = json.loads((tmp_path / "noise_demo.json").read_text())
    assert payload["sagnac"]["first_order_visibility"] == pytest.approx(1.0, abs=1e-12)
    assert payload["sagnac"]["product_visibility"] == pytest.approx(1.0, abs=1e-12)
    expected = payload["expected_mzi_first_order_visibility"]
    assert expected == pytest.approx(math.exp(-0.5), rel=1e-12)
    se = payload["mc_standard_error"]
    assert abs(payload["mzi"]["first_order_visibility"] - expected) < 4 * se
    assert (tmp_path / "noise_demo.svg").exists()


def test_noise_demo_sigma_zero(tmp_path):
    assert run(["--out-dir", tmp_path, "noise-demo", "--sigma", 0.0,
                "--samples", 50, "--points", 128]) == 0
    payload = json.loads((tmp_path / "noise_demo.json").read_text())
    assert payload["mzi"]["first_order_visibility"] == pytest.approx(1.0, abs=1e-12)


def test_sensitivity_table(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[detection]\nkind = poisson\nphotons_per_channel = 1e6\n")
    assert run(["--out-dir", tmp_path, "sensitivity", cfg,
                "--orders", "2,4,8"]) == 0
    _, cols = read_trace_csv(tmp_path / "sensitivity.csv")
    orders = cols["order"]
    dz = cols["delta_zeta"]
    assert orders[0] == 1.0  # baseline row always present
    assert all(a > b for a, b in zip(dz, dz[1:]))
    assert dz[0] / dz[-1] == pytest.approx(8.0, rel=0.1)


def test_sensitivity_requires_poisson(tmp_path, capsys):
    cfg = write_cfg(tmp_path, DEFAULT_CFG)
    assert run(["--out-dir", tmp_path, "sensitivity", cfg]) == 1
    assert "poisson model required" in capsys.readouterr().err


def test_numeric_failure_maps_to_exit_2(tmp_path, capsys, monkeypatch):
    import sagnacsim.cli as cli
    from sagnacsim.correlator import DegenerateTraceError

    def boom(args):
        raise DegenerateTraceError("synthetic degenerate trace")

    monkeypatch.setattr(cli, "cmd_simulate", boom)
    cfg = write_cfg(tmp_path, DEFAULT_CFG)
    assert cli.main(["--out-dir", str(tmp_path), "simulate", cfg]) == 2
    assert "numeric failure" in capsys.readouterr().err


def test_config_show_round_trip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[bank]\nblock_count = 8\n[noise]\nseed = 42\n")
    assert run(["config", "show", cfg]) == 0
    shown = capsys.readouterr().out
    reparsed = parse(shown)
    assert isinstance(reparsed, RunConfig)
    assert canonical_text(reparsed) == shown


def test_shipped_sample_configs(tmp_path, monkeypatch):
    from sagnacsim.config import validate
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    root = os.path.join(os.path.dirname(__file__), "..", "configs")
    names = sorted(os.listdir(root))
    assert names == ["eightfold.cfg", "sixteenfold_poisson.cfg"]
    for name in names:
        with open(os.path.join(root, name), encoding="utf-8") as fh:
            cfg = parse(fh.read())
        assert isinstance(cfg, RunConfig), name
        assert [d for d in validate(cfg) if d.severity == "error"] == [], name
    assert run(["--out-dir", tmp_path, "simulate",
                os.path.join(root, "eightfold.cfg")]) == 0
    assert (tmp_path / "product.svg").exists()


def _bytes_of(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_byte_identical_across_thread_counts(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    cfg = write_cfg(tmp_path, "[detection]\nkind = poisson\nphotons_per_channel = 1e8\n")
    snapshots = []
    for threads in ("1", "4"):
        monkeypatch.setenv("SAGNACSIM_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert run(["--seed", 11, "--out-dir", out, "simulate", cfg]) == 0
        assert run(["--seed", 11, "--out-dir", out, "noise-demo",
                    "--sigma", 0.8, "--samples", 600, "--points", 128]) == 0
        snapshots.append({name: _bytes_of(out / name)
                          for name in ("trace.csv", "manifest.json",
                                       "noise_demo.json", "noise_demo.svg")})
    assert snapshots[0] == snapshots[1]
