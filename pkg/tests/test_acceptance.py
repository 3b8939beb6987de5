"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they pass.
"""

import json
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from corpus_tools import malformed_corpus, random_valid_config
from sagnacsim.cli import main
from sagnacsim.config import RunConfig, canonical_text, parse
from sagnacsim.correlator import (DetectionModel, FringeTrace, detect, nth_order,
                                  pbw_closed_form, phase_sensitivity,
                                  product_trace, visibility)
from sagnacsim.eraser import (block_detector_intensities, block_fields,
                              block_intensities, phase_schedule)
from sagnacsim.sagnac import (NoiseSpec, SagnacConfig, mzi_output, sagnac_output,
                              sagnac_phase)


@contextmanager
def criterion(number, name):
    try:
        yield
    except Exception:
        print(f"[acceptance] criterion {number:2d} ({name}): FAIL")
        raise
    print(f"[acceptance] criterion {number:2d} ({name}): PASS")


def grid(points, span=2.0 * np.pi):
    return span * np.arange(points) / points


def test_criterion_01_fringe_multiplication():
    with criterion(1, "fringe multiplication"):
        for k in (2, 4, 8):
            t0 = time.perf_counter()
            res = nth_order(grid(64 * 2 * k), phase_schedule(k))
            elapsed = time.perf_counter() - t0
            assert res.fringe_count == 2 * k, f"K={k}: {res.fringe_count} fringes"
            assert elapsed < 1.0, f"K={k} took {elapsed:.3f}s"


def test_criterion_02_product_equals_closed_form():
    with criterion(2, "N-fold product vs closed form, N=10 and N=100"):
        g = grid(10000)
        for order in (10, 100):
            prod = product_trace(g, phase_schedule(order // 2))
            closed = pbw_closed_form(g, order)
            dev = float(np.max(np.abs(prod.values - closed.values)))
            assert dev <= 1e-9, f"N={order}: deviation {dev:.3e}"


def test_criterion_03_closed_form_vs_element_propagation():
    with criterion(3, "closed forms vs Jones pipeline"):
        rng = np.random.default_rng(12345)
        z = grid(10000)
        e_a = sagnac_output(z)
        split = 6
        for _ in range(20):
            k = int(rng.integers(0, 16))
            xi = float(rng.uniform(0, np.pi))
            f1, f2 = block_detector_intensities(
                block_fields(e_a, k, xi, split_count=split))
            c1, c2 = block_intensities(z, k, xi, norm=1.0 / (4.0 * split))
            assert np.max(np.abs(f1 - c1)) <= 1e-12
            assert np.max(np.abs(f2 - c2)) <= 1e-12


def test_criterion_04_out_of_phase_pairing_all_blocks():
    with criterion(4, "out-of-phase pairing at N=512"):
        K = 256
        z = grid(2048)
        worst = 0.0
        for k, xi in enumerate(phase_schedule(K)):
            i1, _ = block_intensities(z, k, xi)
            _, i2_shift = block_intensities(z + np.pi, k, xi)
            worst = max(worst, float(np.max(np.abs(i1 - i2_shift))))
        assert worst <= 1e-12, f"worst pairing deviation {worst:.3e}"


def _field_product(field, block_count):
    acc = None
    for k, xi in enumerate(phase_schedule(block_count)):
        i1, i2 = block_detector_intensities(
            block_fields(field, k, xi, split_count=block_count))
        acc = i1 * i2 if acc is None else acc * (i1 * i2)
    return acc / np.max(acc)


def test_criterion_05_noise_immunity():
    with criterion(5, "common-mode immunity and MZI dephasing baseline"):
        z = grid(1024)
        clean = _field_product(sagnac_output(z), block_count=4)
        noise = NoiseSpec(kind="common_path", sigma=1.0, seed=21)
        for sample in (0, 1, 2):
            noisy = _field_product(sagnac_output(z, noise, sample=sample), 4)
            dev = float(np.max(np.abs(noisy - clean)))
            assert dev <= 1e-12, f"sample {sample}: deviation {dev:.3e}"

        sigma, samples = 1.0, 10000
        spec = NoiseSpec(kind="differential_arm", sigma=sigma, seed=7)
        zz = grid(256)
        acc = np.zeros_like(zz)
        for s in range(samples):
            i1, _ = block_detector_intensities(
                block_fields(mzi_output(zz, spec, sample=s), 0, 0.0))
            acc += i1
        acc /= samples
        vis = (acc.max() - acc.min()) / (acc.max() + acc.min())
        expected = np.exp(-0.5 * sigma**2)
        var_cos = 0.5 * (1 + np.exp(-2 * sigma**2)) - np.exp(-(sigma**2))
        se = np.sqrt(var_cos / samples)
        assert abs(vis - expected) <= 3 * se, (
            f"MZI visibility {vis:.5f} vs {expected:.5f} +- {3 * se:.5f}")


def test_criterion_06_noise_free_visibility():
    with criterion(6, "noise-free product visibility for K <= 64"):
        for k in range(1, 65):
            g = grid(max(4096, 64 * 2 * k))
            vis = visibility(product_trace(g, phase_schedule(k)))
            assert abs(vis - 1.0) <= 1e-12, f"K={k}: visibility {vis!r}"


def test_criterion_07_product_identity_oracle():
    with criterion(7, "product identity for K in 1..64"):
        g = grid(10000)
        worst = 0.0
        for k in range(1, 65):
            lhs = product_trace(g, phase_schedule(k)).values
            rhs = np.sin(k * g) ** 2
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        assert worst <= 1e-9, f"worst identity deviation {worst:.3e}"


def test_criterion_08_shot_noise_behavior():
    with criterion(8, "shot-noise detection vs Poisson oracle"):
        # HeNe-scale budget keeps the product fringe visibility intact
        g = grid(4096)
        product = FringeTrace(g, np.sin(4 * g) ** 2)
        vis = visibility(detect(product, DetectionModel("poisson", 1e12, seed=0)))
        assert vis >= 0.999, f"1e12-photon visibility {vis}"

        # 25-photon regime, 1000 seeds, against an independent PCG64 oracle.
        # On the product trace the statistic is degenerate (grid points with
        # zero intensity give zero counts, pinning visibility at 1).
        g25 = grid(128)
        prod25 = FringeTrace(g25, np.sin(4 * g25) ** 2)
        ours_prod = np.array([
            visibility(detect(prod25, DetectionModel("poisson", 25.0, seed=s)))
            for s in range(1000)])
        oracle_prod = np.array([
            visibility(FringeTrace(g25, np.random.default_rng(50_000 + s)
                                   .poisson(prod25.values * 25.0) / 25.0))
            for s in range(1000)])
        assert ours_prod.mean() == oracle_prod.mean() == 1.0
        assert ours_prod.std() == oracle_prod.std() == 0.0

        # a fringe bounded away from zero shows the genuine 1/sqrt(25)-scale
        # spread; implementation and oracle must agree in mean and spread
        pedestal = FringeTrace(g25, (2.0 + np.cos(g25)) / 3.0)
        ours = np.array([
            visibility(detect(pedestal, DetectionModel("poisson", 25.0, seed=s)))
            for s in range(1000)])
        lam = pedestal.values * 25.0
        oracle = np.array([
            visibility(FringeTrace(g25, np.random.default_rng(90_000 + s)
                                   .poisson(lam) / 25.0))
            for s in range(1000)])
        se = oracle.std() * np.sqrt(2.0 / oracle.size)
        assert abs(ours.mean() - oracle.mean()) < 5 * se, (
            f"means {ours.mean():.4f} vs {oracle.mean():.4f}")
        ratio = ours.std() / oracle.std()
        assert 0.8 < ratio < 1.25, f"std ratio {ratio:.3f}"
        assert 0.2 / 10 < ours.std() < 0.2 * 2  # 1/sqrt(25) scale


def test_criterion_09_sensitivity_scaling():
    with criterion(9, "phase sensitivity scales as 1/N"):
        model = DetectionModel("poisson", 1e6, seed=0)
        g = grid(2048)
        dz1 = phase_sensitivity(pbw_closed_form(g, 1), model)
        dz8 = phase_sensitivity(pbw_closed_form(g, 8), model)
        assert dz8 / dz1 == pytest.approx(1.0 / 8.0, rel=0.1), (
            f"ratio {dz8 / dz1:.4f}")


def test_criterion_10_sagnac_phase_earth_rate():
    with criterion(10, "Earth-rate ring phase"):
        cfg = SagnacConfig(wavelength=632.8e-9, enclosed_area=1.0,
                           angular_velocity=7.292e-5)
        hand_evaluated = 9.66049424783291e-06
        assert sagnac_phase(cfg) == pytest.approx(hand_evaluated, rel=1e-3)


def test_criterion_11_parser_corpus_and_round_trip():
    with criterion(11, "parser diagnostics and round-trip"):
        corpus = malformed_corpus()
        assert len(corpus) >= 100, f"corpus has only {len(corpus)} cases"
        for text, line, col in corpus:
            out = parse(text)
            assert isinstance(out, list) and out
            assert (out[0].line, out[0].column) == (line, col), (
                f"planted {line}:{col}, reported {out[0].line}:{out[0].column}")
        rng = random.Random(424242)
        for _ in range(50):
            cfg = random_valid_config(rng)
            back = parse(canonical_text(cfg))
            assert isinstance(back, RunConfig) and back == cfg


def test_criterion_12_byte_identical_across_threads(tmp_path, monkeypatch):
    with criterion(12, "seeded runs byte-identical across thread counts"):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("[detection]\nkind = poisson\n"
                            "photons_per_channel = 1e9\n", encoding="utf-8")
        snapshots = []
        for threads in ("1", "8"):
            monkeypatch.setenv("SAGNACSIM_THREADS", threads)
            out = tmp_path / f"threads_{threads}"
            assert main(["--seed", "17", "--out-dir", str(out),
                         "simulate", str(cfg_path)]) == 0
            assert main(["--seed", "17", "--out-dir", str(out), "noise-demo",
                         "--sigma", "1.0", "--samples", "700",
                         "--points", "128"]) == 0
            snapshots.append({
                name: (out / name).read_bytes()
                for name in ("trace.csv", "manifest.json",
                             "noise_demo.json", "noise_demo.svg")})
        assert snapshots[0] == snapshots[1]
        payload = json.loads(snapshots[0]["noise_demo.json"])
        assert payload["seed"] == 17
