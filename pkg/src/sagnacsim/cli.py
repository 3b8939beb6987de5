"""Command-line front end: run sweeps, rebuild the reference panels, compare
noise behavior against an MZI, and tabulate phase sensitivity.

Commands: simulate, reproduce, noise-demo, sensitivity, config show.
Exit codes: 0 success, 1 config/parse error (diagnostics on stderr),
2 numeric failure (degenerate trace or a failed internal self-check).

Determinism: every command honors --seed; the SAGNACSIM_THREADS environment
variable caps the worker pool used for Monte-Carlo ensembles, and results are
byte-identical for any thread count (fixed-size sample chunks, reduced in
index order).  Manifest timestamps honor SOURCE_DATE_EPOCH when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import (OutputSpec, RunConfig, canonical_text, default_config,
                     parse, parse_override, sweep_grid, validate)
from .correlator import (DegenerateTraceError, FringeTrace, GridResolutionError,
                         count_fringes, detect, nth_order, pbw_closed_form,
                         phase_sensitivity, product_trace, second_order,
                         visibility)
from .eraser import (EraserBankSpec, bank_intensities, block_detector_intensities,
                     block_fields, phase_schedule)
from .sagnac import NoiseSpec, mzi_output, sagnac_output, sagnac_phase
from .svgplot import write_chart

_CHUNK = 256  # Monte-Carlo samples per reduction chunk (thread-count independent)


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("SAGNACSIM_THREADS", "1")))
    except ValueError:
        return 1


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()


def _print_diags(diags, path="<config>"):
    for d in diags:
        print(f"{path}:{d}", file=sys.stderr)


def _load_config(path, overrides, seed):
    """Returns (RunConfig, None) or (None, exit_code)."""
    if path is None:
        cfg = default_config()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                source = fh.read()
        except OSError as err:
            print(f"cannot read {path}: {err}", file=sys.stderr)
            return None, 1
        result = parse(source)
        if isinstance(result, list):
            _print_diags(result, path)
            return None, 1
        cfg = result
    for ov in overrides or ():
        cfg, diags = parse_override(cfg, ov)
        if diags:
            _print_diags(diags, path or "<defaults>")
            return None, 1
    if seed is not None:
        cfg, _ = parse_override(cfg, f"noise.seed={seed}")
        cfg, _ = parse_override(cfg, f"detection.seed={seed}")
    diags = validate(cfg)
    _print_diags([d for d in diags if d.severity == "warning"], path or "<defaults>")
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        _print_diags(errors, path or "<defaults>")
        return None, 1
    return cfg, None


def _write_csv(path, header, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_trace_csv(path):
    """Re-ingest a trace CSV: (header list, dict column -> ndarray)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(row[i]) for row in data])
            for i, name in enumerate(header)}
    return header, cols


# ---------------------------------------------------------------------------
# simulate

def _simulate_metrics(cfg: RunConfig, product: FringeTrace):
    metrics = {"order": cfg.bank.total_order,
               "visibility": visibility(product),
               "fringe_count": None, "enhancement": None,
               "effective_wavelength_ratio": 1.0 / cfg.bank.total_order,
               "sagnac_phase_rad": sagnac_phase(cfg.sagnac)}
    if product.spans_full_period():
        n = count_fringes(product)
        metrics["fringe_count"] = n
        metrics["enhancement"] = float(n)
    return metrics


def cmd_simulate(args) -> int:
    cfg, code = _load_config(args.config, args.override, args.seed)
    if cfg is None:
        return code
    grid = sweep_grid(cfg.sweep)
    pairs = bank_intensities(cfg.bank, grid, cfg.sagnac.input_intensity)
    product = product_trace(grid, cfg.bank.phase_schedule, label="product")

    header = ["zeta"]
    columns = [grid]
    for k, (i1, i2) in enumerate(pairs):
        header += [f"b{k}_d1", f"b{k}_d2"]
        columns += [i1, i2]
    header.append("product")
    columns.append(product.values)

    detected_vis = None
    if cfg.detection.kind == "poisson":
        det_cols = []
        for k, (i1, i2) in enumerate(pairs):
            det_cols.append(detect(FringeTrace(grid, i1), cfg.detection, stream=2 * k).values)
            det_cols.append(detect(FringeTrace(grid, i2), cfg.detection, stream=2 * k + 1).values)
            header += [f"det_b{k}_d1", f"det_b{k}_d2"]
        det_product = detect(product, cfg.detection, stream=2 * cfg.bank.block_count)
        detected_vis = visibility(det_product)
        header.append("det_product")
        det_cols.append(det_product.values)
        columns += det_cols

    try:
        metrics = _simulate_metrics(cfg, product)
    except (DegenerateTraceError, GridResolutionError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 2
    if detected_vis is not None:
        metrics["detected_visibility"] = detected_vis

    manifest = {
        "config_echo": canonical_text(cfg),
        "tool_version": __version__,
        "seed": args.seed if args.seed is not None else cfg.noise.seed,
        "metrics": metrics,
        "timestamps": {"created": _timestamp()},
    }

    outputs = cfg.outputs or (OutputSpec("csv", "trace.csv"),
                              OutputSpec("json", "manifest.json"))
    os.makedirs(args.out_dir, exist_ok=True)
    for out in outputs:
        path = os.path.join(args.out_dir, out.path)
        if out.format == "csv":
            _write_csv(path, header, columns)
        elif out.format == "json":
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(manifest, fh, indent=2)
                fh.write("\n")
        elif out.format == "svg":
            write_chart(path, "intensity product", grid, [("product", product.values)])

    print(f"N = {metrics['order']}")
    print(f"visibility = {metrics['visibility']!r}")
    print(f"fringe_count = {metrics['fringe_count']}")
    print(f"enhancement = {metrics['enhancement']}")
    return 0


# ---------------------------------------------------------------------------
# reproduce

def _reproduce_fig2(out_dir) -> int:
    coarse = sweep_grid_like(512)
    fine = sweep_grid_like(4096)
    kbig = 256  # N = 512 panel pair
    sched = phase_schedule(kbig)
    spec = EraserBankSpec(block_count=kbig, phase_schedule=sched)
    pairs = bank_intensities(spec, coarse)

    for panel, idx in (("fig2a", 0), ("fig2b", 1)):
        header = ["zeta"] + [f"b{k}" for k in range(kbig)]
        columns = [coarse] + [p[idx] for p in pairs]
        _write_csv(os.path.join(out_dir, f"{panel}.csv"), header, columns)
        curves = [(f"b{k}", pairs[k][idx]) for k in range(0, kbig, 32)]
        write_chart(os.path.join(out_dir, f"{panel}.svg"),
                    f"per-block detector {idx + 1} intensity (every 32nd block)",
                    coarse, curves)

    # (c) one pair product: fringes double vs the first-order panels
    r2 = second_order(coarse, 0, 0.0)
    _write_csv(os.path.join(out_dir, "fig2c.csv"), ["zeta", "r2"], [coarse, r2])
    write_chart(os.path.join(out_dir, "fig2c.svg"), "pair product, xi = 0",
                coarse, [("r2", r2)])
    n_first = count_fringes(FringeTrace(coarse, pairs[0][0]))
    n_second = count_fringes(FringeTrace(coarse, r2))
    if (n_first, n_second) != (1, 2):
        print(f"self-check failed: fig2c fringe doubling ({n_first} -> {n_second})",
              file=sys.stderr)
        return 2

    # (d) shifted pair products
    xis = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)
    curves = [(f"xi={lab}", second_order(fine, 0, xi))
              for lab, xi in zip(("0", "pi/4", "pi/2", "3pi/4"), xis)]
    _write_csv(os.path.join(out_dir, "fig2d.csv"),
               ["zeta"] + [c[0] for c in curves], [fine] + [c[1] for c in curves])
    write_chart(os.path.join(out_dir, "fig2d.svg"), "shifted pair products", fine, curves)

    # (e) N=4 and N=8 products, (f) N=16
    panels = (("fig2e", (2, 4)), ("fig2f", (8,)))
    for panel, ks in panels:
        curves = []
        for k in ks:
            res = nth_order(fine, phase_schedule(k))
            if res.fringe_count != 2 * k:
                print(f"self-check failed: {panel} N={2 * k} fringe count "
                      f"{res.fringe_count}", file=sys.stderr)
                return 2
            closed = pbw_closed_form(fine, 2 * k)
            if np.max(np.abs(res.trace.values - closed.values)) > 1e-9:
                print(f"self-check failed: {panel} product deviates from closed form",
                      file=sys.stderr)
                return 2
            curves.append((f"N={2 * k}", res.trace.values))
        _write_csv(os.path.join(out_dir, f"{panel}.csv"),
                   ["zeta"] + [c[0] for c in curves], [fine] + [c[1] for c in curves])
        write_chart(os.path.join(out_dir, f"{panel}.svg"),
                    "normalized intensity products", fine, curves)
    return 0


def _reproduce_fig3(out_dir) -> int:
    grid = sweep_grid_like(10000)
    header = ["zeta"]
    columns = [grid]
    curves = []
    for order in (10, 100):
        res = product_trace(grid, phase_schedule(order // 2))
        closed = pbw_closed_form(grid, order)
        dev = float(np.max(np.abs(res.values - closed.values)))
        if dev > 1e-9:
            print(f"self-check failed: fig3 N={order} product vs closed form "
                  f"deviates by {dev:.3e}", file=sys.stderr)
            return 2
        header += [f"r{order}_product", f"r{order}_closed"]
        columns += [res.values, closed.values]
        curves += [(f"N={order} product", res.values), (f"N={order} closed", closed.values)]
    _write_csv(os.path.join(out_dir, "fig3.csv"), header, columns)
    write_chart(os.path.join(out_dir, "fig3.svg"),
                "N-fold products vs closed form", grid, curves)
    return 0


def sweep_grid_like(points: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(points) / points


def cmd_reproduce(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    if args.figure == "fig2":
        return _reproduce_fig2(args.out_dir)
    return _reproduce_fig3(args.out_dir)


# ---------------------------------------------------------------------------
# noise-demo

def _ensemble(kind, sigma, seed, samples, grid, block_count, workers):
    """Ensemble means over noise samples of (block-0 detector-1 trace, raw
    product trace).  kind: 'sagnac' or 'mzi'.  Chunked reduction in fixed
    index order so results are independent of the worker count."""
    spec = EraserBankSpec(block_count=block_count)
    noise = NoiseSpec(kind="common_path" if kind == "sagnac" else "differential_arm",
                      sigma=sigma, seed=seed)
    source = sagnac_output if kind == "sagnac" else mzi_output

    def chunk_sums(lo, hi):
        first = np.zeros_like(grid)
        prod = np.zeros_like(grid)
        for s in range(lo, hi):
            field = source(grid, noise, sample=s)
            acc = np.ones_like(grid)
            for k, xi in enumerate(spec.phase_schedule):
                blk = block_fields(field, k, xi, split_count=block_count)
                i1, i2 = block_detector_intensities(blk)
                if k == 0:
                    first += i1
                acc = acc * (i1 * i2)
            prod += acc
        return first, prod

    bounds = [(lo, min(lo + _CHUNK, samples)) for lo in range(0, samples, _CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: chunk_sums(*b), bounds))
    else:
        parts = [chunk_sums(*b) for b in bounds]
    first = np.zeros_like(grid)
    prod = np.zeros_like(grid)
    for f, p in parts:  # fixed order reduction
        first += f
        prod += p
    return first / samples, prod / samples


def cmd_noise_demo(args) -> int:
    if args.sigma < 0 or args.samples < 1:
        print("sigma must be >= 0 and samples >= 1", file=sys.stderr)
        return 1
    os.makedirs(args.out_dir, exist_ok=True)
    grid = sweep_grid_like(args.points)
    seed = args.seed if args.seed is not None else 0
    workers = _thread_cap()
    results = {}
    curves = []
    for kind in ("sagnac", "mzi"):
        first, prod = _ensemble(kind, args.sigma, seed, args.samples, grid,
                                args.block_count, workers)
        prod_norm = prod / np.max(prod) if np.max(prod) > 0 else prod
        results[kind] = {
            "first_order_visibility": visibility(FringeTrace(grid, first)),
            "product_visibility": visibility(FringeTrace(grid, prod_norm)),
            "mean_first_order_trace": [float(v) for v in first],
            "mean_product_trace": [float(v) for v in prod_norm],
        }
        curves.append((f"{kind} product", prod_norm))

    sig2 = args.sigma ** 2
    var_cos = 0.5 * (1.0 + np.exp(-2.0 * sig2)) - np.exp(-sig2)
    payload = {
        "sigma": args.sigma,
        "samples": args.samples,
        "seed": seed,
        "zeta_grid": [float(z) for z in grid],
        "sagnac": results["sagnac"],
        "mzi": results["mzi"],
        "expected_mzi_first_order_visibility": float(np.exp(-0.5 * sig2)),
        "mc_standard_error": float(np.sqrt(max(var_cos, 0.0) / args.samples)),
    }
    with open(os.path.join(args.out_dir, "noise_demo.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    write_chart(os.path.join(args.out_dir, "noise_demo.svg"),
                f"ensemble products, sigma={args.sigma}", grid, curves)
    print(f"sagnac first-order visibility = {results['sagnac']['first_order_visibility']!r}")
    print(f"mzi first-order visibility = {results['mzi']['first_order_visibility']!r}")
    print(f"expected (dephasing factor) = {payload['expected_mzi_first_order_visibility']!r}")
    return 0


# ---------------------------------------------------------------------------
# sensitivity

def cmd_sensitivity(args) -> int:
    cfg, code = _load_config(args.config, args.override, args.seed)
    if cfg is None:
        return code
    if cfg.detection.kind != "poisson":
        print("poisson model required for sensitivity estimates "
              "(set [detection] kind = poisson)", file=sys.stderr)
        return 1
    orders = sorted({1} | set(args.orders))
    grid = sweep_grid(cfg.sweep)
    rows = []
    try:
        for order in orders:
            if cfg.sweep.points < 64 * order:
                print(f"sweep.points below 64*N for N={order}", file=sys.stderr)
                return 1
            trace = pbw_closed_form(grid, order)
            dz = phase_sensitivity(trace, cfg.detection)
            rows.append((order, dz, dz * np.sqrt(cfg.detection.photons_per_channel)))
    except DegenerateTraceError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 2
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "sensitivity.csv"),
               ["order", "delta_zeta", "delta_zeta_sqrt_photons"],
               [np.array([r[0] for r in rows], dtype=float),
                np.array([r[1] for r in rows]),
                np.array([r[2] for r in rows])])
    for order, dz, scaled in rows:
        print(f"N={order:4d}  delta_zeta={dz:.6e}  delta_zeta*sqrt(p)={scaled:.6f}")
    return 0


# ---------------------------------------------------------------------------
# config show

def cmd_config_show(args) -> int:
    cfg, code = _load_config(args.config, args.override, args.seed)
    if cfg is None:
        return code
    sys.stdout.write(canonical_text(cfg))
    return 0


# ---------------------------------------------------------------------------

def _add_global_flags(p):
    # SUPPRESS keeps a subparser from clobbering a value given before the
    # subcommand; real defaults are filled in after parsing
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="global RNG seed")
    p.add_argument("--out-dir", default=argparse.SUPPRESS,
                   help="directory for output files")
    p.add_argument("--override", action="append", default=argparse.SUPPRESS,
                   metavar="SECTION.KEY=VALUE", help="config override (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sagnacsim",
                                 description="ring-interferometer fringe "
                                             "superresolution simulator")
    _add_global_flags(ap)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured sweep")
    p.add_argument("config", nargs="?", default=None,
                   help="config file (defaults when omitted)")
    _add_global_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="rebuild the reference figure panels")
    p.add_argument("figure", choices=("fig2", "fig3"))
    _add_global_flags(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("noise-demo", help="ring vs MZI noise ensembles")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--block-count", type=int, default=4)
    _add_global_flags(p)
    p.set_defaults(func=cmd_noise_demo)

    p = sub.add_parser("sensitivity", help="phase sensitivity vs product order")
    p.add_argument("config", nargs="?", default=None)
    p.add_argument("--orders", type=lambda s: [int(x) for x in s.split(",")],
                   default=[2, 4, 8, 16])
    _add_global_flags(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("config", help="config utilities")
    csub = p.add_subparsers(dest="config_command", required=True)
    ps = csub.add_parser("show", help="print the canonical form of a config")
    ps.add_argument("config", nargs="?", default=None)
    _add_global_flags(ps)
    ps.set_defaults(func=cmd_config_show)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed = getattr(args, "seed", None)
    args.out_dir = getattr(args, "out_dir", ".")
    args.override = getattr(args, "override", [])
    try:
        return args.func(args)
    except (DegenerateTraceError, GridResolutionError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
