"""Intensity-product traces, fringe metrics, shot-noise detection and the
phase-sensitivity estimator.

The N-fold product of K out-of-phase detector pairs collapses to sin^2(K*zeta)
after peak normalization; products are accumulated in log space so K up to 64
neither underflows nor loses the exact zeros (a -inf log exponentiates back to
an exact 0).  Peak normalization divides by the true continuous maximum of the
product, located by refining the grid argmax with a bounded scalar minimizer;
normalizing by the bare grid maximum would leave an O((K*dz)^2) bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .eraser import block_intensities

DETECTION_KINDS = ("ideal", "poisson")

_GRID_TOL = 1e-12
_MIN_POINTS_PER_FRINGE = 64

# Philox stream ids >= this are reserved for detection channels.
_DETECT_STREAM_BASE = 2


class DegenerateTraceError(ValueError):
    """Trace carries no usable fringe information (flat, or all zero)."""


class GridResolutionError(ValueError):
    """Grid too coarse for the requested metric."""


@dataclass(frozen=True)
class FringeTrace:
    """Non-negative intensity samples on a strictly uniform, increasing grid."""

    zeta_grid: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        grid = np.asarray(self.zeta_grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "zeta_grid", grid)
        object.__setattr__(self, "values", vals)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("zeta grid must be 1-D with at least 2 points")
        if vals.shape != grid.shape:
            raise ValueError("values and zeta grid must have equal length")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise ValueError("zeta grid must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > _GRID_TOL * max(1.0, abs(steps[0])):
            raise ValueError("zeta grid must be uniform")
        if np.any(vals < 0):
            raise ValueError("intensities must be non-negative")

    @property
    def step(self) -> float:
        return float(self.zeta_grid[1] - self.zeta_grid[0])

    def spans_full_period(self) -> bool:
        """True when the endpoint-exclusive grid covers exactly 2*pi."""
        return abs(self.step * self.zeta_grid.size - 2.0 * np.pi) <= 1e-9


@dataclass(frozen=True)
class CorrelationResult:
    """Product trace of order N plus the derived fringe metrics."""

    order: int
    trace: FringeTrace
    visibility: float
    fringe_count: int
    enhancement: float

    @property
    def effective_wavelength_ratio(self) -> float:
        return 1.0 / self.order


@dataclass(frozen=True)
class DetectionModel:
    """Ideal readout, or per-point Poisson counting at a given photon budget."""

    kind: str = "ideal"
    photons_per_channel: float = 1e15
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DETECTION_KINDS:
            raise ValueError(f"unknown detection kind {self.kind!r}")
        if self.kind == "poisson" and self.photons_per_channel <= 0:
            raise ValueError("photons_per_channel must be > 0 for poisson detection")


def photons_per_channel(photon_rate: float, order: int) -> float:
    """Photon budget of one of the N divided detection channels."""
    return photon_rate / order


def second_order(zeta, k: int, xi_k: float):
    """Normalized pair product i1*i2 of block k; equals sin^2(zeta - xi_k).

    The (-1)^k signs of the pair cancel in the product, so the result is
    parity-independent.
    """
    i1, i2 = block_intensities(zeta, k, xi_k, norm=1.0)
    return i1 * i2


def _log_product(zeta, schedule):
    """Sum over blocks of log(second-order), with -inf marking exact zeros."""
    z = np.asarray(zeta, dtype=float)
    total = np.zeros(z.shape)
    with np.errstate(divide="ignore"):
        for k, xi in enumerate(schedule):
            total = total + np.log(second_order(z, k, xi))
    return total


def _refine_peak(schedule, z_lo: float, z_hi: float) -> float:
    """Maximum of the continuous log-product inside [z_lo, z_hi]."""
    res = minimize_scalar(lambda z: -_log_product(z, schedule),
                          bounds=(z_lo, z_hi), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 200})
    return float(-res.fun)


def product_trace(zeta_grid, schedule, label: str = "",
                  normalization: str = "peak",
                  input_intensity: float = 1.0) -> FringeTrace:
    """Pointwise product of all block pair-products.

    normalization="peak" (default) divides by the true continuous maximum of
    the product.  normalization="raw" instead applies the bookkeeping
    prefactor I0^N * 2^(-K*N) of the per-detector closed forms; it exists for
    bookkeeping tests only and underflows to exact zeros for large K (the
    prefactor is 2^-8192 already at K=64).
    """
    schedule = tuple(float(x) for x in schedule)
    if not schedule:
        raise ValueError("schedule must contain at least one block phase")
    grid = np.asarray(zeta_grid, dtype=float)
    logv = _log_product(grid, schedule)
    k = len(schedule)
    order = 2 * k
    if normalization == "peak":
        i_max = int(np.argmax(logv))
        step = grid[1] - grid[0]
        offset = -_refine_peak(schedule, grid[i_max] - step, grid[i_max] + step)
    elif normalization == "raw":
        if input_intensity <= 0:
            raise ValueError("raw normalization needs input_intensity > 0")
        offset = order * np.log(input_intensity) - k * order * np.log(2.0)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    values = np.exp(logv + offset)
    return FringeTrace(grid, values, label or f"product_N{order}")


def nth_order(zeta_grid, schedule) -> CorrelationResult:
    """Full product over the K blocks plus visibility / fringe-count metrics.

    Requires a full-period grid (one 2*pi span, endpoint exclusive) so the
    fringe count is well defined.
    """
    trace = product_trace(zeta_grid, schedule)
    order = 2 * len(tuple(schedule))
    count = count_fringes(trace)
    return CorrelationResult(order=order, trace=trace,
                             visibility=visibility(trace),
                             fringe_count=count, enhancement=float(count))


def pbw_closed_form(zeta_grid, order: int, label: str = "") -> FringeTrace:
    """Normalized sin^2(N*zeta/2): the N-fold-compressed effective-wavelength fringe."""
    if order < 1:
        raise ValueError("order must be >= 1")
    grid = np.asarray(zeta_grid, dtype=float)
    values = np.sin(0.5 * order * grid) ** 2
    return FringeTrace(grid, values, label or f"pbw_N{order}")


def visibility(trace: FringeTrace) -> float:
    """(max - min) / (max + min) of the trace values."""
    hi = float(np.max(trace.values))
    lo = float(np.min(trace.values))
    if hi + lo == 0.0:
        raise DegenerateTraceError("visibility undefined for an all-zero trace")
    return (hi - lo) / (hi + lo)


def count_fringes(trace: FringeTrace) -> int:
    """Strict local maxima per 2*pi, with periodic wraparound.

    Plateaus of exactly equal samples are collapsed to one candidate before
    the strict comparison.  Raises GridResolutionError when the grid carries
    fewer than 64 points per counted fringe (aliasing guard), and requires
    the grid to span exactly one period.
    """
    if not trace.spans_full_period():
        raise ValueError("fringe counting requires a grid spanning exactly 2*pi")
    v = trace.values
    # collapse runs of equal consecutive values (circularly)
    keep = np.nonzero(v != np.roll(v, 1))[0]
    if keep.size == 0:
        raise DegenerateTraceError("constant trace has no fringes")
    w = v[keep]
    is_max = (w > np.roll(w, 1)) & (w > np.roll(w, -1))
    count = int(np.count_nonzero(is_max))
    if count > 0 and v.size < _MIN_POINTS_PER_FRINGE * count:
        raise GridResolutionError(
            f"{v.size} grid points cannot resolve {count} fringes "
            f"(need >= {_MIN_POINTS_PER_FRINGE} per fringe)")
    return count


def _channel_rng(seed: int, stream: int, point: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=[seed, _DETECT_STREAM_BASE + stream],
                              counter=[point, 0, 0, 0])
    return np.random.Generator(bitgen)


def detect(trace: FringeTrace, model: DetectionModel, stream: int = 0) -> FringeTrace:
    """Simulate photon counting: each point becomes Poisson(v*p)/p.

    Every grid point gets its own counter-based generator (key = detection
    seed and channel stream, counter = point index), so the result does not
    depend on evaluation order.
    """
    if model.kind == "ideal":
        return trace
    p = model.photons_per_channel
    counts = np.empty_like(trace.values)
    for i, v in enumerate(trace.values):
        counts[i] = _channel_rng(model.seed, stream, i).poisson(v * p)
    return FringeTrace(trace.zeta_grid, counts / p, trace.label)


def phase_sensitivity(trace: FringeTrace, model: DetectionModel) -> float:
    """Smallest resolvable phase step under Poisson error propagation.

    Converts the trace to expected counts mu = v * photons_per_channel and
    returns min over the grid of sqrt(mu)/|dmu/dzeta| (central differences,
    interior points; exact zeros of mu or of the slope carry no information
    and are skipped).
    """
    if model.kind != "poisson":
        raise ValueError("phase sensitivity requires a poisson detection model")
    mu = trace.values * model.photons_per_channel
    if mu.size < 3:
        raise DegenerateTraceError("trace too short to differentiate")
    slope = (mu[2:] - mu[:-2]) / (2.0 * trace.step)
    core = mu[1:-1]
    mask = (core > 0) & (slope != 0)
    if not np.any(mask):
        raise DegenerateTraceError("trace has no usable slope anywhere")
    return float(np.min(np.sqrt(core[mask]) / np.abs(slope[mask])))
