"""Phase-controlled eraser blocks: split the ring output into K blocks and
project each onto the diagonal basis so the hidden fringe reappears.

Each block k applies a control retardance xi_k to the V component, splits on
a 50/50 BS, and projects both arms onto a 45-degree polarizer.  The two
detectors of a block see out-of-phase fringes; even/odd blocks alternate the
pairing (the BS cascade presets the sign).  Amplitude bookkeeping is the
physical energy-conserving one: a K-way split hands each block intensity
I0/K, and after the 45-degree projection each detector pair shares I0/(2K),
i.e. closed-form intensities

    i1 = (I0/4K) * (1 - (-1)^k cos(zeta - xi_k))
    i2 = (I0/4K) * (1 + (-1)^k cos(zeta - xi_k))

Sign convention: the control phase enters as (zeta - xi_k), so the in-block
retarder unwinds the rotation phase; the element pipeline therefore applies
retarder_matrix(-xi_k).

The SLM variant replaces a block by a synchronized pixel pair acting after
one shared BS; it produces the same fringe pair without the (-1)^k
alternation (odd blocks swap detector labels between the two modes, the
intensity products are identical).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jones import apply, bs_split, intensity, polarizer_matrix, retarder_matrix

BANK_MODES = ("qwp_blocks", "slm_pixels")

# Retardances a discrete quarter-wave plate can realize (absent / fast axis
# vertical / fast axis horizontal); anything else needs the programmable mode.
QWP_DISCRETE_PHASES = (0.0, np.pi / 2.0, np.pi)

_SCHEDULE_TOL = 1e-12


def phase_schedule(block_count: int) -> tuple[float, ...]:
    """Control phases xi_k = pi*k/K for k = 0..K-1 (step pi/K, first element 0)."""
    if block_count < 1:
        raise ValueError("block_count must be >= 1")
    return tuple(np.pi * k / block_count for k in range(block_count))


@dataclass(frozen=True)
class EraserBankSpec:
    """K eraser blocks, their mode, and the equally spaced control phases."""

    block_count: int = 4
    mode: str = "qwp_blocks"
    phase_schedule: tuple[float, ...] = field(default=None)  # type: ignore[assignment]
    strict: bool = False  # qwp_blocks only: reject phases a discrete QWP cannot make

    def __post_init__(self):
        if self.block_count < 1:
            raise ValueError("block_count must be >= 1")
        if self.mode not in BANK_MODES:
            raise ValueError(f"unknown bank mode {self.mode!r}")
        if self.phase_schedule is None:
            object.__setattr__(self, "phase_schedule", phase_schedule(self.block_count))
        sched = tuple(float(x) for x in self.phase_schedule)
        object.__setattr__(self, "phase_schedule", sched)
        if len(sched) != self.block_count:
            raise ValueError("phase_schedule length must equal block_count")
        if self.block_count > 1:
            steps = np.diff(sched)
            if np.max(np.abs(steps - steps[0])) > _SCHEDULE_TOL:
                raise ValueError("phase schedule must be equally spaced")
            if abs(steps[0] - np.pi / self.block_count) > _SCHEDULE_TOL:
                raise ValueError("phase schedule step must be pi/K (pi-modulus condition)")

    @property
    def total_order(self) -> int:
        return 2 * self.block_count


@dataclass(frozen=True)
class BlockFields:
    """Detector fields of one block; intensities never depend on global_phase."""

    k: int
    e1: np.ndarray
    e2: np.ndarray
    global_phase: float = 0.0


def block_fields(e_a: np.ndarray, k: int, xi_k: float,
                 pol_angle: float = np.pi / 4.0, split_count: int = 1,
                 global_phase: float = 0.0) -> BlockFields:
    """Propagate the ring output through block k element by element.

    Pipeline: 1/sqrt(split_count) share, (-1)^k V sign preset by the feed
    cascade, 50/50 BS, retarder(-xi_k) on each arm, polarizer(pol_angle).
    """
    e_in = np.asarray(e_a, dtype=complex) / np.sqrt(split_count)
    if k % 2:
        e_in = np.stack(np.broadcast_arrays(e_in[0], -e_in[1]), axis=0)
    t, r = bs_split(e_in)
    ret = retarder_matrix(-xi_k)
    pol = polarizer_matrix(pol_angle)
    phase = np.exp(1j * global_phase)
    e1 = phase * apply(pol, apply(ret, t))
    e2 = phase * apply(pol, apply(ret, r))
    return BlockFields(k=k, e1=e1, e2=e2, global_phase=global_phase)


def block_intensities(zeta, k: int, xi_k: float, norm: float = 1.0):
    """Closed-form mean intensities (i1, i2) of block k's detector pair."""
    c = np.cos(np.asarray(zeta, dtype=float) - xi_k)
    sign = -1.0 if k % 2 else 1.0
    return norm * (1.0 - sign * c), norm * (1.0 + sign * c)


def slm_pixel_fields(e_a: np.ndarray, k: int, xi_k: float, block_count: int,
                     pol_angle: float = np.pi / 4.0) -> BlockFields:
    """Pixel-pair variant: one shared BS, then pixel k of each SLM applies the
    synchronized retardance and the projection.  No (-1)^k alternation."""
    t, r = bs_split(np.asarray(e_a, dtype=complex) / np.sqrt(block_count))
    ret = retarder_matrix(-xi_k)
    pol = polarizer_matrix(pol_angle)
    e1 = apply(pol, apply(ret, t))
    e2 = apply(pol, apply(ret, r))
    return BlockFields(k=k, e1=e1, e2=e2)


def bank_intensities(spec: EraserBankSpec, zeta, input_intensity: float = 1.0):
    """Closed-form (i1, i2) traces for every block.

    Returns a list of K pairs of arrays; the physical per-block normalization
    is I0/(4K) so that summing both detectors of a block gives I0/(2K)
    (half the block's light is absorbed by the 45-degree polarizers).
    """
    norm = input_intensity / (4.0 * spec.block_count)
    return [block_intensities(zeta, k, xi, norm)
            for k, xi in enumerate(spec.phase_schedule)]


def bank_fields(spec: EraserBankSpec, e_a: np.ndarray,
                pol_angle: float = np.pi / 4.0) -> list[BlockFields]:
    """Element-by-element fields for every block, in the spec's mode."""
    if spec.mode == "slm_pixels":
        return [slm_pixel_fields(e_a, k, xi, spec.block_count, pol_angle)
                for k, xi in enumerate(spec.phase_schedule)]
    return [block_fields(e_a, k, xi, pol_angle, split_count=spec.block_count)
            for k, xi in enumerate(spec.phase_schedule)]


def block_detector_intensities(fields: BlockFields):
    """(|e1|^2, |e2|^2) for a propagated block."""
    return intensity(fields.e1), intensity(fields.e2)
