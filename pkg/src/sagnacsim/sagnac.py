"""Sagnac interferometer output field, rotation phase, and an MZI noise baseline.

The Sagnac output carries both counterpropagating beams on one physical path,
so an environmental phase kick multiplies the whole Jones vector by a unit
phase and every downstream intensity is unchanged.  The MZI baseline exists
to show the contrast: differential arm noise lands on the V component only
and dephases the fringes.

Noise draws are counter-based (Philox keyed by the user seed, counter set to
the sample index), so a Monte-Carlo ensemble is bit-reproducible no matter
how the samples are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jones import jones

SPEED_OF_LIGHT = 299792458.0  # m/s, exact

NOISE_KINDS = ("none", "common_path", "differential_arm")

# Philox stream id: keeps noise draws off the detection streams.
_NOISE_STREAM = 1


class TopologyError(ValueError):
    """Raised for a noise kind the interferometer topology cannot represent."""


@dataclass(frozen=True)
class SagnacConfig:
    """Geometry and input-beam description of the ring interferometer."""

    wavelength: float = 632.8e-9      # m
    enclosed_area: float = 1.0        # m^2
    angular_velocity: float = 7.292e-5  # rad/s (Earth rate by default)
    input_intensity: float = 1.0      # I0 = |E0|^2, dimensionless units
    photon_rate: float = 1e15         # photons/s (1 mW HeNe scale)

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be > 0")
        if self.enclosed_area <= 0:
            raise ValueError("enclosed_area must be > 0")
        if self.photon_rate <= 0:
            raise ValueError("photon_rate must be > 0")
        if self.input_intensity < 0:
            raise ValueError("input_intensity must be >= 0")


@dataclass(frozen=True)
class NoiseSpec:
    """Random-phase noise: kind, std-dev in radians, and RNG seed."""

    kind: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def sagnac_phase(cfg: SagnacConfig) -> float:
    """Rotation-induced phase zeta = 8*pi*A*Omega / (lambda*c), single planar loop."""
    return (8.0 * np.pi * cfg.enclosed_area * cfg.angular_velocity
            / (cfg.wavelength * SPEED_OF_LIGHT))


def _phase_draw(noise: NoiseSpec, sample: int) -> float:
    """One Gaussian phase, keyed by (seed, stream) and counted by sample index."""
    bitgen = np.random.Philox(key=[noise.seed, _NOISE_STREAM],
                              counter=[sample, 0, 0, 0])
    return noise.sigma * np.random.Generator(bitgen).standard_normal()


def sagnac_output(zeta, noise: NoiseSpec = NoiseSpec(), sample: int = 0,
                  amplitude: float = 1.0) -> np.ndarray:
    """Output field (E0/sqrt2)*(H - V e^{i zeta}) of the ring interferometer.

    Common-path noise multiplies both components by the same sampled unit
    phase, so it cancels from every intensity.  Differential arm noise has
    no physical home in a shared-path ring and is rejected.
    """
    if noise.kind == "differential_arm":
        raise TopologyError(
            "differential_arm noise is unrepresentable in a shared-path "
            "Sagnac topology; use mzi_output for the dephasing baseline")
    zeta = np.asarray(zeta, dtype=float)
    e0 = amplitude / np.sqrt(2.0)
    out = jones(e0 * np.ones_like(zeta, dtype=complex), -e0 * np.exp(1j * zeta))
    if noise.kind == "common_path" and noise.sigma > 0:
        out = out * np.exp(1j * _phase_draw(noise, sample))
    return out


def mzi_output(zeta, noise: NoiseSpec = NoiseSpec(), sample: int = 0,
               amplitude: float = 1.0) -> np.ndarray:
    """Mach-Zehnder baseline: arm noise shifts the V phase, jittering the fringe."""
    zeta = np.asarray(zeta, dtype=float)
    delta = 0.0
    if noise.kind == "differential_arm" and noise.sigma > 0:
        delta = _phase_draw(noise, sample)
    e0 = amplitude / np.sqrt(2.0)
    out = jones(e0 * np.ones_like(zeta, dtype=complex),
                -e0 * np.exp(1j * (zeta + delta)))
    if noise.kind == "common_path" and noise.sigma > 0:
        out = out * np.exp(1j * _phase_draw(noise, sample))
    return out
