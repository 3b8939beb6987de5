"""Two-component Jones calculus and the optical-element conventions used here.

A Jones vector is a complex ndarray whose leading axis has length 2 (H then V
amplitude); trailing axes broadcast, so a whole phase sweep can be pushed
through an element pipeline in one call.  All angles are radians; degrees are
converted at the config boundary only.

Element conventions (fixed once, used consistently downstream):
  * half-wave plate at angle theta:  [[cos2t, sin2t], [sin2t, -cos2t]]
  * retarder(xi): diag(1, e^{i xi})  -- phase on the V component only
  * polarizer(theta): rank-1 projector onto p = (cos t, sin t)
  * 50/50 beam splitter: reflected arm gets the pi/2 phase (factor i) and the
    mirror-image H sign flip; transmitted arm is untouched.  Assigning the
    flip to the reflected arm is a convention: detector-relabeling symmetry
    makes the block intensities insensitive to which arm carries it.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

INV_SQRT2 = 1.0 / np.sqrt(2.0)


class QwpRotation(Enum):
    """Discrete quarter-wave-plate settings and the V-phase each induces."""

    ABSENT = "absent"
    FAST_AXIS_VERTICAL = "fast_axis_vertical"
    FAST_AXIS_HORIZONTAL = "fast_axis_horizontal"


def jones(h, v) -> np.ndarray:
    """Build a Jones vector (or a broadcast stack of them) from H and V amplitudes."""
    h = np.asarray(h, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return np.stack(np.broadcast_arrays(h, v), axis=0)


def intensity(j: np.ndarray):
    """|h|^2 + |v|^2, broadcasting over trailing axes."""
    return np.abs(j[0]) ** 2 + np.abs(j[1]) ** 2


def apply(m: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Matrix-vector product m @ j over the polarization axis."""
    return np.tensordot(np.asarray(m, dtype=complex), j, axes=(1, 0))


def hwp_matrix(theta: float) -> np.ndarray:
    """Half-wave plate rotated by theta; at 22.5 deg it maps H to (H+V)/sqrt(2)."""
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def retarder_matrix(xi: float) -> np.ndarray:
    """Programmable retarder: phase xi on the V component, H untouched."""
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * xi)]], dtype=complex)


def qwp_phase_for_rotation(rotation: QwpRotation) -> float:
    """V-component phase for the three discrete QWP settings: 0, pi/2 or pi."""
    return {
        QwpRotation.ABSENT: 0.0,
        QwpRotation.FAST_AXIS_VERTICAL: np.pi / 2.0,
        QwpRotation.FAST_AXIS_HORIZONTAL: np.pi,
    }[QwpRotation(rotation)]


def polarizer_matrix(theta: float) -> np.ndarray:
    """Rank-1 projector onto the axis p = (cos theta, sin theta)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c * c, c * s], [c * s, s * s]], dtype=complex)


def bs_split(j: np.ndarray):
    """Lossless 50/50 beam splitter.

    Returns (transmitted, reflected): transmitted = j/sqrt(2); the reflected
    arm carries the pi/2 reflection phase (i) and the mirror-image H flip,
    so |t|^2 + |r|^2 = |j|^2.
    """
    j = np.asarray(j, dtype=complex)
    t = INV_SQRT2 * j
    r = 1j * INV_SQRT2 * np.stack(np.broadcast_arrays(-j[0], j[1]), axis=0)
    return t, r


def pbs_route(j: np.ndarray):
    """Split by polarization basis: (h_port, v_port), lossless."""
    j = np.asarray(j, dtype=complex)
    zero = np.zeros_like(j[0])
    h_port = np.stack(np.broadcast_arrays(j[0], zero), axis=0)
    v_port = np.stack(np.broadcast_arrays(zero, j[1]), axis=0)
    return h_port, v_port
