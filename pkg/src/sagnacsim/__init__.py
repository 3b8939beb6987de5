"""Deterministic simulator for ring-interferometer fringe superresolution
with phase-controlled polarization erasers."""

__version__ = "0.1.0"

from .correlator import (CorrelationResult, DetectionModel, FringeTrace,
                         count_fringes, detect, nth_order, pbw_closed_form,
                         phase_sensitivity, product_trace, second_order,
                         visibility)
from .eraser import (BlockFields, EraserBankSpec, bank_fields, bank_intensities,
                     block_fields, block_intensities, phase_schedule,
                     slm_pixel_fields)
from .jones import (QwpRotation, apply, bs_split, hwp_matrix, intensity, jones,
                    pbs_route, polarizer_matrix, qwp_phase_for_rotation,
                    retarder_matrix)
from .sagnac import (NoiseSpec, SagnacConfig, TopologyError, mzi_output,
                     sagnac_output, sagnac_phase)

__all__ = [
    "__version__",
    "CorrelationResult", "DetectionModel", "FringeTrace", "count_fringes",
    "detect", "nth_order", "pbw_closed_form", "phase_sensitivity",
    "product_trace", "second_order", "visibility",
    "BlockFields", "EraserBankSpec", "bank_fields", "bank_intensities",
    "block_fields", "block_intensities", "phase_schedule", "slm_pixel_fields",
    "QwpRotation", "apply", "bs_split", "hwp_matrix", "intensity", "jones",
    "pbs_route", "polarizer_matrix", "qwp_phase_for_rotation", "retarder_matrix",
    "NoiseSpec", "SagnacConfig", "TopologyError", "mzi_output", "sagnac_output",
    "sagnac_phase",
]
