# Copyright 2026 The polarmat Authors
# SPDX-License-Identifier: Apache-2.0
"""Material recovery from polarized one-light-at-a-time captures."""

from ._core import (
    PolarmatError,
    __version__,
    check_bundle,
    derive_anisotropy_roughness,
    malus_intensity,
    polarizer_mueller,
    read_pfm,
    remove_overexposure,
    run_pipeline,
    separate,
    spiral_directions,
    synthesize,
    ward_brdf,
    write_pfm,
)

__all__ = [
    "PolarmatError",
    "__version__",
    "check_bundle",
    "derive_anisotropy_roughness",
    "malus_intensity",
    "polarizer_mueller",
    "read_pfm",
    "remove_overexposure",
    "run_pipeline",
    "separate",
    "spiral_directions",
    "synthesize",
    "ward_brdf",
    "write_pfm",
]
