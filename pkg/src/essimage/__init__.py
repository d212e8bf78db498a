"""Exact essential images and ergodic properties of finite null-preserving maps."""
from .measure_core import (
    EssImageError,
    MeasurableMap,
    MSet,
    PropertyCheckFailure,
    Space,
    ae_relation,
    measure,
    preimage,
    validate,
    validate_map,
)
from .images import essential_image, set_image_report, transfer_density, verify_image_axioms
from .dynamics import DynSystem, classify, hull, image_size_modulus, nonsingular_part
from .tail import exactness_report, is_tail_set, remain_separated, tail_algebra, tail_hull

__version__ = "0.1.0"

__all__ = [
    "EssImageError", "MeasurableMap", "MSet", "PropertyCheckFailure", "Space",
    "ae_relation", "measure", "preimage", "validate", "validate_map",
    "essential_image", "set_image_report", "transfer_density", "verify_image_axioms",
    "DynSystem", "classify", "hull", "image_size_modulus", "nonsingular_part",
    "exactness_report", "is_tail_set", "remain_separated", "tail_algebra", "tail_hull",
]
