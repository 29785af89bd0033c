from fpulyap.models.chain import (
    Boundary,
    ChainState,
    ModelFamily,
    ModelSpec,
    TangentState,
)
from fpulyap.models.presets import PRESET_NAMES, make_preset

__all__ = [
    "Boundary",
    "ChainState",
    "ModelFamily",
    "ModelSpec",
    "TangentState",
    "PRESET_NAMES",
    "make_preset",
]
