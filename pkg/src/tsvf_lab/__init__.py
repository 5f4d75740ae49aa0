"""Simulation of pre- and post-selected quantum systems.

ABL probabilities, elements of reality and weak values
(:mod:`tsvf_lab.tsvf`), von Neumann pointer measurements
(:mod:`tsvf_lab.pointer`), counterfactual queries over measurement-record
worlds (:mod:`tsvf_lab.worlds`) and the worked scenarios
(:mod:`tsvf_lab.scenarios`).
"""
from .errors import (
    GridTooNarrow,
    InterveningRecord,
    NoBracketingCompleteMeasurements,
    NoPostSelectedShots,
    OrthogonalSelections,
    TSVFError,
    ValidationFailed,
    VanishingPostSelection,
    WorldFileError,
)
from .pointer import GridSpec, PointerConfig, PointerDensity, coupling_sweep, distribution_center, pointer_distribution
from .qcore import (
    SX,
    SY,
    SZ,
    S_XI,
    HermitianOperator,
    Projector,
    SpectralDecomposition,
    StateVector,
    embed,
    inner,
    spectral,
    tensor,
)
from .tsvf import (
    OutcomeDistribution,
    TwoStateVector,
    abl,
    element_of_reality,
    sequential_oracle,
    weak_value,
    weak_value_local,
)
from .worlds import MeasurementRecord, World, counterfactual, parse_world, serialize_world

__version__ = "0.1.0"
