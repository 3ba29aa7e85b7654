"""Sign-aware peak-to-peak similarity for real and complex signals.

Signals are embedded into nonnegative coordinate-state mass tensors (sign
split, multistate, complex Cartesian/polar); the min/max Tanimoto ratio on
those tensors yields a bounded metric and positive-semidefinite kernels;
Moebius inversion decomposes magnitude into exactly closing coalition
budgets; and the same tensors, read as measures, tie the distance to total
variation.
"""

from .coalitions import (
    CoalitionReport,
    CoherenceProfile,
    aggregate_post_intersection,
    budget_report,
    coalition_key,
    coherence,
    cumulative_intersections,
    mobius_invert,
)
from .embeddings import (
    ComplexSignal,
    MassEmbedding,
    Signal,
    complex_cartesian,
    complex_polar,
    multistate,
    principal_argument,
    sign_split,
)
from .errors import (
    CoalitionCapError,
    CoalitionTableError,
    EmbeddingMismatchError,
    InputFormatError,
    InvariantViolationError,
    PartitionError,
    PtpsimError,
    SignalError,
    UnreachableStateError,
    VacuumError,
)
from .io import SignalSet, load_signals
from .pairwise import (
    GramMatrix,
    PairwiseResult,
    d_complex,
    d_multi,
    d_peak,
    gram,
    gram_from_embeddings,
    radial_kernel,
    tanimoto,
)
from .partitions import (
    AngularPartition,
    CoarseningMap,
    IntervalState,
    StatePartition,
    banded_five_state,
    banded_three_state,
    financial_five_state,
    quadrant_partition,
    sign_of,
    sign_partition,
    uniform_sectors,
)
from .probabilistic import (
    AtomDistribution,
    AtomMeasure,
    TvConsistency,
    measure_of,
    measure_tanimoto,
    normalize,
    pushforward,
    total_variation,
    tv_consistency,
)

__version__ = "0.1.0"

__all__ = [
    "AngularPartition",
    "AtomDistribution",
    "AtomMeasure",
    "CoalitionCapError",
    "CoalitionReport",
    "CoalitionTableError",
    "CoarseningMap",
    "CoherenceProfile",
    "ComplexSignal",
    "EmbeddingMismatchError",
    "GramMatrix",
    "InputFormatError",
    "IntervalState",
    "InvariantViolationError",
    "MassEmbedding",
    "PairwiseResult",
    "PartitionError",
    "PtpsimError",
    "Signal",
    "SignalError",
    "SignalSet",
    "StatePartition",
    "TvConsistency",
    "UnreachableStateError",
    "VacuumError",
    "aggregate_post_intersection",
    "banded_five_state",
    "banded_three_state",
    "budget_report",
    "coalition_key",
    "coherence",
    "complex_cartesian",
    "complex_polar",
    "cumulative_intersections",
    "d_complex",
    "d_multi",
    "d_peak",
    "financial_five_state",
    "gram",
    "gram_from_embeddings",
    "load_signals",
    "measure_of",
    "measure_tanimoto",
    "mobius_invert",
    "multistate",
    "normalize",
    "principal_argument",
    "pushforward",
    "quadrant_partition",
    "radial_kernel",
    "sign_of",
    "sign_partition",
    "sign_split",
    "tanimoto",
    "total_variation",
    "tv_consistency",
    "uniform_sectors",
]
