"""Measure-theoretic view of embeddings: magnitude measures, TV, coarsening.

An embedded signal is, read literally, a finite measure on the n x K grid of
coordinate-state atoms: the atom (i, k) carries the magnitude coordinate i
contributes while occupying state k, and the total measure is the signal's
L1 norm.  Normalizing by that norm yields a probability distribution over
atoms whenever the signal is nonzero.

On this grid the min/max similarity is an exact monotone transform of total
variation between the magnitude measures:

    J = (M_A + M_B - 2 TV) / (M_A + M_B + 2 TV),
    d = 2 delta / (1 + delta)   with   delta = TV / ((M_A + M_B) / 2),

so every similarity admits two independent computation routes, and merging
atoms (coarsening the state partition) can only shrink TV and therefore the
distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .embeddings import MassEmbedding, Signal, multistate
from .errors import EmbeddingMismatchError, InvariantViolationError, VacuumError
from .pairwise import PairwiseResult, minmax_sums, ratio_result
from .partitions import CoarseningMap, StatePartition

# The two computation routes sum the same atom terms in different algebraic
# arrangements; they must agree to well below any modelling tolerance.
TV_ROUTE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AtomMeasure:
    """Finite measure on the coordinate-state atoms, induced by one signal.

    Shares its mass mapping with the embedding it reinterprets; no copy is
    made and the mapping must not be mutated.
    """

    n: int
    K: int
    partition_id: str
    mass: Mapping[tuple[int, int], float]
    total_mass: float

    def require_compatible(self, other: "AtomMeasure") -> None:
        if (self.n, self.K, self.partition_id) != (other.n, other.K, other.partition_id):
            raise EmbeddingMismatchError(
                f"incompatible measures: ({self.n}x{self.K}, {self.partition_id}) vs "
                f"({other.n}x{other.K}, {other.partition_id})"
            )


@dataclass(frozen=True)
class AtomDistribution:
    """Probability distribution over atoms (masses summing to 1)."""

    n: int
    K: int
    partition_id: str
    mass: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        total = math.fsum(self.mass[a] for a in sorted(self.mass))
        if abs(total - 1.0) > 1e-12:
            raise InvariantViolationError(f"distribution sums to {total!r}, not 1")


def measure_of(embedding: MassEmbedding) -> AtomMeasure:
    """Reinterpret an embedding as the finite measure it already is."""
    return AtomMeasure(
        n=embedding.n,
        K=embedding.K,
        partition_id=embedding.partition_id,
        mass=embedding.mass,
        total_mass=embedding.total_mass,
    )


def normalize(measure: AtomMeasure) -> AtomDistribution:
    """Divide every atom mass by the total; undefined for the vacuum."""
    if measure.total_mass <= 0.0:
        raise VacuumError("cannot normalize a zero-mass measure")
    scaled = {atom: value / measure.total_mass for atom, value in measure.mass.items()}
    return AtomDistribution(measure.n, measure.K, measure.partition_id, scaled)


def total_variation(mu: AtomMeasure, nu: AtomMeasure) -> float:
    """Half the atomwise L1 difference; absent atoms count as zero mass."""
    mu.require_compatible(nu)
    terms = []
    for atom in sorted(mu.mass.keys() | nu.mass.keys()):
        terms.append(abs(mu.mass.get(atom, 0.0) - nu.mass.get(atom, 0.0)))
    return 0.5 * math.fsum(terms)


def measure_tanimoto(mu: AtomMeasure, nu: AtomMeasure) -> PairwiseResult:
    """Min/max similarity evaluated directly on two atom measures.

    Same figure as the embedding-level similarity; exposed on measures so
    coarsened (pushed-forward) measures can be compared too.
    """
    mu.require_compatible(nu)
    intersection, union = minmax_sums(mu.mass, nu.mass)
    return ratio_result(intersection, union)


@dataclass(frozen=True)
class TvConsistency:
    """Both computation routes for one signal pair, plus their residual."""

    m_a: float
    m_b: float
    tv: float
    delta: float
    j_direct: float
    j_via_tv: float
    d_direct: float
    d_via_tv: float
    residual: float


def tv_consistency(a: Signal, b: Signal, partition: StatePartition) -> TvConsistency:
    """Evaluate the similarity via min/max and via total variation, and compare.

    The vacuum pair (both signals zero) short-circuits to similarity 1 and
    TV 0 before the normalized discrepancy is formed.  For any other pair
    the two routes must agree within TV_ROUTE_TOLERANCE.
    """
    mu = measure_of(multistate(a, partition))
    nu = measure_of(multistate(b, partition))
    if mu.total_mass == 0.0 and nu.total_mass == 0.0:
        return TvConsistency(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0)

    direct = measure_tanimoto(mu, nu)
    tv = total_variation(mu, nu)
    m_a, m_b = mu.total_mass, nu.total_mass
    j_via_tv = (m_a + m_b - 2.0 * tv) / (m_a + m_b + 2.0 * tv)
    delta = tv / (0.5 * (m_a + m_b))
    d_via_tv = 2.0 * delta / (1.0 + delta)
    residual = direct.similarity - j_via_tv
    if abs(residual) > TV_ROUTE_TOLERANCE:
        raise InvariantViolationError(
            f"similarity routes disagree: direct {direct.similarity!r} vs "
            f"TV-based {j_via_tv!r}"
        )
    return TvConsistency(
        m_a=m_a,
        m_b=m_b,
        tv=tv,
        delta=delta,
        j_direct=direct.similarity,
        j_via_tv=j_via_tv,
        d_direct=direct.distance,
        d_via_tv=d_via_tv,
        residual=residual,
    )


def pushforward(measure: AtomMeasure, coarse: CoarseningMap) -> AtomMeasure:
    """Merge state atoms along a coarsening map; total mass is preserved.

    The coarse measure lives on the n x G grid of (coordinate, group) atoms
    and carries a derived partition tag, so it can only be compared against
    measures pushed through the same map.
    """
    if coarse.fine_count != measure.K:
        raise EmbeddingMismatchError(
            f"coarsening map covers {coarse.fine_count} states, measure has {measure.K}"
        )
    buckets: dict[tuple[int, int], list[float]] = {}
    for (i, k) in sorted(measure.mass):
        buckets.setdefault((i, coarse.group_of(k)), []).append(measure.mass[(i, k)])
    mass = {atom: math.fsum(values) for atom, values in buckets.items()}
    return AtomMeasure(
        n=measure.n,
        K=coarse.group_count,
        partition_id=f"{measure.partition_id}|{coarse.signature()}",
        mass=mass,
        total_mass=math.fsum(mass[a] for a in sorted(mass)),
    )
