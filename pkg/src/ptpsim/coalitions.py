"""Multi-signal coalition analysis: cumulative and exclusive magnitude budgets.

A coalition is a nonempty subset S of the m signals, identified here by a
frozenset of 1-based member positions (bitmasks internally).  The cumulative
intersection N(S) is the mass simultaneously present in every member of S,
atom by atom; Moebius inversion on the subset lattice turns the cumulative
table into exclusive budgets N~(S) -- mass shared by exactly S and no
superset -- which close additively: each signal's L1 norm equals the sum of
the exclusive budgets of the coalitions containing it.

Full enumeration costs O(2^m n K), so it is capped (default m <= 20) behind
an explicit override.  The scalable alternative for large ensembles is
``coherence``, a single O(m n K) pass computing the grand-coalition
similarity plus a per-coordinate incoherence profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import MassEmbedding, Signal, multistate
from .errors import (
    CoalitionCapError,
    CoalitionTableError,
    EmbeddingMismatchError,
    InvariantViolationError,
    SignalError,
)
from .partitions import CoarseningMap, StatePartition

Coalition = frozenset[int]

DEFAULT_COALITION_CAP = 20

# Relative closure tolerance per signal (budget identity).
CLOSURE_TOLERANCE = 1e-9

# Exclusive nonnegativity slack, relative to the largest cumulative value.
NONNEGATIVITY_TOLERANCE = 1e-9

# Exclusive budgets below this are shown as 0 in human-readable output; the
# machine-readable reports always keep the exact values.
DISPLAY_FLOOR = 1e-12

# Per-coalition superset enumeration is O(3^m) overall; beyond this size the
# inversion switches to the O(m 2^m) vectorized lattice transform.
_DIRECT_INVERSION_LIMIT = 12


def coalition_key(members: Iterable[int]) -> str:
    """Serialization key: sorted 1-based members joined by commas, e.g. "1,3"."""
    return ",".join(str(j) for j in sorted(members))


def _mask_of(members: Iterable[int], m: int) -> int:
    mask = 0
    for j in members:
        if not (1 <= j <= m):
            raise CoalitionTableError(f"member {j} outside 1..{m}")
        mask |= 1 << (j - 1)
    if mask == 0:
        raise CoalitionTableError("coalitions must be nonempty")
    return mask


def _members_of(mask: int) -> Coalition:
    members = []
    j = 1
    while mask:
        if mask & 1:
            members.append(j)
        mask >>= 1
        j += 1
    return frozenset(members)


def _check_embeddings(embeddings: Sequence[MassEmbedding]) -> None:
    if not embeddings:
        raise SignalError("at least one embedding is required")
    first = embeddings[0]
    for e in embeddings[1:]:
        first.require_compatible(e)


def _shared_atoms(embeddings: Sequence[MassEmbedding], members: Sequence[int]) -> list[tuple[int, int]]:
    """Atoms occupied by every member, intersecting smallest occupancy first."""
    keysets = sorted((embeddings[j - 1].mass.keys() for j in members), key=len)
    shared = set(keysets[0])
    for keys in keysets[1:]:
        if not shared:
            break
        shared &= keys
    return sorted(shared)


def _coalition_value(embeddings: Sequence[MassEmbedding], members: Sequence[int]) -> float:
    terms = []
    for atom in _shared_atoms(embeddings, members):
        terms.append(min(embeddings[j - 1].mass[atom] for j in members))
    return math.fsum(terms)


def _requested_masks(
    m: int,
    up_to_order: int | None,
    coalitions: Iterable[Iterable[int]] | None,
    cap: int,
    force: bool,
) -> list[int]:
    if coalitions is not None and up_to_order is not None:
        raise CoalitionTableError("pass either up_to_order or an explicit coalition list, not both")
    if coalitions is not None:
        return [_mask_of(c, m) for c in coalitions]
    if up_to_order is not None:
        if up_to_order < 1:
            raise CoalitionTableError("up_to_order must be >= 1")
        masks = []
        for order in range(1, min(up_to_order, m) + 1):
            for combo in combinations(range(1, m + 1), order):
                masks.append(_mask_of(combo, m))
        return masks
    # full enumeration
    if m < 2:
        raise SignalError("full coalition enumeration needs at least 2 signals")
    if m > cap and not force:
        raise CoalitionCapError(
            f"m={m} exceeds the cap of {cap} (cost grows as 2^m); pass force=True to override"
        )
    return list(range(1, 1 << m))


def cumulative_intersections(
    embeddings: Sequence[MassEmbedding],
    *,
    up_to_order: int | None = None,
    coalitions: Iterable[Iterable[int]] | None = None,
    cap: int = DEFAULT_COALITION_CAP,
    force: bool = False,
) -> dict[Coalition, float]:
    """Cumulative intersections N(S) for the requested coalitions.

    By default every nonempty subset of the m embeddings is computed (capped;
    see module docstring).  ``up_to_order`` restricts to |S| <= r, which is
    the tractable regime for large m but cannot be Moebius-inverted (the
    inversion needs every superset).  ``coalitions`` computes an explicit
    list.  Only atoms occupied by all members can contribute, so each value
    is a sparse intersection of the members' occupied-atom sets.
    """
    _check_embeddings(embeddings)
    m = len(embeddings)
    masks = _requested_masks(m, up_to_order, coalitions, cap, force)
    out: dict[Coalition, float] = {}
    for mask in masks:
        members = sorted(_members_of(mask))
        out[frozenset(members)] = _coalition_value(embeddings, members)
    return out


def mobius_invert(cumulative: Mapping[Coalition, float], m: int) -> dict[Coalition, float]:
    """Exclusive budgets N~(S) = sum over supersets T of S of (-1)^|T - S| N(T).

    Requires the cumulative value of every nonempty subset of [m].  Small
    problems enumerate supersets per coalition with exactly rounded signed
    sums; larger ones use the vectorized subset-lattice transform.
    """
    full = (1 << m) - 1
    table = np.zeros(1 << m)
    for members, value in cumulative.items():
        table[_mask_of(members, m)] = value
    if len(cumulative) != full:
        missing = [
            coalition_key(_members_of(mask))
            for mask in range(1, full + 1)
            if _members_of(mask) not in cumulative
        ]
        raise CoalitionTableError(
            f"cumulative table incomplete: missing {len(missing)} coalitions "
            f"(first: {missing[0] if missing else '?'})"
        )

    exclusive: dict[Coalition, float] = {}
    if m <= _DIRECT_INVERSION_LIMIT:
        for mask in range(1, full + 1):
            complement = full ^ mask
            terms = []
            rest = complement
            while True:
                sign = -1.0 if (rest.bit_count() & 1) else 1.0
                terms.append(sign * table[mask | rest])
                if rest == 0:
                    break
                rest = (rest - 1) & complement
            exclusive[_members_of(mask)] = math.fsum(terms)
    else:
        work = table.copy()
        indices = np.arange(1 << m)
        for b in range(m):
            clear = indices[(indices >> b) & 1 == 0]
            work[clear] -= work[clear | (1 << b)]
        for mask in range(1, full + 1):
            exclusive[_members_of(mask)] = float(work[mask])
    return exclusive


def aggregate_post_intersection(
    embeddings: Sequence[MassEmbedding],
    coarse: CoarseningMap,
    *,
    up_to_order: int | None = None,
    coalitions: Iterable[Iterable[int]] | None = None,
    cap: int = DEFAULT_COALITION_CAP,
    force: bool = False,
) -> dict[tuple[Coalition, str], float]:
    """Per-group cumulative intersections, aggregated after the min operation.

    For each requested coalition the per-atom coalition-wide minima are
    computed first, then summed within each coarse state group, so the group
    totals add up to the ungrouped N(S).  Aggregating the other way round
    (summing states before taking minima) overestimates shared magnitude and
    is deliberately not offered.
    """
    _check_embeddings(embeddings)
    if coarse.fine_count != embeddings[0].K:
        raise EmbeddingMismatchError(
            f"coarsening map covers {coarse.fine_count} states, embeddings have {embeddings[0].K}"
        )
    m = len(embeddings)
    masks = _requested_masks(m, up_to_order, coalitions, cap, force)
    out: dict[tuple[Coalition, str], float] = {}
    for mask in masks:
        members = sorted(_members_of(mask))
        per_group: list[list[float]] = [[] for _ in coarse.group_names]
        for (i, k) in _shared_atoms(embeddings, members):
            value = min(embeddings[j - 1].mass[(i, k)] for j in members)
            per_group[coarse.group_of(k)].append(value)
        coalition = frozenset(members)
        for g, name in enumerate(coarse.group_names):
            out[(coalition, name)] = math.fsum(per_group[g])
    return out


@dataclass(frozen=True)
class GroupBudget:
    """Cumulative and exclusive budgets restricted to one coarse state group."""

    cumulative: dict[Coalition, float]
    exclusive: dict[Coalition, float]


@dataclass(frozen=True)
class CoalitionReport:
    """Complete magnitude budget for a batch of signals.

    ``closure_residuals[j]`` is the signal's L1 norm minus the sum of the
    exclusive budgets of the coalitions containing signal j+1; construction
    fails if any residual exceeds the closure tolerance.
    """

    m: int
    ids: tuple[str | None, ...]
    partition_id: str
    norms: tuple[float, ...]
    cumulative: dict[Coalition, float]
    exclusive: dict[Coalition, float]
    closure_residuals: tuple[float, ...]
    groups: dict[str, GroupBudget] | None = None

    def displayed_exclusive(self, members: Coalition) -> float:
        """Exclusive value with sub-1e-12 noise shown as an exact zero."""
        value = self.exclusive[members]
        return 0.0 if abs(value) < DISPLAY_FLOOR else value

    def to_json_dict(self) -> dict:
        coalitions = {}
        for members in sorted(self.cumulative, key=lambda s: (len(s), sorted(s))):
            coalitions[coalition_key(members)] = {
                "order": len(members),
                "cumulative": self.cumulative[members],
                "exclusive": self.exclusive[members],
            }
        out: dict = {
            "m": self.m,
            "ids": list(self.ids),
            "partition_id": self.partition_id,
            "norms": list(self.norms),
            "coalitions": coalitions,
            "closure_residuals": list(self.closure_residuals),
        }
        if self.groups is not None:
            out["groups"] = {
                name: {
                    coalition_key(members): {
                        "cumulative": budget.cumulative[members],
                        "exclusive": budget.exclusive[members],
                    }
                    for members in sorted(budget.cumulative, key=lambda s: (len(s), sorted(s)))
                }
                for name, budget in self.groups.items()
            }
        return out

    def to_csv_rows(self) -> list[list]:
        rows: list[list] = [["coalition", "order", "cumulative", "exclusive"]]
        for members in sorted(self.cumulative, key=lambda s: (len(s), sorted(s))):
            rows.append(
                [
                    coalition_key(members),
                    len(members),
                    self.cumulative[members],
                    self.exclusive[members],
                ]
            )
        return rows


def budget_report(
    signals: Sequence[Signal],
    partition: StatePartition,
    *,
    groups: CoarseningMap | None = None,
    cap: int = DEFAULT_COALITION_CAP,
    force: bool = False,
) -> CoalitionReport:
    """Full coalition budget: cumulative, exclusive, and closure verification.

    Optionally also produces per-group budgets for a coarse state grouping
    (post-intersection aggregation followed by its own Moebius inversion).
    """
    if not signals:
        raise SignalError("at least one signal is required")
    n = len(signals[0])
    for s in signals[1:]:
        if len(s) != n:
            raise SignalError(f"length mismatch: {len(s)} vs {n}")
    m = len(signals)
    if m > cap and not force:
        raise CoalitionCapError(
            f"m={m} exceeds the cap of {cap} (cost grows as 2^m); pass force=True to override"
        )
    embeddings = [multistate(s, partition) for s in signals]
    if m == 1:
        cumulative = cumulative_intersections(embeddings, coalitions=[{1}])
    else:
        cumulative = cumulative_intersections(embeddings, cap=cap, force=force)
    exclusive = mobius_invert(cumulative, m)

    norms = tuple(cumulative[frozenset({j})] for j in range(1, m + 1))
    residuals = []
    for j in range(1, m + 1):
        allotted = math.fsum(
            exclusive[members]
            for members in sorted(exclusive, key=lambda s: (len(s), sorted(s)))
            if j in members
        )
        residual = norms[j - 1] - allotted
        residuals.append(residual)
        if abs(residual) > CLOSURE_TOLERANCE * norms[j - 1]:
            raise InvariantViolationError(
                f"budget closure failed for signal {j}: residual {residual!r} "
                f"against norm {norms[j - 1]!r}"
            )
    peak_cumulative = max(cumulative.values(), default=0.0)
    floor = -NONNEGATIVITY_TOLERANCE * max(1.0, peak_cumulative)
    for members, value in exclusive.items():
        if value < floor:
            raise InvariantViolationError(
                f"exclusive budget for {{{coalition_key(members)}}} is {value!r}, "
                f"below the nonnegativity slack {floor!r}"
            )

    group_budgets: dict[str, GroupBudget] | None = None
    if groups is not None:
        grouped = aggregate_post_intersection(embeddings, groups, cap=cap, force=force)
        group_budgets = {}
        for g, name in enumerate(groups.group_names):
            cum_g = {
                members: grouped[(members, name)]
                for members in cumulative
            }
            group_budgets[name] = GroupBudget(cum_g, mobius_invert(cum_g, m))

    return CoalitionReport(
        m=m,
        ids=tuple(s.id for s in signals),
        partition_id=partition.partition_id,
        norms=norms,
        cumulative=cumulative,
        exclusive=exclusive,
        closure_residuals=tuple(residuals),
        groups=group_budgets,
    )


@dataclass(frozen=True)
class CoherenceProfile:
    """Grand-coalition agreement plus a per-coordinate incoherence profile.

    ``per_index_incoherence[i]`` sums, over that coordinate's states, the gap
    between the ensemble maximum and minimum mass; coordinates are ranked by
    it in ``ranked_indices`` (descending, ties by index).
    """

    grand_similarity: float
    grand_distance: float
    per_index_incoherence: tuple[float, ...]
    ranked_indices: tuple[int, ...]

    def top_k(self, k: int) -> tuple[int, ...]:
        return self.ranked_indices[: max(k, 0)]


def coherence(embeddings: Sequence[MassEmbedding]) -> CoherenceProfile:
    """Single-pass O(m n K) grand-coalition diagnostic.

    The grand similarity is the fraction of the ensemble's total dynamic
    range (per-atom maxima) on which all m embeddings unanimously agree
    (per-atom minima); no coalition enumeration is involved.
    """
    _check_embeddings(embeddings)
    m = len(embeddings)
    if m < 2:
        raise SignalError("coherence needs at least 2 embeddings")
    n = embeddings[0].n

    # atom -> (occupancy count, min over present, max over present)
    stats: dict[tuple[int, int], tuple[int, float, float]] = {}
    for e in embeddings:
        for atom, value in e.mass.items():
            if atom in stats:
                count, lo, hi = stats[atom]
                stats[atom] = (count + 1, min(lo, value), max(hi, value))
            else:
                stats[atom] = (1, value, value)

    min_terms: list[float] = []
    max_terms: list[float] = []
    spread_terms: list[list[float]] = [[] for _ in range(n)]
    for atom in sorted(stats):
        count, lo, hi = stats[atom]
        shared = lo if count == m else 0.0
        min_terms.append(shared)
        max_terms.append(hi)
        spread_terms[atom[0]].append(hi - shared)

    union = math.fsum(max_terms)
    shared_total = math.fsum(min_terms)
    similarity = shared_total / union if union > 0.0 else 1.0
    incoherence = tuple(math.fsum(terms) for terms in spread_terms)
    ranking = tuple(sorted(range(n), key=lambda i: (-incoherence[i], i)))
    return CoherenceProfile(similarity, 1.0 - similarity, incoherence, ranking)
