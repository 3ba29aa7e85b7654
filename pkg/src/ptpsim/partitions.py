"""State partitions of the real line and of the angular domain.

A partition carves the real line into K disjoint interval states (or the
angular domain (-pi, pi] into K sectors).  Every finite value must belong to
exactly one state; boundary membership is controlled per interval through
explicit inclusion flags.  Partitions are validated once at construction and
are immutable afterwards, so they can be shared freely across workers.

Validation is probe-based rather than symbolic: because every state is an
interval, the membership pattern is piecewise constant between consecutive
endpoints, so probing every endpoint, every midpoint between adjacent
endpoints, scaled extremes beyond the outermost endpoints, and zero is
exhaustive.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import PartitionError, UnreachableStateError

NEG_INF = float("-inf")
POS_INF = float("inf")

_PI = math.pi


def sign_of(value: float) -> int:
    """Exact three-valued sign: +1 if value > 0, 0 if value == 0, -1 if value < 0.

    No tolerance band is applied; near-zero handling belongs in an explicit
    neutral state of a partition, not here.
    """
    if math.isnan(value):
        raise PartitionError("sign_of is undefined for NaN")
    if value > 0.0:
        return 1
    if value < 0.0:
        return -1
    return 0


def _parse_bound(raw: object, what: str) -> float:
    if isinstance(raw, str):
        if raw == "-inf":
            return NEG_INF
        if raw == "inf":
            return POS_INF
        raise PartitionError(f"{what}: unrecognized bound string {raw!r}")
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    raise PartitionError(f"{what}: bound must be a number or '-inf'/'inf', got {raw!r}")


def _emit_bound(value: float) -> float | str:
    if value == NEG_INF:
        return "-inf"
    if value == POS_INF:
        return "inf"
    return value


@dataclass(frozen=True)
class IntervalState:
    """One interval state B_k with explicit boundary-inclusion flags.

    Degenerate point states (lower == upper, both inclusive) are allowed and
    are how an exact-zero neutral state is expressed.
    """

    name: str
    lower: float
    upper: float
    lower_inclusive: bool
    upper_inclusive: bool

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise PartitionError(f"state {self.name!r}: NaN bound")
        if self.lower == self.upper:
            if not (self.lower_inclusive and self.upper_inclusive):
                raise PartitionError(
                    f"state {self.name!r}: point state requires both bounds inclusive"
                )
            if math.isinf(self.lower):
                raise PartitionError(f"state {self.name!r}: point state at infinity")
        elif self.lower > self.upper:
            raise PartitionError(
                f"state {self.name!r}: lower bound {self.lower} exceeds upper {self.upper}"
            )

    def contains(self, value: float) -> bool:
        """Membership predicate for a finite value."""
        if value < self.lower or value > self.upper:
            return False
        if value == self.lower and not self.lower_inclusive:
            return False
        if value == self.upper and not self.upper_inclusive:
            return False
        return True

    def to_config(self) -> dict:
        return {
            "name": self.name,
            "lower": _emit_bound(self.lower),
            "upper": _emit_bound(self.upper),
            "lower_inclusive": self.lower_inclusive,
            "upper_inclusive": self.upper_inclusive,
        }

    @classmethod
    def from_config(cls, raw: Mapping) -> "IntervalState":
        try:
            name = str(raw["name"])
            lower = _parse_bound(raw["lower"], name)
            upper = _parse_bound(raw["upper"], name)
            lower_inclusive = bool(raw.get("lower_inclusive", False))
            upper_inclusive = bool(raw.get("upper_inclusive", False))
        except KeyError as exc:
            raise PartitionError(f"state config missing key {exc}") from exc
        return cls(name, lower, upper, lower_inclusive, upper_inclusive)


def _probe_values(states: Sequence[IntervalState]) -> list[float]:
    """Endpoints, midpoints between adjacent endpoints, scaled extremes, and 0.

    Exhaustive for interval states: membership can only switch at an interval's
    own endpoint, and all endpoints are probed.
    """
    endpoints = sorted(
        {b for s in states for b in (s.lower, s.upper) if math.isfinite(b)}
    )
    probes: list[float] = list(endpoints)
    for a, b in zip(endpoints, endpoints[1:]):
        probes.append(a + (b - a) / 2.0)
    if endpoints:
        scale = max(1.0, *(abs(e) for e in endpoints))
        probes.append(endpoints[0] - scale)
        probes.append(endpoints[-1] + scale)
    else:
        probes.extend((-1.0, 1.0))
    probes.append(0.0)
    return probes


def _validate_cover(states: Sequence[IntervalState], probes: Iterable[float], domain: str) -> None:
    for value in probes:
        hits = [k for k, s in enumerate(states) if s.contains(value)]
        if len(hits) == 0:
            raise PartitionError(f"{domain} not covered: no state contains {value!r}")
        if len(hits) > 1:
            names = ", ".join(states[k].name for k in hits)
            raise PartitionError(f"states overlap at {value!r}: {names}")


def _content_id(prefix: str, payload: object) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return prefix + "-" + hashlib.sha256(canonical.encode()).hexdigest()[:10]


@dataclass(frozen=True)
class StatePartition:
    """An ordered list of K >= 2 disjoint interval states covering the real line.

    ``neutral_index`` optionally designates the baseline state B_0 used by
    coalition reports; it has no effect on classification.
    """

    states: tuple[IntervalState, ...]
    neutral_index: int | None = None
    partition_id: str = field(init=False)

    def __post_init__(self) -> None:
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise PartitionError(f"need at least 2 states, got {len(states)}")
        if self.neutral_index is not None and not (0 <= self.neutral_index < len(states)):
            raise PartitionError(f"neutral index {self.neutral_index} out of range")
        names = [s.name for s in states]
        if len(set(names)) != len(names):
            raise PartitionError("state names must be unique")
        _validate_cover(states, _probe_values(states), "the real line")
        object.__setattr__(
            self,
            "partition_id",
            _content_id("sp", [s.to_config() for s in states]),
        )

    @property
    def K(self) -> int:
        return len(self.states)

    def classify(self, value: float) -> int:
        """Index of the unique state containing ``value``."""
        if not math.isfinite(value):
            raise PartitionError(f"cannot classify non-finite value {value!r}")
        hits = [k for k, s in enumerate(self.states) if s.contains(value)]
        if len(hits) != 1:
            raise UnreachableStateError(
                f"value {value!r} matched {len(hits)} states; partition is malformed"
            )
        return hits[0]

    def coarsen(self, groups: Mapping[str, Iterable[int]] | Sequence[Iterable[int]]) -> "CoarseningMap":
        """Build a reusable fine-state -> group map.

        ``groups`` either maps group names to fine-state index sets or is a
        plain sequence of index sets (groups are then numbered).  The sets
        must be disjoint and cover all K fine indices.
        """
        return CoarseningMap.build(self.K, groups)

    def to_config(self) -> dict:
        cfg: dict = {"states": [s.to_config() for s in self.states]}
        if self.neutral_index is not None:
            cfg["neutral"] = self.neutral_index
        return cfg

    @classmethod
    def from_config(cls, raw: Mapping) -> "StatePartition":
        if "states" not in raw:
            raise PartitionError("partition config missing 'states'")
        states = tuple(IntervalState.from_config(s) for s in raw["states"])
        neutral = raw.get("neutral")
        if neutral is not None:
            neutral = int(neutral)
        return cls(states, neutral)


@dataclass(frozen=True)
class AngularPartition:
    """K >= 1 disjoint sectors covering the principal-argument domain (-pi, pi].

    The point -pi never occurs: principal arguments are canonicalized so the
    negative real axis maps to +pi.
    """

    sectors: tuple[IntervalState, ...]
    partition_id: str = field(init=False)

    def __post_init__(self) -> None:
        sectors = tuple(self.sectors)
        object.__setattr__(self, "sectors", sectors)
        if len(sectors) < 1:
            raise PartitionError("need at least 1 sector")
        names = [s.name for s in sectors]
        if len(set(names)) != len(names):
            raise PartitionError("sector names must be unique")
        for s in sectors:
            if s.lower < -_PI or s.upper > _PI:
                raise PartitionError(f"sector {s.name!r} leaves the domain (-pi, pi]")
        # probes restricted to (-pi, pi]; -pi is outside the domain
        endpoints = sorted({b for s in sectors for b in (s.lower, s.upper)} | {-_PI, _PI})
        probes = [e for e in endpoints if -_PI < e <= _PI]
        for a, b in zip(endpoints, endpoints[1:]):
            mid = a + (b - a) / 2.0
            if -_PI < mid <= _PI:
                probes.append(mid)
        _validate_cover(sectors, probes, "the angular domain (-pi, pi]")
        object.__setattr__(
            self,
            "partition_id",
            _content_id("ap", [s.to_config() for s in sectors]),
        )

    @property
    def K(self) -> int:
        return len(self.sectors)

    def classify(self, angle: float) -> int:
        """Index of the unique sector containing a principal argument."""
        if not (-_PI < angle <= _PI):
            raise PartitionError(f"angle {angle!r} is not a principal argument in (-pi, pi]")
        hits = [k for k, s in enumerate(self.sectors) if s.contains(angle)]
        if len(hits) != 1:
            raise UnreachableStateError(
                f"angle {angle!r} matched {len(hits)} sectors; partition is malformed"
            )
        return hits[0]

    def to_config(self) -> dict:
        return {"sectors": [s.to_config() for s in self.sectors]}

    @classmethod
    def from_config(cls, raw: Mapping) -> "AngularPartition":
        if "sectors" not in raw:
            raise PartitionError("angular partition config missing 'sectors'")
        return cls(tuple(IntervalState.from_config(s) for s in raw["sectors"]))


@dataclass(frozen=True)
class CoarseningMap:
    """Assignment of each fine state index to one coarse group.

    Built through :meth:`StatePartition.coarsen` or :meth:`build`; the groups
    must be disjoint and cover ``{0, ..., fine_count - 1}``.
    """

    fine_count: int
    group_names: tuple[str, ...]
    assignment: tuple[int, ...]  # fine state index -> group index

    @classmethod
    def build(
        cls,
        fine_count: int,
        groups: Mapping[str, Iterable[int]] | Sequence[Iterable[int]],
    ) -> "CoarseningMap":
        if isinstance(groups, Mapping):
            named = [(str(name), tuple(idx)) for name, idx in groups.items()]
        else:
            named = [(f"group{g}", tuple(idx)) for g, idx in enumerate(groups)]
        if not named:
            raise PartitionError("at least one group is required")
        assignment: list[int | None] = [None] * fine_count
        for g, (name, indices) in enumerate(named):
            for k in indices:
                if not (0 <= k < fine_count):
                    raise PartitionError(f"group {name!r}: state index {k} out of range")
                if assignment[k] is not None:
                    raise PartitionError(f"state index {k} assigned to more than one group")
                assignment[k] = g
        missing = [k for k, g in enumerate(assignment) if g is None]
        if missing:
            raise PartitionError(f"groups do not cover state indices {missing}")
        return cls(fine_count, tuple(name for name, _ in named), tuple(assignment))  # type: ignore[arg-type]

    @property
    def group_count(self) -> int:
        return len(self.group_names)

    def group_of(self, fine_index: int) -> int:
        return self.assignment[fine_index]

    def members(self, group_index: int) -> tuple[int, ...]:
        return tuple(k for k, g in enumerate(self.assignment) if g == group_index)

    def signature(self) -> str:
        return _content_id("cg", {"names": self.group_names, "assign": self.assignment})

    def merged_partition(self, fine: StatePartition) -> StatePartition:
        """The coarse partition obtained by merging each group's intervals.

        Only defined when every group is a contiguous run of the real line;
        otherwise the merged state is not an interval and a PartitionError is
        raised.  Used to check that classifying against the merged partition
        agrees with classify-then-map.
        """
        if fine.K != self.fine_count:
            raise PartitionError("coarsening map was built for a different state count")
        merged: list[IntervalState] = []
        for g, name in enumerate(self.group_names):
            parts = sorted(
                (fine.states[k] for k in self.members(g)),
                key=lambda s: (s.lower, s.upper),
            )
            for left, right in zip(parts, parts[1:]):
                touching = left.upper == right.lower and (
                    left.upper_inclusive != right.lower_inclusive
                )
                if not touching:
                    raise PartitionError(
                        f"group {name!r} is not a contiguous union of intervals"
                    )
            merged.append(
                IntervalState(
                    name,
                    parts[0].lower,
                    parts[-1].upper,
                    parts[0].lower_inclusive,
                    parts[-1].upper_inclusive,
                )
            )
        neutral = None
        if fine.neutral_index is not None:
            neutral = self.group_of(fine.neutral_index)
        return StatePartition(tuple(merged), neutral)


# ---------------------------------------------------------------------------
# Built-in presets
# ---------------------------------------------------------------------------


def sign_partition() -> StatePartition:
    """The minimal two-state split: (0, inf) and (-inf, 0].

    Zero is assigned to the nonpositive state; it carries no mass either way,
    so the induced embedding matches the positive/negative channel split.
    """
    return StatePartition(
        (
            IntervalState("positive", 0.0, POS_INF, False, False),
            IntervalState("nonpositive", NEG_INF, 0.0, False, True),
        )
    )


def financial_five_state(tau: float = 2.0) -> StatePartition:
    """Five regimes with an exact-zero neutral state and threshold ``tau``.

    Order: neutral {0}, large gain (tau, inf), small gain (0, tau],
    small loss [-tau, 0), large loss (-inf, -tau).
    """
    if not (tau > 0):
        raise PartitionError("tau must be positive")
    return StatePartition(
        (
            IntervalState("neutral", 0.0, 0.0, True, True),
            IntervalState("large_gain", tau, POS_INF, False, False),
            IntervalState("small_gain", 0.0, tau, False, True),
            IntervalState("small_loss", -tau, 0.0, True, False),
            IntervalState("large_loss", NEG_INF, -tau, False, False),
        ),
        neutral_index=0,
    )


def banded_five_state(eta: float = 0.1, tau: float = 2.0) -> StatePartition:
    """Five regimes with a closed neutral band [-eta, eta].

    Order: neutral [-eta, eta], large loss (-inf, -tau], small loss
    (-tau, -eta), small gain (eta, tau], large gain (tau, inf).
    """
    if not (0 < eta < tau):
        raise PartitionError("need 0 < eta < tau")
    return StatePartition(
        (
            IntervalState("neutral", -eta, eta, True, True),
            IntervalState("large_loss", NEG_INF, -tau, False, True),
            IntervalState("small_loss", -tau, -eta, False, False),
            IntervalState("small_gain", eta, tau, False, True),
            IntervalState("large_gain", tau, POS_INF, False, False),
        ),
        neutral_index=0,
    )


def banded_three_state(eta: float = 0.1) -> StatePartition:
    """Neutral band [-eta, eta] plus positive and negative states."""
    if not (eta > 0):
        raise PartitionError("eta must be positive")
    return StatePartition(
        (
            IntervalState("neutral", -eta, eta, True, True),
            IntervalState("positive", eta, POS_INF, False, False),
            IntervalState("negative", NEG_INF, -eta, False, False),
        ),
        neutral_index=0,
    )


def quadrant_partition() -> AngularPartition:
    """Four left-open/right-closed quadrant sectors of (-pi, pi]."""
    half = _PI / 2.0
    return AngularPartition(
        (
            IntervalState("q1", 0.0, half, False, True),
            IntervalState("q2", half, _PI, False, True),
            IntervalState("q3", -_PI, -half, False, True),
            IntervalState("q4", -half, 0.0, False, True),
        )
    )


def uniform_sectors(count: int) -> AngularPartition:
    """``count`` equal left-open/right-closed sectors covering (-pi, pi]."""
    if count < 1:
        raise PartitionError("sector count must be >= 1")
    width = 2.0 * _PI / count
    sectors = []
    for j in range(count):
        lo = -_PI + j * width
        hi = _PI if j == count - 1 else -_PI + (j + 1) * width
        sectors.append(IntervalState(f"sector{j}", lo, hi, False, True))
    return AngularPartition(tuple(sectors))
