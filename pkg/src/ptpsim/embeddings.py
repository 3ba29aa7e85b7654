"""Embeddings of real and complex signals into nonnegative mass tensors.

Every embedding maps a length-n signal to a sparse n x K tensor of
nonnegative masses over coordinate-state atoms:

* ``sign_split``       -- K=2 channels (positive part, negative part);
* ``multistate``       -- K user-defined interval states, each coordinate's
                          magnitude lands in the state containing its value;
* ``complex_cartesian``-- K=4 channels (re+, re-, im+, im-);
* ``complex_polar``    -- modulus in the angular sector of the principal
                          argument.

All four conserve L1 mass exactly: the embedded total equals the signal's L1
norm (for Cartesian embeddings, the sum of |re| + |im|; for polar, the sum of
moduli).  Masses are stored sparsely and zero masses are never stored, so the
sign-split and polar embeddings carry at most one entry per coordinate row.
Arithmetic is plain double precision with no rounding of masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .errors import EmbeddingMismatchError, SignalError
from .partitions import AngularPartition, StatePartition, sign_partition

KIND_SIGN_SPLIT = "sign_split"
KIND_MULTISTATE = "multistate"
KIND_CARTESIAN = "complex_cartesian"
KIND_POLAR = "complex_polar"

# Channel layout for the Cartesian embedding of one complex coordinate.
CARTESIAN_CHANNELS = ("re_pos", "re_neg", "im_pos", "im_neg")
CARTESIAN_PARTITION_ID = "cartesian-4ch"

# Kinds whose rows can hold at most one nonzero state.
_EXCLUSIVE_ROW_KINDS = frozenset({KIND_SIGN_SPLIT, KIND_MULTISTATE, KIND_POLAR})

_SIGN_PARTITION_ID = sign_partition().partition_id


def _check_finite(values, label: str) -> None:
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise SignalError(f"{label}: non-finite entry {v!r} at coordinate {i}")


@dataclass(frozen=True)
class Signal:
    """A finite real-valued vector; physical units are preserved throughout."""

    values: tuple[float, ...]
    id: str | None = None

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise SignalError(f"signal {self.id!r}: must have at least one coordinate")
        _check_finite(values, f"signal {self.id!r}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def l1_norm(self) -> float:
        return math.fsum(abs(v) for v in self.values)


@dataclass(frozen=True)
class ComplexSignal:
    """A finite complex-valued vector, stored as one complex per coordinate."""

    values: tuple[complex, ...]
    id: str | None = None

    def __post_init__(self) -> None:
        values = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise SignalError(f"signal {self.id!r}: must have at least one coordinate")
        _check_finite((z.real for z in values), f"signal {self.id!r} (real part)")
        _check_finite((z.imag for z in values), f"signal {self.id!r} (imag part)")

    def __len__(self) -> int:
        return len(self.values)


def principal_argument(z: complex) -> float:
    """Principal argument in (-pi, pi]; the negative real axis maps to +pi.

    ``atan2`` returns -pi for negative-real inputs with a negative-zero
    imaginary part; that endpoint is folded back to +pi so the argument always
    lies in the half-open domain the angular partitions cover.
    """
    phi = math.atan2(z.imag, z.real)
    if phi <= -math.pi:
        phi = math.pi
    return phi


@dataclass(frozen=True)
class MassEmbedding:
    """Sparse nonnegative n x K coordinate-state mass tensor.

    ``mass`` maps occupied atoms (i, k) to strictly positive masses; absent
    atoms carry zero.  ``partition_id`` records which partition produced the
    embedding, and all binary/coalition operations refuse to mix embeddings
    with different provenance.  Instances are immutable by convention: the
    mass mapping must never be mutated after construction.
    """

    n: int
    K: int
    kind: str
    partition_id: str
    mass: Mapping[tuple[int, int], float]
    total_mass: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.K < 1:
            raise EmbeddingMismatchError(f"invalid shape n={self.n}, K={self.K}")
        occupied_rows: dict[int, list[int]] = {}
        for (i, k), value in self.mass.items():
            if not (0 <= i < self.n and 0 <= k < self.K):
                raise EmbeddingMismatchError(f"atom ({i}, {k}) outside {self.n} x {self.K}")
            if not (value > 0.0) or not math.isfinite(value):
                raise EmbeddingMismatchError(
                    f"atom ({i}, {k}): stored mass must be finite and positive, got {value!r}"
                )
            occupied_rows.setdefault(i, []).append(k)
        if self.kind in _EXCLUSIVE_ROW_KINDS:
            for i, ks in occupied_rows.items():
                if len(ks) > 1:
                    raise EmbeddingMismatchError(
                        f"{self.kind} row {i} occupies several states {sorted(ks)}"
                    )
        elif self.kind == KIND_CARTESIAN:
            for i, ks in occupied_rows.items():
                if (0 in ks and 1 in ks) or (2 in ks and 3 in ks):
                    raise EmbeddingMismatchError(
                        f"cartesian row {i} occupies opposing channels {sorted(ks)}"
                    )
        object.__setattr__(
            self,
            "total_mass",
            math.fsum(self.mass[a] for a in sorted(self.mass)),
        )

    def atoms(self) -> Iterator[tuple[tuple[int, int], float]]:
        """Occupied atoms in deterministic (i, k) order."""
        for key in sorted(self.mass):
            yield key, self.mass[key]

    def dense(self) -> np.ndarray:
        """Materialize the full n x K array (zeros included)."""
        out = np.zeros((self.n, self.K))
        for (i, k), value in self.mass.items():
            out[i, k] = value
        return out

    def compatible_with(self, other: "MassEmbedding") -> bool:
        return (
            self.n == other.n
            and self.K == other.K
            and self.kind == other.kind
            and self.partition_id == other.partition_id
        )

    def require_compatible(self, other: "MassEmbedding") -> None:
        if not self.compatible_with(other):
            raise EmbeddingMismatchError(
                "incompatible embeddings: "
                f"({self.n}x{self.K}, {self.kind}, {self.partition_id}) vs "
                f"({other.n}x{other.K}, {other.kind}, {other.partition_id})"
            )

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "kind": self.kind,
            "partition_id": self.partition_id,
            "entries": [[i, k, v] for (i, k), v in self.atoms()],
        }

    @classmethod
    def from_json_dict(cls, raw: Mapping) -> "MassEmbedding":
        mass = {(int(i), int(k)): float(v) for i, k, v in raw["entries"]}
        return cls(int(raw["n"]), int(raw["K"]), str(raw["kind"]), str(raw["partition_id"]), mass)


def sign_split(signal: Signal) -> MassEmbedding:
    """Positive/negative channel split: row i holds (x_i^+, x_i^-).

    Exactly one channel is occupied per nonzero coordinate, none for zeros,
    and the total embedded mass equals the signal's L1 norm.
    """
    mass: dict[tuple[int, int], float] = {}
    for i, v in enumerate(signal.values):
        if v > 0.0:
            mass[(i, 0)] = v
        elif v < 0.0:
            mass[(i, 1)] = -v
    return MassEmbedding(len(signal), 2, KIND_SIGN_SPLIT, _SIGN_PARTITION_ID, mass)


def multistate(signal: Signal, partition: StatePartition) -> MassEmbedding:
    """Allocate each coordinate's magnitude |x_i| to the state containing x_i."""
    mass: dict[tuple[int, int], float] = {}
    for i, v in enumerate(signal.values):
        if v != 0.0:
            mass[(i, partition.classify(v))] = abs(v)
    return MassEmbedding(len(signal), partition.K, KIND_MULTISTATE, partition.partition_id, mass)


def complex_cartesian(signal: ComplexSignal) -> MassEmbedding:
    """Channels (re+, re-, im+, im-) per coordinate; total mass sum(|a_i| + |b_i|)."""
    mass: dict[tuple[int, int], float] = {}
    for i, z in enumerate(signal.values):
        if z.real > 0.0:
            mass[(i, 0)] = z.real
        elif z.real < 0.0:
            mass[(i, 1)] = -z.real
        if z.imag > 0.0:
            mass[(i, 2)] = z.imag
        elif z.imag < 0.0:
            mass[(i, 3)] = -z.imag
    return MassEmbedding(len(signal), 4, KIND_CARTESIAN, CARTESIAN_PARTITION_ID, mass)


def complex_polar(signal: ComplexSignal, sectors: AngularPartition) -> MassEmbedding:
    """Modulus r_i in the sector containing the principal argument of z_i.

    A zero coordinate has no argument and leaves its row empty.
    """
    mass: dict[tuple[int, int], float] = {}
    for i, z in enumerate(signal.values):
        if z != 0:
            mass[(i, sectors.classify(principal_argument(z)))] = abs(z)
    return MassEmbedding(len(signal), sectors.K, KIND_POLAR, sectors.partition_id, mass)
