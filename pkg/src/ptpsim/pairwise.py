"""Pairwise sign-aware measures, the bounded Tanimoto metric, and PSD kernels.

The central quantity is the min/max (Tanimoto) ratio on embedded mass
tensors: the intersection sums per-atom minima, the union sums per-atom
maxima, similarity is their ratio (1 for the all-zero degenerate pair), and
distance is the complement.  On sign-split embeddings the distance is a true
metric on R^n; on multistate embeddings it is a pseudometric that becomes a
metric on the embedded quotient.

Atom sums are accumulated with ``math.fsum`` (exactly rounded), so identities
that hold term-by-term -- e.g. the direct same-sign intersection versus the
embedded numerator -- hold bit-for-bit, not merely to rounding error.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embeddings import (
    ComplexSignal,
    MassEmbedding,
    Signal,
    complex_cartesian,
    complex_polar,
    multistate,
    sign_split,
)
from .errors import EmbeddingMismatchError, InvariantViolationError, PtpsimError, SignalError
from .partitions import AngularPartition, StatePartition

# Relative eigenvalue tolerance below which a Gram matrix is flagged as a PSD
# violation; accumulated eigensolver error stays orders below this while true
# violations are O(1).
PSD_TOLERANCE = 1e-9

# Dense symmetric eigensolves are a diagnostic, not a hot path; above this
# size the check is skipped and reported as such.
EIG_CHECK_LIMIT = 512


@dataclass(frozen=True)
class PairwiseResult:
    """Intersection/union (in signal units) plus normalized similarity/distance.

    ``degenerate`` marks the all-zero pair, where the union vanishes and
    similarity is 1 by the shared-vacuum convention.
    """

    intersection: float
    union: float
    similarity: float
    distance: float
    degenerate: bool


def minmax_sums(a: Mapping[tuple[int, int], float], b: Mapping[tuple[int, int], float]) -> tuple[float, float]:
    """Exactly rounded sums of per-atom minima and maxima of two sparse tensors."""
    min_terms: list[float] = []
    max_terms: list[float] = []
    for key in sorted(a.keys() | b.keys()):
        va = a.get(key, 0.0)
        vb = b.get(key, 0.0)
        min_terms.append(va if va < vb else vb)
        max_terms.append(vb if va < vb else va)
    return math.fsum(min_terms), math.fsum(max_terms)


def ratio_result(intersection: float, union: float) -> PairwiseResult:
    """Similarity/distance from the two sums, with the zero-union convention.

    A vanishing union means both tensors are empty: the shared vacuum counts
    as perfect similarity.
    """
    if union == 0.0:
        return PairwiseResult(0.0, 0.0, 1.0, 0.0, True)
    similarity = intersection / union
    return PairwiseResult(intersection, union, similarity, 1.0 - similarity, False)


def tanimoto(u: MassEmbedding, v: MassEmbedding) -> PairwiseResult:
    """Min/max ratio over atoms of two compatible embeddings."""
    u.require_compatible(v)
    intersection, union = minmax_sums(u.mass, v.mass)
    return ratio_result(intersection, union)


def _direct_intersection(a: Signal, b: Signal) -> float:
    """Straight evaluation of the sign-aware intersection on the raw signals.

    Sums min(|a_i|, |b_i|) over the coordinates where both values carry the
    same nonzero sign; opposite or zero signs contribute nothing.
    """
    terms = []
    for x, y in zip(a.values, b.values):
        if (x > 0.0 and y > 0.0) or (x < 0.0 and y < 0.0):
            ax, ay = abs(x), abs(y)
            terms.append(ax if ax < ay else ay)
    return math.fsum(terms)


def d_peak(a: Signal, b: Signal) -> PairwiseResult:
    """Sign-aware peak-to-peak distance between two real signals.

    Computes the Tanimoto result on the sign-split embeddings and
    cross-checks the numerator against the direct same-sign evaluation; the
    two routes sum the same terms and must agree bit-for-bit.
    """
    if len(a) != len(b):
        raise SignalError(f"length mismatch: {len(a)} vs {len(b)}")
    result = tanimoto(sign_split(a), sign_split(b))
    direct = _direct_intersection(a, b)
    if direct != result.intersection:
        raise InvariantViolationError(
            f"intersection mismatch: direct {direct!r} vs embedded {result.intersection!r}"
        )
    return result


def d_multi(a: Signal, b: Signal, partition: StatePartition) -> PairwiseResult:
    """Tanimoto distance of the two multistate embeddings (pseudometric on R^n)."""
    if len(a) != len(b):
        raise SignalError(f"length mismatch: {len(a)} vs {len(b)}")
    return tanimoto(multistate(a, partition), multistate(b, partition))


def d_complex(
    a: ComplexSignal,
    b: ComplexSignal,
    mode: str = "cartesian",
    sectors: AngularPartition | None = None,
) -> PairwiseResult:
    """Tanimoto distance of complex signals under the chosen embedding.

    ``mode`` is "cartesian" (independent re/im sign channels) or "polar"
    (modulus within angular sectors; ``sectors`` required).
    """
    if len(a) != len(b):
        raise SignalError(f"length mismatch: {len(a)} vs {len(b)}")
    if mode == "cartesian":
        return tanimoto(complex_cartesian(a), complex_cartesian(b))
    if mode == "polar":
        if sectors is None:
            raise PtpsimError("polar mode requires an angular partition")
        return tanimoto(complex_polar(a, sectors), complex_polar(b, sectors))
    raise PtpsimError(f"unknown complex mode {mode!r}")


def radial_kernel(a: Signal, b: Signal, lam: float) -> float:
    """exp(-lam * d_peak(a, b)): a positive-semidefinite radial kernel, in (0, 1]."""
    if not (lam > 0.0):
        raise PtpsimError(f"lambda must be positive, got {lam!r}")
    return math.exp(-lam * d_peak(a, b).distance)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric kernel matrix with its PSD diagnostic.

    ``min_eigenvalue_estimate`` is None when the matrix exceeded the dense
    eigensolve size limit and the check was skipped; ``psd_ok`` is then None
    as well ("not checked").
    """

    values: np.ndarray
    kernel_kind: str  # "peak" or "radial"
    lam: float | None
    min_eigenvalue_estimate: float | None
    max_eigenvalue_estimate: float | None
    psd_ok: bool | None

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def describe(self) -> str:
        if self.kernel_kind == "radial":
            return f"radial(lambda={self.lam})"
        return self.kernel_kind


def _similarity_matrix(embeddings: Sequence[MassEmbedding], workers: int | None) -> np.ndarray:
    first = embeddings[0]
    for e in embeddings[1:]:
        first.require_compatible(e)
    m = len(embeddings)
    dense = np.zeros((m, first.n * first.K))
    for row, e in enumerate(embeddings):
        for (i, k), value in e.mass.items():
            dense[row, i * first.K + k] = value

    sims = np.zeros((m, m))

    def fill_row(i: int) -> None:
        # upper triangle only; each call writes a disjoint slice
        mins = np.minimum(dense[i], dense[i:]).sum(axis=1)
        maxs = np.maximum(dense[i], dense[i:]).sum(axis=1)
        row = np.ones(m - i)
        nonzero = maxs > 0.0
        row[nonzero] = mins[nonzero] / maxs[nonzero]
        sims[i, i:] = row

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(m)))
    else:
        for i in range(m):
            fill_row(i)
    upper = np.triu(sims)
    return upper + upper.T - np.diag(np.diag(sims))


def gram_from_embeddings(
    embeddings: Sequence[MassEmbedding],
    kernel_kind: str = "peak",
    lam: float | None = None,
    workers: int | None = None,
) -> GramMatrix:
    """Kernel Gram matrix over pre-built embeddings, with PSD verification.

    ``kernel_kind`` is "peak" (the similarity itself) or "radial"
    (exp(-lam * distance), ``lam`` > 0 required).  The minimum eigenvalue is
    estimated by a dense symmetric eigensolve for m <= EIG_CHECK_LIMIT and
    skipped above (reported as not checked); a violation is flagged when it
    falls below -PSD_TOLERANCE * max(1, largest eigenvalue).  Pair cells are
    independent, so rows may be filled by parallel workers; the result is
    deterministic regardless of schedule.
    """
    if not embeddings:
        raise SignalError("gram requires at least one embedding")
    if kernel_kind == "radial":
        if lam is None or not (lam > 0.0):
            raise PtpsimError(f"radial kernel requires lambda > 0, got {lam!r}")
    elif kernel_kind == "peak":
        if lam is not None:
            raise PtpsimError("lambda is only meaningful for the radial kernel")
    else:
        raise PtpsimError(f"unknown kernel kind {kernel_kind!r}")

    sims = _similarity_matrix(embeddings, workers)
    values = np.exp(-lam * (1.0 - sims)) if kernel_kind == "radial" else sims

    if values.shape[0] <= EIG_CHECK_LIMIT:
        eigs = np.linalg.eigvalsh(values)
        min_eig = float(eigs[0])
        max_eig = float(eigs[-1])
        psd_ok = min_eig >= -PSD_TOLERANCE * max(1.0, abs(max_eig))
    else:
        min_eig = max_eig = psd_ok = None  # type: ignore[assignment]
    return GramMatrix(values, kernel_kind, lam, min_eig, max_eig, psd_ok)


def gram(
    signals: Sequence[Signal],
    kernel_kind: str = "peak",
    partition: StatePartition | None = None,
    lam: float | None = None,
    workers: int | None = None,
) -> GramMatrix:
    """Gram matrix over real signals: sign-split by default, multistate with a partition."""
    if not signals:
        raise SignalError("gram requires at least one signal")
    n = len(signals[0])
    for s in signals[1:]:
        if len(s) != n:
            raise SignalError(f"length mismatch: {len(s)} vs {n}")
    if partition is None:
        embeddings = [sign_split(s) for s in signals]
    else:
        embeddings = [multistate(s, partition) for s in signals]
    return gram_from_embeddings(embeddings, kernel_kind, lam, workers)
