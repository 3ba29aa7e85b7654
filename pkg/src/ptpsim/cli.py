"""Command-line surface: embed | dist | gram | kernel | budgets | coherence | tvcheck | casestudy.

Outputs are written atomically (temp file + rename) to ``--output``, or to
stdout when no output path is given.  JSON reports carry a ``generated_at``
timestamp unless ``--reproducible`` is set; with the flag, identical inputs
and flags produce byte-identical artifacts.  Every failure class maps to a
distinct nonzero exit code with a one-line machine-parsable reason on
stderr, and the exit status is 0 only if all computed invariants (PSD
tolerance, budget closure, route consistency) hold.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import coalitions as co
from . import embeddings as em
from . import io as sio
from . import pairwise as pw
from . import probabilistic as pr
from .errors import (
    CoalitionCapError,
    CoalitionTableError,
    EmbeddingMismatchError,
    InputFormatError,
    InvariantViolationError,
    PartitionError,
    PtpsimError,
    SignalError,
    VacuumError,
)
from .partitions import AngularPartition, StatePartition, quadrant_partition, sign_partition

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_PARTITION = 4
EXIT_INCOMPATIBLE = 5
EXIT_CAP = 6
EXIT_INVARIANT = 7

_ERROR_CODES: list[tuple[type[Exception], tuple[int, str]]] = [
    (InputFormatError, (EXIT_INPUT, "input")),
    (PartitionError, (EXIT_PARTITION, "partition")),
    (CoalitionCapError, (EXIT_CAP, "coalition-cap")),
    (InvariantViolationError, (EXIT_INVARIANT, "invariant")),
    (VacuumError, (EXIT_INVARIANT, "invariant")),
    (EmbeddingMismatchError, (EXIT_INCOMPATIBLE, "incompatible")),
    (CoalitionTableError, (EXIT_INCOMPATIBLE, "incompatible")),
    (SignalError, (EXIT_INPUT, "input")),
    (PtpsimError, (EXIT_INTERNAL, "internal")),
]


@dataclass
class RunConfig:
    """Validated flag set for one invocation."""

    command: str
    input: str | None = None
    partition: str | None = None
    sectors: str | None = None
    output: str | None = None
    fmt: str = "json"
    reproducible: bool = False
    lam: float | None = None
    max_coalition: int = co.DEFAULT_COALITION_CAP
    force: bool = False
    groups: str | None = None
    top_k: int | None = None
    complex_mode: str | None = None  # None | "cartesian" | "polar"
    shift: float = 0.25
    period: float = 1.0
    samples: int = 400


def _now_field() -> dict:
    return {"generated_at": datetime.now(timezone.utc).isoformat()}


def _write_text(output: str | None, text: str) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    target = Path(output)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent) or ".", prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(config: RunConfig, payload: dict) -> None:
    doc = dict(payload)
    if not config.reproducible:
        doc.update(_now_field())
    _write_text(config.output, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _emit_csv(config: RunConfig, rows: Sequence[Sequence]) -> None:
    lines = []
    for row in rows:
        lines.append(",".join(repr(c) if isinstance(c, float) else str(c) for c in row))
    _write_text(config.output, "\n".join(lines) + "\n")


def _matrix_rows(ids: Sequence[str], matrix: np.ndarray) -> list[list]:
    rows: list[list] = [["id", *ids]]
    for label, row in zip(ids, matrix):
        rows.append([label, *[float(v) for v in row]])
    return rows


def _load_input(config: RunConfig) -> sio.SignalSet:
    if not config.input:
        raise InputFormatError(f"{config.command}: --input is required")
    return sio.load_signals(config.input, complex_mode=config.complex_mode is not None)


def _state_partition(config: RunConfig) -> StatePartition:
    if config.partition:
        return sio.load_state_partition(config.partition)
    return sign_partition()


def _angular_partition(config: RunConfig) -> AngularPartition:
    if config.sectors:
        return sio.load_angular_partition(config.sectors)
    return quadrant_partition()


def _embed_set(config: RunConfig, signal_set: sio.SignalSet) -> list[em.MassEmbedding]:
    if signal_set.complex_mode:
        if config.complex_mode == "polar":
            sectors = _angular_partition(config)
            return [em.complex_polar(s, sectors) for s in signal_set.signals]  # type: ignore[arg-type]
        return [em.complex_cartesian(s) for s in signal_set.signals]  # type: ignore[arg-type]
    if config.partition:
        partition = _state_partition(config)
        return [em.multistate(s, partition) for s in signal_set.signals]  # type: ignore[arg-type]
    return [em.sign_split(s) for s in signal_set.signals]  # type: ignore[arg-type]


def _require_real(config: RunConfig) -> None:
    if config.complex_mode is not None:
        raise InputFormatError(f"{config.command}: complex inputs are not supported")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_embed(config: RunConfig) -> int:
    signal_set = _load_input(config)
    embeddings = _embed_set(config, signal_set)
    if config.fmt == "csv":
        rows: list[list] = [["id", "coordinate", "state", "mass"]]
        for label, e in zip(signal_set.ids, embeddings):
            for (i, k), value in e.atoms():
                rows.append([label, i, k, value])
        _emit_csv(config, rows)
    else:
        _emit_json(
            config,
            {
                "command": "embed",
                "signals": [
                    {"id": label, "embedding": e.to_json_dict()}
                    for label, e in zip(signal_set.ids, embeddings)
                ],
            },
        )
    return EXIT_OK


def _distance_matrix(embeddings: Sequence[em.MassEmbedding]) -> np.ndarray:
    m = len(embeddings)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = pw.tanimoto(embeddings[i], embeddings[j]).distance
    return out


def _cmd_dist(config: RunConfig) -> int:
    signal_set = _load_input(config)
    matrix = _distance_matrix(_embed_set(config, signal_set))
    if config.fmt == "csv":
        _emit_csv(config, _matrix_rows(signal_set.ids, matrix))
    else:
        _emit_json(
            config,
            {
                "command": "dist",
                "ids": list(signal_set.ids),
                "matrix": [[float(v) for v in row] for row in matrix],
            },
        )
    return EXIT_OK


def _cmd_gram(config: RunConfig, kernel_kind: str) -> int:
    signal_set = _load_input(config)
    embeddings = _embed_set(config, signal_set)
    result = pw.gram_from_embeddings(embeddings, kernel_kind, lam=config.lam)
    if config.fmt == "csv":
        _emit_csv(config, _matrix_rows(signal_set.ids, result.values))
        sys.stdout.write(
            f"kernel={result.describe()} min_eigenvalue_estimate={result.min_eigenvalue_estimate!r} "
            f"psd_ok={result.psd_ok}\n"
        )
    else:
        _emit_json(
            config,
            {
                "command": config.command,
                "ids": list(signal_set.ids),
                "kernel": result.describe(),
                "matrix": [[float(v) for v in row] for row in result.values],
                "min_eigenvalue_estimate": result.min_eigenvalue_estimate,
                "max_eigenvalue_estimate": result.max_eigenvalue_estimate,
                "psd_ok": result.psd_ok,
            },
        )
    if result.psd_ok is False:
        sys.stderr.write(
            f"ptpsim: invariant: Gram matrix min eigenvalue "
            f"{result.min_eigenvalue_estimate!r} violates the PSD tolerance\n"
        )
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_budgets(config: RunConfig) -> int:
    _require_real(config)
    signal_set = _load_input(config)
    partition = _state_partition(config)
    coarse = None
    if config.groups:
        try:
            raw = json.loads(config.groups)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"--groups: invalid JSON: {exc.msg}") from exc
        coarse = partition.coarsen({str(k): [int(i) for i in v] for k, v in raw.items()})
    report = co.budget_report(
        signal_set.signals,  # type: ignore[arg-type]
        partition,
        groups=coarse,
        cap=config.max_coalition,
        force=config.force,
    )
    if config.fmt == "csv":
        _emit_csv(config, report.to_csv_rows())
    else:
        _emit_json(config, {"command": "budgets", **report.to_json_dict()})
    return EXIT_OK


def _cmd_coherence(config: RunConfig) -> int:
    signal_set = _load_input(config)
    embeddings = _embed_set(config, signal_set)
    profile = co.coherence(embeddings)
    k = config.top_k if config.top_k is not None else min(10, signal_set.n)
    if config.fmt == "csv":
        rows: list[list] = [["rank", "coordinate", "incoherence"]]
        for rank, idx in enumerate(profile.ranked_indices, start=1):
            rows.append([rank, idx, profile.per_index_incoherence[idx]])
        _emit_csv(config, rows)
    else:
        _emit_json(
            config,
            {
                "command": "coherence",
                "ids": list(signal_set.ids),
                "grand_similarity": profile.grand_similarity,
                "grand_distance": profile.grand_distance,
                "per_index_incoherence": list(profile.per_index_incoherence),
                "top_k": list(profile.top_k(k)),
            },
        )
    return EXIT_OK


def _cmd_tvcheck(config: RunConfig) -> int:
    _require_real(config)
    signal_set = _load_input(config)
    if len(signal_set.signals) != 2:
        raise InputFormatError(
            f"tvcheck compares exactly 2 signals, got {len(signal_set.signals)}"
        )
    partition = _state_partition(config)
    a, b = signal_set.signals  # type: ignore[misc]
    record = pr.tv_consistency(a, b, partition)
    payload = {
        "command": "tvcheck",
        "ids": list(signal_set.ids),
        "m_a": record.m_a,
        "m_b": record.m_b,
        "tv": record.tv,
        "delta": record.delta,
        "j_direct": record.j_direct,
        "j_via_tv": record.j_via_tv,
        "d_direct": record.d_direct,
        "d_via_tv": record.d_via_tv,
        "residual": record.residual,
    }
    if config.fmt == "csv":
        keys = [k for k in payload if k not in ("command", "ids")]
        _emit_csv(config, [keys, [payload[k] for k in keys]])
    else:
        _emit_json(config, payload)
    sys.stdout.write(
        f"j_direct={record.j_direct!r} j_via_tv={record.j_via_tv!r} residual={record.residual!r}\n"
    )
    return EXIT_OK


def case_study_signals(shift: float, period: float, samples: int) -> tuple[em.Signal, em.Signal]:
    """One full period of a sinusoid and its lagged copy, sampled uniformly."""
    if samples < 2:
        raise InputFormatError("casestudy needs at least 2 samples")
    if not (period > 0):
        raise InputFormatError("period must be positive")
    t = np.arange(samples) * (period / samples)
    a = np.sin(2.0 * np.pi * t / period)
    b = np.sin(2.0 * np.pi * (t - shift) / period)
    return (
        em.Signal(tuple(float(v) for v in a), id="reference"),
        em.Signal(tuple(float(v) for v in b), id="lagged"),
    )


def case_study_summary(shift: float, period: float, samples: int) -> dict:
    a, b = case_study_signals(shift, period, samples)
    result = pw.d_peak(a, b)
    r = float(np.corrcoef(np.asarray(a.values), np.asarray(b.values))[0, 1])
    phase = 2.0 * math.pi * shift / period
    return {
        "samples": samples,
        "shift": shift,
        "period": period,
        "phase_shift": phase,
        "cos_phase_shift": math.cos(phase),
        "pearson_r": r,
        "intersection": result.intersection,
        "union": result.union,
        "j_peak": result.similarity,
        "d_peak": result.distance,
    }


def _cmd_casestudy(config: RunConfig) -> int:
    a, b = case_study_signals(config.shift, config.period, config.samples)
    summary = case_study_summary(config.shift, config.period, config.samples)
    t = np.arange(config.samples) * (config.period / config.samples)
    rows: list[list] = [["t", "a", "b", "intersection", "union"]]
    for i, (x, y) in enumerate(zip(a.values, b.values)):
        same_sign = (x > 0 and y > 0) or (x < 0 and y < 0)
        overlap = min(abs(x), abs(y)) if same_sign else 0.0
        envelope = max(x, y, 0.0) + max(-x, -y, 0.0)
        rows.append([float(t[i]), x, y, overlap, envelope])
    if config.fmt == "csv":
        _emit_csv(config, rows)
    else:
        _emit_json(
            config,
            {
                "command": "casestudy",
                "summary": summary,
                "columns": rows[0],
                "envelope": [row for row in rows[1:]],
            },
        )
    sys.stdout.write(
        f"j_peak={summary['j_peak']!r} d_peak={summary['d_peak']!r} "
        f"pearson_r={summary['pearson_r']!r} cos_phase_shift={summary['cos_phase_shift']!r}\n"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptpsim",
        description="Sign-aware peak-to-peak similarity toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p: argparse.ArgumentParser, with_input: bool = True) -> None:
        if with_input:
            p.add_argument("--input", required=True, help="signals file (CSV or JSON)")
            p.add_argument("--partition", help="state partition JSON (default: sign split)")
            p.add_argument(
                "--complex",
                dest="complex_mode",
                choices=("cartesian", "polar"),
                help="treat the input as complex signals under this embedding",
            )
            p.add_argument("--sectors", help="angular partition JSON for --complex polar")
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
        p.add_argument(
            "--reproducible",
            action="store_true",
            help="suppress the timestamp field for byte-identical output",
        )

    add_shared(sub.add_parser("embed", help="emit embeddings"))
    add_shared(sub.add_parser("dist", help="pairwise distance matrix"))
    add_shared(sub.add_parser("gram", help="similarity kernel Gram matrix with PSD check"))

    kernel = sub.add_parser("kernel", help="radial kernel matrix exp(-lambda * distance)")
    add_shared(kernel)
    kernel.add_argument("--lambda", dest="lam", type=float, required=True, help="decay rate > 0")

    budgets = sub.add_parser("budgets", help="coalition magnitude budgets")
    add_shared(budgets)
    budgets.add_argument(
        "--max-coalition",
        type=int,
        default=co.DEFAULT_COALITION_CAP,
        help="signal-count cap for full coalition enumeration",
    )
    budgets.add_argument("--force", action="store_true", help="override the coalition cap")
    budgets.add_argument(
        "--groups",
        help='JSON state grouping for the breakdown, e.g. {"loss":[1,2],"gain":[3,4],"neutral":[0]}',
    )

    coherence = sub.add_parser("coherence", help="grand-coalition coherence profile")
    add_shared(coherence)
    coherence.add_argument("--top-k", type=int, help="how many incoherent coordinates to list")

    add_shared(sub.add_parser("tvcheck", help="similarity via min/max and via total variation"))

    case = sub.add_parser("casestudy", help="phase-shifted sinusoid envelopes")
    add_shared(case, with_input=False)
    case.add_argument("--shift", type=float, default=0.25, help="time lag of the second signal")
    case.add_argument("--period", type=float, default=1.0, help="period of the sinusoid")
    case.add_argument("--samples", type=int, default=400, help="samples over one period")

    return parser


def run(config: RunConfig) -> int:
    """Dispatch one validated invocation; returns the process exit code."""
    if config.command == "embed":
        return _cmd_embed(config)
    if config.command == "dist":
        return _cmd_dist(config)
    if config.command == "gram":
        return _cmd_gram(config, "peak")
    if config.command == "kernel":
        return _cmd_gram(config, "radial")
    if config.command == "budgets":
        return _cmd_budgets(config)
    if config.command == "coherence":
        return _cmd_coherence(config)
    if config.command == "tvcheck":
        return _cmd_tvcheck(config)
    if config.command == "casestudy":
        return _cmd_casestudy(config)
    raise PtpsimError(f"unknown command {config.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {f: getattr(args, f) for f in vars(args) if f in RunConfig.__dataclass_fields__}
    config = RunConfig(**fields)
    try:
        return run(config)
    except PtpsimError as exc:
        for klass, (code, label) in _ERROR_CODES:
            if isinstance(exc, klass):
                sys.stderr.write(f"ptpsim: {label}: {exc}\n")
                return code
        sys.stderr.write(f"ptpsim: internal: {exc}\n")
        return EXIT_INTERNAL
    except OSError as exc:
        sys.stderr.write(f"ptpsim: io: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
