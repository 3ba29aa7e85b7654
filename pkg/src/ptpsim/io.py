"""Signal-set and partition file ingestion for the CLI.

CSV layout: one signal per row, first column the id, remaining columns the
coordinates.  Complex CSV uses paired re/im columns after the id, so a row
``Z,3,4,-2,1`` is the two-coordinate signal (3+4i, -2+1i).  JSON layout:
``{"signals": [{"id": ..., "values": [...]}]}`` with complex values written
as ``[re, im]`` pairs.

Parsing is strict: ragged rows, duplicate ids, empty files, and non-finite
entries are rejected with row/column diagnostics.  Emission uses shortest
round-trip float formatting, so a write/load cycle reproduces values
bit-for-bit.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .embeddings import ComplexSignal, Signal
from .errors import InputFormatError
from .partitions import AngularPartition, StatePartition


@dataclass(frozen=True)
class SignalSet:
    """A homogeneous batch of equal-length signals with unique ids."""

    signals: tuple[Signal, ...] | tuple[ComplexSignal, ...]
    source: str
    complex_mode: bool

    def __post_init__(self) -> None:
        if not self.signals:
            raise InputFormatError(f"{self.source}: no signals")
        n = len(self.signals[0])
        for s in self.signals[1:]:
            if len(s) != n:
                raise InputFormatError(
                    f"{self.source}: signal {s.id!r} has {len(s)} coordinates, expected {n}"
                )
        ids = [s.id for s in self.signals]
        if any(i is None or i == "" for i in ids):
            raise InputFormatError(f"{self.source}: every signal needs an id")
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise InputFormatError(f"{self.source}: duplicate ids {sorted(dupes)}")

    @property
    def n(self) -> int:
        return len(self.signals[0])

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.signals)  # type: ignore[misc]


def _parse_cell(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise InputFormatError(f"{where}: cannot parse {raw!r} as a number") from exc
    if not math.isfinite(value):
        raise InputFormatError(f"{where}: non-finite value {raw!r}")
    return value


def _signals_from_rows(
    rows: list[tuple[str, list[float]]], source: str, complex_mode: bool
) -> SignalSet:
    if complex_mode:
        out_c = []
        for row_no, (sig_id, values) in enumerate(rows, start=1):
            if len(values) % 2 != 0:
                raise InputFormatError(
                    f"{source}: row {row_no} ({sig_id!r}): complex signals need "
                    f"paired re/im columns, got {len(values)} values"
                )
            pairs = [complex(values[c], values[c + 1]) for c in range(0, len(values), 2)]
            out_c.append(ComplexSignal(tuple(pairs), id=sig_id))
        return SignalSet(tuple(out_c), source, True)
    out = [Signal(tuple(values), id=sig_id) for sig_id, values in rows]
    return SignalSet(tuple(out), source, False)


def _load_csv(path: Path, complex_mode: bool) -> SignalSet:
    rows: list[tuple[str, list[float]]] = []
    with open(path, newline="") as handle:
        for row_no, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # blank line
            sig_id, cells = row[0].strip(), row[1:]
            if not cells:
                raise InputFormatError(f"{path}: row {row_no} ({sig_id!r}): no values")
            values = [
                _parse_cell(cell.strip(), f"{path}: row {row_no}, column {c + 2}")
                for c, cell in enumerate(cells)
            ]
            rows.append((sig_id, values))
    if not rows:
        raise InputFormatError(f"{path}: no signals")
    return _signals_from_rows(rows, str(path), complex_mode)


def _load_json(path: Path, complex_mode: bool) -> SignalSet:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict) or "signals" not in raw:
        raise InputFormatError(f"{path}: expected an object with a 'signals' list")
    rows: list[tuple[str, list[float]]] = []
    for idx, entry in enumerate(raw["signals"], start=1):
        where = f"{path}: signals[{idx - 1}]"
        if not isinstance(entry, dict) or "values" not in entry:
            raise InputFormatError(f"{where}: expected an object with 'values'")
        sig_id = str(entry.get("id", ""))
        flat: list[float] = []
        for c, value in enumerate(entry["values"]):
            if complex_mode:
                if not (isinstance(value, (list, tuple)) and len(value) == 2):
                    raise InputFormatError(f"{where}: value {c} must be a [re, im] pair")
                flat.append(_parse_cell(str(value[0]), f"{where}, value {c} (re)"))
                flat.append(_parse_cell(str(value[1]), f"{where}, value {c} (im)"))
            else:
                flat.append(_parse_cell(str(value), f"{where}, value {c}"))
        rows.append((sig_id, flat))
    if not rows:
        raise InputFormatError(f"{path}: no signals")
    return _signals_from_rows(rows, str(path), complex_mode)


def load_signals(path: str | os.PathLike, fmt: str | None = None, complex_mode: bool = False) -> SignalSet:
    """Read a signal set from a CSV or JSON file (format inferred from suffix)."""
    p = Path(path)
    if not p.exists():
        raise InputFormatError(f"{p}: no such file")
    if fmt is None:
        fmt = p.suffix.lstrip(".").lower() or "csv"
    if fmt == "csv":
        return _load_csv(p, complex_mode)
    if fmt == "json":
        return _load_json(p, complex_mode)
    raise InputFormatError(f"{p}: unknown signals format {fmt!r}")


def signals_to_csv(signal_set: SignalSet) -> str:
    """Emit the CSV form (shortest round-trip floats; bit-exact reload)."""
    lines = []
    for s in signal_set.signals:
        if signal_set.complex_mode:
            cells = []
            for z in s.values:  # type: ignore[union-attr]
                cells.append(repr(z.real))
                cells.append(repr(z.imag))
        else:
            cells = [repr(v) for v in s.values]
        lines.append(",".join([s.id or "", *cells]))
    return "\n".join(lines) + "\n"


def load_state_partition(path: str | os.PathLike) -> StatePartition:
    with open(path) as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return StatePartition.from_config(raw)


def load_angular_partition(path: str | os.PathLike) -> AngularPartition:
    with open(path) as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return AngularPartition.from_config(raw)
