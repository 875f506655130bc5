"""Rectangular cohort data: CSV loading, filtering, and aggregation.

A Frame is an immutable in-memory table of numeric cells (missing cells
are ``None``). Every row is one subject; one column is designated as the
prediction target. All operations are pure functions returning new
Frames, so frames can be shared freely across workers.

CSV conventions: UTF-8, one header row, ``.`` decimal separator, empty
string means missing. Column labels are taken verbatim from the header
and treated as opaque keys (no sanitization).
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    DuplicateColumnName,
    InvalidSpec,
    MissingHeader,
    NameCollision,
    NonNumericCell,
    UnknownColumn,
    UnknownTargetColumn,
)

Cell = Optional[float]


class Frame:
    """Immutable table of numeric cells with a designated target column.

    ``target_name`` may be None for prediction-only cohorts that carry no
    outcome column; whenever it is set it must name an existing column.
    ``row_ids`` are optional per-row text identifiers (for example a
    student id pulled out of the CSV); they are bookkeeping, not data.
    """

    __slots__ = ("column_names", "rows", "target_name", "row_ids", "id_name")

    def __init__(
        self,
        column_names: Sequence[str],
        rows: Sequence[Sequence[Cell]],
        target_name: Optional[str],
        row_ids: Optional[Sequence[str]] = None,
        id_name: Optional[str] = None,
    ):
        names = tuple(column_names)
        if len(set(names)) != len(names):
            raise DuplicateColumnName(f"duplicate column labels in {names}")
        if target_name is not None and target_name not in names:
            raise UnknownTargetColumn(f"target column {target_name!r} not present")
        frozen = []
        for i, row in enumerate(rows):
            cells = tuple(None if c is None else float(c) for c in row)
            if len(cells) != len(names):
                raise InvalidSpec(
                    f"row {i} has {len(cells)} cells, expected {len(names)}"
                )
            frozen.append(cells)
        if row_ids is not None and len(row_ids) != len(frozen):
            raise InvalidSpec("row_ids length does not match row count")
        self.column_names = names
        self.rows = tuple(frozen)
        self.target_name = target_name
        self.row_ids = tuple(row_ids) if row_ids is not None else None
        self.id_name = id_name

    # -- basic accessors ------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.column_names)

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise UnknownColumn(f"no column named {name!r}") from None

    def column(self, name: str) -> tuple:
        i = self.column_index(name)
        return tuple(row[i] for row in self.rows)

    def feature_names(self) -> tuple:
        """Column labels excluding the target."""
        return tuple(n for n in self.column_names if n != self.target_name)

    def feature_matrix(self, names: Optional[Sequence[str]] = None) -> list:
        """Rows restricted to the given feature columns (default: all non-target)."""
        if names is None:
            names = self.feature_names()
        idx = [self.column_index(n) for n in names]
        return [tuple(row[i] for i in idx) for row in self.rows]

    def target_values(self) -> tuple:
        if self.target_name is None:
            raise UnknownTargetColumn("frame has no target column")
        return self.column(self.target_name)

    def row_id(self, i: int) -> Optional[str]:
        return self.row_ids[i] if self.row_ids is not None else None

    # -- structural helpers (each returns a new Frame) --------------------

    def subset_rows(self, indices: Sequence[int]) -> "Frame":
        ids = None if self.row_ids is None else [self.row_ids[i] for i in indices]
        return Frame(
            self.column_names,
            [self.rows[i] for i in indices],
            self.target_name,
            ids,
            self.id_name,
        )

    def single_row(self, i: int) -> "Frame":
        return self.subset_rows([i])

    def select_columns(self, names: Sequence[str]) -> "Frame":
        idx = [self.column_index(n) for n in names]
        target = self.target_name if self.target_name in names else None
        return Frame(
            names,
            [tuple(row[i] for i in idx) for row in self.rows],
            target,
            self.row_ids,
            self.id_name,
        )

    def drop_columns(self, names: Sequence[str]) -> "Frame":
        for n in names:
            self.column_index(n)
        keep = [n for n in self.column_names if n not in set(names)]
        return self.select_columns(keep)

    def replace_rows(self, rows: Sequence[Sequence[Cell]]) -> "Frame":
        return Frame(self.column_names, rows, self.target_name, self.row_ids, self.id_name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.column_names == other.column_names
            and self.rows == other.rows
            and self.target_name == other.target_name
            and self.row_ids == other.row_ids
        )

    def __repr__(self) -> str:
        return (
            f"Frame({self.n_rows} rows x {self.n_cols} cols, "
            f"target={self.target_name!r})"
        )


@dataclass(frozen=True)
class AggregationSpec:
    """Collapse several columns into one row-wise mean column."""

    group_name: str
    member_columns: tuple

    def __post_init__(self):
        object.__setattr__(self, "member_columns", tuple(self.member_columns))
        if not self.member_columns:
            raise InvalidSpec(f"aggregation {self.group_name!r} has no member columns")


@dataclass(frozen=True)
class CohortSummary:
    """Per-cohort target statistics. mean/sd are None when no targets exist."""

    cohort_key: float
    count: int
    mean_target: Optional[float]
    sd_target: Optional[float]
    pass_count: int
    fail_count: int


# --------------------------------------------------------------------------
# CSV I/O
# --------------------------------------------------------------------------

def _parse_cell(text: str, row: int, column: str) -> Cell:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None


def load_csv(path, target_name: Optional[str], id_column: Optional[str] = None) -> Frame:
    """Load a Frame from a CSV file.

    The id column (if named) is pulled out into ``row_ids`` and is the only
    column allowed to hold non-numeric text. Empty cells become missing
    markers. ``target_name`` may be None for prediction-only cohorts.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingHeader(f"{path}: file is empty") from None
        if not header or all(h == "" for h in header):
            raise MissingHeader(f"{path}: blank header row")
        if len(set(header)) != len(header):
            raise DuplicateColumnName(f"{path}: duplicate column names in header")
        if target_name is not None and target_name not in header:
            raise UnknownTargetColumn(f"{path}: target {target_name!r} not in header")
        if id_column is not None and id_column not in header:
            raise UnknownColumn(f"{path}: id column {id_column!r} not in header")

        id_pos = header.index(id_column) if id_column is not None else None
        names = [h for i, h in enumerate(header) if i != id_pos]
        rows = []
        ids = [] if id_column is not None else None
        for lineno, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise NonNumericCell(lineno, "<row>", ",".join(record))
            cells = []
            for i, text in enumerate(record):
                if i == id_pos:
                    ids.append(text)
                else:
                    cells.append(_parse_cell(text, lineno, header[i]))
            rows.append(cells)
    return Frame(names, rows, target_name, ids, id_column)


def _format_cell(value: Cell) -> str:
    return "" if value is None else repr(value)


def write_csv(frame: Frame, path) -> None:
    """Write a Frame back to CSV (id column first when present).

    Cell values are written with shortest round-trip float formatting, so
    load -> write -> load reproduces the Frame cell for cell.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if frame.row_ids is not None:
            writer.writerow([frame.id_name or "id", *frame.column_names])
            for rid, row in zip(frame.row_ids, frame.rows):
                writer.writerow([rid, *[_format_cell(c) for c in row]])
        else:
            writer.writerow(frame.column_names)
            for row in frame.rows:
                writer.writerow([_format_cell(c) for c in row])


# --------------------------------------------------------------------------
# Row filters
# --------------------------------------------------------------------------

def filter_by_cutoff(frame: Frame, key_column: str, cutoff: float, keep: str) -> Frame:
    """Keep rows whose key cell is below / at-or-above the cutoff.

    Surviving rows keep their original order. Rows with a missing key cell
    satisfy neither comparison and are dropped.
    """
    if keep not in ("below", "at_or_above"):
        raise InvalidSpec(f"keep must be 'below' or 'at_or_above', got {keep!r}")
    key = frame.column(key_column)
    if keep == "below":
        indices = [i for i, v in enumerate(key) if v is not None and v < cutoff]
    else:
        indices = [i for i, v in enumerate(key) if v is not None and v >= cutoff]
    return frame.subset_rows(indices)


def drop_missing_target(frame: Frame):
    """Remove rows whose target cell is missing. Returns (frame, dropped_count)."""
    target = frame.target_values()
    indices = [i for i, v in enumerate(target) if v is not None]
    return frame.subset_rows(indices), frame.n_rows - len(indices)


def drop_incomplete(frame: Frame):
    """Remove rows containing any missing cell. Returns (frame, dropped_count)."""
    indices = [i for i, row in enumerate(frame.rows) if None not in row]
    return frame.subset_rows(indices), frame.n_rows - len(indices)


# --------------------------------------------------------------------------
# Aggregation and summaries
# --------------------------------------------------------------------------

def aggregate_means(frame: Frame, specs: Sequence[AggregationSpec], drop_members: bool = False) -> Frame:
    """Append one row-wise mean column per spec.

    A group mean is missing whenever any member cell is missing; silent
    partial means would hide data problems. With ``drop_members`` the
    member columns are removed after all groups are computed.
    """
    existing = set(frame.column_names)
    new_names = set()
    for spec in specs:
        for m in spec.member_columns:
            frame.column_index(m)
            if drop_members and m == frame.target_name:
                raise InvalidSpec(
                    f"aggregation {spec.group_name!r} would drop the target column"
                )
        if spec.group_name in existing or spec.group_name in new_names:
            raise NameCollision(f"column {spec.group_name!r} already exists")
        new_names.add(spec.group_name)

    names = list(frame.column_names)
    rows = [list(row) for row in frame.rows]
    for spec in specs:
        idx = [frame.column_index(m) for m in spec.member_columns]
        names.append(spec.group_name)
        for row in rows:
            values = [row[i] for i in idx]
            row.append(None if None in values else sum(values) / len(values))

    result = Frame(names, rows, frame.target_name, frame.row_ids, frame.id_name)
    if drop_members:
        members = {m for spec in specs for m in spec.member_columns}
        result = result.drop_columns([n for n in result.column_names if n in members])
    return result


def summarize_cohorts(frame: Frame, cohort_column: str, pass_threshold: float) -> list:
    """One CohortSummary per distinct cohort value, ordered ascending.

    Rows with a missing cohort cell are skipped. Statistics cover the
    non-missing targets only; a subject passes when its target is at or
    above ``pass_threshold``.
    """
    cohorts = frame.column(cohort_column)
    target = frame.target_values()
    groups: dict = {}
    for c, t in zip(cohorts, target):
        if c is None:
            continue
        groups.setdefault(c, []).append(t)
    summaries = []
    for key in sorted(groups):
        values = groups[key]
        present = [v for v in values if v is not None]
        mean = statistics.mean(present) if present else None
        sd = statistics.stdev(present) if len(present) >= 2 else None
        passed = sum(1 for v in present if v >= pass_threshold)
        summaries.append(
            CohortSummary(
                cohort_key=key,
                count=len(values),
                mean_target=mean,
                sd_target=sd,
                pass_count=passed,
                fail_count=len(present) - passed,
            )
        )
    return summaries
