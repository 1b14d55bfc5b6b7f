"""Clustered two-group marker data and its CSV serialization.

A dataset holds two groups of subjects (diseased and non-diseased).  Every
subject carries, for each marker ``l`` in ``1..n_markers`` and each time ``k``
in ``1..n_times``, one or more replicate measurements.  Replicates from the
same subject are the cluster structure that the covariance estimators must
respect; subjects are assumed independent.

Datasets are immutable once built.  All pooled views (per marker, per
marker-time) are precomputed at construction so reads can be shared across
workers without locking.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError

CSV_HEADER = ["subject_id", "status", "marker", "time", "replicate", "value"]
_STATUS_TOKENS = {"D": "diseased", "ND": "nondiseased"}


@dataclass(frozen=True)
class SubjectRecord:
    """One subject: an id plus replicate values per (marker, time) cell."""

    subject_id: str
    cells: dict[tuple[int, int], tuple[float, ...]]

    def __post_init__(self):
        normalized = {}
        for key, values in self.cells.items():
            marker, time = int(key[0]), int(key[1])
            normalized[(marker, time)] = tuple(float(v) for v in values)
        object.__setattr__(self, "cells", normalized)
        object.__setattr__(self, "subject_id", str(self.subject_id))

    def n_values(self, marker: int, time: int) -> int:
        return len(self.cells.get((marker, time), ()))


@dataclass(frozen=True)
class ValidationIssue:
    message: str
    group: str | None = None
    subject_id: str | None = None

    def __str__(self) -> str:
        where = []
        if self.group:
            where.append(self.group)
        if self.subject_id is not None:
            where.append(f"subject {self.subject_id}")
        prefix = " ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "dataset valid"
        return "\n".join(str(issue) for issue in self.issues)


@dataclass(frozen=True)
class Stratum:
    """Pooled measurements for one (marker, times) slice of one group.

    ``values`` keeps subject order, ``subjects`` maps each value to its
    0-based subject row, ``counts`` gives per-subject cluster sizes within
    the stratum, and ``sorted_values`` backs the empirical survival curve.
    """

    values: np.ndarray
    subjects: np.ndarray
    counts: np.ndarray
    sorted_values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def n_subjects(self) -> int:
        return int(self.counts.size)


class MarkerDataset:
    """Immutable container for a two-group clustered marker study."""

    def __init__(self, diseased, nondiseased, n_markers: int, n_times: int = 1):
        if n_markers < 1 or n_times < 1:
            raise ValueError("n_markers and n_times must be at least 1")
        self.diseased: tuple[SubjectRecord, ...] = tuple(
            rec if isinstance(rec, SubjectRecord) else SubjectRecord(*rec) for rec in diseased
        )
        self.nondiseased: tuple[SubjectRecord, ...] = tuple(
            rec if isinstance(rec, SubjectRecord) else SubjectRecord(*rec) for rec in nondiseased
        )
        self.n_markers = int(n_markers)
        self.n_times = int(n_times)
        self._strata: dict[tuple[str, int, int | None], Stratum] = {}
        self._build_strata()

    # -- construction helpers -------------------------------------------

    def _build_strata(self) -> None:
        for group_name, records in (("diseased", self.diseased), ("nondiseased", self.nondiseased)):
            n_subj = len(records)
            for marker in range(1, self.n_markers + 1):
                per_time: list[tuple[np.ndarray, np.ndarray]] = []
                for time in range(1, self.n_times + 1):
                    vals: list[float] = []
                    subj: list[int] = []
                    for idx, rec in enumerate(records):
                        cell = rec.cells.get((marker, time), ())
                        vals.extend(cell)
                        subj.extend([idx] * len(cell))
                    v = np.asarray(vals, dtype=float)
                    s = np.asarray(subj, dtype=np.intp)
                    per_time.append((v, s))
                    self._strata[(group_name, marker, time)] = _make_stratum(v, s, n_subj)
                if self.n_times == 1:
                    pooled = self._strata[(group_name, marker, 1)]
                else:
                    v = np.concatenate([v for v, _ in per_time]) if per_time else np.empty(0)
                    s = np.concatenate([s for _, s in per_time]) if per_time else np.empty(0, np.intp)
                    pooled = _make_stratum(v, s, n_subj)
                self._strata[(group_name, marker, None)] = pooled

    # -- accessors -------------------------------------------------------

    @property
    def n_diseased(self) -> int:
        return len(self.diseased)

    @property
    def n_nondiseased(self) -> int:
        return len(self.nondiseased)

    def stratum(self, group: str, marker: int, time: int | None = None) -> Stratum:
        if group not in ("diseased", "nondiseased"):
            raise ValueError(f"group must be 'diseased' or 'nondiseased', got {group!r}")
        if not 1 <= marker <= self.n_markers:
            raise ValueError(f"marker {marker} outside 1..{self.n_markers}")
        if time is not None and not 1 <= time <= self.n_times:
            raise ValueError(f"time {time} outside 1..{self.n_times}")
        return self._strata[(group, marker, time)]

    def resample(self, diseased_idx, nondiseased_idx) -> "MarkerDataset":
        """New dataset from positional subject draws (used by the bootstrap)."""
        return MarkerDataset(
            [self.diseased[i] for i in diseased_idx],
            [self.nondiseased[j] for j in nondiseased_idx],
            self.n_markers,
            self.n_times,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkerDataset):
            return NotImplemented
        return (
            self.n_markers == other.n_markers
            and self.n_times == other.n_times
            and self.diseased == other.diseased
            and self.nondiseased == other.nondiseased
        )


def _make_stratum(values: np.ndarray, subjects: np.ndarray, n_subjects: int) -> Stratum:
    counts = np.bincount(subjects, minlength=n_subjects).astype(np.intp) if n_subjects else np.zeros(0, np.intp)
    return Stratum(
        values=values,
        subjects=subjects,
        counts=counts,
        sorted_values=np.sort(values),
    )


def validate(dataset: MarkerDataset) -> ValidationReport:
    """List every structural violation; does not raise.

    Estimators assume a dataset that validates cleanly: each group non-empty
    and every (marker, time) cell of every subject holding at least one
    finite value with in-range indices.
    """
    issues: list[ValidationIssue] = []
    if dataset.n_diseased == 0:
        issues.append(ValidationIssue("no diseased subjects"))
    if dataset.n_nondiseased == 0:
        issues.append(ValidationIssue("no non-diseased subjects"))
    for group_name, records in (("diseased", dataset.diseased), ("nondiseased", dataset.nondiseased)):
        for rec in records:
            for (marker, time), values in rec.cells.items():
                if not 1 <= marker <= dataset.n_markers:
                    issues.append(ValidationIssue(
                        f"marker index {marker} outside 1..{dataset.n_markers}",
                        group_name, rec.subject_id))
                if not 1 <= time <= dataset.n_times:
                    issues.append(ValidationIssue(
                        f"time index {time} outside 1..{dataset.n_times}",
                        group_name, rec.subject_id))
                for v in values:
                    if not np.isfinite(v):
                        issues.append(ValidationIssue(
                            f"non-finite value in cell (marker {marker}, time {time})",
                            group_name, rec.subject_id))
                        break
            for marker in range(1, dataset.n_markers + 1):
                for time in range(1, dataset.n_times + 1):
                    if rec.n_values(marker, time) == 0:
                        issues.append(ValidationIssue(
                            f"empty cell (marker {marker}, time {time})",
                            group_name, rec.subject_id))
    return ValidationReport(tuple(issues))


def pooled_counts(dataset: MarkerDataset, marker: int) -> tuple[int, int]:
    """Total measurement counts (diseased, non-diseased) for one marker,
    pooled over subjects, replicates and times."""
    return (
        dataset.stratum("diseased", marker).n,
        dataset.stratum("nondiseased", marker).n,
    )


# -- CSV serialization ---------------------------------------------------


def read_dataset_csv(source) -> MarkerDataset:
    """Read the canonical long-format CSV.

    Columns: ``subject_id,status,marker,time,replicate,value`` with status
    ``D`` or ``ND`` and 1-based integer indices.  Marker and time counts are
    inferred from the maxima present.  Structural problems raise
    :class:`DataFormatError` carrying the offending line number; cell-level
    completeness is checked separately by :func:`validate`.
    """
    close_after = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        handle = open(source, "r", encoding="utf-8", newline="")
        close_after = True
    else:
        handle = source
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file, expected header "
                                  + ",".join(CSV_HEADER), line=1) from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise DataFormatError(
                f"bad header {','.join(header)!r}, expected {','.join(CSV_HEADER)}", line=1)

        # (group, subject_id) -> (marker, time) -> {replicate: value}
        cells: dict[tuple[str, str], dict[tuple[int, int], dict[int, float]]] = {}
        order: dict[str, list[str]] = {"diseased": [], "nondiseased": []}
        max_marker = 0
        max_time = 0
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(CSV_HEADER):
                raise DataFormatError(
                    f"expected {len(CSV_HEADER)} fields, got {len(row)}", line=line_no)
            subject_id, status, marker_s, time_s, rep_s, value_s = (f.strip() for f in row)
            if status not in _STATUS_TOKENS:
                raise DataFormatError(
                    f"status must be 'D' or 'ND', got {status!r}", line=line_no)
            group = _STATUS_TOKENS[status]
            try:
                marker = int(marker_s)
                time = int(time_s)
                replicate = int(rep_s)
            except ValueError:
                raise DataFormatError(
                    f"marker/time/replicate must be integers, got "
                    f"({marker_s!r}, {time_s!r}, {rep_s!r})", line=line_no) from None
            if marker < 1 or time < 1 or replicate < 1:
                raise DataFormatError(
                    "marker, time and replicate are 1-based and must be >= 1", line=line_no)
            try:
                value = float(value_s)
            except ValueError:
                raise DataFormatError(f"bad value {value_s!r}", line=line_no) from None
            key = (group, subject_id)
            if key not in cells:
                cells[key] = {}
                order[group].append(subject_id)
            reps = cells[key].setdefault((marker, time), {})
            if replicate in reps:
                raise DataFormatError(
                    f"duplicate replicate {replicate} for subject {subject_id!r} "
                    f"(marker {marker}, time {time})", line=line_no)
            reps[replicate] = value
            max_marker = max(max_marker, marker)
            max_time = max(max_time, time)

        if not cells:
            raise DataFormatError("no data rows", line=2)

        groups: dict[str, list[SubjectRecord]] = {}
        for group in ("diseased", "nondiseased"):
            records = []
            for subject_id in order[group]:
                raw = cells[(group, subject_id)]
                rec_cells = {
                    cell: tuple(v for _, v in sorted(reps.items()))
                    for cell, reps in raw.items()
                }
                records.append(SubjectRecord(subject_id, rec_cells))
            groups[group] = records
        return MarkerDataset(groups["diseased"], groups["nondiseased"],
                             n_markers=max_marker, n_times=max_time)
    finally:
        if close_after:
            handle.close()


def write_dataset_csv(dataset: MarkerDataset, target) -> None:
    """Write the canonical CSV; inverse of :func:`read_dataset_csv`."""
    close_after = False
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        handle = open(target, "w", encoding="utf-8", newline="")
        close_after = True
    else:
        handle = target
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for status, records in (("D", dataset.diseased), ("ND", dataset.nondiseased)):
            for rec in records:
                for (marker, time) in sorted(rec.cells):
                    for replicate, value in enumerate(rec.cells[(marker, time)], start=1):
                        writer.writerow(
                            [rec.subject_id, status, marker, time, replicate, repr(value)])
    finally:
        if close_after:
            handle.close()


def dataset_to_csv_text(dataset: MarkerDataset) -> str:
    buffer = io.StringIO()
    write_dataset_csv(dataset, buffer)
    return buffer.getvalue()
