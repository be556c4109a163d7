"""Benchmark pose logs: per-action object poses from robot-dialog datasets.

Rows pair an integer action code with the 6-vector pose the manipulated
object ended in.  Rotation conventions vary between datasets, so poses are
treated as opaque 6-vectors; the only semantic probe offered is the
all-zero test used to show that some actions bind their pose entirely to
the object's own state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

EXPECTED_HEADER = ["action_id", "pose", "file", "action_change"]


class SchemaMismatch(ValueError):
    """CSV header does not match the expected pose-log schema."""


class MalformedRow(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class PoseRecord:
    action_code: int
    pose: tuple[float, float, float, float, float, float]
    file_id: str
    action_change: bool

    def __post_init__(self):
        if len(self.pose) != 6:
            raise ValueError("pose must have exactly 6 components")


def _parse_pose(text: str, line_no: int) -> tuple[float, ...]:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise MalformedRow(line_no, f"pose is not a bracketed list: {text!r}")
    try:
        values = tuple(float(p) for p in body[1:-1].split(",") if p.strip())
    except ValueError as exc:
        raise MalformedRow(line_no, f"non-numeric pose component: {exc}")
    if len(values) != 6:
        raise MalformedRow(line_no, f"pose has {len(values)} components, expected 6")
    return values


def load_pose_csv(path: Union[str, Path]) -> list[PoseRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty file, expected a header row")
        if header != EXPECTED_HEADER:
            raise SchemaMismatch(f"header {header!r} != {EXPECTED_HEADER!r}")
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(line_no, f"expected 4 columns, got {len(row)}")
            try:
                code = int(row[0])
            except ValueError:
                raise MalformedRow(line_no, f"non-integer action code {row[0]!r}")
            flag = row[3].strip().upper()
            if flag not in ("TRUE", "FALSE"):
                raise MalformedRow(line_no, f"action_change must be TRUE/FALSE, got {row[3]!r}")
            records.append(
                PoseRecord(
                    action_code=code,
                    pose=_parse_pose(row[1], line_no),
                    file_id=row[2],
                    action_change=flag == "TRUE",
                )
            )
    return records


def save_pose_csv(records: Sequence[PoseRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EXPECTED_HEADER)
        for r in records:
            pose = "[" + ", ".join(repr(c) for c in r.pose) + "]"
            writer.writerow([r.action_code, pose, r.file_id, "TRUE" if r.action_change else "FALSE"])


def group_by_file(records: Iterable[PoseRecord]) -> list[tuple[str, list[int]]]:
    """Group action codes by source file, preserving within-file order."""
    order: list[str] = []
    groups: dict[str, list[int]] = {}
    for r in records:
        if r.file_id not in groups:
            groups[r.file_id] = []
            order.append(r.file_id)
        groups[r.file_id].append(r.action_code)
    return [(fid, groups[fid]) for fid in order]


def check_zero_pose_binding(
    records: Iterable[PoseRecord], codes: set[int]
) -> tuple[bool, list[PoseRecord]]:
    """Check whether every record for the given codes has an all-zero pose.

    Returns (all_zero, counterexamples).  An all-zero pose means the action
    is bound to the object's own state rather than to free coordinates.
    """
    bad = [r for r in records if r.action_code in codes and any(c != 0.0 for c in r.pose)]
    return not bad, bad
