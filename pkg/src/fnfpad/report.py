"""Feature CSV tables and the versioned JSON run report.

CSV layout: ``pair_id,label,pai_type,<feature names...>,flags``. Numbers use
Python's shortest round-trip ``repr``; ``flags`` lists flagged names joined
by ``;`` (reasons live in the JSON report). Rows are sorted by pair_id.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .features import FEATURE_NAMES, FeatureVector

REPORT_SCHEMA = "fnfpad-report/1"
META_COLUMNS = ("pair_id", "label", "pai_type")


class TableError(ValueError):
    pass


def features_csv(vectors: list[FeatureVector]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*META_COLUMNS, *FEATURE_NAMES, "flags"])
    for v in sorted(vectors, key=lambda v: v.pair_id):
        writer.writerow([v.pair_id, v.label, v.pai_type, *(repr(float(x)) for x in v.values), ";".join(v.flags)])
    return buf.getvalue()


@dataclass(frozen=True)
class FeatureTable:
    pair_ids: tuple[str, ...]
    labels: tuple[str, ...]
    pai_types: tuple[str, ...]
    names: tuple[str, ...]
    values: np.ndarray  # flagged entries are NaN
    flags: tuple[tuple[str, ...], ...]

    @property
    def is_genuine(self) -> np.ndarray:
        return np.array([lab == "genuine" for lab in self.labels], dtype=bool)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


def read_features_csv(path) -> FeatureTable:
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise TableError(f"{path}: empty feature table")
    header = rows[0]
    if tuple(header[:3]) != META_COLUMNS or header[-1] != "flags" or len(header) < 5:
        raise TableError(f"{path}: header must be {','.join(META_COLUMNS)},<features>,flags")
    names = tuple(header[3:-1])
    ids, labels, pais, flags, data = [], [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise TableError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        if row[1] not in ("genuine", "spoof"):
            raise TableError(f"{path}: line {lineno}: label must be genuine or spoof")
        try:
            vals = np.array([float(x) for x in row[3:-1]])
        except ValueError:
            raise TableError(f"{path}: line {lineno}: non-numeric feature value") from None
        flagged = tuple(f for f in row[-1].split(";") if f)
        for f in flagged:
            if f in names:
                vals[names.index(f)] = np.nan
        ids.append(row[0])
        labels.append(row[1])
        pais.append(row[2])
        flags.append(flagged)
        data.append(vals)
    values = np.vstack(data) if data else np.zeros((0, len(names)))
    return FeatureTable(tuple(ids), tuple(labels), tuple(pais), names, values, tuple(flags))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_report(command: str, deterministic: bool, **sections) -> dict:
    """Skeleton report; ``generated`` is omitted (null) in deterministic mode."""
    from . import __version__

    stamp = None if deterministic else datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = {"schema": REPORT_SCHEMA, "tool_version": __version__, "command": command, "generated": stamp}
    doc.update(sections)
    return doc


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"
