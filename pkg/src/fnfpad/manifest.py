"""JSON-lines manifest of paired captures."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .imgcore import PAI_TYPES, CaptureLabel

FIELDS = ("pair_id", "subject", "session", "label", "pai_type", "flash", "nonflash")


class ManifestError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ManifestEntry:
    label: CaptureLabel
    flash: Path
    nonflash: Path
    line: int


def _parse_record(raw: str, lineno: int, base: Path) -> ManifestEntry:
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ManifestError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise ManifestError(lineno, "record must be a JSON object")
    missing = [f for f in FIELDS if f not in rec]
    if missing:
        raise ManifestError(lineno, f"missing field(s): {', '.join(missing)}")
    if rec["pai_type"] not in PAI_TYPES:
        raise ManifestError(lineno, f"unknown pai_type {rec['pai_type']!r}")
    if not isinstance(rec["session"], int) or isinstance(rec["session"], bool):
        raise ManifestError(lineno, "session must be an integer")
    for key in ("pair_id", "subject", "flash", "nonflash"):
        if not isinstance(rec[key], str) or not rec[key]:
            raise ManifestError(lineno, f"{key} must be a non-empty string")
    try:
        label = CaptureLabel(
            pair_id=rec["pair_id"], subject_id=rec["subject"], session=rec["session"],
            label=rec["label"], pai_type=rec["pai_type"],
        )
    except ValueError as exc:
        raise ManifestError(lineno, str(exc)) from None
    return ManifestEntry(label, base / rec["flash"], base / rec["nonflash"], lineno)


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest; relative image paths resolve against its directory.

    Raises :class:`ManifestError` carrying the 1-based line number. File
    existence is not checked here.
    """
    path = Path(path)
    base = path.parent
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            entry = _parse_record(raw, lineno, base)
            pid = entry.label.pair_id
            if pid in seen:
                raise ManifestError(lineno, f"duplicate pair_id {pid!r} (first on line {seen[pid]})")
            seen[pid] = lineno
            entries.append(entry)
    return entries


def write_manifest(path, records: list[dict]) -> None:
    lines = [json.dumps({k: r[k] for k in FIELDS}, sort_keys=False) for r in sorted(records, key=lambda r: r["pair_id"])]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
