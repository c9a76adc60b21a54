"""Scan records, the JSONL scan format, and train/test splitting."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from floorgraph.errors import DuplicateRecordId, InsufficientLabels, ParseError


@dataclass(frozen=True)
class ScanEntry:
    mac: str
    rss_dbm: float

    def __post_init__(self):
        if not self.mac:
            raise ValueError("empty MAC")
        if not math.isfinite(self.rss_dbm):
            raise ValueError(f"non-finite RSS for {self.mac}")


@dataclass(frozen=True)
class ScanRecord:
    record_id: str
    entries: tuple[ScanEntry, ...]
    floor_label: str | None = None

    def __post_init__(self):
        if not self.entries:
            raise ValueError(f"record {self.record_id} has no entries")
        macs = [e.mac for e in self.entries]
        if len(set(macs)) != len(macs):
            raise ValueError(f"record {self.record_id} repeats a MAC")

    @classmethod
    def from_pairs(
        cls, record_id: str, pairs: Iterable[tuple[str, float]], floor_label: str | None = None
    ) -> "ScanRecord":
        """Build a record, averaging the RSS of a MAC reported more than once."""
        sums: dict[str, list[float]] = {}
        for mac, rss in pairs:
            sums.setdefault(mac, []).append(float(rss))
        entries = tuple(ScanEntry(mac, sum(v) / len(v)) for mac, v in sums.items())
        return cls(record_id, entries, floor_label)

    @property
    def macs(self) -> tuple[str, ...]:
        return tuple(e.mac for e in self.entries)

    def without_label(self) -> "ScanRecord":
        return replace(self, floor_label=None)


@dataclass(frozen=True)
class Dataset:
    records: tuple[ScanRecord, ...] = ()
    label_inventory: dict[str, int] = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[str] = set()
        for r in self.records:
            if r.record_id in seen:
                raise DuplicateRecordId(r.record_id)
            seen.add(r.record_id)
        inventory = Counter(r.floor_label for r in self.records if r.floor_label is not None)
        object.__setattr__(self, "label_inventory", dict(sorted(inventory.items())))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ScanRecord]:
        return iter(self.records)

    @property
    def floors(self) -> list[str]:
        return list(self.label_inventory)


def parse_record(obj: object, line: int | None = None) -> ScanRecord:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line)
    record_id = obj.get("record_id")
    if not isinstance(record_id, str) or not record_id:
        raise ParseError("missing or invalid 'record_id'", line)
    floor = obj.get("floor")
    if floor is not None and not isinstance(floor, str):
        raise ParseError("'floor' must be a string", line)
    scan = obj.get("scan")
    if not isinstance(scan, list) or not scan:
        raise ParseError("missing or empty 'scan'", line)
    pairs = []
    for item in scan:
        if not isinstance(item, dict):
            raise ParseError("scan entries must be objects", line)
        mac, rss = item.get("mac"), item.get("rss")
        if not isinstance(mac, str) or not mac:
            raise ParseError("scan entry without 'mac'", line)
        if isinstance(rss, bool) or not isinstance(rss, (int, float)) or not math.isfinite(rss):
            raise ParseError(f"bad 'rss' for {mac}", line)
        pairs.append((mac, rss))
    return ScanRecord.from_pairs(record_id, pairs, floor)


def iter_jsonl(lines: Iterable[str]) -> Iterator[ScanRecord]:
    for lineno, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", lineno) from None
        yield parse_record(obj, lineno)


def load_jsonl(path: str | Path) -> Dataset:
    """Read a whole scan file. Any malformed line rejects the file."""
    with open(path, encoding="utf-8") as fh:
        return Dataset(tuple(iter_jsonl(fh)))


def record_to_json(record: ScanRecord) -> dict:
    obj: dict = {"record_id": record.record_id}
    if record.floor_label is not None:
        obj["floor"] = record.floor_label
    obj["scan"] = [{"mac": e.mac, "rss": e.rss_dbm} for e in record.entries]
    return obj


def write_jsonl(dataset: Dataset | Iterable[ScanRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in dataset:
            fh.write(json.dumps(record_to_json(record)) + "\n")


def split(
    dataset: Dataset, train_fraction: float, labels_per_floor: int, seed: int
) -> tuple[Dataset, Dataset]:
    """Random global train/test split with per-floor label retention in train.

    Within the train part exactly ``labels_per_floor`` randomly chosen records
    per floor keep their label; every other train label is stripped. Test
    records are left untouched.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    if labels_per_floor < 0:
        raise ValueError("labels_per_floor must be non-negative")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    n_train = int(round(train_fraction * len(dataset)))
    train = [dataset.records[k] for k in order[:n_train]]
    test = [dataset.records[k] for k in order[n_train:]]

    by_floor: dict[str, list[int]] = {}
    for pos, r in enumerate(train):
        if r.floor_label is not None:
            by_floor.setdefault(r.floor_label, []).append(pos)
    keep: set[int] = set()
    for floor in sorted(by_floor):
        candidates = by_floor[floor]
        if len(candidates) < labels_per_floor:
            raise InsufficientLabels(
                f"floor {floor!r} has {len(candidates)} labeled train records, "
                f"{labels_per_floor} requested"
            )
        picked = rng.choice(len(candidates), size=labels_per_floor, replace=False)
        keep.update(candidates[p] for p in picked)
    train = [r if pos in keep else r.without_label() for pos, r in enumerate(train)]
    return Dataset(tuple(train)), Dataset(tuple(test))
