"""Synthetic multi-floor buildings with log-distance path loss.

APs are scattered over a 50 m x 50 m plan on every floor. A record picks a
floor and a position uniformly; the RSS of AP k is

    tx_power - 10 n log10(d) - floor_attenuation |floor delta| + N(0, sigma)

with ``d`` the 3-D distance (vertical offset floor_height * |floor delta|).
APs below the detection threshold are dropped and the scan keeps only the
strongest ``max_aps_per_scan``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from floorgraph.dataset import Dataset, ScanEntry, ScanRecord
from floorgraph.errors import DegenerateSpec

PLAN_SIZE_M = 50.0
MAX_RESAMPLES = 100


@dataclass(frozen=True)
class BuildingSpec:
    floors: int = 3
    aps_per_floor: int = 15
    records_per_floor: int = 200
    floor_height_m: float = 3.5
    floor_attenuation_db: float = 15.0
    path_loss_exponent: float = 3.0
    tx_power_dbm: float = -30.0
    noise_sigma_db: float = 4.0
    detection_threshold_dbm: float = -95.0
    max_aps_per_scan: int = 40
    seed: int = 0

    def __post_init__(self):
        for name in ("floors", "aps_per_floor", "records_per_floor", "max_aps_per_scan"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("floor_height_m", "floor_attenuation_db", "path_loss_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.noise_sigma_db < 0:
            raise ValueError("noise_sigma_db must be non-negative")


def floor_label(k: int) -> str:
    return f"F{k}"


def mac_label(floor: int, k: int) -> str:
    return f"ap-{floor:02d}-{k:03d}"


def rss_at(spec: BuildingSpec, ap_xy, ap_floor, xy, floor, noise) -> np.ndarray:
    """Path-loss RSS from every AP at a point (noise added by the caller's draw)."""
    dfloor = np.abs(ap_floor - floor)
    horiz = np.linalg.norm(ap_xy - xy, axis=-1)
    d3d = np.sqrt(horiz**2 + (spec.floor_height_m * dfloor) ** 2)
    d3d = np.maximum(d3d, 1.0)  # model is referenced at 1 m
    return (
        spec.tx_power_dbm
        - 10.0 * spec.path_loss_exponent * np.log10(d3d)
        - spec.floor_attenuation_db * dfloor
        + noise
    )


def generate(spec: BuildingSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    n_aps = spec.floors * spec.aps_per_floor
    ap_floor = np.repeat(np.arange(spec.floors), spec.aps_per_floor)
    ap_xy = rng.uniform(0.0, PLAN_SIZE_M, (n_aps, 2))
    macs = [mac_label(f, k % spec.aps_per_floor) for k, f in enumerate(ap_floor)]

    n_records = spec.floors * spec.records_per_floor
    floors = rng.permutation(np.repeat(np.arange(spec.floors), spec.records_per_floor))
    width = len(str(n_records - 1))
    records = []
    for r, floor in enumerate(floors):
        for _ in range(MAX_RESAMPLES):
            xy = rng.uniform(0.0, PLAN_SIZE_M, 2)
            noise = rng.normal(0.0, spec.noise_sigma_db, n_aps) if spec.noise_sigma_db else 0.0
            rss = rss_at(spec, ap_xy, ap_floor, xy, floor, noise)
            seen = np.flatnonzero(rss >= spec.detection_threshold_dbm)
            if seen.size:
                break
        else:
            raise DegenerateSpec(f"record {r} detected no AP after {MAX_RESAMPLES} tries")
        strongest = seen[np.argsort(-rss[seen], kind="stable")[: spec.max_aps_per_scan]]
        entries = tuple(ScanEntry(macs[k], round(float(rss[k]), 2)) for k in strongest)
        records.append(ScanRecord(f"s{r:0{width}d}", entries, floor_label(int(floor))))
    return Dataset(tuple(records))
