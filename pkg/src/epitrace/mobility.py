"""Synthetic visit-record generation and CSV ingest.

A visit record says "device d dwelt at venue p during hour h of day t".
Hour buckets are the finest granularity anything downstream uses, so dwell
times are discretized at generation time. The generator is a stand-in for a
proprietary mobility feed: per-person daily visit counts are Poisson, venue
choice follows a rank-based power-law popularity distribution, and hours are
uniform. Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csvio import parse_int_fields, read_rows, write_csv
from .errors import ConfigError, ValidationError

VISIT_HEADER = ("device_id", "poi_id", "day", "hour")


@dataclass(frozen=True)
class VisitRecord:
    """One device's dwell at a POI within one hour bucket."""

    device_id: int
    poi_id: int
    day: int
    hour: int


@dataclass
class MobilityConfig:
    n_people: int = 5000
    n_pois: int = 500
    horizon_days: int = 30
    visits_per_person_per_day: float = 1.0
    poi_popularity_exponent: float = 0.5
    rng_seed: int = 0

    def validate(self) -> None:
        if self.n_people < 1 or self.n_pois < 1 or self.horizon_days < 1:
            raise ConfigError("n_people, n_pois and horizon_days must all be >= 1")
        if self.visits_per_person_per_day < 0:
            raise ConfigError("visits_per_person_per_day must be >= 0")
        # The exponent only has to keep the finite weight vector normalizable,
        # so any positive value is legal; values below 1 spread popularity
        # across venues, values above 1 concentrate it at the top ranks.
        if self.poi_popularity_exponent <= 0:
            raise ConfigError("poi_popularity_exponent must be > 0")


def poi_popularity_weights(n_pois: int, exponent: float) -> np.ndarray:
    """Normalized rank-based power-law weights; rank 1 is the most popular."""
    ranks = np.arange(1, n_pois + 1, dtype=np.float64)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def generate_visits(config: MobilityConfig) -> list[VisitRecord]:
    """Generate a synthetic visit dataset.

    Per day, each person draws Poisson(visits_per_person_per_day) visits;
    each visit picks a POI from the popularity distribution and a uniform
    hour in [0, 24). Duplicate (device, poi, day, hour) tuples produced by
    colliding draws are dropped to keep the dataset's uniqueness invariant.
    Output is sorted by (day, device_id, poi_id, hour).
    """
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    weights = poi_popularity_weights(config.n_pois, config.poi_popularity_exponent)

    visits: list[VisitRecord] = []
    person_ids = np.arange(config.n_people, dtype=np.int64)
    key_span = config.n_pois * 24
    for day in range(config.horizon_days):
        counts = rng.poisson(config.visits_per_person_per_day, config.n_people)
        total = int(counts.sum())
        if total == 0:
            continue
        devices = np.repeat(person_ids, counts)
        pois = rng.choice(config.n_pois, size=total, p=weights)
        hours = rng.integers(0, 24, size=total)
        keys = devices * key_span + pois * 24 + hours
        keys = np.unique(keys)  # dedupe + sort by (device, poi, hour)
        devices = keys // key_span
        pois = (keys % key_span) // 24
        hours = keys % 24
        visits.extend(
            VisitRecord(int(d), int(p), day, int(h))
            for d, p, h in zip(devices, pois, hours)
        )
    return visits


def write_visits(path: str, visits: list[VisitRecord], comment: str | None = None) -> None:
    write_csv(
        path,
        VISIT_HEADER,
        ((v.device_id, v.poi_id, v.day, v.hour) for v in visits),
        comment=comment,
    )


def read_visits(path: str) -> list[VisitRecord]:
    """Parse a visit CSV, preserving row order.

    Raises ParseError (with line number) on malformed rows and
    ValidationError on out-of-range fields or duplicate tuples.
    """
    visits: list[VisitRecord] = []
    seen: set[tuple[int, int, int, int]] = set()
    for lineno, fields in read_rows(path, VISIT_HEADER):
        device, poi, day, hour = parse_int_fields(path, lineno, fields, 4)
        if day < 0:
            raise ValidationError(f"{path}:{lineno}: day must be >= 0")
        if not 0 <= hour <= 23:
            raise ValidationError(f"{path}:{lineno}: hour must be in [0, 23]")
        key = (device, poi, day, hour)
        if key in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate visit tuple {key}")
        seen.add(key)
        visits.append(VisitRecord(device, poi, day, hour))
    return visits
