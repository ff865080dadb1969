"""Analysis report: the aggregated result of an exact pipeline run."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .constructions import BettiVector
from .exactgeom import BoxDomain, format_rational

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnalysisReport:
    architecture: tuple
    fingerprint: str
    box: BoxDomain
    betti: BettiVector
    region_count: int
    serra_bound: int
    binomial_bounds: tuple  # per k, s=0 variant
    complement_cell_bounds: tuple  # per k, #(k+1)-cells labeled positive
    predicted: Optional[BettiVector]
    euler: int
    euler_cells: int  # alternating cell count of the sublevel subcomplex
    oracle_beta0: Optional[int]
    timings: dict

    @property
    def bounds_satisfied(self) -> bool:
        if self.region_count > self.serra_bound:
            return False
        return all(b <= bound for b, bound in zip(self.betti.values, self.binomial_bounds))

    @property
    def predicted_agrees(self) -> Optional[bool]:
        if self.predicted is None:
            return None
        return self.betti.values == self.predicted.values

    @property
    def oracle_agrees(self) -> Optional[bool]:
        if self.oracle_beta0 is None:
            return None
        return self.betti.values[0] == self.oracle_beta0

    def to_json(self, include_timings: bool = False) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "architecture": list(self.architecture),
            "fingerprint": self.fingerprint,
            "box": {
                "lower": [format_rational(v) for v in self.box.lower],
                "upper": [format_rational(v) for v in self.box.upper],
            },
            "betti": list(self.betti.values),
            "region_count": self.region_count,
            "serra_bound": self.serra_bound,
            "binomial_bounds": list(self.binomial_bounds),
            "complement_cell_bounds": list(self.complement_cell_bounds),
            "predicted": None if self.predicted is None else list(self.predicted.values),
            "euler": self.euler,
            "euler_cells": self.euler_cells,
            "oracle_beta0": self.oracle_beta0,
            "bounds_satisfied": self.bounds_satisfied,
            "predicted_agrees": self.predicted_agrees,
            "oracle_agrees": self.oracle_agrees,
            # timings vary run to run; omitted by default so reports are
            # byte-stable for identical inputs
            "timings": dict(self.timings) if include_timings else None,
        }

    def dump(self, path: str, include_timings: bool = False):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(include_timings), f, indent=2, sort_keys=True)
            f.write("\n")
