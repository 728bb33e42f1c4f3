"""Result serialization: run manifests, JSON result files and region CSVs.

Everything written here is a pure function of its inputs. The manifest
timestamp comes from ``SOURCE_DATE_EPOCH`` when that is set, so repeated
runs can be made byte-identical.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .optimizer import OptimizedDesign, RateEnergyPoint

CSV_COLUMNS = ("rate_bits", "rate_per_tone", "zdc", "rho", "iterations", "status")


def run_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch
              else datetime.now(timezone.utc))
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class RunManifest:
    scenario: str
    verb: str
    overrides: dict
    seed: int
    version: str = __version__
    timestamp: str = field(default_factory=run_timestamp)

    def to_dict(self) -> dict:
        return asdict(self)


def _clean(obj):
    """Make numpy values JSON-safe; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")
    return path


def design_payload(result: OptimizedDesign) -> dict:
    return {
        "design": result.design.to_dict(),
        "zdc": result.zdc,
        "rate_bits": result.rate,
        "rate_audit_bits": result.rate_audit,
        "rate_floor_bits": result.rate_floor,
        "rho_bar": result.rho_bar,
        "average_power_watt": result.power,
        "iterations": result.iterations,
        "status": result.status,
        "trajectory": list(result.trajectory),
        "iterate_rates": list(result.iterate_rates),
        "iterate_powers": list(result.iterate_powers),
    }


def point_row(p: RateEnergyPoint, normalize: bool = False) -> list:
    rate = p.rate_per_tone if normalize else p.rate
    return [_fmt(rate), _fmt(p.rate_per_tone), _fmt(p.zdc), _fmt(p.rho), p.iterations, p.status]


def _fmt(x: float) -> str:
    # repr gives the shortest round-tripping form, so output is stable and lossless
    return repr(float(x)) if np.isfinite(x) else ""


def write_region_csv(path, points: Sequence[RateEnergyPoint], normalize: bool = False) -> Path:
    """One row per boundary point; RFC 4180 layout (CRLF line ends, minimal quoting)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_COLUMNS)
        for p in points:
            w.writerow(point_row(p, normalize))
    return path


def read_region_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
