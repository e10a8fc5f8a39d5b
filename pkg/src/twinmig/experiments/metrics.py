"""Metric records, run summaries, and deterministic file emission.

The delimited table has exactly the columns run_id,seed,step,metric,value,
units (comma separated, newline terminated, ASCII only). Float values use
repr(), the shortest round-tripping form, so identical records always emit
identical bytes. Wall-clock time never enters the persisted summary, which
keeps reruns byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

CSV_HEADER = "run_id,seed,step,metric,value,units"

FORMATS = ("delimited-table", "structured-document")


@dataclass(frozen=True)
class MetricsRecord:
    run_id: str
    seed: int
    step: int
    metric: str
    value: float
    units: str

    def validate(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(
                f"non-finite value in record (run_id={self.run_id}, seed={self.seed}, "
                f"step={self.step}, metric={self.metric}): {self.value}"
            )
        for name in ("run_id", "metric", "units"):
            text = getattr(self, name)
            if not text.isascii():
                raise ValueError(f"record field {name}={text!r} is not ASCII")
            if "," in text or "\n" in text:
                raise ValueError(f"record field {name}={text!r} contains a delimiter")


@dataclass
class RunSummary:
    run_id: str
    mode: str
    config_hash: str
    seeds: list[int]
    per_seed: dict[str, dict[str, float]] = field(default_factory=dict)
    aggregates: dict[str, float] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    wall_clock_s: float | None = None

    def to_document(self) -> dict:
        """JSON-ready form; wall clock is dropped for reproducibility."""
        return {
            "run_id": self.run_id,
            "mode": self.mode,
            "config_hash": self.config_hash,
            "seeds": list(self.seeds),
            "per_seed": self.per_seed,
            "aggregates": self.aggregates,
            "artifacts": list(self.artifacts),
        }


def summarize_records(records: Iterable[MetricsRecord]) -> tuple[dict, dict]:
    """(per_seed, aggregates): mean/std per metric, population variance.

    Values are reduced with np.mean/np.std over float64 arrays in record
    order, so recomputation from the emitted table reproduces them exactly.
    """
    by_seed: dict[int, dict[str, list[float]]] = {}
    by_metric: dict[str, list[float]] = {}
    for r in records:
        by_seed.setdefault(r.seed, {}).setdefault(r.metric, []).append(r.value)
        by_metric.setdefault(r.metric, []).append(r.value)

    per_seed = {}
    for seed in sorted(by_seed):
        stats = {}
        for metric in sorted(by_seed[seed]):
            arr = np.asarray(by_seed[seed][metric], dtype=np.float64)
            stats[f"{metric}_mean"] = float(np.mean(arr))
            stats[f"{metric}_std"] = float(np.std(arr))
        per_seed[str(seed)] = stats
    aggregates = {}
    for metric in sorted(by_metric):
        arr = np.asarray(by_metric[metric], dtype=np.float64)
        aggregates[f"{metric}_mean"] = float(np.mean(arr))
        aggregates[f"{metric}_std"] = float(np.std(arr))
    return per_seed, aggregates


def _format_value(value: float) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return repr(int(value))
    return repr(float(value))


def emit_metrics(
    records: Iterable[MetricsRecord],
    fmt: str,
    path: str | Path,
    summary: RunSummary | None = None,
) -> Path:
    """Write records to ``path`` in one of FORMATS; returns the path.

    structured-document requires ``summary`` and mirrors RunSummary.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = list(records)
    for r in records:
        r.validate()

    if fmt == "delimited-table":
        lines = [CSV_HEADER]
        for r in records:
            lines.append(f"{r.run_id},{r.seed},{r.step},{r.metric},{_format_value(r.value)},{r.units}")
        payload = "\n".join(lines) + "\n"
        path.write_bytes(payload.encode("ascii"))
    elif fmt == "structured-document":
        if summary is None:
            raise ValueError("structured-document emission requires a RunSummary")
        doc = summary.to_document()
        doc["records"] = [
            {"run_id": r.run_id, "seed": r.seed, "step": r.step,
             "metric": r.metric, "value": r.value, "units": r.units}
            for r in records
        ]
        path.write_bytes((json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("ascii"))
    else:
        raise ValueError(f"unknown format '{fmt}', expected one of {FORMATS}")
    return path


def write_summary(summary: RunSummary, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(summary.to_document(), sort_keys=True, indent=2) + "\n"
    path.write_bytes(payload.encode("ascii"))
    return path


def parse_metrics_csv(path: str | Path) -> list[MetricsRecord]:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a metrics table (bad header)")
    out = []
    for line in lines[1:]:
        run_id, seed, step, metric, value, units = line.split(",")
        out.append(MetricsRecord(run_id, int(seed), int(step), metric, float(value), units))
    return out
