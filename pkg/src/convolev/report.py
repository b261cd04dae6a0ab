"""Experiment reports serialised as CSV plus a JSON metadata sidecar."""
from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

CSV_COLUMNS = ("experiment", "n", "estimate", "stderr", "bound", "verdict")
VERDICTS = ("pass", "fail", "info")


def fmt(x) -> str:
    """Round-trip float formatting; ints and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return "" if x is None else str(x)


@dataclass
class ReportRow:
    experiment: str
    n: Union[int, float, str]
    estimate: float
    stderr: float = math.nan
    bound: float = math.nan
    verdict: str = "info"

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")


@dataclass
class ExperimentReport:
    """Rows of estimates with verdicts.

    ``claims`` maps each experiment label used in the rows to a sentence
    naming the property it checks.
    """

    name: str
    rows: list = field(default_factory=list)
    claims: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, experiment: str, n, estimate, stderr=math.nan, bound=math.nan,
            verdict: str = "info", claim: Optional[str] = None) -> ReportRow:
        row = ReportRow(experiment, n, estimate, stderr, bound, verdict)
        self.rows.append(row)
        if claim is not None:
            self.claims[experiment] = claim
        return row

    @property
    def passed(self) -> bool:
        return all(r.verdict != "fail" for r in self.rows)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.experiment, fmt(r.n), fmt(r.estimate), fmt(r.stderr), fmt(r.bound), r.verdict])

    def to_csv(self) -> str:
        import io

        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def save(self, out_dir: Union[str, Path], stem: Optional[str] = None) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        path = out / f"{stem}.csv"
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)
        meta = {"name": self.name, "claims": self.claims,
                "metadata": {k: _jsonable(v) for k, v in self.metadata.items()}}
        with open(out / f"{stem}.meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    def summary(self, stream=sys.stderr) -> None:
        for r in self.rows:
            print(f"{r.experiment:<40} n={fmt(r.n):<8} est={fmt(r.estimate):<24} "
                  f"bound={fmt(r.bound):<24} {r.verdict}", file=stream)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return fmt(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def mean_stderr(x: np.ndarray) -> tuple[float, float]:
    """Mean and standard error along axis 0 with compensated, fixed-order sums."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if x.ndim == 1:
        mu = math.fsum(x) / n
        var = math.fsum((x - mu) ** 2) / (n - 1) if n > 1 else math.nan
        return mu, math.sqrt(var / n)
    flat = x.reshape(n, -1)
    mus = np.array([math.fsum(c) / n for c in flat.T])
    var = np.array([math.fsum((c - m) ** 2) / (n - 1) if n > 1 else math.nan
                    for c, m in zip(flat.T, mus)])
    shape = x.shape[1:]
    return mus.reshape(shape), np.sqrt(var / n).reshape(shape)
