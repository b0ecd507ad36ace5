"""
Cross-seed comparison of strategies.
Aggregates run reports per configuration label into mean and standard
deviation tables, written as CSV and JSON.
"""
import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .report import METRIC_FIELDS, MetricsReport


@dataclass(frozen=True)
class ComparisonRow:
    """Mean and population standard deviation of every metric for one label"""
    label: str
    runs: int
    stats: Dict[str, Tuple[float, float]]

    def mean(self, metric: str) -> float:
        return self.stats[metric][0]

    def std(self, metric: str) -> float:
        return self.stats[metric][1]


def compare_strategies(reports: Mapping[str, Sequence[MetricsReport]]) -> List[ComparisonRow]:
    """
    Aggregate reports per label.

    Args:
        reports: Label -> reports of the runs (one per seed)

    Returns:
        One row per label, sorted by label
    """
    rows = []
    for label in sorted(reports):
        runs = reports[label]
        if not runs:
            continue
        stats = {}
        for metric in METRIC_FIELDS:
            values = np.array([r.metric(metric) for r in runs], dtype=float)
            stats[metric] = (float(values.mean()), float(values.std()))
        rows.append(ComparisonRow(label, len(runs), stats))
    return rows


def comparison_columns() -> List[str]:
    columns = ["label", "runs"]
    for metric in METRIC_FIELDS:
        columns += [f"{metric}_mean", f"{metric}_std"]
    return columns


def write_comparison_csv(rows: Sequence[ComparisonRow], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(comparison_columns())
        for row in rows:
            values: List[object] = [row.label, row.runs]
            for metric in METRIC_FIELDS:
                values += [repr(row.mean(metric)), repr(row.std(metric))]
            writer.writerow(values)


def write_comparison_json(rows: Sequence[ComparisonRow], path: Union[str, Path]) -> None:
    doc = {
        row.label: {
            "runs": row.runs,
            "metrics": {m: {"mean": row.mean(m), "std": row.std(m)} for m in METRIC_FIELDS},
        }
        for row in rows
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
