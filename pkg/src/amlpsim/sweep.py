"""Orchestration of the 32-configuration accuracy/error/power sweep.

The CSV files written here are the reproducibility contract: fractions are
printed as percentages with 4 decimal places and a '.' separator, rows are
newline-terminated, metadata and summaries live in '#' comment lines, and the
(optional) timestamp is the only line that varies between identical runs.
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .datapath import CYCLES_PER_IMAGE, NetworkModel, run_dataset
from .error_metrics import (
    CONFIG_COUNT,
    REFERENCE_ENVELOPE,
    ErrorReport,
    MetricsSummary,
    evaluate_config,
    summarize_all,
)
from .power_model import CostReport, savings_pct

SWEEP_COLUMNS = (
    "config,mask,accuracy,er_pct,mred_pct,nmed_pct,"
    "mult_cost,mac_cost,network_cost,network_saving_pct"
)
METRICS_COLUMNS = "config,er,mred,nmed,max_ed,mean_ed"


@dataclass(frozen=True)
class SweepRow:
    """One configuration's accuracy, multiplier error metrics, and costs."""

    config: int
    accuracy: float
    error: ErrorReport
    cost: CostReport

    @property
    def mask_bits(self) -> str:
        return f"{self.config:05b}"

    def csv_line(self) -> str:
        return (
            f"{self.config},{self.mask_bits},{100 * self.accuracy:.4f},"
            f"{100 * self.error.er:.4f},{100 * self.error.mred:.4f},"
            f"{100 * self.error.nmed:.4f},{self.cost.mult_cost},"
            f"{self.cost.mac_cost},{self.cost.network_cost_per_image},"
            f"{100 * self.cost.network_saving:.4f}"
        )


def _timestamp_line() -> str:
    return f"# generated: {time.strftime('%Y-%m-%d %H:%M:%S', time.gmtime())} UTC"


def run_sweep(
    model: NetworkModel,
    features: np.ndarray,
    labels: np.ndarray,
    out_path,
    *,
    timestamp: bool = True,
    log: Callable[[str], None] | None = None,
) -> list[SweepRow]:
    """Evaluate every configuration on the dataset and write the sweep CSV."""
    n_images = len(labels)
    rows = []
    for mask in range(CONFIG_COUNT):
        result = run_dataset(model, features, labels, mask)
        if result.total_cycles != CYCLES_PER_IMAGE * n_images:
            raise AssertionError(
                f"cycle accounting broke: {result.total_cycles} != 220 * {n_images}"
            )
        row = SweepRow(
            config=mask,
            accuracy=result.accuracy,
            error=evaluate_config(mask),
            cost=savings_pct(mask),
        )
        rows.append(row)
        if log is not None:
            log(
                f"config {mask:2d} (mask {row.mask_bits}): "
                f"accuracy {100 * row.accuracy:.4f}%  er {100 * row.error.er:.4f}%  "
                f"network saving {100 * row.cost.network_saving:.4f}%"
            )

    lines = ["# amlpsim sweep v1"]
    if timestamp:
        lines.append(_timestamp_line())
    lines += [
        f"# dataset: {n_images} images, {CYCLES_PER_IMAGE} cycles/image",
        "# multiplier error metrics are exhaustive over all 16384 operand pairs",
        "# power proxy: static gate-count model, abstract units, operand-independent",
        SWEEP_COLUMNS,
    ]
    lines += [row.csv_line() for row in rows]
    lines += sweep_summary_lines(rows)
    Path(out_path).write_text("\n".join(lines) + "\n")
    return rows


def sweep_summary_lines(rows: list[SweepRow]) -> list[str]:
    accs = [r.accuracy for r in rows]
    savings = [r.cost.network_saving for r in rows[1:]]
    return [
        f"# summary: accuracy min {100 * min(accs):.4f}% max {100 * max(accs):.4f}% "
        f"avg {100 * sum(accs) / len(accs):.4f}%",
        f"# summary: network saving max {100 * max(savings):.4f}% "
        f"avg(1-31) {100 * sum(savings) / len(savings):.4f}%",
    ]


def run_metrics(
    out_path, *, timestamp: bool = True
) -> tuple[MetricsSummary, list[ErrorReport]]:
    """Characterize all 32 configurations and write the error-metrics CSV."""
    summary, reports = summarize_all()
    lines = ["# amlpsim multiplier error metrics v1"]
    if timestamp:
        lines.append(_timestamp_line())
    lines += [
        "# exhaustive over all 16384 operand pairs per configuration",
        "# er/mred/nmed in percent; max_ed/mean_ed in absolute product units",
        METRICS_COLUMNS,
    ]
    for r in reports:
        lines.append(
            f"{r.config},{100 * r.er:.4f},{100 * r.mred:.4f},{100 * r.nmed:.4f},"
            f"{r.max_ed},{r.mean_ed:.4f}"
        )
    lines += summary_lines(summary)
    Path(out_path).write_text("\n".join(lines) + "\n")
    return summary, reports


def summary_lines(summary: MetricsSummary) -> list[str]:
    """Summary of configs 1-31 with the reference envelope alongside.

    The envelope row is the modeled hardware's reported range; it is printed
    for qualitative comparison, never asserted.  Averages divide by 31: the
    accurate configuration is excluded.
    """
    ref = REFERENCE_ENVELOPE
    return [
        "# summary over configurations 1-31 (config 0 excluded from statistics)",
        f"# er_pct:   min {100 * summary.min_er:.4f}  max {100 * summary.max_er:.4f}  "
        f"avg {100 * summary.avg_er:.4f}",
        f"# mred_pct: min {100 * summary.min_mred:.4f}  max {100 * summary.max_mred:.4f}  "
        f"avg {100 * summary.avg_mred:.4f}",
        f"# nmed_pct: min {100 * summary.min_nmed:.4f}  max {100 * summary.max_nmed:.4f}  "
        f"avg {100 * summary.avg_nmed:.4f}",
        f"# reference envelope: er {ref['er'][0]}..{ref['er'][1]} avg {ref['er'][2]} | "
        f"mred {ref['mred'][0]}..{ref['mred'][1]} avg {ref['mred'][2]} | "
        f"nmed {ref['nmed'][0]}..{ref['nmed'][1]} avg {ref['nmed'][2]}",
    ]
