"""Figure rendering for sweep and metrics reports.

Figures are saved next to the CSV they illustrate and share its stem; the
CSV stays the machine-readable contract, these are for eyeballs.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .error_metrics import ErrorReport
from .sweep import SweepRow


def render_sweep_figures(rows: list[SweepRow], csv_path) -> list[Path]:
    """Saving-per-config, power-vs-accuracy-per-config, and trade-off plots."""
    csv_path = Path(csv_path)
    configs = [r.config for r in rows]
    acc = [100 * r.accuracy for r in rows]
    saving = [100 * r.cost.network_saving for r in rows]
    cost = [r.cost.network_cost_per_image for r in rows]
    paths = []

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(configs, saving, color="tab:green")
    ax.set_xlabel("configuration")
    ax.set_ylabel("network power saving [%]")
    ax.set_title("Power saving per error-control configuration")
    paths.append(_save(fig, csv_path, "savings"))

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(configs, cost, color="tab:blue", label="network cost")
    ax.set_xlabel("configuration")
    ax.set_ylabel("network cost per image [units]")
    ax.set_ylim(0, max(cost) * 1.05)
    ax2 = ax.twinx()
    ax2.plot(configs, acc, "o-", color="tab:red", label="accuracy")
    ax2.set_ylabel("accuracy [%]")
    ax.set_title("Power and accuracy per configuration")
    paths.append(_save(fig, csv_path, "accuracy_power"))

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(cost[1:], acc[1:], color="tab:blue", label="approximate configs")
    ax.scatter(cost[:1], acc[:1], color="tab:red", marker="s", label="exact config")
    ax.set_xlabel("network cost per image [units]")
    ax.set_ylabel("accuracy [%]")
    ax.set_title("Accuracy / power trade-off")
    ax.legend()
    paths.append(_save(fig, csv_path, "tradeoff"))
    return paths


def render_metrics_figures(reports: list[ErrorReport], csv_path) -> list[Path]:
    """One figure: ER, MRED, and NMED across the 32 configurations."""
    csv_path = Path(csv_path)
    configs = [r.config for r in reports]
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    for ax, metric, label in (
        (axes[0], [100 * r.er for r in reports], "ER [%]"),
        (axes[1], [100 * r.mred for r in reports], "MRED [%]"),
        (axes[2], [100 * r.nmed for r in reports], "NMED [%]"),
    ):
        ax.bar(configs, metric, color="tab:purple")
        ax.set_ylabel(label)
    axes[2].set_xlabel("configuration")
    axes[0].set_title("Multiplier error metrics per configuration")
    return [_save(fig, csv_path, "error_metrics")]


def _save(fig, csv_path: Path, suffix: str) -> Path:
    out = csv_path.with_name(f"{csv_path.stem}_{suffix}.png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
