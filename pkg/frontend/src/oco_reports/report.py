"""Batch report rendering over benchmark trace CSVs and summary JSONs.

Reads only the documented file schemas (one CSV row per step with a mandatory
header; JSON summaries with total_cost / regret / epochs / switches), renders
one PNG per figure, and writes a deterministic fitted-slope text summary.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("t", "cost", "epoch", "switch", "est_err", "cum_cost")


class ReportError(ValueError):
    """Invalid report spec or trace file (CLI exit code 2)."""


@dataclass
class RunSpec:
    label: str
    trace: str
    summary: str | None = None
    comparator: str | None = None  # label of the run whose costs are subtracted


@dataclass
class ReportSpec:
    runs: list[RunSpec]
    out_dir: str
    log_log: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "ReportSpec":
        try:
            runs = [RunSpec(**r) for r in raw["runs"]]
            spec = cls(runs=runs, out_dir=raw["out_dir"], log_log=bool(raw.get("log_log", False)))
        except (KeyError, TypeError) as exc:
            raise ReportError(f"invalid report spec: {exc}") from exc
        if not runs:
            raise ReportError("report spec lists no runs")
        labels = [r.label for r in runs]
        if len(set(labels)) != len(labels):
            raise ReportError("run labels must be unique")
        for run in runs:
            if run.comparator is not None and run.comparator not in labels:
                raise ReportError(f"comparator {run.comparator!r} is not a run label")
        return spec


@dataclass
class Trace:
    label: str
    t: np.ndarray
    cost: np.ndarray
    epoch: np.ndarray
    switch: np.ndarray
    est_err: np.ndarray
    cum_cost: np.ndarray
    summary: dict = field(default_factory=dict)


def load_trace(run: RunSpec) -> Trace:
    with open(run.trace, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ReportError(f"{run.trace}: empty trace file")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ReportError(f"{run.trace}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ReportError(f"{run.trace}: no data rows")

    def col(name, dtype=float):
        return np.array([dtype(r[name]) for r in rows])

    summary = {}
    if run.summary:
        with open(run.summary) as fh:
            summary = json.load(fh)
    return Trace(
        label=run.label,
        t=col("t", int),
        cost=col("cost"),
        epoch=col("epoch", int),
        switch=col("switch", int),
        est_err=col("est_err"),
        cum_cost=col("cum_cost"),
        summary=summary,
    )


def regret_curve(trace: Trace, comparator: Trace) -> np.ndarray:
    if trace.t.shape != comparator.t.shape:
        raise ReportError(
            f"horizon mismatch between {trace.label} and {comparator.label}"
        )
    return trace.cum_cost - comparator.cum_cost


def fit_loglog_slope(t: np.ndarray, values: np.ndarray) -> float | None:
    """Least-squares slope of log(values) against log(t) over positive entries."""
    mask = (values > 0) & (t > 0)
    if mask.sum() < 2:
        return None
    return float(np.polyfit(np.log(t[mask]), np.log(values[mask]), 1)[0])


def render_report(spec: ReportSpec) -> tuple[list[str], str]:
    """Render the figures and the slope summary; returns (image paths, txt path)."""
    os.makedirs(spec.out_dir, exist_ok=True)
    traces = {run.label: load_trace(run) for run in spec.runs}
    curves: dict[str, np.ndarray] = {}
    for run in spec.runs:
        if run.comparator is not None:
            curves[run.label] = regret_curve(traces[run.label], traces[run.comparator])

    images = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, trace in traces.items():
        ax.plot(trace.t, trace.cum_cost, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative cost")
    ax.set_title("Cumulative cost")
    ax.legend()
    images.append(_save(fig, spec, "cost_curves.png"))

    if curves:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, curve in curves.items():
            ax.plot(traces[label].t, curve, label=label)
        if spec.log_log:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("regret")
        ax.set_title("Regret vs comparator")
        ax.legend()
        images.append(_save(fig, spec, "regret_curves.png"))

        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, curve in curves.items():
            t = traces[label].t
            ax.plot(t, curve / np.maximum(t, 1), label=label)
        if spec.log_log:
            ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("regret / t")
        ax.set_title("Average regret decay")
        ax.legend()
        images.append(_save(fig, spec, "regret_rate.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, trace in traces.items():
        ax.step(trace.t, trace.epoch, where="post", label=f"{label} epochs")
        switch_t = trace.t[trace.switch > 0]
        if switch_t.size:
            ax.plot(switch_t, trace.epoch[trace.switch > 0], "x", markersize=4,
                    label=f"{label} switches")
    ax.set_xlabel("t")
    ax.set_ylabel("epoch")
    ax.set_title("Epoch and switch timeline")
    ax.legend()
    images.append(_save(fig, spec, "epoch_switch_timeline.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    any_err = False
    for label, trace in traces.items():
        finite = np.isfinite(trace.est_err)
        if finite.any():
            any_err = True
            ax.plot(trace.t[finite], trace.est_err[finite], label=label)
    if any_err:
        ax.set_xlabel("t")
        ax.set_ylabel("estimation error")
        ax.set_title("Model estimation error decay")
        ax.legend()
        images.append(_save(fig, spec, "estimation_error.png"))
    else:
        plt.close(fig)

    txt_path = os.path.join(spec.out_dir, "slopes.txt")
    with open(txt_path, "w") as fh:
        fh.write(_slope_summary(spec, traces, curves))
    return images, txt_path


def _save(fig, spec: ReportSpec, name: str) -> str:
    path = os.path.join(spec.out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _slope_summary(spec: ReportSpec, traces: dict, curves: dict) -> str:
    lines = ["fitted log-log slopes of regret curves"]
    for label in sorted(curves):
        slope = fit_loglog_slope(traces[label].t, curves[label])
        slope_txt = "undefined" if slope is None else f"{slope:.4f}"
        lines.append(f"{label}: slope {slope_txt}")
    finals = [
        (int(traces[label].t[-1]), float(curves[label][-1])) for label in sorted(curves)
    ]
    horizons = sorted({t for t, _ in finals})
    if len(horizons) >= 2:
        pts = [(t, r) for t, r in finals if r > 0]
        if len({t for t, _ in pts}) >= 2:
            slope = float(
                np.polyfit(
                    np.log([t for t, _ in pts]), np.log([r for _, r in pts]), 1
                )[0]
            )
            lines.append(f"across-horizons: slope {slope:.4f} over T in {horizons}")
    return "\n".join(lines) + "\n"
