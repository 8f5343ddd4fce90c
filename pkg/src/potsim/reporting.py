"""Result serialization: participant CSVs, table documents, and summary bundles.

Two output tiers: raw per-participant CSV rows for external analysis, and
structured table documents that mirror the published result tables this
simulator reproduces. Published reference values ride along as metadata so
a delta report can print computed-vs-reference differences.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .core import RunResult, ScenarioConfig
from .experiments import ScenarioSummary
from .metrics import (
    OVERFLOW_BUCKET,
    RANK_BUCKETS,
    DistStats,
    RankingHistogram,
    ShapeStats,
)

TOOL_NAME = "potsim"
TABLE_IDS = ("rewards", "ranking", "energy", "shape", "correlation")

CSV_HEADER = "run_id,participant_id,performance_factor,reward,wins,active_time_seconds,rank"

# Published reference results, keyed by scenario label. The ranking reference
# does not state which team size its team column used, so it is keyed by
# mechanism only.
REFERENCE_TABLES: dict[str, dict] = {
    "rewards": {
        "PoW": {"mean": 10.00, "std_dev": 54.81, "min": 0.00, "p25": 0.00, "median": 0.00, "p75": 0.00, "max": 592.80},
        "PoTS (2)": {"mean": 10.00, "std_dev": 21.42, "min": 0.00, "p25": 0.00, "median": 0.00, "p75": 5.61, "max": 130.30},
        "PoTS (4)": {"mean": 10.00, "std_dev": 13.06, "min": 0.00, "p25": 0.00, "median": 3.50, "p75": 16.69, "max": 66.35},
        "PoTS (8)": {"mean": 10.00, "std_dev": 8.63, "min": 0.00, "p25": 2.50, "median": 7.58, "p75": 16.22, "max": 41.04},
        "PoTS (16)": {"mean": 10.00, "std_dev": 5.70, "min": 0.04, "p25": 5.02, "median": 9.38, "p75": 14.34, "max": 28.19},
        "PoTS (32)": {"mean": 10.00, "std_dev": 3.72, "min": 1.84, "p25": 6.99, "median": 9.94, "p75": 12.81, "max": 21.09},
        "PoTS (64)": {"mean": 10.00, "std_dev": 2.38, "min": 3.97, "p25": 8.15, "median": 10.05, "p75": 11.78, "max": 16.91},
    },
    "ranking": {
        "PoW": {"1": 100, "2": 0, "3": 0, "4": 0, "5": 0, "6": 0, "7": 0, "8": 0, "9": 0, "10": 0, OVERFLOW_BUCKET: 0},
        "PoTS (team size unspecified)": {"1": 54, "2": 13, "3": 4, "4": 4, "5": 3, "6": 2, "7": 2, "8": 3, "9": 2, "10": 1, OVERFLOW_BUCKET: 12},
    },
    "energy": {
        "PoW": {"total_active_time_1e6_s": 1378.89},
        "PoTS (2)": {"total_active_time_1e6_s": 689.91},
        "PoTS (4)": {"total_active_time_1e6_s": 344.59},
        "PoTS (8)": {"total_active_time_1e6_s": 172.43},
        "PoTS (16)": {"total_active_time_1e6_s": 86.28},
        "PoTS (32)": {"total_active_time_1e6_s": 43.10},
        "PoTS (64)": {"total_active_time_1e6_s": 21.53},
    },
    "shape": {
        "PoW": {"skewness": 6.846, "excess_kurtosis": 51.47},
        "PoTS (2)": {"skewness": 2.529, "excess_kurtosis": 6.19},
        "PoTS (4)": {"skewness": 1.414, "excess_kurtosis": 1.28},
        "PoTS (8)": {"skewness": 0.792, "excess_kurtosis": -0.22},
        "PoTS (16)": {"skewness": 0.404, "excess_kurtosis": -0.67},
        "PoTS (32)": {"skewness": 0.167, "excess_kurtosis": -0.72},
        "PoTS (64)": {"skewness": 0.008, "excess_kurtosis": -0.66},
    },
    "correlation": {
        "PoW": {"correlation": 0.307},
        "PoTS (2)": {"correlation": 0.663},
        "PoTS (4)": {"correlation": 0.831},
        "PoTS (8)": {"correlation": 0.892},
        "PoTS (16)": {"correlation": 0.898},
        "PoTS (32)": {"correlation": 0.882},
        "PoTS (64)": {"correlation": 0.855},
    },
}

# Shape rows with stated reproduction tolerances; rows outside tolerance are
# flagged in table documents and the delta report. "rel" is relative to the
# reference value, "abs" is an absolute band around the given center.
SHAPE_TOLERANCES: dict[str, dict[str, tuple]] = {
    "PoW": {"skewness": ("rel", 0.20), "excess_kurtosis": ("rel", 0.30)},
    "PoTS (64)": {"skewness": ("abs", 0.0, 0.1), "excess_kurtosis": ("abs", -0.66, 0.2)},
}


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version(TOOL_NAME)
    except Exception:
        return "0.0.0+unknown"


def scenario_label(team_size: int) -> str:
    """Scenario display label: team size 1 is the classic PoW race."""
    return "PoW" if team_size == 1 else f"PoTS ({team_size})"


def summary_label(summary: ScenarioSummary) -> str:
    return scenario_label(summary.config_echo.team_size)


def emission_timestamp() -> str:
    """UTC ISO-8601 second timestamp; honors SOURCE_DATE_EPOCH for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch is not None else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(moment))


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def _competition_ranks(rewards: np.ndarray) -> np.ndarray:
    desc = np.sort(rewards)[::-1]
    return 1 + np.searchsorted(-desc, -rewards, side="left")


def _csv_rows(run: RunResult, run_id: int) -> list[str]:
    ranks = _competition_ranks(run.cumulative_reward)
    rows = []
    for pid in range(len(run.cumulative_reward)):
        rows.append(
            f"{run_id},{pid},{_fmt(run.profile.factors[pid])},"
            f"{_fmt(run.cumulative_reward[pid])},{int(run.win_count[pid])},"
            f"{_fmt(run.active_time[pid])},{int(ranks[pid])}"
        )
    return rows


def write_participant_csv(run: RunResult, destination: IO[bytes], run_id: int = 0) -> int:
    """Write one run as UTF-8 CSV (header + one row per participant).

    Returns the number of data rows written. Output is byte-identical for
    identical runs. On a write failure the sink may hold partial output.
    """
    try:
        destination.write((CSV_HEADER + "\n").encode("utf-8"))
        for row in _csv_rows(run, run_id):
            destination.write((row + "\n").encode("utf-8"))
    except OSError as exc:
        raise OSError(f"participant CSV write failed (output may be partial): {exc}") from exc
    return len(run.cumulative_reward)


def write_runs_csv(runs: Sequence[RunResult], destination: IO[bytes]) -> int:
    """Write several runs into one CSV, run_id column set by position."""
    try:
        destination.write((CSV_HEADER + "\n").encode("utf-8"))
        total = 0
        for run_id, run in enumerate(runs):
            for row in _csv_rows(run, run_id):
                destination.write((row + "\n").encode("utf-8"))
            total += len(run.cumulative_reward)
    except OSError as exc:
        raise OSError(f"participant CSV write failed (output may be partial): {exc}") from exc
    return total


def read_participant_csv(source: IO[bytes]) -> list[dict]:
    """Parse a participant CSV back into per-row dicts (inverse of the writer)."""
    text = source.read().decode("utf-8").splitlines()
    reader = csv.DictReader(text)
    rows = []
    for record in reader:
        rows.append(
            {
                "run_id": int(record["run_id"]),
                "participant_id": int(record["participant_id"]),
                "performance_factor": float(record["performance_factor"]),
                "reward": float(record["reward"]),
                "wins": int(record["wins"]),
                "active_time_seconds": float(record["active_time_seconds"]),
                "rank": int(record["rank"]),
            }
        )
    return rows


def emit_reward_histogram(source, bin_width: float) -> list[tuple[float, int]]:
    """Bin rewards into left-closed right-open bins of bin_width starting at 0.

    ``source`` is a RunResult or a vector of rewards. Returns (lower edge,
    count) pairs covering bin 0 through the last occupied bin; counts sum to
    the participant count.
    """
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    rewards = source.cumulative_reward if isinstance(source, RunResult) else source
    arr = np.asarray(rewards, dtype=float)
    if arr.size == 0:
        return []
    if arr.min() < 0:
        raise ValueError("rewards must be non-negative; bins start at 0")
    indices = np.floor(arr / bin_width).astype(np.int64)
    counts = np.bincount(indices)
    return [(float(i * bin_width), int(c)) for i, c in enumerate(counts)]


def _select_summaries(summaries: Sequence[ScenarioSummary], which: str) -> list[ScenarioSummary]:
    if which == "ranking":
        chosen = [s for s in summaries if s.ranking is not None]
        if not chosen:
            raise ValueError(
                "ranking table requires at least one high_perf scenario summary"
            )
    else:
        homogeneous = [s for s in summaries if s.config_echo.high_perf_override is None]
        chosen = homogeneous or list(summaries)
    chosen = sorted(chosen, key=lambda s: s.config_echo.team_size)
    labels = [summary_label(s) for s in chosen]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate scenario labels in {which} table inputs: {labels}")
    return chosen


def _shape_flag(label: str, metric: str, computed: float) -> bool | None:
    spec = SHAPE_TOLERANCES.get(label, {}).get(metric)
    if spec is None:
        return None
    if spec[0] == "rel":
        reference = REFERENCE_TABLES["shape"][label][metric]
        return abs(computed - reference) > spec[1] * abs(reference)
    _, center, band = spec
    return abs(computed - center) > band


def emit_table(summaries: Sequence[ScenarioSummary], which: str) -> dict:
    """Build a machine-readable analog of one published result table.

    Rows are keyed by scenario label; reference values (when published for
    that label) are attached per row. Shape rows with stated reproduction
    tolerances carry a ``flagged`` entry marking out-of-tolerance results.
    """
    if which not in TABLE_IDS:
        raise ValueError(f"unknown table id {which!r}, expected one of {TABLE_IDS}")
    chosen = _select_summaries(summaries, which)

    if which == "ranking":
        rank_labels = [str(r) for r in RANK_BUCKETS] + [OVERFLOW_BUCKET]
        columns = {}
        for s in chosen:
            hist = s.ranking
            col = {str(r): hist.counts[r] for r in RANK_BUCKETS}
            col[OVERFLOW_BUCKET] = hist.eleven_or_lower
            columns[summary_label(s)] = col
        return {
            "table": "ranking",
            "rank_labels": rank_labels,
            "scenarios": columns,
            "reference": REFERENCE_TABLES["ranking"],
        }

    rows = []
    for s in chosen:
        label = summary_label(s)
        if which == "rewards":
            stats = s.reward_stats
            values = {
                "mean": stats.mean,
                "std_dev": stats.std_dev,
                "min": stats.min,
                "p25": stats.p25,
                "median": stats.median,
                "p75": stats.p75,
                "max": stats.max,
            }
        elif which == "energy":
            values = {"total_active_time_1e6_s": s.total_active_time_mean / 1e6}
        elif which == "shape":
            values = {
                "skewness": s.shape_stats.skewness,
                "excess_kurtosis": s.shape_stats.excess_kurtosis,
            }
        else:
            values = {"correlation": s.correlation}
        row: dict = {"scenario": label, **values}
        row["reference"] = REFERENCE_TABLES[which].get(label)
        if which == "shape":
            flags = {
                metric: flag
                for metric in ("skewness", "excess_kurtosis")
                if (flag := _shape_flag(label, metric, values[metric])) is not None
            }
            if flags:
                row["flagged"] = flags
        rows.append(row)
    columns = ["scenario"] + [k for k in rows[0] if k not in ("scenario", "reference", "flagged")]
    return {"table": which, "columns": columns, "rows": rows}


def render_delta_report(tables: Sequence[dict]) -> str:
    """Human-readable computed-vs-reference report for emitted table documents."""
    lines = []
    for doc in tables:
        which = doc["table"]
        lines.append(f"== {which} ==")
        if which == "ranking":
            for label, col in doc["scenarios"].items():
                lines.append(f"  {label}: " + ", ".join(f"{k}={v}" for k, v in col.items()))
            for label, col in doc["reference"].items():
                lines.append(
                    f"  reference {label}: " + ", ".join(f"{k}={v}" for k, v in col.items())
                )
            lines.append("")
            continue
        for row in doc["rows"]:
            reference = row.get("reference")
            flagged = row.get("flagged", {})
            for metric in doc["columns"][1:]:
                computed = row[metric]
                if reference is None or metric not in reference:
                    lines.append(f"  {row['scenario']:<12} {metric:<24} {computed:>12.4f}")
                    continue
                ref = reference[metric]
                delta = computed - ref
                if ref != 0:
                    rel = f"{abs(delta) / abs(ref):.1%}"
                else:
                    rel = "0.0%" if delta == 0 else "n/a"
                mark = "  FLAG" if flagged.get(metric) else ""
                lines.append(
                    f"  {row['scenario']:<12} {metric:<24} {computed:>12.4f} "
                    f"ref {ref:>10.4f}  delta {delta:>+10.4f} ({rel}){mark}"
                )
        lines.append("")
    return "\n".join(lines)


# -- summary/bundle serialization -------------------------------------------


@dataclass(frozen=True)
class ReportBundle:
    """Manifest for a directory of emitted results."""

    kind: str
    summaries: list[ScenarioSummary]
    config_echo: ScenarioConfig
    created_utc: str
    version: str
    runs_csv: str | None = None


def config_to_dict(config: ScenarioConfig) -> dict:
    data = dataclasses.asdict(config)
    data["perf_range"] = list(config.perf_range)
    data["multiplier_range"] = list(config.multiplier_range)
    if config.high_perf_override is not None:
        data["high_perf_override"] = list(config.high_perf_override)
    return data


def config_from_dict(data: dict) -> ScenarioConfig:
    kwargs = dict(data)
    kwargs["perf_range"] = tuple(kwargs["perf_range"])
    kwargs["multiplier_range"] = tuple(kwargs["multiplier_range"])
    if kwargs.get("high_perf_override") is not None:
        pid, factor = kwargs["high_perf_override"]
        kwargs["high_perf_override"] = (int(pid), float(factor))
    return ScenarioConfig(**kwargs)


def summary_to_dict(summary: ScenarioSummary) -> dict:
    ranking = None
    if summary.ranking is not None:
        ranking = {str(r): summary.ranking.counts[r] for r in RANK_BUCKETS}
        ranking[OVERFLOW_BUCKET] = summary.ranking.eleven_or_lower
    condition = (
        "high_perf" if summary.config_echo.high_perf_override is not None else "homogeneous"
    )
    return {
        "label": summary_label(summary),
        "condition": condition,
        "config": config_to_dict(summary.config_echo),
        "reward_stats": dataclasses.asdict(summary.reward_stats),
        "shape_stats": dataclasses.asdict(summary.shape_stats),
        "correlation": summary.correlation,
        "total_active_time_mean": summary.total_active_time_mean,
        "ranking": ranking,
    }


def summary_from_dict(data: dict) -> ScenarioSummary:
    ranking = None
    if data.get("ranking") is not None:
        raw = data["ranking"]
        ranking = RankingHistogram(
            counts={r: int(raw[str(r)]) for r in RANK_BUCKETS},
            eleven_or_lower=int(raw[OVERFLOW_BUCKET]),
        )
    return ScenarioSummary(
        config_echo=config_from_dict(data["config"]),
        reward_stats=DistStats(**data["reward_stats"]),
        shape_stats=ShapeStats(**data["shape_stats"]),
        correlation=data["correlation"],
        total_active_time_mean=data["total_active_time_mean"],
        ranking=ranking,
    )


def _summary_filename(summary: ScenarioSummary) -> str:
    condition = (
        "high_perf" if summary.config_echo.high_perf_override is not None else "homogeneous"
    )
    return f"{condition}_n{summary.config_echo.team_size:03d}.json"


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_bundle(
    out_dir: Path,
    kind: str,
    summaries: Sequence[ScenarioSummary],
    base_config: ScenarioConfig,
    runs_csv: str | None = None,
) -> ReportBundle:
    """Write per-scenario summary JSONs plus a manifest into out_dir."""
    out_dir = Path(out_dir)
    summaries_dir = out_dir / "summaries"
    summaries_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for summary in summaries:
        name = _summary_filename(summary)
        _dump_json(summaries_dir / name, summary_to_dict(summary))
        names.append(name)
    bundle = ReportBundle(
        kind=kind,
        summaries=list(summaries),
        config_echo=base_config,
        created_utc=emission_timestamp(),
        version=tool_version(),
        runs_csv=runs_csv,
    )
    manifest = {
        "tool": TOOL_NAME,
        "version": bundle.version,
        "created_utc": bundle.created_utc,
        "kind": kind,
        "base_config": config_to_dict(base_config),
        "summaries": names,
        "runs_csv": runs_csv,
    }
    _dump_json(out_dir / "manifest.json", manifest)
    return bundle


def load_bundle(out_dir: Path) -> ReportBundle:
    """Load a manifest and its summaries back from out_dir."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json under {out_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    summaries = [
        summary_from_dict(
            json.loads((out_dir / "summaries" / name).read_text(encoding="utf-8"))
        )
        for name in manifest["summaries"]
    ]
    return ReportBundle(
        kind=manifest["kind"],
        summaries=summaries,
        config_echo=config_from_dict(manifest["base_config"]),
        created_utc=manifest["created_utc"],
        version=manifest["version"],
        runs_csv=manifest.get("runs_csv"),
    )
