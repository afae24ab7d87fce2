"""CSV / JSON reports for experiment results."""
from __future__ import annotations
from pathlib import Path
from typing import Iterable
import json

import pandas as pd

from core.env.simulator import RegretTrace

from .runner import ExperimentResult, RunSummary

TRACE_COLUMNS = ["t", "arm", "regret", "cum_regret", "probes", "stage_or_level", "select_micros", "fallback"]
FLOAT_FORMAT = "%.12g"


def trace_frame(trace: RegretTrace, record_timing: bool = True) -> pd.DataFrame:
    frame = pd.DataFrame(
        {name: trace.column(name) for name in TRACE_COLUMNS},
        columns=TRACE_COLUMNS,
    )
    if not record_timing:
        frame["select_micros"] = 0
    frame["fallback"] = frame["fallback"].astype(int)
    return frame


def summary_frame(summaries: Iterable[RunSummary]) -> pd.DataFrame:
    return pd.DataFrame([s.model_dump(mode="json") for s in summaries])


def write_trace_csv(trace: RegretTrace, path: str | Path, record_timing: bool = True) -> Path:
    path = Path(path)
    trace_frame(trace, record_timing).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_summary_csv(summaries: Iterable[RunSummary], path: str | Path) -> Path:
    path = Path(path)
    summary_frame(summaries).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_results(results: list[ExperimentResult], out_dir: str | Path) -> list[Path]:
    """trace_<algo>_rep<k>.csv per repetition, summary.csv and index_stats.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for result in results:
        name = f"trace_{result.config.algorithm.value}_rep{result.rep}.csv"
        written.append(write_trace_csv(result.trace, out / name, result.config.record_timing))
    written.append(write_summary_csv([r.summary for r in results], out / "summary.csv"))

    stats = {
        f"rep{r.rep}": [s.model_dump(mode="json") for s in r.index_stats] for r in results
    }
    stats_path = out / "index_stats.json"
    stats_path.write_text(json.dumps(stats, indent=2, sort_keys=True))
    written.append(stats_path)
    return written
