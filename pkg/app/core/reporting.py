"""
Artifact writers: result tables, JSON summaries and SVG plots
"""
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import matplotlib
import pandas as pd
from matplotlib.figure import Figure

from app.core.config import settings
from app.models.reports import RunSummary

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"
SUMMARY_FILE = "summary.json"

# rcParams are process-wide
_RC_LOCK = threading.Lock()


def write_table(
    run_dir: Path,
    name: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    output_format: str = "csv",
) -> Path:
    """
    Write the primary table of a run as CSV (header row, 17 significant
    digits) or as JSON records.
    """
    run_dir.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    if output_format == "csv":
        path = run_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    elif output_format == "json":
        path = run_dir / f"{name}.json"
        frame.to_json(path, orient="records", double_precision=15, indent=2)
    else:
        raise ValueError(f"Unknown output format: {output_format}")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_summary(run_dir: Path, summary: RunSummary) -> Path:
    """JSON summary {config, results, residuals, timings, extra}; checks carry a 'pass' key"""
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / SUMMARY_FILE
    path.write_text(summary.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_plot(
    run_dir: Path,
    name: str,
    curves: List[Tuple[str, Sequence[float], Sequence[float]]],
    xlabel: str,
    ylabel: str,
    title: Optional[str] = None,
    loglog: bool = False,
    logx: bool = False,
    reference: Optional[Dict[str, Any]] = None,
) -> Path:
    """Static SVG line chart, byte-reproducible for identical data"""
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / f"{name}.svg"
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.subplots()
    for label, xs, ys in curves:
        ax.plot(xs, ys, label=label)
    if reference:
        ax.plot(reference["x"], reference["y"], "k--", label=reference.get("label", "reference"))
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    elif logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    with _RC_LOCK, matplotlib.rc_context({"svg.hashsalt": settings.PLOT_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
