"""Trace output: CSV rows and the accompanying plot script and figures."""
from __future__ import annotations

import csv
import os
import shutil

from . import plot_script
from .flows import CSV_COLUMNS, FlowTrace

SCRIPT_NAME = "plot_trace.py"


def write_trace_csv(trace: FlowTrace, path) -> None:
    """One row per recorded sample, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in trace.records:
            w.writerow([f"{getattr(rec, c):.17g}" for c in CSV_COLUMNS])


def emit_plots(csv_path, out_dir) -> list[str]:
    """Copy the plot script next to the CSV and render its figures."""
    os.makedirs(out_dir, exist_ok=True)
    script = os.path.join(out_dir, SCRIPT_NAME)
    shutil.copyfile(plot_script.__file__, script)
    return [script] + plot_script.render(csv_path, out_dir)
