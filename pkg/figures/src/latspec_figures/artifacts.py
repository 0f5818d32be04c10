"""Reading the experiment artifacts (data.csv + summary.json).

The renderer is strictly read-only over a run directory and fails fast
when a figure kind does not find the columns it needs.
"""

import csv
import json
import os

import numpy as np


class ArtifactError(Exception):
    pass


def load_run(run_dir):
    """Return (columns, summary) for one run directory."""
    csv_path = os.path.join(run_dir, "data.csv")
    json_path = os.path.join(run_dir, "summary.json")
    if not os.path.isfile(csv_path) or not os.path.isfile(json_path):
        raise ArtifactError(f"{run_dir} is not a run directory "
                            "(needs data.csv and summary.json)")
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ArtifactError(f"{csv_path} is empty")
        rows = list(reader)
    if not rows:
        raise ArtifactError(f"{csv_path} has no data rows")
    columns = {}
    for j, name in enumerate(header):
        raw = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(x) for x in raw])
        except ValueError:
            columns[name] = np.array(raw)
    with open(json_path) as fh:
        summary = json.load(fh)
    return columns, summary


def require_columns(columns, needed, kind):
    missing = [c for c in needed if c not in columns]
    if missing:
        raise ArtifactError(
            f"figure kind '{kind}' needs columns {needed}; missing {missing}"
        )
