"""Artifact writing: deterministic CSV payloads and JSON summaries.

CSV payload bytes depend only on the resolved config (17-significant-digit
floats round-trip exactly); anything time- or host-dependent lives in the
summary JSON only.
"""

import csv
import hashlib
import json
import math


def format_value(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(x) for x in row])


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            return obj.item()
        except Exception:
            return str(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return str(obj)
    return obj


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(_sanitize(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_id_for(config, seed_override=None):
    """Deterministic run id: hash of the canonical config plus any seed
    override, so identical requests land in the same directory."""
    canon = json.dumps(_sanitize(config), sort_keys=True, separators=(",", ":"))
    if seed_override is not None:
        canon += f"|seed-override={seed_override}"
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
