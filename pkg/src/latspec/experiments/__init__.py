"""Config-driven experiment orchestration.

``run_experiment`` validates a config, runs the named experiment and writes
``data.csv`` plus ``summary.json`` under
``<output root>/<experiment>/<run id>/``.  The run id is a hash of the
config, so re-running the same request overwrites the same directory with
byte-identical CSV payloads.

Exit codes: 0 all gates passed, 1 gate failure, 2 invalid config,
3 numerical hard error.
"""

import os
import time
from dataclasses import dataclass

from .. import __version__
from .._kernels import BACKEND
from ..errors import ConfigError, NumericalError
from .artifacts import run_id_for, write_csv, write_summary
from .config import EXPERIMENT_NAMES, load_config, validate_fields
from .runners import REGISTRY

OUTPUT_ROOT_ENV = "LATSPEC_OUT_ROOT"

EXIT_OK = 0
EXIT_GATE_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


@dataclass
class ExperimentResult:
    exit_code: int
    run_dir: str
    summary: dict


def resolve_config(raw, experiment=None):
    """Validate the raw config dict and return (name, resolved config)."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    name = raw.get("experiment", experiment)
    if name is None:
        raise ConfigError("config needs an 'experiment' field")
    if experiment is not None and name != experiment:
        raise ConfigError(
            f"config is for experiment {name!r}, but {experiment!r} was requested"
        )
    if name not in EXPERIMENT_NAMES:
        raise ConfigError(f"unknown experiment {name!r}")
    fields, _ = REGISTRY[name]
    resolved = validate_fields(raw, fields, f"{name} config")
    resolved["experiment"] = name
    return name, resolved


def run_experiment(config, out_root=None, jobs=1, seed_override=None,
                   experiment=None):
    """Run one experiment from a config dict or a JSON file path."""
    raw = load_config(config) if isinstance(config, (str, os.PathLike)) else dict(config)
    name, resolved = resolve_config(raw, experiment=experiment)
    if seed_override is not None:
        if "seed" not in resolved:
            raise ConfigError(f"{name} has no seed to override")
        resolved["seed"] = int(seed_override)

    if out_root is None:
        out_root = resolved.get("output_dir") or os.environ.get(
            OUTPUT_ROOT_ENV, "out"
        )
    run_id = run_id_for(resolved, seed_override=None)
    run_dir = os.path.join(out_root, name, run_id)
    os.makedirs(run_dir, exist_ok=True)

    _, runner = REGISTRY[name]
    started = time.time()
    try:
        header, rows, extra, gates = runner(resolved, jobs=jobs)
    except NumericalError as exc:
        summary = {
            "experiment": name,
            "run_id": run_id,
            "config": resolved,
            "code_version": __version__,
            "kernel_backend": BACKEND,
            "error": {"type": type(exc).__name__, "op": exc.op, "message": str(exc)},
            "wall_clock_seconds": time.time() - started,
        }
        write_summary(os.path.join(run_dir, "summary.json"), summary)
        return ExperimentResult(EXIT_NUMERICAL_ERROR, run_dir, summary)

    all_passed = all(g["passed"] for g in gates)
    summary = {
        "experiment": name,
        "run_id": run_id,
        "config": resolved,
        "code_version": __version__,
        "kernel_backend": BACKEND,
        "gates": gates,
        "all_gates_passed": all_passed,
        "wall_clock_seconds": time.time() - started,
    }
    summary.update(extra)
    write_csv(os.path.join(run_dir, "data.csv"), header, rows)
    write_summary(os.path.join(run_dir, "summary.json"), summary)
    return ExperimentResult(
        EXIT_OK if all_passed else EXIT_GATE_FAILURE, run_dir, summary
    )
