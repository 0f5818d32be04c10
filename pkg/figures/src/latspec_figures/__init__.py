"""Figure rendering for latspec experiment artifacts (read-only over the
CSV/JSON run directories)."""

__version__ = "0.1.0"

from .artifacts import ArtifactError, load_run  # noqa: F401
from .render import (  # noqa: F401
    FIGURE_KINDS,
    FigureRequest,
    check_exponent_overlay,
    local_dimension_theory,
    render,
    transfer_power_theory,
)
