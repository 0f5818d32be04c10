"""On-site potential models.

All random variants are counter-based: the value at a site is a pure
function of (seed, site), so evaluation order, domain re-ordering and
parallel sweeps cannot change a realization.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels

SQRT3 = math.sqrt(3.0)

_COORD_BITS = 21
_COORD_OFFSET = 1 << 20


def _as_site_array(sites):
    a = np.atleast_2d(np.asarray(sites, dtype=np.int64))
    if a.ndim != 2:
        raise ValueError("sites must be a (k, d) array")
    return a


def _pack_site_keys(sites):
    """Fold a (k, d) coordinate array into one uint64 counter per site."""
    if np.abs(sites).max(initial=0) >= _COORD_OFFSET:
        raise ValueError("site coordinate too large to key the generator")
    keys = np.zeros(len(sites), dtype=np.uint64)
    for i in range(sites.shape[1]):
        keys = (keys << np.uint64(_COORD_BITS)) | (
            sites[:, i] + _COORD_OFFSET
        ).astype(np.uint64)
    return keys


@dataclass(frozen=True)
class FreePotential:
    kind = "free"

    def values(self, sites):
        return np.zeros(len(_as_site_array(sites)))

    def value(self, site):
        return 0.0

    def to_config(self):
        return {"kind": "free"}


@dataclass(frozen=True)
class PeriodicPotential:
    """v(n) = cell[(n-1) mod len(cell)] on one-dimensional domains, so the
    first half-line site n = 1 reads the first cell entry."""

    cell: tuple

    def __post_init__(self):
        if len(self.cell) < 1:
            raise ValueError("periodic cell must be non-empty")
        object.__setattr__(self, "cell", tuple(float(c) for c in self.cell))

    def values(self, sites):
        a = _as_site_array(sites)
        if a.shape[1] != 1:
            raise ValueError("periodic potential is defined for 1D sites only")
        cell = np.asarray(self.cell)
        return cell[(a[:, 0] - 1) % len(cell)]

    def value(self, site):
        return float(self.values([site])[0])

    def to_config(self):
        return {"kind": "periodic", "cell": list(self.cell)}


@dataclass(frozen=True)
class RandomDecayingPotential:
    """Half-line potential v(n) = coupling * n^(-1/2) * a(n), n >= 1, with
    a(n) i.i.d. uniform on [-sqrt(3), sqrt(3)] (mean 0, unit variance) drawn
    from the counter generator keyed by (seed, n).

    The envelope |v(n)| <= coupling * sqrt(3) * n^(-1/2) holds by
    construction.  Sites n <= 0 evaluate to 0.
    """

    coupling: float
    seed: int

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")

    def amplitudes(self, n):
        """a(n) for an array of half-line indices n >= 1."""
        n = np.asarray(n, dtype=np.int64)
        u = _kernels.uniform01(np.uint64(self.seed), n.astype(np.uint64))
        return SQRT3 * (2.0 * u - 1.0)

    def values(self, sites):
        a = _as_site_array(sites)
        if a.shape[1] != 1:
            raise ValueError("decaying random potential is a half-line model")
        n = a[:, 0]
        out = np.zeros(len(n))
        pos = n >= 1
        if np.any(pos):
            np_pos = n[pos]
            out[pos] = (
                self.coupling
                * np_pos.astype(np.float64) ** -0.5
                * self.amplitudes(np_pos)
            )
        return out

    def value(self, site):
        return float(self.values([site])[0])

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_config(self):
        return {"kind": "random_decaying", "coupling": self.coupling, "seed": self.seed}


@dataclass(frozen=True)
class AndersonPotential:
    """i.i.d. uniform on [-width/2, width/2], any dimension, counter keyed
    by the packed site coordinates."""

    width: float
    seed: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be >= 0")

    def values(self, sites):
        a = _as_site_array(sites)
        keys = _pack_site_keys(a)
        u = _kernels.uniform01(np.uint64(self.seed), keys)
        return self.width * (u - 0.5)

    def value(self, site):
        return float(self.values([site])[0])

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_config(self):
        return {"kind": "anderson", "width": self.width, "seed": self.seed}


class TablePotential:
    """Explicit site -> value map; every queried site must be present."""

    kind = "table"

    def __init__(self, table):
        self.table = {tuple(int(c) for c in k): float(v) for k, v in dict(table).items()}

    def values(self, sites):
        a = _as_site_array(sites)
        out = np.empty(len(a))
        for i, row in enumerate(a.tolist()):
            key = tuple(row)
            if key not in self.table:
                raise KeyError(f"table potential has no value for site {key}")
            out[i] = self.table[key]
        return out

    def value(self, site):
        site = tuple(int(c) for c in np.atleast_1d(site))
        return float(self.values([site])[0])

    def to_config(self):
        return {
            "kind": "table",
            "entries": [[list(k), v] for k, v in sorted(self.table.items())],
        }


def halfline_values(potential, n_max):
    """Potential samples v(1..n_max) as a flat array for the 1D sweeps."""
    sites = np.arange(1, n_max + 1, dtype=np.int64).reshape(-1, 1)
    return potential.values(sites)


def potential_from_config(cfg):
    kind = cfg.get("kind")
    if kind == "free":
        return FreePotential()
    if kind == "periodic":
        return PeriodicPotential(cell=tuple(cfg["cell"]))
    if kind == "random_decaying":
        return RandomDecayingPotential(coupling=cfg["coupling"], seed=cfg["seed"])
    if kind == "anderson":
        return AndersonPotential(width=cfg["width"], seed=cfg["seed"])
    if kind == "table":
        return TablePotential({tuple(k): v for k, v in cfg["entries"]})
    raise ValueError(f"unknown potential kind {kind!r}")


def decaying_model_transfer_exponent(coupling, energy):
    """Asymptotic power of the transfer-matrix norm, coupling^2/(8-2E^2),
    for the decaying random model at energies inside (-2, 2)."""
    return coupling ** 2 / (8.0 - 2.0 * energy ** 2)


def decaying_model_local_dimension(coupling, energy):
    """Local scaling dimension (4 - E^2 - coupling^2)/(4 - E^2) of the
    decaying random model's spectral measure."""
    return (4.0 - energy ** 2 - coupling ** 2) / (4.0 - energy ** 2)
