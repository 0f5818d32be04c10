"""Finite lattice domains: boxes, half-line chains, and the spiral corridor.

A domain is a finite truncation of an infinite subset of Z^d together with
its adjacency structure.  Cubes in the max norm play the role of balls
everywhere; Euclidean balls are deliberately not offered.

Two kinds of boundary are tracked per site and must not be conflated:

* ``true_boundary`` - the site has a lattice neighbor outside the infinite
  domain itself (a wall of the spiral corridor, or site 0 for the
  half-line).  Dirichlet conditions there are exact.
* ``truncation_boundary`` - the site has a neighbor that belongs to the
  infinite domain but was cut off by the finite simulation box.  Dirichlet
  there is an approximation, and observables should stay away from it.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainSizeError

SITE_BUDGET = 5_000_000

_STEPS_2D = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _neighbor_csr(n_sites, edges):
    """CSR-style (indptr, flat neighbor indices) from an (M, 2) edge array."""
    if len(edges) == 0:
        return np.zeros(n_sites + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    directed = np.vstack([edges, edges[:, ::-1]])
    order = np.argsort(directed[:, 0], kind="stable")
    flat = directed[order, 1].astype(np.int64)
    counts = np.bincount(directed[:, 0], minlength=n_sites)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return ptr, flat


@dataclass(frozen=True)
class LatticeDomain:
    dimension: int
    sites: np.ndarray  # (N, d) int64
    edges: np.ndarray  # (M, 2) int64, each pair at Euclidean distance 1
    neighbor_ptr: np.ndarray
    neighbor_idx: np.ndarray
    true_boundary: np.ndarray  # (N,) bool
    truncation_boundary: np.ndarray  # (N,) bool
    truncation_radius: int
    generator: str
    params: dict = field(default_factory=dict)

    @property
    def n_sites(self):
        return self.sites.shape[0]

    @cached_property
    def _site_index(self):
        return {tuple(s): i for i, s in enumerate(self.sites.tolist())}

    def index_of(self, query):
        """Indices of the given sites ((k, d) array-like); -1 where absent.

        Boxes and chains use closed-form indexing; the spiral falls back to
        a hash map.
        """
        q = np.atleast_2d(np.asarray(query, dtype=np.int64))
        if self.generator == "box":
            half = self.params["half_width"]
            side = 2 * half + 1
            inside = np.all(np.abs(q) <= half, axis=1)
            idx = np.zeros(len(q), dtype=np.int64)
            for i in range(self.dimension):
                idx = idx * side + (q[:, i] + half)
            return np.where(inside, idx, -1)
        if self.generator == "chain":
            n = self.params["n_sites"]
            c = q[:, 0]
            return np.where((c >= 1) & (c <= n), c - 1, -1)
        table = self._site_index
        return np.array([table.get(tuple(row), -1) for row in q.tolist()], dtype=np.int64)

    def neighbors(self, i):
        return self.neighbor_idx[self.neighbor_ptr[i] : self.neighbor_ptr[i + 1]]

    def to_config(self):
        return {"kind": self.generator, **self.params}


def _check_budget(n):
    if n > SITE_BUDGET:
        raise DomainSizeError(
            f"domain would have {n} sites, over the budget of {SITE_BUDGET}; "
            "reduce the truncation radius or the dimension"
        )


def build_box(d, half_width):
    """Cube-shaped truncation of the full lattice Z^d: all |n_i| <= half_width.

    There is no true boundary; the whole outer shell carries the truncation
    flag."""
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    if half_width < 1:
        raise ValueError("half_width must be >= 1")
    side = 2 * half_width + 1
    n = side ** d
    _check_budget(n)
    axes = [np.arange(-half_width, half_width + 1, dtype=np.int64)] * d
    grids = np.meshgrid(*axes, indexing="ij")
    sites = np.stack([g.ravel() for g in grids], axis=1)

    edge_blocks = []
    for i in range(d):
        stride = side ** (d - 1 - i)
        src = np.nonzero(sites[:, i] < half_width)[0]
        edge_blocks.append(np.column_stack([src, src + stride]))
    edges = np.vstack(edge_blocks).astype(np.int64)

    trunc = np.abs(sites).max(axis=1) == half_width
    ptr, flat = _neighbor_csr(n, edges)
    return LatticeDomain(
        dimension=d,
        sites=sites,
        edges=edges,
        neighbor_ptr=ptr,
        neighbor_idx=flat,
        true_boundary=np.zeros(n, dtype=bool),
        truncation_boundary=trunc,
        truncation_radius=half_width,
        generator="box",
        params={"d": d, "half_width": half_width},
    )


def build_chain(n_sites):
    """Truncation of the half line {1, 2, ...}: sites n = 1..n_sites.

    Site 1 is true boundary (its neighbor 0 lies outside the half line);
    site n_sites is truncation boundary."""
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    _check_budget(n_sites)
    sites = np.arange(1, n_sites + 1, dtype=np.int64).reshape(-1, 1)
    if n_sites > 1:
        lo = np.arange(0, n_sites - 1, dtype=np.int64)
        edges = np.column_stack([lo, lo + 1])
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    true_bd = np.zeros(n_sites, dtype=bool)
    true_bd[0] = True
    trunc = np.zeros(n_sites, dtype=bool)
    trunc[-1] = True
    ptr, flat = _neighbor_csr(n_sites, edges)
    return LatticeDomain(
        dimension=1,
        sites=sites,
        edges=edges,
        neighbor_ptr=ptr,
        neighbor_idx=flat,
        true_boundary=true_bd,
        truncation_boundary=trunc,
        truncation_radius=n_sites,
        generator="chain",
        params={"n_sites": n_sites},
    )


def _spiral_path(turns):
    """Square-winding corridor path in Z^2, corridor and wall both width 1.

    Per revolution j (0-based) the four arms have lengths
    (2+4j, 2+4j, 4+4j, 4+4j) in directions +x, +y, -x, -y, which keeps
    successive parallel corridors exactly two apart."""
    pts = [(0, 0)]
    x = y = 0
    for j in range(turns):
        for dx, dy, length in (
            (1, 0, 2 + 4 * j),
            (0, 1, 2 + 4 * j),
            (-1, 0, 4 + 4 * j),
            (0, -1, 4 + 4 * j),
        ):
            for _ in range(length):
                x += dx
                y += dy
                pts.append((x, y))
    return pts


def build_spiral(turns):
    """Spiral corridor domain in Z^2 whose free operator is a Jacobi matrix.

    The innermost site sits at the origin; the path winds outward for the
    given number of full revolutions.  Walls (excluded sites) separate
    successive corridors, so every interior site has exactly two in-domain
    neighbors.  The only truncation-flagged site is the outer end of the
    corridor, whose continuation was cut; wall-adjacent sites carry the
    true-boundary flag."""
    if turns < 1:
        raise ValueError("turns must be >= 1")
    path = _spiral_path(turns)
    n = len(path)
    _check_budget(n)
    index = {p: i for i, p in enumerate(path)}
    # Two extra revolutions are enough to decide whether any exterior
    # neighbor of a kept site belongs to the infinite corridor.
    extended = set(_spiral_path(turns + 2))

    edges = []
    true_bd = np.zeros(n, dtype=bool)
    trunc = np.zeros(n, dtype=bool)
    for i, (x, y) in enumerate(path):
        for dx, dy in _STEPS_2D:
            q = (x + dx, y + dy)
            j = index.get(q)
            if j is not None:
                if i < j:
                    edges.append((i, j))
            elif q in extended:
                trunc[i] = True
            else:
                true_bd[i] = True
    edges = np.array(edges, dtype=np.int64)

    sites = np.array(path, dtype=np.int64)
    ptr, flat = _neighbor_csr(n, edges)
    return LatticeDomain(
        dimension=2,
        sites=sites,
        edges=edges,
        neighbor_ptr=ptr,
        neighbor_idx=flat,
        true_boundary=true_bd,
        truncation_boundary=trunc,
        truncation_radius=int(np.abs(sites).max()),
        generator="spiral",
        params={"turns": turns},
    )


def unroll_spiral(domain):
    """Bijection chain-position -> site index along the corridor.

    Validates that the adjacency graph is a simple path starting at the
    innermost site; consecutive chain positions are lattice-adjacent."""
    n = domain.n_sites
    degrees = np.diff(domain.neighbor_ptr)
    if n > 1:
        endpoints = np.nonzero(degrees == 1)[0]
        if degrees.max() > 2 or len(endpoints) != 2 or len(domain.edges) != n - 1:
            raise ValueError("adjacency graph is not a simple path")
    start = int(domain.index_of([(0,) * domain.dimension])[0])
    if start < 0 or (n > 1 and degrees[start] != 1):
        raise ValueError("innermost site is not a path endpoint")

    order = np.empty(n, dtype=np.int64)
    order[0] = start
    prev = -1
    cur = start
    for pos in range(1, n):
        nbrs = domain.neighbors(cur)
        nxt = nbrs[0] if nbrs[0] != prev else nbrs[-1]
        if nxt == prev:
            raise ValueError("adjacency graph is not a simple path")
        order[pos] = nxt
        prev, cur = cur, int(nxt)
    if len(set(order.tolist())) != n:
        raise ValueError("adjacency graph is not a simple path")
    return order


def sites_in_ball(domain, radius, center=None):
    """Indices of domain sites in the max-norm cube of the given radius.

    ``center`` defaults to the origin and does not have to be a site.
    Radii beyond the truncation radius are rejected: they would silently
    bias growth estimates."""
    if radius > domain.truncation_radius:
        raise ValueError(
            f"radius {radius} exceeds the truncation radius "
            f"{domain.truncation_radius}"
        )
    if center is None:
        center = np.zeros(domain.dimension, dtype=np.int64)
    center = np.asarray(center, dtype=np.int64)
    dist = np.abs(domain.sites - center).max(axis=1)
    return np.nonzero(dist <= radius)[0]


def domain_from_config(cfg):
    """Rebuild a domain from its serialized {kind, parameters} description."""
    kind = cfg.get("kind")
    if kind == "box":
        return build_box(cfg["d"], cfg["half_width"])
    if kind == "chain":
        return build_chain(cfg["n_sites"])
    if kind == "spiral":
        return build_spiral(cfg["turns"])
    raise ValueError(f"unknown domain kind {kind!r}")
