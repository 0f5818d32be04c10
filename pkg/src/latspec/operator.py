"""The lattice Schrodinger operator: nearest-neighbor hopping with on-site
potential, Dirichlet outside the domain, plus the discrete boundary algebra
(Wronskian over the boundary of a site set, Green's formula residual)."""

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _kernels


class SparseHermitianOperator:
    """Real-symmetric CSR matrix over a lattice domain.

    Off-diagonal entries are exactly 1 on adjacency edges; the diagonal
    holds the potential (stored explicitly even when zero, so every CSR row
    is non-empty).  Gershgorin bounds are cached at assembly.
    """

    def __init__(self, domain, matrix, potential_values, bounds):
        self.domain = domain
        self.matrix = matrix
        self.potential_values = potential_values
        self.bounds = bounds

    @property
    def n(self):
        return self.matrix.shape[0]

    @cached_property
    def is_tridiagonal(self):
        rows = np.repeat(
            np.arange(self.n, dtype=np.int64), np.diff(self.matrix.indptr)
        )
        return bool(np.all(np.abs(rows - self.matrix.indices) <= 1))

    def apply(self, vec):
        """Matrix-vector product; complex vectors go through the kernel
        backend, real ones through scipy."""
        vec = np.asarray(vec)
        if vec.shape != (self.n,):
            raise ValueError(f"vector length {vec.shape} does not match {self.n} sites")
        if np.iscomplexobj(vec):
            x = np.ascontiguousarray(vec, dtype=np.complex128)
            return _kernels.csr_matvec(
                self.matrix.data, self.matrix.indices, self.matrix.indptr, x
            )
        return self.matrix @ np.ascontiguousarray(vec, dtype=np.float64)

    def dense(self):
        return self.matrix.toarray()

    def to_coordinate_text(self, stream):
        """Write the matrix as '<row> <col> <value>' lines, 1-based, sorted
        by row then column, for cross-checks with external tools."""
        mat = self.matrix
        for i in range(self.n):
            for k in range(mat.indptr[i], mat.indptr[i + 1]):
                stream.write(f"{i + 1} {mat.indices[k] + 1} {mat.data[k]:.17g}\n")


def assemble(domain, potential):
    """Build the operator h f(n) = sum_{|m-n|=1, m in domain} f(m) + v(n) f(n)."""
    v = np.asarray(potential.values(domain.sites), dtype=np.float64)
    if not np.all(np.isfinite(v)):
        bad = int(np.nonzero(~np.isfinite(v))[0][0])
        raise ValueError(
            f"non-finite potential value at site {tuple(domain.sites[bad])}"
        )
    n = domain.n_sites
    diag_idx = np.arange(n, dtype=np.int64)
    if len(domain.edges):
        rows = np.concatenate([domain.edges[:, 0], domain.edges[:, 1], diag_idx])
        cols = np.concatenate([domain.edges[:, 1], domain.edges[:, 0], diag_idx])
        data = np.concatenate([np.ones(2 * len(domain.edges)), v])
    else:
        rows = cols = diag_idx
        data = v
    mat = sp.csr_matrix(
        sp.coo_matrix((data, (rows, cols)), shape=(n, n)), copy=False
    )
    mat.sort_indices()

    degrees = np.diff(domain.neighbor_ptr)
    b_min = float(np.min(v - degrees))
    b_max = float(np.max(v + degrees))
    return SparseHermitianOperator(domain, mat, v, (b_min, b_max))


def _as_index_set(domain, site_indices):
    s = np.asarray(site_indices, dtype=np.int64)
    if s.size == 0:
        raise ValueError("S is empty")
    mask = np.zeros(domain.n_sites, dtype=bool)
    mask[s] = True
    return mask


def discrete_wronskian(f, g, site_indices, domain):
    """Boundary bilinear form w[f, g] over the in-domain boundary of S:
    sum over sites m outside S with a neighbor in S of
    f(m) * sum_{l in N_S(m)} g(l) - g(m) * sum_{l in N_S(m)} f(l).

    Antisymmetric and bilinear; makes the discrete Green's formula exact.
    """
    in_s = _as_index_set(domain, site_indices)
    f = np.asarray(f)
    g = np.asarray(g)
    e0 = domain.edges[:, 0]
    e1 = domain.edges[:, 1]
    w = 0.0
    m1 = ~in_s[e0] & in_s[e1]
    if np.any(m1):
        w += np.sum(f[e0[m1]] * g[e1[m1]] - g[e0[m1]] * f[e1[m1]])
    m2 = ~in_s[e1] & in_s[e0]
    if np.any(m2):
        w += np.sum(f[e1[m2]] * g[e0[m2]] - g[e1[m2]] * f[e0[m2]])
    return float(w)


def green_formula_residual(op, f, g, site_indices):
    """|sum_{n in S} (hf(n) g(n) - f(n) hg(n))  -  w_{boundary of S}[f, g]|.

    An algebraic identity, so the result is pure round-off; callers compare
    it against 1e-12 * ||f|| ||g|| * (2 d).
    """
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    in_s = _as_index_set(op.domain, site_indices)
    hf = op.apply(f)
    hg = op.apply(g)
    lhs = float(np.sum(hf[in_s] * g[in_s] - f[in_s] * hg[in_s]))
    rhs = discrete_wronskian(f, g, site_indices, op.domain)
    return abs(lhs - rhs)


def shell_wronskians(f, g, domain, r_max, center=None):
    """w over the boundary of (cube C_r intersect domain) for r = 0..r_max.

    Every adjacency edge joins sites whose max-norm radii differ by at most
    one, so each edge contributes to exactly one shell; this evaluates all
    shells in one vectorized pass.
    """
    if center is None:
        center = np.zeros(domain.dimension, dtype=np.int64)
    f = np.asarray(f)
    g = np.asarray(g)
    dist = np.abs(domain.sites - np.asarray(center, dtype=np.int64)).max(axis=1)
    ra = dist[domain.edges[:, 0]]
    rb = dist[domain.edges[:, 1]]
    crossing = ra != rb
    e = domain.edges[crossing]
    lo_first = ra[crossing] < rb[crossing]
    inner = np.where(lo_first, e[:, 0], e[:, 1])
    outer = np.where(lo_first, e[:, 1], e[:, 0])
    r_edge = np.minimum(ra[crossing], rb[crossing])
    contrib = f[outer] * g[inner] - g[outer] * f[inner]
    return np.bincount(r_edge, weights=contrib, minlength=r_max + 1)[: r_max + 1]


def cumulative_wronskian_bound(f, g, domain, r_max, center=None):
    """(sum_{r=1..r_max} |w_r|, d * ||f|| ||g|| over C_{r_max+1}) - the
    cumulative boundary-form bound used to control resolvent growth.

    Requires r_max + 1 <= truncation radius so the bounding norms are
    unbiased by the box."""
    if r_max + 1 > domain.truncation_radius:
        raise ValueError("r_max + 1 exceeds the truncation radius")
    shells = shell_wronskians(f, g, domain, r_max, center=center)
    total = float(np.sum(np.abs(shells[1:])))
    if center is None:
        center = np.zeros(domain.dimension, dtype=np.int64)
    dist = np.abs(domain.sites - np.asarray(center, dtype=np.int64)).max(axis=1)
    inside = dist <= r_max + 1
    f = np.asarray(f)
    g = np.asarray(g)
    norm_f = float(np.sqrt(np.sum(f[inside] ** 2)))
    norm_g = float(np.sqrt(np.sum(g[inside] ** 2)))
    return total, domain.dimension * norm_f * norm_g
