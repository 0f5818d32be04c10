"""Borel-transform machinery for finite-volume spectral measures.

F(z) = <(h - z)^{-1} phi, phi> is sampled along z = E + i eps for a
geometrically shrinking eps grid; the local scaling exponent of Im F
(Im F ~ eps^{-sigma}) is the finite-volume proxy for the singularity of the
spectral measure at E.  The companion estimator works directly on the
eigen-decomposition: mu(E - delta, E + delta) / delta^alpha.

Both estimators are only meaningful above the level-spacing scale of the
truncated operator, so every fit carries an explicit validity window.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal, solve_banded
from scipy.sparse.linalg import splu

from .eigensolutions import _ls_fit
from .errors import NumericalError, SolverError, WindowError

RESOLVENT_TOL = 1e-10
DENSE_BUDGET = 4000
TRIDIAG_EIGVALS_BUDGET = 16384


def _tridiag_bands(op, z):
    mat = op.matrix
    n = op.n
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = mat.diagonal(1)
    ab[1, :] = mat.diagonal(0) - z
    ab[2, :-1] = mat.diagonal(-1)
    return ab


def resolvent_solve(op, z, phi, tol=RESOLVENT_TOL):
    """theta = (h - z)^{-1} phi for Im z != 0, with a verified residual
    ||(h - z) theta - phi|| <= tol ||phi||.

    Tridiagonal operators go through banded elimination, everything else
    through sparse LU; the residual is always checked, and a banded solve
    that misses the contract is retried with LU before failing hard.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("resolvent requires Im z != 0")
    phi = np.asarray(phi, dtype=np.complex128)
    phi_norm = float(np.linalg.norm(phi))
    if phi_norm == 0.0:
        raise ValueError("probe vector must be non-zero")

    def _residual(theta):
        return float(np.linalg.norm(op.apply(theta) - z * theta - phi))

    theta = None
    if op.is_tridiagonal and op.n >= 2:
        theta = solve_banded((1, 1), _tridiag_bands(op, z), phi)
        if _residual(theta) <= tol * phi_norm:
            return theta
        theta = None
    shifted = (op.matrix - z * sp.identity(op.n, format="csr")).tocsc()
    theta = splu(shifted).solve(phi)
    res = _residual(theta)
    if res > tol * phi_norm:
        raise SolverError(
            f"resolvent solve residual {res:.3e} exceeds {tol:.1e} * ||phi||",
            residual=res,
            op="resolvent_solve",
        )
    return theta


def borel_value(op, phi, z, tol=RESOLVENT_TOL):
    """F(z) = <theta, phi> with theta = (h - z)^{-1} phi."""
    theta = resolvent_solve(op, z, phi, tol=tol)
    return complex(np.vdot(np.asarray(phi, dtype=np.complex128), theta))


def resolvent_identity_residual(op, z, phi, tol=RESOLVENT_TOL):
    """|Im z * ||theta||^2 - Im <theta, phi>| / ||phi||^2 - the exact
    self-adjoint resolvent identity, so the result is solver noise only."""
    z = complex(z)
    phi = np.asarray(phi, dtype=np.complex128)
    theta = resolvent_solve(op, z, phi, tol=tol)
    lhs = z.imag * float(np.linalg.norm(theta) ** 2)
    rhs = float(np.vdot(phi, theta).imag)
    return abs(lhs - rhs) / float(np.linalg.norm(phi) ** 2)


@dataclass
class FiniteSpectralMeasure:
    """Atoms of the truncated operator's spectral measure for one probe:
    weights |<phi, psi_k>|^2 at the eigenvalues E_k (ascending)."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    total_mass: float

    def mass_in(self, lo, hi):
        """Measure of the open interval (lo, hi)."""
        i0 = int(np.searchsorted(self.eigenvalues, lo, side="right"))
        i1 = int(np.searchsorted(self.eigenvalues, hi, side="left"))
        return float(np.sum(self.weights[i0:i1]))

    def local_spacing(self, energy, n_gaps=6):
        """Mean eigenvalue gap among the levels nearest to the energy;
        0 when there are not even two levels (a pure atom has no
        discreteness scale)."""
        ev = self.eigenvalues
        if len(ev) < 2:
            return 0.0
        j = int(np.searchsorted(ev, energy))
        half = max(n_gaps // 2, 1)
        lo = max(j - half, 0)
        hi = min(lo + n_gaps + 1, len(ev))
        lo = max(hi - n_gaps - 1, 0)
        gaps = np.diff(ev[lo:hi])
        return float(np.mean(gaps))

    def im_borel(self, energy, eps):
        """Im F(E + i eps) summed over the atoms; smeared density at scale
        eps, used for the resolvent sum-rule cross-check."""
        return float(
            np.sum(self.weights * eps / ((self.eigenvalues - energy) ** 2 + eps ** 2))
        )


def finite_spectral_measure(op, phi, budget=DENSE_BUDGET):
    """Full eigen-decomposition route to the spectral measure of phi.

    Enforces the Parseval mass identity sum w_k = ||phi||^2 to 1e-10
    relative.  Refuses operators above the diagonalization budget."""
    if op.n > budget:
        raise ValueError(
            f"operator has {op.n} sites, over the diagonalization budget {budget}"
        )
    phi = np.asarray(phi)
    if op.is_tridiagonal and op.n >= 3:
        evals, vecs = eigh_tridiagonal(
            op.matrix.diagonal(0), op.matrix.diagonal(1)
        )
    else:
        evals, vecs = np.linalg.eigh(op.dense())
    coef = vecs.T @ phi
    weights = np.abs(coef) ** 2
    total = float(np.sum(weights))
    norm_sq = float(np.linalg.norm(phi) ** 2)
    if abs(total - norm_sq) > 1e-10 * norm_sq:
        raise NumericalError(
            f"spectral weights sum {total!r} violates the mass identity",
            op="finite_spectral_measure",
        )
    return FiniteSpectralMeasure(
        eigenvalues=evals, weights=weights, total_mass=total
    )


def estimate_local_spacing(op, energy, measure=None):
    """Level-spacing scale of the truncated operator near the energy.

    Prefers exact eigenvalues (cheap for tridiagonal operators, dense under
    the budget); falls back to the uniform Gershgorin estimate
    (b_max - b_min)/N for larger systems."""
    if measure is not None:
        return measure.local_spacing(energy)
    if op.n < 2:
        return 0.0
    if op.is_tridiagonal and 3 <= op.n <= TRIDIAG_EIGVALS_BUDGET:
        evals = eigvalsh_tridiagonal(op.matrix.diagonal(0), op.matrix.diagonal(1))
    elif op.n <= DENSE_BUDGET:
        evals = np.linalg.eigvalsh(op.dense())
    else:
        return (op.bounds[1] - op.bounds[0]) / op.n
    return FiniteSpectralMeasure(evals, np.zeros_like(evals), 0.0).local_spacing(
        energy
    )


def geometric_eps_grid(eps_max, eps_min):
    """Geometric grid of ratio 1/2 from eps_max down to (at most) eps_min."""
    if not (0 < eps_min <= eps_max):
        raise ValueError("need 0 < eps_min <= eps_max")
    grid = []
    e = float(eps_max)
    while e >= eps_min * (1.0 - 1e-12):
        grid.append(e)
        e *= 0.5
    return np.asarray(grid)


@dataclass
class BorelSweep:
    """Im F(E + i eps) samples plus the fitted local scaling exponent sigma
    of Im F ~ eps^(-sigma) over the validity window (eps at least the
    spacing guard, at most eps_max/4)."""

    energy: float
    eps: np.ndarray  # descending
    im_f: np.ndarray
    phi_norm_sq: float
    guard: float
    in_window: np.ndarray
    window: tuple
    sigma: float
    sigma_lower: float
    sigma_upper: float
    fit_rms: float

    def q_values(self, beta):
        """eps^beta * Im F(E + i eps) - bounded iff beta is at least the
        local singularity exponent."""
        return self.eps ** beta * self.im_f


def borel_sweep(
    op,
    phi,
    energy,
    eps_grid=None,
    eps_max=1.0,
    eps_min=None,
    spacing_guard=10.0,
    measure=None,
    spacing=None,
    tol=RESOLVENT_TOL,
):
    """Sweep Im F(E + i eps) down a geometric eps grid and fit sigma.

    The default grid couples the smallest scale to the truncation size,
    eps_min = 1/L: below that, the discreteness of the finite box dominates
    anyway.  Positivity (Herglotz) and the total-mass bound
    eps * Im F <= ||phi||^2 are enforced on every sample.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    phi_norm_sq = float(np.linalg.norm(phi) ** 2)
    if eps_grid is None:
        if eps_min is None:
            eps_min = 1.0 / op.domain.truncation_radius
        eps_grid = geometric_eps_grid(eps_max, eps_min)
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    if np.any(np.diff(eps_grid) >= 0):
        raise ValueError("eps grid must be strictly decreasing")

    im_f = np.empty(len(eps_grid))
    for i, eps in enumerate(eps_grid):
        f = borel_value(op, phi, complex(energy, eps), tol=tol)
        im_f[i] = f.imag
        if im_f[i] <= 0.0:
            raise NumericalError(
                f"Im F must be positive; got {im_f[i]!r} at eps={eps!r}",
                op="borel_sweep",
            )
        if eps * im_f[i] > phi_norm_sq * (1.0 + 1e-9):
            raise NumericalError(
                f"mass bound violated: eps*Im F = {eps * im_f[i]!r} > ||phi||^2",
                op="borel_sweep",
            )

    if spacing is None:
        spacing = estimate_local_spacing(op, energy, measure=measure)
    guard = spacing_guard * spacing
    in_window = (eps_grid >= guard) & (eps_grid <= eps_grid[0] / 4.0)
    if not np.any(in_window):
        raise WindowError(
            "empty scaling window: the spacing guard "
            f"{guard:.3e} leaves no usable eps; increase the truncation size"
        )

    x = np.log(eps_grid[in_window])
    y = np.log(im_f[in_window])
    if np.count_nonzero(in_window) >= 2:
        slope, _, rms = _ls_fit(x, y)
        win_slopes = np.diff(y) / np.diff(x)
        sig_lo = float(np.min(-win_slopes))
        sig_hi = float(np.max(-win_slopes))
    else:
        slope, rms = 0.0, 0.0
        sig_lo = sig_hi = 0.0
    return BorelSweep(
        energy=float(energy),
        eps=eps_grid,
        im_f=im_f,
        phi_norm_sq=phi_norm_sq,
        guard=float(guard),
        in_window=in_window,
        window=(float(eps_grid[in_window].min()), float(eps_grid[in_window].max())),
        sigma=float(-slope),
        sigma_lower=sig_lo,
        sigma_upper=sig_hi,
        fit_rms=rms,
    )


@dataclass
class DerivativeEstimate:
    """Finite-volume proxy for the upper alpha-derivative of the measure:
    max over the valid delta window of mu(E - delta, E + delta)/delta^alpha."""

    energy: float
    alpha: float
    deltas: np.ndarray
    ratios: np.ndarray
    in_window: np.ndarray
    guard: float
    value: float
    delta_at_max: float
    note: str = "finite-volume proxy"


def upper_alpha_derivative(
    measure, energy, alpha, deltas=None, delta_max=1.0, delta_min=None,
    spacing_guard=10.0,
):
    """Scan mu(E - delta, E + delta)/delta^alpha over a geometric delta grid
    restricted to delta >= spacing_guard * local spacing."""
    if deltas is None:
        if delta_min is None:
            delta_min = max(
                spacing_guard * measure.local_spacing(energy), delta_max / 2 ** 20
            )
        deltas = geometric_eps_grid(delta_max, delta_min)
    deltas = np.asarray(deltas, dtype=np.float64)
    guard = spacing_guard * measure.local_spacing(energy)
    in_window = deltas >= guard
    if not np.any(in_window):
        raise WindowError(
            "empty window for the derivative estimate; increase the truncation"
        )
    ratios = np.array(
        [measure.mass_in(energy - d, energy + d) / d ** alpha for d in deltas]
    )
    masked = np.where(in_window, ratios, -np.inf)
    j = int(np.argmax(masked))
    return DerivativeEstimate(
        energy=float(energy),
        alpha=float(alpha),
        deltas=deltas,
        ratios=ratios,
        in_window=in_window,
        guard=float(guard),
        value=float(ratios[j]),
        delta_at_max=float(deltas[j]),
    )
