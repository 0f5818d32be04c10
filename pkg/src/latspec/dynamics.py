"""Time evolution and transport observables.

The propagator exp(-i h t) is expanded in Chebyshev polynomials of the
Gershgorin-rescaled operator; the Bessel coefficient tail gives a certified
truncation error, so unitarity holds to the requested tolerance with no
time-step error to tune.  Transport runs keep a single trajectory and build
every time-averaged quantity from running trapezoid sums of the radial
probability profile, so all requested horizons T_i share one propagation.

A light-cone guard protects every run: the hopping-1 lattice has group
speed at most 2 per axis, so averaging beyond (wall distance)/(2 d) would
mix in reflections from the artificial truncation and is a hard error.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .eigensolutions import _ls_fit
from .errors import ConeGuardError

DEFAULT_MARGIN = 8
EXPANSION_TOL = 1e-12


def delta_state(domain, site):
    """Normalized point state at the given site; returns (vector, index)."""
    idx = int(domain.index_of([site])[0])
    if idx < 0:
        raise ValueError(f"site {tuple(site)} is not in the domain")
    psi = np.zeros(domain.n_sites, dtype=np.complex128)
    psi[idx] = 1.0
    return psi, idx


def _chebyshev_order(x, tol):
    """Smallest truncation order whose analytic coefficient tail bound
    2 sum_{k>K} (x/2)^k / k! is below tol (|J_k(x)| <= (x/2)^k / k!)."""
    if x <= 0.0:
        return 0, 0.0
    k = max(int(math.ceil(x)), 4)
    while True:
        ratio = (x / 2.0) / (k + 2.0)
        if ratio < 0.5:
            log_term = (k + 1.0) * math.log(x / 2.0) - math.lgamma(k + 2.0)
            bound = 2.0 * math.exp(log_term) / (1.0 - ratio)
            if bound <= tol:
                return k, bound
        k += 2


class ChebyshevPropagator:
    """Fixed-step propagator psi -> exp(-i h dt) psi."""

    def __init__(self, op, dt, tol=EXPANSION_TOL):
        self.op = op
        self.dt = float(dt)
        b_min, b_max = op.bounds
        self.center = 0.5 * (b_max + b_min)
        half = 0.5 * (b_max - b_min)
        self.scale = max(half, 1e-30) * (1.0 + 1e-12)
        x = self.scale * self.dt
        order, tail = _chebyshev_order(x, tol)
        self.order = order
        self.tail_bound = tail
        k = np.arange(order + 1)
        signs = np.array([1.0, -1.0j, -1.0, 1.0j])[k % 4]
        self.coeffs = jv(k, x) * signs * np.where(k == 0, 1.0, 2.0)
        self.phase = np.exp(-1.0j * self.center * self.dt)

    def _scaled_apply(self, vec):
        return (self.op.apply(vec) - self.center * vec) / self.scale

    def step(self, psi):
        t_prev = psi
        acc = self.coeffs[0] * t_prev
        if self.order >= 1:
            t_cur = self._scaled_apply(psi)
            acc = acc + self.coeffs[1] * t_cur
            for k in range(2, self.order + 1):
                t_next = 2.0 * self._scaled_apply(t_cur) - t_prev
                acc = acc + self.coeffs[k] * t_next
                t_prev, t_cur = t_cur, t_next
        return self.phase * acc


def _wall_distance(domain, center_idx):
    """Max-norm distance from the state's center to the nearest
    truncation-flagged site (infinite when nothing is truncated)."""
    trunc = domain.truncation_boundary
    if not np.any(trunc):
        return math.inf
    center = domain.sites[center_idx]
    return float(np.abs(domain.sites[trunc] - center).max(axis=1).min())


def check_cone_guard(domain, center_idx, t_max, r_obs=0.0, margin=DEFAULT_MARGIN):
    """Enforce t_max <= (wall distance - r_obs - margin) / (2 d)."""
    dist = _wall_distance(domain, center_idx)
    allowed = (dist - r_obs - margin) / (2.0 * domain.dimension)
    if t_max > allowed:
        required = 2.0 * domain.dimension * t_max + r_obs + margin
        raise ConeGuardError(
            f"t = {t_max} exceeds the light-cone limit {allowed:.3f} for this "
            f"box (need wall distance >= {required:.1f})",
            required_extent=required,
            op="evolve",
        )


def evolve(op, psi, t, tol=EXPANSION_TOL, guard=True, r_obs=0.0,
           margin=DEFAULT_MARGIN, center_idx=None):
    """exp(-i h t) psi in a single certified Chebyshev expansion."""
    if t < 0:
        raise ValueError("t must be >= 0")
    psi = np.asarray(psi, dtype=np.complex128)
    if t == 0:
        return psi.copy()
    if guard:
        if center_idx is None:
            center_idx = int(np.argmax(np.abs(psi)))
        check_cone_guard(op.domain, center_idx, t, r_obs=r_obs, margin=margin)
    return ChebyshevPropagator(op, t, tol=tol).step(psi)


@dataclass
class TransportRecord:
    """Time-averaged transport observables on a shared snapshot grid."""

    initial_site: tuple
    dt: float
    times: np.ndarray
    moment_orders: tuple
    moments: dict  # order -> array over times
    survival: np.ndarray  # None when no schedule was requested
    radii: np.ndarray
    inside_avg: np.ndarray
    outside_avg: np.ndarray
    mass_avg: np.ndarray
    norm_drift: float
    energy_drift: float
    expansion_budget: float

    def partition_residual(self):
        """max |<P mass> + <(1-P) mass> - 1| over the grid (the projector
        partition identity; equals norm conservation in disguise)."""
        if self.survival is None:
            return None
        return float(np.max(np.abs(self.inside_avg + self.outside_avg - 1.0)))

    def chain_inequality_margin(self, m):
        """min over T of <<|X|^m>> - R_T^m <(1-P) mass>; the escape bound
        requires this to be non-negative (up to round-off)."""
        if self.survival is None:
            return None
        lhs = self.moments[m]
        rhs = self.radii ** m * self.outside_avg
        return float(np.min(lhs - rhs))


def _snap_steps(t_grid, dt):
    steps = np.unique(np.maximum(np.round(np.asarray(t_grid) / dt), 1).astype(np.int64))
    return steps


def _transport_run(
    op,
    psi,
    center_idx,
    t_grid,
    dt,
    m_list,
    schedule=None,
    tol=EXPANSION_TOL,
    margin=DEFAULT_MARGIN,
):
    domain = op.domain
    psi = np.asarray(psi, dtype=np.complex128)
    steps = _snap_steps(t_grid, dt)
    times = steps * dt
    t_max = float(times[-1])

    radii = None
    r_obs = 0.0
    if schedule is not None:
        radii = np.asarray(
            [schedule(t) if callable(schedule) else schedule[i]
             for i, t in enumerate(times)],
            dtype=np.float64,
        )
        r_obs = float(radii.max())
        wall = _wall_distance(domain, center_idx)
        if r_obs > wall - margin:
            raise ConeGuardError(
                f"schedule radius {r_obs} too close to the wall distance {wall}",
                required_extent=r_obs + margin,
                op="ball_survival",
            )
    check_cone_guard(domain, center_idx, t_max, r_obs=r_obs, margin=margin)

    center = domain.sites[center_idx]
    dist = np.abs(domain.sites - center).max(axis=1).astype(np.int64)
    prof_len = int(dist.max()) + 1

    prop = ChebyshevPropagator(op, dt, tol=tol)
    prob = np.abs(psi) ** 2
    profile0 = np.bincount(dist, weights=prob, minlength=prof_len)
    norm0 = float(np.sum(prob))
    energy0 = float(np.vdot(psi, op.apply(psi)).real)

    run_sum = np.zeros(prof_len)
    snapshots = np.empty((len(steps), prof_len))
    norm_drift = 0.0
    energy_drift = 0.0

    si = 0
    state = psi
    for j in range(1, int(steps[-1]) + 1):
        state = prop.step(state)
        prob = np.abs(state) ** 2
        profile = np.bincount(dist, weights=prob, minlength=prof_len)
        run_sum += profile
        if j == steps[si]:
            snapshots[si] = dt * (run_sum + 0.5 * (profile0 - profile))
            norm_drift = max(norm_drift, abs(math.sqrt(np.sum(prob)) - math.sqrt(norm0)))
            energy = float(np.vdot(state, op.apply(state)).real)
            energy_drift = max(energy_drift, abs(energy - energy0))
            si += 1
            if si == len(steps):
                break

    r_grid = np.arange(prof_len, dtype=np.float64)
    moments = {}
    for m in m_list:
        weights = r_grid ** m
        moments[m] = snapshots @ weights / times
    mass_avg = snapshots.sum(axis=1) / times

    survival = inside = outside = None
    if radii is not None:
        cut = np.clip(np.floor(radii).astype(np.int64), 0, prof_len - 1)
        inside = np.array(
            [snapshots[i, : cut[i] + 1].sum() for i in range(len(steps))]
        ) / times
        outside = np.array(
            [snapshots[i, cut[i] + 1 :].sum() for i in range(len(steps))]
        ) / times
        survival = inside

    return TransportRecord(
        initial_site=tuple(int(c) for c in center),
        dt=float(dt),
        times=times,
        moment_orders=tuple(m_list),
        moments=moments,
        survival=survival,
        radii=radii,
        inside_avg=inside,
        outside_avg=outside,
        mass_avg=mass_avg,
        norm_drift=float(norm_drift),
        energy_drift=float(energy_drift),
        expansion_budget=float(prop.tail_bound * steps[-1]),
    )


def time_averaged_moments(op, psi, t_grid, m_list=(2,), dt=0.25, center_idx=None,
                          tol=EXPANSION_TOL, margin=DEFAULT_MARGIN):
    """Trapezoid time averages (1/T) int_0^T sum_n |n - n0|^m |psi(n, t)|^2 dt
    on a shared trajectory, for every requested T and moment order.

    |n - n0| is the max-norm distance from the initial-state center n0, and
    the snapshot horizons are snapped to multiples of dt."""
    if dt > 0.25 + 1e-12:
        raise ValueError("dt must be <= 0.25 to resolve the O(1) bandwidth")
    if center_idx is None:
        center_idx = int(np.argmax(np.abs(psi)))
    return _transport_run(op, psi, center_idx, t_grid, dt, tuple(m_list),
                          schedule=None, tol=tol, margin=margin)


def ball_survival(op, psi, schedule, t_grid, dt=0.25, m_list=(), center_idx=None,
                  tol=EXPANSION_TOL, margin=DEFAULT_MARGIN):
    """Time-averaged probability mass inside the cube of radius R_T, for the
    given schedule T -> R_T, sharing the trajectory with any requested
    moments."""
    if dt > 0.25 + 1e-12:
        raise ValueError("dt must be <= 0.25 to resolve the O(1) bandwidth")
    if center_idx is None:
        center_idx = int(np.argmax(np.abs(psi)))
    return _transport_run(op, psi, center_idx, t_grid, dt, tuple(m_list),
                          schedule=schedule, tol=tol, margin=margin)


def escape_radius_schedule(alpha, gamma, psi1_norm=1.0, c1=1.0, c2=1.0):
    """Closed-form schedule R_T = (||psi1||^2 T^alpha / (64 c2 c1))^(1/gamma)
    balancing the survival bound against the escaping mass."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")
    if gamma <= 0 or psi1_norm <= 0 or c1 <= 0 or c2 <= 0:
        raise ValueError("all schedule parameters must be positive")
    prefactor = psi1_norm ** 2 / (64.0 * c2 * c1)

    def schedule(t):
        return (prefactor * t ** alpha) ** (1.0 / gamma)

    return schedule


@dataclass
class ExponentFit:
    order: int
    value: float
    lower: float
    upper: float
    rms: float
    window: tuple
    n_points: int


def transport_exponent(record, m, discard_factor=10.0):
    """Fitted beta_m: least-squares slope of log <<|X|^m>> vs log T divided
    by m, over the grid after the first time decade, with windowed min/max
    brackets."""
    if m not in record.moments:
        raise KeyError(f"record has no moment of order {m}")
    times = record.times
    usable = times >= discard_factor * times[0]
    if np.count_nonzero(usable) < 4:
        raise ValueError("fewer than 4 usable horizons after the transient decade")
    x = np.log(times[usable])
    y = np.log(np.maximum(record.moments[m][usable], 1e-300))
    slope, _, rms = _ls_fit(x, y)
    win = np.diff(y) / np.diff(x)
    return ExponentFit(
        order=int(m),
        value=slope / m,
        lower=float(np.min(win)) / m,
        upper=float(np.max(win)) / m,
        rms=rms,
        window=(float(times[usable][0]), float(times[usable][-1])),
        n_points=int(np.count_nonzero(usable)),
    )
