"""Reference numpy/python implementations of the hot kernels.

These define the semantics; the numba build mirrors them operation for
operation so both backends agree to round-off (bit-exactly for the
integer-only hash generator).
"""

import math

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0 ** -53

_RESCALE_THRESHOLD = 1.0e8
_SUM_RESCALE_THRESHOLD = 1.0e100


def uniform01(seed, counters):
    """Counter-keyed uniforms on [0, 1): a pure function of (seed, counter).

    Uses the splitmix64 finalizer on ``seed + (counter+1)*gamma`` so values
    are reproducible under any evaluation order or parallel split.
    """
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + (c + np.uint64(1)) * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _U53


def csr_matvec(data, indices, indptr, x):
    """y = A @ x for a real CSR matrix A and a (possibly complex) vector x.

    Rows must be non-empty (the assembler always stores the diagonal), which
    makes the reduceat segmentation exact.
    """
    prod = data * x[indices]
    return np.add.reduceat(prod, indptr[:-1])


def _spectral_norm_2x2(a, b, c, d):
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = s * s - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    return math.sqrt(0.5 * (s + math.sqrt(disc)))


def transfer_sweep(e, v, checkpoints):
    """Sequential product of one-step transfer matrices [[e-v(k), -1], [1, 0]].

    ``v[k-1]`` is the potential at site k, k = 1..n_max.  The running matrix
    is divided by its largest entry whenever that exceeds 1e8, with the log
    of the accumulated scale kept separately, so norms are exact in log
    space at any length.

    Returns ``(log_norms, mats, log_scales, det_log_err)`` where row j of
    ``mats`` (shape (K, 2, 2)) is the stored (scaled) matrix at
    ``checkpoints[j]``, ``log_norms[j]`` the true log spectral norm,
    ``log_scales[j]`` the accumulated log scale, and ``det_log_err`` the
    worst |log det| of the reconstructed product over the checkpoints.
    """
    n_max = len(v)
    cps = np.asarray(checkpoints, dtype=np.int64)
    k_out = len(cps)
    log_norms = np.empty(k_out)
    mats = np.empty((k_out, 2, 2))
    log_scales = np.empty(k_out)

    a = 1.0
    b = 0.0
    c = 0.0
    d = 1.0
    ls = 0.0
    det_log_err = 0.0
    ci = 0
    for k in range(1, n_max + 1):
        w = e - v[k - 1]
        na = w * a - c
        nb = w * b - d
        c = a
        d = b
        a = na
        b = nb
        m = max(abs(a), abs(b), abs(c), abs(d))
        if m > _RESCALE_THRESHOLD:
            a /= m
            b /= m
            c /= m
            d /= m
            ls += math.log(m)
        if ci < k_out and k == cps[ci]:
            sn = _spectral_norm_2x2(a, b, c, d)
            log_norms[ci] = math.log(sn) + ls
            mats[ci, 0, 0] = a
            mats[ci, 0, 1] = b
            mats[ci, 1, 0] = c
            mats[ci, 1, 1] = d
            log_scales[ci] = ls
            # det = 1 is only checkable while the smaller singular value is
            # resolvable in double precision (norm <= ~1e4, no rescale yet).
            if ls == 0.0 and sn <= 1.0e4:
                err = abs(math.log(a * d - b * c))
                if err > det_log_err:
                    det_log_err = err
            ci += 1
    return log_norms, mats, log_scales, det_log_err


def halfline_solution(e, v, u0, u1, n_max):
    """Three-term recurrence u(n+1) = (e - v(n)) u(n) - u(n-1), unscaled.

    Returns the array u(0..n_max); the caller is responsible for staying in
    a regime where the values fit in double precision.
    """
    u = np.empty(n_max + 1)
    u[0] = u0
    u[1] = u1
    for n in range(1, n_max):
        u[n + 1] = (e - v[n - 1]) * u[n] - u[n - 1]
    return u


def halfline_lognorm_sweep(e, v, u0, u1, radii):
    """log of the cumulative square norm sum_{n=1..R} u(n)^2 at given radii.

    Same recurrence as :func:`halfline_solution` but with joint rescaling of
    the state and the running sum, so arbitrarily growing solutions stay
    representable.  ``radii`` must be ascending integers >= 1.
    """
    rr = np.asarray(radii, dtype=np.int64)
    k_out = len(rr)
    out = np.empty(k_out)
    um = u0
    up = u1
    s = u1 * u1
    ls = 0.0
    ri = 0
    if ri < k_out and rr[ri] == 1:
        out[ri] = math.log(s) + 2.0 * ls
        ri += 1
    n_last = int(rr[-1])
    for n in range(1, n_last):
        unew = (e - v[n - 1]) * up - um
        um = up
        up = unew
        s += up * up
        m = abs(up)
        if m > _SUM_RESCALE_THRESHOLD or s > _SUM_RESCALE_THRESHOLD:
            um /= m
            up /= m
            s /= m * m
            ls += math.log(m)
        if ri < k_out and n + 1 == rr[ri]:
            out[ri] = math.log(s) + 2.0 * ls
            ri += 1
    return out


def amplitude_sweep(e, v, checkpoints):
    """Dirichlet-solution growth in the plane-wave amplitude representation,
    with its first-order phase martingale as a control variate.

    Writes u(n) = 2 Re(C_n z^n), z = e^{ik}, E = 2 cos k, which makes the
    one-step update exact: C_{n+1} = C_n + i v(n) u(n) e^{-ikn} / (2 sin k).
    Returns (log|C| at the checkpoints, running martingale sum
    M_n = sum_j v(j) sin(2 psi_j) / (2 sin k)) where psi_j is the predictable
    phase of C_j e^{ikj}.  E[M] = 0 exactly, and log|C| - M carries only
    second-order noise, so (log|C| - M) differences give a low-variance
    unbiased estimate of the growth power.  Requires |e| < 2.
    """
    k = math.acos(e / 2.0)
    sk = math.sin(k)
    n_max = len(v)
    cps = np.asarray(checkpoints, dtype=np.int64)
    k_out = len(cps)
    log_amp = np.empty(k_out)
    mart = np.empty(k_out)

    cre = 0.0
    cim = -1.0 / (2.0 * sk)  # u(0) = 0, u(1) = 1
    lc = 0.0
    msum = 0.0
    ci = 0
    for n in range(1, n_max + 1):
        vn = v[n - 1]
        phase = k * n
        zr = math.cos(phase)
        zi = math.sin(phase)
        wr = cre * zr - cim * zi
        wi = cre * zi + cim * zr
        u = 2.0 * wr
        r2 = wr * wr + wi * wi
        msum += vn * (wr * wi / r2) / sk
        a = vn * u / (2.0 * sk)
        cre += a * zi
        cim += a * zr
        mag = abs(cre) + abs(cim)
        if mag > _RESCALE_THRESHOLD:
            cre /= mag
            cim /= mag
            lc += math.log(mag)
        if ci < k_out and n == cps[ci]:
            log_amp[ci] = 0.5 * math.log(cre * cre + cim * cim) + lc
            mart[ci] = msum
            ci += 1
    return log_amp, mart


def numerov_peaks(e, h, x_max):
    """Integrate u'' = -(x + e) u from x = 1 with u(1) = 1, u'(1) = 0 and
    collect the local maxima of |u| with 3-point parabolic refinement.

    Returns (x_peaks, amp_peaks).  Fourth-order Numerov scheme; the first
    step comes from the Taylor expansion at x = 1.
    """
    g0 = 1.0 + e
    n_steps = int(math.ceil((x_max - 1.0) / h))
    cap = int(0.22 * (x_max + abs(e) + 2.0) ** 1.5) + 16
    xs = np.empty(cap)
    amps = np.empty(cap)

    um = 1.0
    up = (
        1.0
        - 0.5 * g0 * h * h
        - h * h * h / 6.0
        + g0 * g0 * h ** 4 / 24.0
    )
    gm = g0
    gc = g0 + h
    cnt = 0
    h2_12 = h * h / 12.0
    for k in range(1, n_steps):
        gp = g0 + (k + 1) * h
        unew = (2.0 * up * (1.0 - 5.0 * h2_12 * gc) - um * (1.0 + h2_12 * gm)) / (
            1.0 + h2_12 * gp
        )
        ym = abs(um)
        y0 = abs(up)
        yp = abs(unew)
        if y0 >= ym and y0 > yp:
            denom = ym - 2.0 * y0 + yp
            if denom < 0.0:
                delta = 0.5 * (ym - yp) / denom
                amp = y0 - 0.25 * (ym - yp) * delta
            else:
                delta = 0.0
                amp = y0
            xs[cnt] = 1.0 + k * h + delta * h
            amps[cnt] = amp
            cnt += 1
        um = up
        up = unew
        gm = gc
        gc = gp
    return xs[:cnt], amps[:cnt]
