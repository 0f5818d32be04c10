"""numba builds of the hot kernels; see numpy_impl for the semantics."""

import math

import numpy as np
from numba import njit

_U53 = 2.0 ** -53
_RESCALE_THRESHOLD = 1.0e8
_SUM_RESCALE_THRESHOLD = 1.0e100


@njit(cache=True, nogil=True)
def uniform01(seed, counters):
    n = counters.shape[0]
    out = np.empty(n)
    gamma = np.uint64(0x9E3779B97F4A7C15)
    mix1 = np.uint64(0xBF58476D1CE4E5B9)
    mix2 = np.uint64(0x94D049BB133111EB)
    s = np.uint64(seed)
    for i in range(n):
        z = s + (counters[i] + np.uint64(1)) * gamma
        z = (z ^ (z >> np.uint64(30))) * mix1
        z = (z ^ (z >> np.uint64(27))) * mix2
        z = z ^ (z >> np.uint64(31))
        out[i] = np.float64(z >> np.uint64(11)) * _U53
    return out


@njit(cache=True, nogil=True)
def csr_matvec(data, indices, indptr, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n, dtype=x.dtype)
    for i in range(n):
        acc = y[i]
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        y[i] = acc
    return y


@njit(cache=True, nogil=True)
def _spectral_norm_2x2(a, b, c, d):
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = s * s - 4.0 * det * det
    if disc < 0.0:
        disc = 0.0
    return math.sqrt(0.5 * (s + math.sqrt(disc)))


@njit(cache=True, nogil=True)
def transfer_sweep(e, v, checkpoints):
    n_max = len(v)
    k_out = len(checkpoints)
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
        if ci < k_out and k == checkpoints[ci]:
            sn = _spectral_norm_2x2(a, b, c, d)
            log_norms[ci] = math.log(sn) + ls
            mats[ci, 0, 0] = a
            mats[ci, 0, 1] = b
            mats[ci, 1, 0] = c
            mats[ci, 1, 1] = d
            log_scales[ci] = ls
            if ls == 0.0 and sn <= 1.0e4:
                err = abs(math.log(a * d - b * c))
                if err > det_log_err:
                    det_log_err = err
            ci += 1
    return log_norms, mats, log_scales, det_log_err


@njit(cache=True, nogil=True)
def halfline_solution(e, v, u0, u1, n_max):
    u = np.empty(n_max + 1)
    u[0] = u0
    u[1] = u1
    for n in range(1, n_max):
        u[n + 1] = (e - v[n - 1]) * u[n] - u[n - 1]
    return u


@njit(cache=True, nogil=True)
def halfline_lognorm_sweep(e, v, u0, u1, radii):
    k_out = len(radii)
    out = np.empty(k_out)
    um = u0
    up = u1
    s = u1 * u1
    ls = 0.0
    ri = 0
    if ri < k_out and radii[ri] == 1:
        out[ri] = math.log(s) + 2.0 * ls
        ri += 1
    n_last = radii[-1]
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
        if ri < k_out and n + 1 == radii[ri]:
            out[ri] = math.log(s) + 2.0 * ls
            ri += 1
    return out


@njit(cache=True, nogil=True)
def amplitude_sweep(e, v, checkpoints):
    k = math.acos(e / 2.0)
    sk = math.sin(k)
    n_max = len(v)
    k_out = len(checkpoints)
    log_amp = np.empty(k_out)
    mart = np.empty(k_out)

    cre = 0.0
    cim = -1.0 / (2.0 * sk)
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
        if ci < k_out and n == checkpoints[ci]:
            log_amp[ci] = 0.5 * math.log(cre * cre + cim * cim) + lc
            mart[ci] = msum
            ci += 1
    return log_amp, mart


@njit(cache=True, nogil=True)
def numerov_peaks(e, h, x_max):
    g0 = 1.0 + e
    n_steps = int(math.ceil((x_max - 1.0) / h))
    cap = int(0.22 * (x_max + abs(e) + 2.0) ** 1.5) + 16
    xs = np.empty(cap)
    amps = np.empty(cap)

    um = 1.0
    up = 1.0 - 0.5 * g0 * h * h - h * h * h / 6.0 + g0 * g0 * h ** 4 / 24.0
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
