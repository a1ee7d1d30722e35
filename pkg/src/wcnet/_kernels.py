"""Inner loops of the pipeline.

Each kernel exists twice: a loop version compiled with numba (when it is
importable and not disabled through ``WCNET_DISABLE_NUMBA``) and a vectorised
numpy version. The public names at the bottom pick one of the two; both stay
reachable as ``*_loops`` / ``*_numpy`` for tests and benchmarks.
"""

import numpy as np

from ._accel import HAS_NUMBA, njit

__all__ = [
    "HAS_NUMBA",
    "convolve_scales",
    "oriented_coherence",
    "pam_build",
    "pam_swap",
]


# -- scale smoothing ---------------------------------------------------------


def _reflect_index(i, n):
    # half-sample symmetric extension: ... b a | a b c ... z | z y ...
    period = 2 * n
    i = i % period
    if i < 0:
        i += period
    if i >= n:
        i = period - 1 - i
    return i


_reflect_index_jit = njit(_reflect_index)


def _convolve_scales_loops(field, kernel):
    n_t, n_s = field.shape
    half = kernel.shape[0] // 2
    out = np.zeros_like(field)
    for t in range(n_t):
        for j in range(n_s):
            acc = field[t, 0] * 0.0
            for m in range(-half, half + 1):
                acc += kernel[m + half] * field[t, _reflect_index_jit(j + m, n_s)]
            out[t, j] = acc
    return out


_convolve_scales_loops = njit(_convolve_scales_loops)


def _reflect_indices(n, half):
    idx = np.arange(-half, n + half)
    idx = np.mod(idx, 2 * n)
    return np.where(idx >= n, 2 * n - 1 - idx, idx)


def _convolve_scales_numpy(field, kernel):
    n_s = field.shape[1]
    half = kernel.shape[0] // 2
    padded = field[:, _reflect_indices(n_s, half)]
    out = np.zeros_like(field)
    for m in range(kernel.shape[0]):
        out += kernel[m] * padded[:, m:m + n_s]
    return out


# -- oriented coherence ------------------------------------------------------


def _oriented_coherence_loops(cross, power_x, power_y, floor):
    n_t, n_s = cross.shape
    r2 = np.empty((n_t, n_s))
    phase = np.empty((n_t, n_s))
    r2_xy = np.empty((n_t, n_s))
    r2_yx = np.empty((n_t, n_s))
    n_zero = 0
    for t in range(n_t):
        for j in range(n_s):
            c = cross[t, j]
            den = power_x[t, j] * power_y[t, j]
            if power_x[t, j] < floor or power_y[t, j] < floor or den <= 0.0:
                val = 0.0
                n_zero += 1
            else:
                val = (c.real * c.real + c.imag * c.imag) / den
                if val > 1.0:
                    val = 1.0
                elif val < 0.0:
                    val = 0.0
            ph = np.arctan2(c.imag, c.real)
            if ph == -np.pi:
                ph = np.pi
            # |cos(phase)| from the spectrum itself, exactly 0 on the imaginary axis
            mod = np.hypot(c.real, c.imag)
            penalised = val * (abs(c.real) / mod if mod > 0.0 else 1.0)
            r2[t, j] = val
            phase[t, j] = ph
            if ph >= 0.0:
                r2_xy[t, j] = val
                r2_yx[t, j] = penalised
            else:
                r2_xy[t, j] = penalised
                r2_yx[t, j] = val
    return r2, phase, r2_xy, r2_yx, n_zero


_oriented_coherence_loops = njit(_oriented_coherence_loops)


def _oriented_coherence_numpy(cross, power_x, power_y, floor):
    den = power_x * power_y
    dead = (power_x < floor) | (power_y < floor) | (den <= 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = (cross.real * cross.real + cross.imag * cross.imag) / den
    r2 = np.where(dead, 0.0, np.clip(r2, 0.0, 1.0))
    phase = np.arctan2(cross.imag, cross.real)
    phase[phase == -np.pi] = np.pi
    mod = np.hypot(cross.real, cross.imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_abs = np.where(mod > 0.0, np.abs(cross.real) / mod, 1.0)
    penalised = r2 * cos_abs
    lead = phase >= 0.0
    r2_xy = np.where(lead, r2, penalised)
    r2_yx = np.where(lead, penalised, r2)
    return r2, phase, r2_xy, r2_yx, int(dead.sum())


# -- PAM ---------------------------------------------------------------------


def _pam_build_loops(d, k):
    n = d.shape[0]
    medoids = np.empty(k, dtype=np.int64)
    nearest = np.full(n, np.inf)
    chosen = np.zeros(n, dtype=np.bool_)
    for step in range(k):
        best = -1
        best_cost = np.inf
        for h in range(n):
            if chosen[h]:
                continue
            cost = 0.0
            for j in range(n):
                dj = d[j, h]
                cost += dj if dj < nearest[j] else nearest[j]
            if cost < best_cost:
                best_cost = cost
                best = h
        medoids[step] = best
        chosen[best] = True
        for j in range(n):
            if d[j, best] < nearest[j]:
                nearest[j] = d[j, best]
    return medoids


_pam_build_loops = njit(_pam_build_loops)


def _pam_build_numpy(d, k):
    n = d.shape[0]
    medoids = []
    nearest = np.full(n, np.inf)
    chosen = np.zeros(n, dtype=bool)
    for _ in range(k):
        costs = np.minimum(d, nearest[:, None]).sum(axis=0)
        costs[chosen] = np.inf
        best = int(np.argmin(costs))
        medoids.append(best)
        chosen[best] = True
        nearest = np.minimum(nearest, d[:, best])
    return np.asarray(medoids, dtype=np.int64)


def _swap_cost(d, medoids, drop, add):
    n = d.shape[0]
    cost = 0.0
    for j in range(n):
        best = d[j, add]
        for i in range(medoids.shape[0]):
            if i == drop:
                continue
            v = d[j, medoids[i]]
            if v < best:
                best = v
        cost += best
    return cost


_swap_cost = njit(_swap_cost)


def _pam_swap_loops(d, medoids, tol, max_iter):
    n = d.shape[0]
    k = medoids.shape[0]
    medoids = medoids.copy()
    is_medoid = np.zeros(n, dtype=np.bool_)
    for i in range(k):
        is_medoid[medoids[i]] = True
    current = _swap_cost(d, medoids, -1, medoids[0])
    n_iter = 0
    while n_iter < max_iter:
        best_cost = current
        best_i = -1
        best_h = -1
        for i in range(k):
            for h in range(n):
                if is_medoid[h]:
                    continue
                cost = _swap_cost(d, medoids, i, h)
                if cost < best_cost - tol:
                    best_cost = cost
                    best_i = i
                    best_h = h
        if best_i < 0:
            break
        is_medoid[medoids[best_i]] = False
        is_medoid[best_h] = True
        medoids[best_i] = best_h
        current = best_cost
        n_iter += 1
    return medoids, current, n_iter


_pam_swap_loops = njit(_pam_swap_loops)


def _pam_swap_numpy(d, medoids, tol, max_iter):
    n = d.shape[0]
    k = medoids.shape[0]
    medoids = medoids.copy()
    current = float(d[:, medoids].min(axis=1).sum())
    n_iter = 0
    while n_iter < max_iter:
        to_medoids = d[:, medoids]  # (n, k)
        # distance to the closest remaining medoid once medoid i is dropped
        others = np.empty((k, n))
        for i in range(k):
            if k == 1:
                others[i] = np.inf
            else:
                others[i] = np.delete(to_medoids, i, axis=1).min(axis=1)
        costs = np.minimum(others[:, :, None], d[None, :, :]).sum(axis=1)  # (k, n)
        costs[:, medoids] = np.inf
        # first strictly improving minimum in (i, h) order, same as the loop version
        best_cost = current
        best_i = best_h = -1
        for i in range(k):
            for h in range(n):
                if costs[i, h] < best_cost - tol:
                    best_cost = costs[i, h]
                    best_i, best_h = i, h
        if best_i < 0:
            break
        medoids[best_i] = best_h
        current = float(best_cost)
        n_iter += 1
    return medoids, current, n_iter


# -- dispatch ----------------------------------------------------------------

if HAS_NUMBA:
    convolve_scales = _convolve_scales_loops
    oriented_coherence = _oriented_coherence_loops
    pam_build = _pam_build_loops
    pam_swap = _pam_swap_loops
else:
    convolve_scales = _convolve_scales_numpy
    oriented_coherence = _oriented_coherence_numpy
    pam_build = _pam_build_numpy
    pam_swap = _pam_swap_numpy
