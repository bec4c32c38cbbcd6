"""Hot loops with a numba path and a pure-numpy fallback.

Each kernel exists twice: a loop form written in the numba-compatible subset
(compiled when numba is enabled) and a numpy form used otherwise. Both
evaluate the update with the same left-to-right summation order, so the two
backends agree bit for bit on the iteration itself.
"""
import numpy as np

from ._backend import NUMBA_ENABLED, maybe_njit

# Above this pressure the update coefficients are formed from s/(rho*d) so
# that rho never multiplies a state value directly.
LARGE_RHO = 1e15

POWER_TOL = 1e-12
POWER_MAXITER = 100_000


# --------------------------------------------------------------------------
# Iteration of the pressure update
# --------------------------------------------------------------------------

def _iterate_loops(adjacency, stubbornness, preferred, row_sums, rhos, x0):
    n = adjacency.shape[0]
    steps = rhos.shape[0]
    states = np.empty((steps + 1, n))
    states[0, :] = x0
    for k in range(steps):
        rho = rhos[k]
        prev = states[k]
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += adjacency[i, j] * prev[j]
            s = stubbornness[i]
            d = row_sums[i]
            if rho > LARGE_RHO and d > 0.0:
                r = s / (rho * d)
                states[k + 1, i] = (r * preferred[i] + acc / d) / (1.0 + r)
            else:
                states[k + 1, i] = (s * preferred[i] + rho * acc) / (s + rho * d)
    return states


def _iterate_numpy(adjacency, stubbornness, preferred, row_sums, rhos, x0):
    n = adjacency.shape[0]
    steps = rhos.shape[0]
    states = np.empty((steps + 1, n))
    states[0] = x0
    cols = [np.ascontiguousarray(adjacency[:, j]) for j in range(n)]
    has_out = row_sums > 0.0
    safe_d = np.where(has_out, row_sums, 1.0)
    weighted_pref = stubbornness * preferred
    for k in range(steps):
        rho = rhos[k]
        prev = states[k]
        acc = np.zeros(n)
        for j in range(n):
            acc += cols[j] * prev[j]
        direct = (weighted_pref + rho * acc) / (stubbornness + rho * row_sums)
        if rho > LARGE_RHO:
            r = stubbornness / (rho * safe_d)
            stable = (r * preferred + acc / safe_d) / (1.0 + r)
            states[k + 1] = np.where(has_out, stable, direct)
        else:
            states[k + 1] = direct
    return states


_iterate_jit = maybe_njit(_iterate_loops)


def iterate(adjacency, stubbornness, preferred, row_sums, rhos, x0, backend=None):
    """Apply the update once per entry of ``rhos``; returns all states."""
    args = (
        np.ascontiguousarray(adjacency, dtype=np.float64),
        np.ascontiguousarray(stubbornness, dtype=np.float64),
        np.ascontiguousarray(preferred, dtype=np.float64),
        np.ascontiguousarray(row_sums, dtype=np.float64),
        np.ascontiguousarray(rhos, dtype=np.float64),
        np.ascontiguousarray(x0, dtype=np.float64),
    )
    return _pick(_iterate_jit, _iterate_numpy, backend)(*args)


# --------------------------------------------------------------------------
# Compensated cumulative sums (log-products, divergence witnesses)
# --------------------------------------------------------------------------

def _cumsum_loops(values):
    out = np.empty(values.shape[0])
    total = 0.0
    comp = 0.0
    for k in range(values.shape[0]):
        v = values[k]
        t = total + v
        # Neumaier: recover the low-order bits lost in ``total + v``.
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[k] = total + comp
    return out


def _cumsum_numpy(values):
    return np.cumsum(values.astype(np.longdouble)).astype(np.float64)


_cumsum_jit = maybe_njit(_cumsum_loops)


def compensated_cumsum(values, backend=None):
    """Running sums in ascending index order, carried in extended precision."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.size and not np.all(np.isfinite(values)):
        # -inf (log of an exact zero) poisons the compensation term; plain
        # cumsum gives the right answer there.
        return np.cumsum(values)
    return _pick(_cumsum_jit, _cumsum_numpy, backend)(values)


# --------------------------------------------------------------------------
# Largest singular value of the iteration matrix, batched over pressures
# --------------------------------------------------------------------------
#
# Power iteration on B = M^T M from the all-ones vector. B is entrywise
# nonnegative, so the Rayleigh quotient is a lower bound on its top
# eigenvalue and, while every v_i > 0, max_i (Bv)_i / v_i is an upper bound
# (Collatz-Wielandt). Iteration stops when either the residual test or the
# two-sided bound meets ``tol``. Every STALL_CHECK iterations the residual
# decay rate is measured; if it predicts the cap will be hit first the entry
# is abandoned as not converged so the caller can switch to a dense solver.

STALL_CHECK = 50


def _spectral_norms_loops(adjacency, stubbornness, row_sums, rhos, tol, maxiter):
    n = adjacency.shape[0]
    m = rhos.shape[0]
    sigmas = np.empty(m)
    converged = np.zeros(m, dtype=np.bool_)
    mat = np.empty((n, n))
    gram = np.empty((n, n))
    v = np.empty(n)
    u = np.empty(n)
    for idx in range(m):
        rho = rhos[idx]
        for i in range(n):
            s = stubbornness[i]
            d = row_sums[i]
            if rho > LARGE_RHO and d > 0.0:
                scale = 1.0 / (d * (1.0 + s / (rho * d)))
            else:
                scale = rho / (s + rho * d)
            for j in range(n):
                mat[i, j] = adjacency[i, j] * scale
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for r in range(n):
                    acc += mat[r, i] * mat[r, j]
                gram[i, j] = acc
        for i in range(n):
            v[i] = 1.0 / np.sqrt(n)
        theta = 0.0
        done = False
        last_res = -1.0
        it = 0
        while it < maxiter:
            it += 1
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += gram[i, j] * v[j]
                u[i] = acc
            theta = 0.0
            vnorm2 = 0.0
            for i in range(n):
                theta += v[i] * u[i]
                vnorm2 += v[i] * v[i]
            # Divide by v.v: the normalised v is only unit length to rounding,
            # and that bias would compound across long products.
            theta = theta / vnorm2
            if theta <= 0.0:
                theta = 0.0
                done = True
                break
            res = 0.0
            unorm = 0.0
            upper = 0.0
            positive = True
            for i in range(n):
                diff = u[i] - theta * v[i]
                res += diff * diff
                unorm += u[i] * u[i]
                if v[i] > 0.0:
                    ratio = u[i] / v[i]
                    if ratio > upper:
                        upper = ratio
                else:
                    positive = False
            res = np.sqrt(res / vnorm2)
            if res <= tol * theta or (positive and upper - theta <= tol * theta):
                done = True
                break
            if it % STALL_CHECK == 0:
                if last_res > 0.0:
                    rate = (res / last_res) ** (1.0 / STALL_CHECK)
                    if rate >= 1.0:
                        break
                    needed = np.log(tol * theta / res) / np.log(rate)
                    if needed > maxiter - it:
                        break
                last_res = res
            unorm = np.sqrt(unorm)
            for i in range(n):
                v[i] = u[i] / unorm
        sigmas[idx] = np.sqrt(theta)
        converged[idx] = done
    return sigmas, converged


def _spectral_norms_numpy(adjacency, stubbornness, row_sums, rhos, tol, maxiter):
    n = adjacency.shape[0]
    scales = row_scales(stubbornness, row_sums, rhos)
    mats = scales[:, :, None] * adjacency[None, :, :]
    grams = np.einsum("kri,krj->kij", mats, mats)
    m = rhos.shape[0]
    v = np.full((m, n), 1.0 / np.sqrt(n))
    theta = np.zeros(m)
    converged = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)
    last_res = np.full(m, -1.0)
    it = 0
    while it < maxiter and active.any():
        it += 1
        idx = np.flatnonzero(active)
        vi = v[idx]
        u = np.einsum("kij,kj->ki", grams[idx], vi)
        vnorm2 = np.einsum("ki,ki->k", vi, vi)
        th = np.einsum("ki,ki->k", vi, u) / vnorm2
        theta[idx] = np.maximum(th, 0.0)
        res = np.sqrt(np.einsum("ki,ki->k", u - th[:, None] * vi, u - th[:, None] * vi) / vnorm2)
        positive = np.all(vi > 0.0, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = np.where(positive, np.max(u / np.where(vi > 0, vi, 1.0), axis=1), np.inf)
        done = (th <= 0.0) | (res <= tol * th) | (upper - th <= tol * th)
        converged[idx[done]] = True
        quit_ = np.zeros(idx.size, dtype=bool)
        if it % STALL_CHECK == 0:
            prev = last_res[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                rate = (res / prev) ** (1.0 / STALL_CHECK)
                needed = np.log(tol * th / res) / np.log(rate)
            quit_ = (prev > 0) & ((rate >= 1.0) | (needed > maxiter - it)) & ~done
            last_res[idx] = res
        keep = ~(done | quit_)
        unorm = np.linalg.norm(u[keep], axis=1)
        v[idx[keep]] = u[keep] / unorm[:, None]
        active[idx[~keep]] = False
    return np.sqrt(theta), converged


_spectral_norms_jit = maybe_njit(_spectral_norms_loops)


def spectral_norms(adjacency, stubbornness, row_sums, rhos,
                   tol=POWER_TOL, maxiter=POWER_MAXITER, backend=None):
    """Power iteration on M^T M for every pressure in ``rhos``.

    Returns ``(sigmas, converged)``; entries with ``converged == False``
    carry only a lower bound and must be recomputed by the caller.
    """
    args = (
        np.ascontiguousarray(adjacency, dtype=np.float64),
        np.ascontiguousarray(stubbornness, dtype=np.float64),
        np.ascontiguousarray(row_sums, dtype=np.float64),
        np.ascontiguousarray(np.atleast_1d(rhos), dtype=np.float64),
        float(tol),
        int(maxiter),
    )
    return _pick(_spectral_norms_jit, _spectral_norms_numpy, backend)(*args)


def row_scales(stubbornness, row_sums, rhos):
    """rho / (s_i + rho d_i) for each pressure (rows) and agent (columns)."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=np.float64))[:, None]
    s = np.asarray(stubbornness, dtype=np.float64)[None, :]
    d = np.asarray(row_sums, dtype=np.float64)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = rhos / (s + rhos * d)
        stable = 1.0 / (d * (1.0 + s / (rhos * d)))
    return np.where((rhos > LARGE_RHO) & (d > 0.0), stable, direct)


def _pick(jitted, fallback, backend):
    if backend is None:
        backend = "numba" if NUMBA_ENABLED else "numpy"
    if backend == "numba":
        if jitted is None:
            raise RuntimeError("numba backend requested but numba is disabled")
        return jitted
    if backend == "numpy":
        return fallback
    raise ValueError(f"unknown backend {backend!r}")
