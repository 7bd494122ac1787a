"""Hot numeric kernels with numba and pure-numpy variants.

Two inner loops dominate runtime in this package: the Monte Carlo
sign-tally over sampled token pairs, and the exhaustive entropy scan used
by the attention-entropy brute-force oracle.  Both exist as a numba
``@njit`` kernel and a numpy fallback; ``NORMLENS_NO_NUMBA=1`` selects the
fallback (see :mod:`normlens._backend`).  The variants agree on every
tallied decision and on scan minima up to floating-point summation order.
"""

import itertools

import numpy as np

from ._backend import numba_enabled

_USE_NUMBA = numba_enabled()

if _USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _sign_tally_numba(zx, zy, mu_x, sd_x, mu_y, sd_y):
        n, dim = zx.shape
        flips = 0
        raw_nonpos = 0
        norm_pos = 0
        for i in range(n):
            raw = 0.0
            nrm = 0.0
            for d in range(dim):
                xv = mu_x[d] + sd_x[d] * zx[i, d]
                yv = mu_y[d] + sd_y[d] * zy[i, d]
                raw += xv * yv
                nrm += zx[i, d] * zy[i, d]
            if (raw > 0.0 and nrm < 0.0) or (raw < 0.0 and nrm > 0.0):
                flips += 1
            if raw <= 0.0:
                raw_nonpos += 1
            if nrm > 0.0:
                norm_pos += 1
        return flips, raw_nonpos, norm_pos

    @njit(cache=True)
    def _entropy_scan_numba(zt, st, m):
        # Minimum of log(Z) - S/Z over all non-decreasing index tuples of
        # length m; the anchor contributes z=1, s=0 (logits shifted by -a).
        g = zt.shape[0]
        idx = np.zeros(m, np.int64)
        best = np.inf
        while True:
            z = 1.0
            s = 0.0
            for j in range(m):
                z += zt[idx[j]]
                s += st[idx[j]]
            h = np.log(z) - s / z
            if h < best:
                best = h
            j = m - 1
            while j >= 0 and idx[j] == g - 1:
                j -= 1
            if j < 0:
                break
            nxt = idx[j] + 1
            for t in range(j, m):
                idx[t] = nxt
        return best


def _sign_tally_numpy(zx, zy, mu_x, sd_x, mu_y, sd_y):
    x = mu_x + sd_x * zx
    y = mu_y + sd_y * zy
    raw = np.einsum("ij,ij->i", x, y)
    nrm = np.einsum("ij,ij->i", zx, zy)
    flips = int(np.count_nonzero(((raw > 0) & (nrm < 0)) | ((raw < 0) & (nrm > 0))))
    raw_nonpos = int(np.count_nonzero(raw <= 0))
    norm_pos = int(np.count_nonzero(nrm > 0))
    return flips, raw_nonpos, norm_pos


def _entropy_scan_numpy(zt, st, m):
    g = zt.shape[0]
    if m == 1:
        z = 1.0 + zt
        s = st
        return float(np.min(np.log(z) - s / z))
    best = np.inf
    # Enumerate non-decreasing prefixes, vectorize the last coordinate.
    for prefix in itertools.combinations_with_replacement(range(g), m - 1):
        z0 = 1.0
        s0 = 0.0
        for i in prefix:
            z0 += zt[i]
            s0 += st[i]
        lo = prefix[-1]
        z = z0 + zt[lo:]
        s = s0 + st[lo:]
        h = np.log(z) - s / z
        best = min(best, float(h.min()))
    return best


def sign_tally(zx, zy, mu_x, sd_x, mu_y, sd_y):
    """Count sign flips and sign events for one chunk of sampled pairs.

    ``zx``/``zy`` are standard-normal draws; the raw pair is reconstructed
    as ``mu + sd * z`` while ``z`` itself is the exactly standardized
    vector.  Returns ``(n_flip, n_raw_nonpositive, n_norm_positive)``.
    """
    if _USE_NUMBA:
        return _sign_tally_numba(zx, zy, mu_x, sd_x, mu_y, sd_y)
    return _sign_tally_numpy(zx, zy, mu_x, sd_x, mu_y, sd_y)


def entropy_scan(zt, st, m):
    """Minimum attention-row entropy over non-decreasing context tuples.

    ``zt[i] = exp(u_i)`` and ``st[i] = u_i * exp(u_i)`` for the shifted
    context logits ``u_i <= 0``; the anchor logit is shifted to 0.  ``m``
    is the number of context positions.  The row entropy for a tuple is
    ``log(Z) - S/Z`` with ``Z = 1 + sum(z)`` and ``S = sum(s)``.
    """
    if _USE_NUMBA:
        return float(_entropy_scan_numba(zt, st, m))
    return _entropy_scan_numpy(zt, st, m)
