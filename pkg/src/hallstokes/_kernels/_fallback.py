"""Reference numpy implementations of the hot loops."""
from __future__ import annotations

import numpy as np


def hall_accumulate_int(m, a, b, mult, f, g, out):
    """out[m[k]] += mult[k] * f[a[k]] * g[b[k]] in int64."""
    np.add.at(out, m, mult * f[a] * g[b])


def hall_accumulate_complex(m, a, b, mult, f, g, out):
    np.add.at(out, m, mult * f[a] * g[b])


def collocation_sweep(coef, forcing, delta, u_start, reverse, A, bw):
    """Gauss collocation for u' = coef * u + forcing over consecutive intervals.

    ``coef`` and ``forcing`` hold values at the collocation nodes of each
    interval, ``delta`` the interval lengths.  With ``reverse`` the sweep
    starts from the right end.  Returns node values U, node derivatives K
    and the n+1 interval end values E.
    """
    n, s = coef.shape
    U = np.empty((n, s), dtype=complex)
    K = np.empty((n, s), dtype=complex)
    E = np.empty(n + 1, dtype=complex)
    eye = np.eye(s)
    ones = np.ones(s)
    if not reverse:
        E[0] = u_start
        for i in range(n):
            h = delta[i]
            M = eye - (coef[i][:, None] * h) * A
            k = np.linalg.solve(M, coef[i] * E[i] + forcing[i])
            K[i] = k
            U[i] = E[i] + h * (A @ k)
            E[i + 1] = E[i] + h * (bw @ k)
    else:
        E[n] = u_start
        BA = np.outer(ones, bw) - A
        for i in range(n - 1, -1, -1):
            h = delta[i]
            M = eye + (coef[i][:, None] * h) * BA
            k = np.linalg.solve(M, coef[i] * E[i + 1] + forcing[i])
            K[i] = k
            U[i] = E[i + 1] - h * (BA @ k)
            E[i] = E[i + 1] - h * (bw @ k)
    return U, K, E
