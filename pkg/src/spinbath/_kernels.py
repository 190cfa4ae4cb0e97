"""Inner loops over bath spins, bath configurations and time samples.

Every kernel exists twice: a loop version compiled by numba and a
vectorised numpy version. The module-level names without suffix point at
whichever backend ``_accel.USE_NUMBA`` selects.

Time arguments are the dimensionless product ``alpha * t``.
"""

import numpy as np

from . import _accel

__all__ = [
    "coherence_product",
    "kraus_sum",
    "sum_central_moments",
    "spin_central_moments",
]


# -- product formula ---------------------------------------------------------

def _coherence_product_loop(g, b, theta, tau):
    nt = tau.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    for i in range(nt):
        t2 = 2.0 * tau[i]
        acc = complex(np.cos(t2 * theta), -np.sin(t2 * theta))
        for n in range(g.shape[0]):
            x = t2 * g[n]
            acc *= complex(np.cos(x), b[n] * np.sin(x))
        out[i] = acc
    return out


def coherence_product_numpy(g, b, theta, tau):
    """Return ``C + iS`` on ``tau`` from the per-spin product."""
    x = 2.0 * np.outer(tau, g)
    factors = np.cos(x) + 1j * (b * np.sin(x))
    return np.exp(-2j * theta * tau) * np.prod(factors, axis=1)


coherence_product_numba = _accel.jit(_coherence_product_loop)


# -- Kraus enumeration -------------------------------------------------------

def _kraus_sum_loop(shifted_energies, weights, tau):
    nt = tau.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    for i in range(nt):
        c = 0.0
        s = 0.0
        t2 = 2.0 * tau[i]
        for l in range(weights.shape[0]):
            phase = t2 * shifted_energies[l]
            c += weights[l] * np.cos(phase)
            s += weights[l] * np.sin(phase)
        out[i] = complex(c, s)
    return out


def kraus_sum_numpy(shifted_energies, weights, tau):
    """Return ``sum_l w_l exp(2i E~_l tau)`` for every sample of ``tau``."""
    phase = 2.0 * np.outer(tau, shifted_energies)
    return np.cos(phase) @ weights + 1j * (np.sin(phase) @ weights)


kraus_sum_numba = _accel.jit(_kraus_sum_loop)


# -- moment composition ------------------------------------------------------

def _binomial_table(kmax):
    table = np.zeros((kmax + 1, kmax + 1))
    for k in range(kmax + 1):
        table[k, 0] = 1.0
        for j in range(1, k + 1):
            table[k, j] = table[k - 1, j - 1] + (table[k - 1, j] if j < k else 0.0)
    return table


def _spin_central_moments_loop(gn, bn, kmax, out):
    # central moments of X in {+g, -g}, P(+g) = (1+b)/2, mean g*b
    one_m = 1.0 - bn * bn
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 0.0
    if kmax >= 2:
        out[2] = gn * gn * one_m
    if kmax >= 3:
        out[3] = -2.0 * gn ** 3 * bn * one_m
    if kmax >= 4:
        out[4] = gn ** 4 * one_m * (1.0 + 3.0 * bn * bn)
    if kmax >= 5:
        p_up = 0.5 * (1.0 + bn)
        p_dn = 0.5 * (1.0 - bn)
        up = gn * (1.0 - bn)
        dn = -gn * (1.0 + bn)
        for k in range(5, kmax + 1):
            out[k] = p_up * up ** k + p_dn * dn ** k


def spin_central_moments(gn, bn, kmax):
    """Central moments ``mu_0..mu_kmax`` of one two-point bath variable."""
    out = np.empty(kmax + 1)
    _spin_central_moments_loop(float(gn), float(bn), kmax, out)
    return out


def _sum_central_moments_loop(g, b, kmax, binom):
    total = np.zeros(kmax + 1)
    total[0] = 1.0
    spin = np.empty(kmax + 1)
    merged = np.empty(kmax + 1)
    for n in range(g.shape[0]):
        _spin_moments_jit_or_py(g[n], b[n], kmax, spin)
        for k in range(kmax + 1):
            acc = 0.0
            for j in range(k + 1):
                acc += binom[k, j] * total[j] * spin[k - j]
            merged[k] = acc
        for k in range(kmax + 1):
            total[k] = merged[k]
    return total


def sum_central_moments_numpy(g, b, kmax):
    """Central moments of a sum of independent two-point variables.

    Combines spins one at a time with the binomial convolution
    ``m_k(X+Y) = sum_j C(k,j) m_j(X) m_{k-j}(Y)``; cost ``O(N kmax^2)``.
    """
    binom = _binomial_table(kmax)
    total = np.zeros(kmax + 1)
    total[0] = 1.0
    for gn, bn in zip(g, b):
        spin = spin_central_moments(gn, bn, kmax)
        merged = np.array([
            np.dot(binom[k, : k + 1] * total[: k + 1], spin[k::-1])
            for k in range(kmax + 1)
        ])
        total = merged
    return total


if _accel.numba is not None:
    _spin_moments_jit_or_py = _accel.jit(_spin_central_moments_loop)
else:  # pragma: no cover
    _spin_moments_jit_or_py = _spin_central_moments_loop

_sum_central_moments_jit = _accel.jit(_sum_central_moments_loop)


def sum_central_moments_numba(g, b, kmax):
    return _sum_central_moments_jit(
        np.ascontiguousarray(g, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        kmax,
        _binomial_table(kmax),
    )


# -- dispatch ----------------------------------------------------------------

def _as_f64(*arrays):
    return tuple(np.ascontiguousarray(a, dtype=np.float64) for a in arrays)


if _accel.USE_NUMBA:
    def coherence_product(g, b, theta, tau):
        g, b, tau = _as_f64(g, b, tau)
        return coherence_product_numba(g, b, float(theta), tau)

    def kraus_sum(shifted_energies, weights, tau):
        return kraus_sum_numba(*_as_f64(shifted_energies, weights, tau))

    sum_central_moments = sum_central_moments_numba
else:
    def coherence_product(g, b, theta, tau):
        g, b, tau = _as_f64(g, b, tau)
        return coherence_product_numpy(g, b, float(theta), tau)

    def kraus_sum(shifted_energies, weights, tau):
        return kraus_sum_numpy(*_as_f64(shifted_energies, weights, tau))

    sum_central_moments = sum_central_moments_numpy
