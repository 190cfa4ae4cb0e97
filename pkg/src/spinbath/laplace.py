"""Inverse Laplace transforms: exact partial fractions and fixed Talbot.

Polynomials are coefficient sequences with the highest degree first (the
``numpy.roots`` / ``numpy.polyval`` convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "TalbotError",
    "PoleTerm",
    "shift_polynomial",
    "partial_fractions",
    "invert_rational",
    "talbot_inverse",
    "contour_encloses",
]

RESIDUE_TOL = 1e-10
_CLUSTER_TOLS = (1e-3, 1e-5, 1e-7, 1e-9, 0.0)


class TalbotError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PoleTerm:
    """``sum_k residues[k-1] / (s - pole)^k`` for ``k = 1..multiplicity``."""

    pole: complex
    residues: tuple[complex, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.residues)


def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    return c[nz[0]:]


def _to_ascending(coeffs) -> Polynomial:
    return Polynomial(np.asarray(coeffs)[::-1])


def shift_polynomial(coeffs, shift) -> np.ndarray:
    """Coefficients of ``p(s + shift)``, highest degree first."""
    p = _to_ascending(_trim(coeffs))
    shifted = p(Polynomial([shift, 1.0]))
    out = shifted.coef[::-1]
    return out.real.copy() if np.isrealobj(coeffs) or np.all(np.imag(out) == 0) else out


def _cluster(roots: np.ndarray, rel_tol: float):
    remaining = list(roots)
    clusters = []
    while remaining:
        seed = remaining.pop(0)
        scale = max(1.0, abs(seed))
        members = [seed]
        keep = []
        for r in remaining:
            (members if abs(r - seed) <= rel_tol * scale else keep).append(r)
        remaining = keep
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters


def _polish(den: np.ndarray, clusters, steps: int = 8):
    """Newton-refine each pole on the (m-1)-th derivative of ``den``, where it is a simple root."""
    out = []
    for pole, mult in clusters:
        q = np.polyder(den, mult - 1) if mult > 1 else den
        dq = np.polyder(q)
        z, best = pole, abs(np.polyval(q, pole))
        for _ in range(steps):
            slope = np.polyval(dq, z)
            if slope == 0:
                break
            cand = z - np.polyval(q, z) / slope
            val = abs(np.polyval(q, cand))
            if not val < best:
                break
            z, best = cand, val
        out.append((complex(z), mult))
    return out


def _taylor(coeffs_desc: np.ndarray, at: complex, count: int) -> np.ndarray:
    """First ``count`` Taylor coefficients of a polynomial about ``at``."""
    shifted = _to_ascending(coeffs_desc)(Polynomial([at, 1.0])).coef
    out = np.zeros(count, dtype=complex)
    n = min(count, shifted.size)
    out[:n] = shifted[:n]
    return out


def _terms_for(num: np.ndarray, clusters) -> list[PoleTerm]:
    terms = []
    for i, (pole, mult) in enumerate(clusters):
        others = np.array([1.0 + 0j])
        for j, (q, mq) in enumerate(clusters):
            if j != i:
                others = np.polymul(others, np.poly(np.full(mq, q)))
        n_ser = _taylor(num, pole, mult)
        h_ser = _taylor(others, pole, mult)
        g = np.zeros(mult, dtype=complex)
        for k in range(mult):
            g[k] = (n_ser[k] - np.dot(h_ser[1:k + 1], g[k - 1::-1] if k else [])) / h_ser[0]
        # coefficient of (s-p)^-k is g[mult-k]
        terms.append(PoleTerm(pole, tuple(g[mult - k] for k in range(1, mult + 1))))
    return terms


def _evaluate_terms(terms, s):
    total = np.zeros_like(s, dtype=complex)
    for term in terms:
        d = s - term.pole
        for k, r in enumerate(term.residues, start=1):
            total += r / d ** k
    return total


def _term_magnitude(terms, s) -> float:
    total = np.zeros(s.shape)
    for term in terms:
        d = np.abs(s - term.pole)
        for k, r in enumerate(term.residues, start=1):
            total += abs(r) / d ** k
    return float(np.max(total))


def partial_fractions(num, den, tol: float = RESIDUE_TOL) -> list[PoleTerm]:
    """Pole/residue expansion of a strictly proper rational function.

    Poles come from companion-matrix eigenvalues (``numpy.roots``, which
    balances the matrix). Nearly coincident roots are merged into multiple
    poles; the coarsest merging whose expansion reproduces ``num/den`` on a
    ring enclosing all poles is kept. The error is measured relative to the
    larger of ``|num/den|`` and the summed magnitude of the terms.

    Distinct poles closer than about 1e-2 carry residues of order
    ``gap^-m`` that cancel, so results lose roughly ``log10(1/gap^m)``
    digits; prefer the Talbot route for such transforms.
    """
    num = _trim(num)
    den = _trim(den)
    if den.size < 2 or not np.any(den):
        raise ValueError("denominator must have degree >= 1")
    if num.size >= den.size and np.any(num):
        raise ValueError("rational function is not strictly proper (deg num >= deg den)")
    lead = den[0]
    num, den = num / lead, den / lead
    roots = np.roots(den)
    radius = 1.0 + 2.0 * float(np.max(np.abs(roots))) if roots.size else 1.0
    ring = radius * np.exp(2j * np.pi * (np.arange(24) + 0.37) / 24)
    reference = np.polyval(num, ring) / np.polyval(den, ring)
    ref_scale = float(np.max(np.abs(reference))) or 1.0
    for ctol in _CLUSTER_TOLS:
        terms = _terms_for(num, _polish(den, _cluster(roots, ctol)))
        err = float(np.max(np.abs(_evaluate_terms(terms, ring) - reference)))
        # nearly coincident poles carry large cancelling residues; judge against their size
        size = max(ref_scale, _term_magnitude(terms, ring))
        if err <= tol * size:
            return terms
    raise ArithmeticError(f"partial-fraction reconstruction error {err:.3e} exceeds {tol:g}")


def invert_rational(num, den, t, tol: float = RESIDUE_TOL) -> np.ndarray:
    """Exact inverse transform ``sum_p e^{p t} sum_k r_k t^(k-1)/(k-1)!``; real part returned."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for term in partial_fractions(num, den, tol):
        poly = np.zeros(t.shape, dtype=complex)
        for k, r in enumerate(term.residues, start=1):
            poly += r * t ** (k - 1) / math.factorial(k - 1)
        out += np.exp(term.pole * t) * poly
    return out.real


def _fixed_talbot(func, t: np.ndarray, m: int, shift: float) -> np.ndarray:
    k = np.arange(1, m)
    theta = k * np.pi / m
    cot = 1.0 / np.tan(theta)
    sigma = theta + (theta * cot - 1.0) * cot
    out = np.empty(t.shape)
    for i, ti in enumerate(t):
        r = 2.0 * m / (5.0 * ti)
        nodes = r * theta * (cot + 1j)
        first = 0.5 * np.exp(r * ti) * complex(func(r + shift)).real
        rest = np.sum((np.exp(ti * nodes) * func(nodes + shift) * (1.0 + 1j * sigma)).real)
        out[i] = np.exp(shift * ti) * (r / m) * (first + rest)
    return out


def contour_encloses(points, t: float, nodes: int = 32, shift: float = 0.0) -> bool:
    """Whether the fixed-Talbot contour used at time ``t`` encloses all ``points``."""
    r = 2.0 * nodes / (5.0 * t)
    for p in np.atleast_1d(np.asarray(points, dtype=complex)):
        theta = abs(p.imag) / r
        if theta >= math.pi:
            return False
        edge = r if theta == 0 else r * theta / math.tan(theta)
        if not p.real - shift < edge:
            return False
    return True


def talbot_inverse(func, t, nodes: int = 32, shift: float = 0.0, check_tol: float = 1e-6,
                   singularities=None) -> np.ndarray:
    """Fixed-Talbot inverse Laplace transform at positive times.

    ``func`` must accept complex numpy arrays. The contour shrinks as
    ``t`` grows, so oscillatory transforms are only resolved while
    ``|Im(pole)| * t`` stays well below ``pi * nodes / 5``. When the
    ``singularities`` are known they are checked to lie inside the contour
    at every ``t``; otherwise a second evaluation with ``nodes - 8`` nodes
    is the only safeguard (it cannot detect poles lost by both contours).
    Either failure raises :class:`TalbotError`.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("Talbot inversion needs t > 0")
    if singularities is not None and len(singularities):
        lost = [ti for ti in t if not contour_encloses(singularities, ti, max(nodes - 8, 8), shift)]
        if lost:
            raise TalbotError(f"Talbot contour no longer encloses the singularities at t = {lost[0]:g}")
    with np.errstate(all="ignore"):
        main = _fixed_talbot(func, t, nodes, shift)
        coarse = _fixed_talbot(func, t, max(nodes - 8, 8), shift)
    if not np.all(np.isfinite(main)):
        raise TalbotError("non-finite Talbot sum")
    gap = np.abs(main - coarse) / np.maximum(1.0, np.abs(main))
    if np.any(gap > check_tol):
        worst = int(np.argmax(gap))
        raise TalbotError(f"Talbot inversion did not converge at t = {t[worst]:g} (gap {gap[worst]:.2e})")
    return main
