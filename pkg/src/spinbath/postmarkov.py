"""Post-Markovian master equation with a pluggable memory kernel.

With the dissipator ``D rho = sz rho sz - rho`` (damping eigenvalue -2 on
``sigma^x`` and ``sigma^y``) the transverse components evolve as

    v_{x,y}(t) = xi(t) v_{x,y}(0),   xi = Lap^-1[ 1 / (s + 2 k~(s + 2)) ]

Kernels are handled through their Laplace transform ``k~``. The shift
``s -> s + 2`` is applied to the polynomial coefficients, so the growing
factor ``e^{2t}`` of the time-domain kernels is never evaluated.

Kernel time is physical time ``t``; grids are in ``alpha t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlations import CorrelationSet
from .exact import BlochTrajectory, coherence_factor
from .laplace import invert_rational, shift_polynomial, talbot_inverse
from .model import BathSpec, BlochVector, TimeGrid

__all__ = [
    "CP_TOL",
    "KernelSpec",
    "PMResponse",
    "shifted_response_transform",
    "pm_response",
    "pm_trajectory",
    "pm_min_distance",
    "cp_check",
]

CP_TOL = 1e-12
NAMED_KERNELS = ("nz2", "second_order")
VARIANTS = NAMED_KERNELS + ("optimal", "rational")


@dataclass(frozen=True)
class KernelSpec:
    """A memory kernel.

    ``nz2``: ``k(t) = 2 alpha^2 Q2 e^{2t}``, reproducing the Born solution.
    ``second_order``: ``k(t) = 2 alpha^2 Q2 e^{2t} cosh(2 sqrt(Q2) alpha t)``,
    giving ``xi = 1 - 2 Q2 (alpha t)^2``.
    ``optimal``: the kernel for which ``xi = C(t)``; only its consequence is used.
    ``rational``: ``k~(s) = numerator(s) / denominator(s)``, strictly proper.
    """

    variant: str
    numerator: tuple[float, ...] = ()
    denominator: tuple[float, ...] = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.variant == "rational":
            num = np.trim_zeros(np.asarray(self.numerator, dtype=float), "f")
            den = np.trim_zeros(np.asarray(self.denominator, dtype=float), "f")
            if den.size < 2:
                raise ValueError("kernel denominator must have degree >= 1")
            if num.size >= den.size:
                raise ValueError("kernel transform must be strictly proper")

    @classmethod
    def named(cls, name: str) -> "KernelSpec":
        if name not in NAMED_KERNELS:
            raise ValueError(f"unknown named kernel {name!r}")
        return cls(name)

    @classmethod
    def optimal(cls) -> "KernelSpec":
        return cls("optimal")

    @classmethod
    def rational(cls, numerator, denominator) -> "KernelSpec":
        return cls("rational", tuple(float(x) for x in numerator), tuple(float(x) for x in denominator))

    @property
    def label(self) -> str:
        return self.variant

    def laplace_rational(self, alpha: float, q2: float):
        """``(numerator, denominator)`` of ``k~(s)``, highest degree first."""
        amp = 2.0 * alpha ** 2 * q2
        if self.variant == "nz2":
            return np.array([amp]), np.array([1.0, -2.0])
        if self.variant == "second_order":
            # Lap[e^{2t} cosh(w t)] = (s-2) / ((s-2)^2 - w^2), w = 2 sqrt(Q2) alpha
            w2 = 4.0 * q2 * alpha ** 2
            return amp * np.array([1.0, -2.0]), np.array([1.0, -4.0, 4.0 - w2])
        if self.variant == "rational":
            return np.array(self.numerator), np.array(self.denominator)
        raise ValueError("the optimal kernel has no rational form")


@dataclass(frozen=True, eq=False)
class PMResponse:
    grid: TimeGrid
    xi_values: np.ndarray
    cp_violations: np.ndarray
    kernel: KernelSpec
    method: str = "analytic"


def shifted_response_transform(kernel: KernelSpec, alpha: float, q2: float):
    """``(num, den)`` of ``1 / (s + 2 k~(s + 2))`` = ``D(s) / (s D(s) + 2 N(s))``."""
    num, den = kernel.laplace_rational(alpha, q2)
    n_sh = shift_polynomial(num, 2.0)
    d_sh = shift_polynomial(den, 2.0)
    denom = np.polyadd(np.polymul([1.0, 0.0], d_sh), 2.0 * n_sh)
    return d_sh, denom


def cp_check(response: PMResponse) -> np.ndarray:
    """Grid times where ``|xi| > 1 + 1e-12`` (the map is not completely positive)."""
    return response.grid.samples[np.abs(response.xi_values) > 1.0 + CP_TOL]


def pm_response(kernel: KernelSpec, corr: CorrelationSet, spec: BathSpec, grid: TimeGrid,
                method: str = "analytic") -> PMResponse:
    """Sample ``xi`` on the grid.

    ``method="analytic"`` inverts the rational transform by partial
    fractions; ``"talbot"`` uses the fixed-Talbot contour (32 nodes) as an
    independent numerical route. The optimal kernel ignores ``method``.
    """
    if method not in ("analytic", "talbot"):
        raise ValueError(f"unknown inversion method {method!r}")
    if kernel.variant == "optimal":
        xi = coherence_factor(spec, None, grid).c_values.copy()
        method = "optimal"
    else:
        num, den = shifted_response_transform(kernel, spec.alpha, corr.q2)
        t = grid.samples / spec.alpha
        if method == "analytic":
            xi = invert_rational(num, den, t)
        else:
            xi = np.ones_like(t)
            pos = t > 0
            xi[pos] = talbot_inverse(lambda s: np.polyval(num, s) / np.polyval(den, s), t[pos],
                                     singularities=np.roots(den))
    xi = np.asarray(xi, dtype=float)
    if grid.samples[0] == 0.0:
        xi[0] = 1.0
    draft = PMResponse(grid, xi, np.empty(0), kernel, method)
    return PMResponse(grid, xi, cp_check(draft), kernel, method)


def pm_trajectory(response: PMResponse, v0: BlochVector, grid: TimeGrid | None = None) -> BlochTrajectory:
    """``v_{x,y}(t) = xi(t) v_{x,y}(0)``; samples with ``|xi| > 1`` are flagged."""
    grid = grid if grid is not None else response.grid
    if not grid.same_as(response.grid):
        raise ValueError("trajectory grid differs from the response grid")
    xi = response.xi_values
    points = np.empty((grid.count, 3))
    points[:, 0] = xi * v0.vx
    points[:, 1] = xi * v0.vy
    points[:, 2] = v0.vz
    flags = tuple("cp_violation" if abs(x) > 1.0 + CP_TOL else "ok" for x in xi)
    return BlochTrajectory(grid, points, "pm", flags,
                           provenance={"kernel": response.kernel.label, "inversion": response.method})


def pm_min_distance(spec: BathSpec, v0: BlochVector, grid: TimeGrid) -> np.ndarray:
    """Smallest trace distance any post-Markovian solution can reach: ``|S(t)| |v_perp(0)| / 2``."""
    pair = coherence_factor(spec, None, grid)
    return 0.5 * np.abs(pair.s_values) * v0.transverse_norm
