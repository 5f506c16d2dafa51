"""Finite-difference assembly of H = -d^2/dx^2 + x^2 + (i/eps) f(x) and friends.

Everything is discretised on a uniform Dirichlet grid over [-L, L] with the
standard second-order three-point stencil, giving complex symmetric
tridiagonal matrices. Also provided: the dyadic one-scale model operators
used for localised resolvent bounds, the real weighted forms
-d^2/dx^2 + x^2 + w(x) f'(x)^2 entering the decay-rate machinery, and the
distance from i*lambda to the closure of the numerical range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Tridiagonal
from .potentials import Potential

__all__ = [
    "Grid",
    "auto_L",
    "suggest_N",
    "auto_grid",
    "assemble_H",
    "assemble_dyadic_block",
    "assemble_weighted_form",
    "numerical_range_gap",
]


@dataclass(frozen=True)
class Grid:
    """Uniform Dirichlet grid on [-L, L] with N interior nodes.

    h = 2L/(N+1); the nodes are x_j = -L + (j+1) h for j = 0..N-1, so the
    boundary points x = +-L carry the (eliminated) Dirichlet values.
    """

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0 or self.N < 1:
            raise ValueError("need L > 0 and N >= 1")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N + 1)

    def nodes(self) -> np.ndarray:
        return -self.L + self.h * np.arange(1, self.N + 1)


def auto_L(p: Potential, eps: float) -> float:
    """Half-width large enough to contain every relevant mode with room to spare.

    For algebraically decaying potentials the outermost wells of the associated
    real form sit near (k/(2 eps))^(1/(k+2)); for the quadratic and linear
    cases the turning points grow like (1/eps)^(1/4) resp. stay O(1).
    """
    k = getattr(p, "decay_exponent", None)
    if k is None:
        k = getattr(p, "k", None)
    kind = getattr(p, "kind", "")
    if kind == "quadratic":
        return max(8.0, 3.0 * (1.0 / (2.0 * eps)) ** 0.25)
    if kind == "linear":
        return max(8.0, 3.0 * (1.0 / (2.0 * eps)) ** (1.0 / 6.0))
    if kind == "constant":
        return 10.0
    if k is None:
        return max(8.0, 3.0 * (1.0 / (2.0 * eps)) ** 0.25)
    return max(8.0, 3.0 * (k / (2.0 * eps)) ** (1.0 / (k + 2.0)))


def _mode_width(p: Potential, eps: float) -> float:
    """Smallest eigenmode length scale that the grid must resolve."""
    kind = getattr(p, "kind", "")
    if kind == "quadratic":
        return eps**0.25
    if kind in ("linear", "constant"):
        return 1.0
    if kind == "smoothed-linear":
        # low modes sit in the f' tail but oscillate at the detuning scale
        # sqrt(|f/eps - Im lambda|) ~ sqrt(plateau/eps) on their way out
        plateau = getattr(p, "plateau", 1.0)
        return min(1.0, math.sqrt(eps / (2.0 * plateau)))
    k = getattr(p, "decay_exponent", None) or 4.0
    # central modes narrow like (2 eps/k)^(1/4); outer-well modes stay O(1)
    return min((2.0 * eps / k) ** 0.25, (k + 2.0) ** (-0.25))


def suggest_N(p: Potential, eps: float, L: float, points_per_width: int = 8,
              n_min: int = 2000, n_max: int = 40000) -> int:
    """Node count so that the narrowest mode carries >= points_per_width nodes."""
    h_target = _mode_width(p, eps) / points_per_width
    n = int(math.ceil(2.0 * L / h_target))
    return max(n_min, min(n, n_max))


def auto_grid(p: Potential, eps: float, L: float | None = None, N: int | None = None,
              n_max: int = 40000) -> Grid:
    L = auto_L(p, eps) if L is None else float(L)
    if N is None:
        N = suggest_N(p, eps, L, n_max=n_max)
    return Grid(L, int(N))


def assemble_H(p: Potential, eps: float, g: Grid, lam: float = 0.0,
               mu: float = 0.0) -> Tridiagonal:
    """Tridiagonal matrix of H - mu - i*lambda on the grid.

    diag_j = 2/h^2 + x_j^2 + i (f(x_j)/eps - lambda) - mu, off-diagonals
    -1/h^2. Complex symmetric by construction.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = g.nodes()
    h2 = g.h * g.h
    diag = (2.0 / h2 + x * x - mu) + 1j * (p(x) / eps - lam)
    off = np.full(g.N - 1, -1.0 / h2, dtype=complex)
    return Tridiagonal(off.copy(), diag.astype(complex), off)


def assemble_dyadic_block(p: Potential, eps: float, lam: float, j: int,
                          nodes_per_interval: int = 800) -> Tridiagonal:
    """One-scale model operator P_j = -4^-j d^2/dx^2 + 4^j x^2 + i(f(2^j x)/eps - lambda).

    For j = 0 the domain is [-1, 1]; for j >= 1 it is the pair of intervals
    [-1, -1/4] and [1/4, 1], assembled as one block-diagonal tridiagonal
    matrix (the coupling entry between the blocks is zero), all with
    Dirichlet ends. The smallest singular value of this matrix is the
    localisation constant C_j(eps, lambda) >= 1 entering the sandwich bound
    for kappa.
    """
    if j < 0:
        raise ValueError("scale index j must be >= 0")
    scale = 2.0**j
    intervals = [(-1.0, 1.0)] if j == 0 else [(-1.0, -0.25), (0.25, 1.0)]
    diags, subs = [], []
    for a, b in intervals:
        m = nodes_per_interval
        h = (b - a) / (m + 1)
        x = a + h * np.arange(1, m + 1)
        d = (2.0 / (scale**2 * h * h)) + scale**2 * x * x + 1j * (p(scale * x) / eps - lam)
        e = np.full(m - 1, -1.0 / (scale**2 * h * h), dtype=complex)
        diags.append(d.astype(complex))
        subs.append(e)
    if len(diags) == 1:
        diag, off = diags[0], subs[0]
    else:
        diag = np.concatenate(diags)
        off = np.concatenate([subs[0], [0.0 + 0.0j], subs[1]])
    return Tridiagonal(off.copy(), diag, off)


def assemble_weighted_form(p: Potential, g: Grid, w) -> tuple[np.ndarray, np.ndarray]:
    """Real symmetric tridiagonal of -d^2/dx^2 + x^2 + w(x) f'(x)^2.

    w may be a scalar or an array over the grid nodes. Returns (diag, off)
    as float arrays; the ground energy of this form is the decay-rate input
    lambda_* used throughout the rate recipes.
    """
    x = g.nodes()
    w = np.asarray(w, dtype=float)
    if w.ndim not in (0, 1) or (w.ndim == 1 and len(w) != g.N):
        raise ValueError("w must be scalar or match the grid")
    h2 = g.h * g.h
    fp = p(x, 1)
    diag = 2.0 / h2 + x * x + w * fp * fp
    off = np.full(g.N - 1, -1.0 / h2)
    return diag, off


def numerical_range_gap(p: Potential, eps: float, lam: float) -> float:
    """Distance from i*lambda to the horizontal extent of the numerical range,
    i.e. dist(eps*lambda, closure f(R)) / eps.

    Positive values mean i*lambda sits outside the strip of imaginary parts
    the numerical range can reach, which forces kappa(eps, lam) <= 1/gap.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = p.range_closure()
    s = eps * lam
    gap = 0.0
    if s < lo:
        gap = lo - s
    elif s > hi:
        gap = s - hi
    return gap / eps
