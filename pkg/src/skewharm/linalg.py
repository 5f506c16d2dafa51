"""Tridiagonal linear algebra: banded LU, smallest singular values, full
spectra, shift-invert refinement, and a Sturm bisection for real symmetric
tridiagonal ground energies.

The factorisation is LAPACK's banded LU (zgbtrf/zgbtrs) behind a thin wrapper
that adds the pivot-floor singularity check required by the resolvent-norm
code; everything built on top of it (inverse iteration on A^*A, shift-invert
with the complex-symmetric Rayleigh quotient, bisection counts) is local to
this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvals as _dense_eigvals
from scipy.linalg import lapack as _lapack

__all__ = [
    "SolverSettings",
    "Tridiagonal",
    "BandedLU",
    "SingularFactorError",
    "SigmaMinResult",
    "EigenPair",
    "smallest_singular_value",
    "all_eigenvalues",
    "shift_invert_refine",
    "sturm_min_eigenvalue",
]

#: matrices larger than this are refused by the dense eigenvalue path
EIG_DENSE_CAP = 8192


@dataclass(frozen=True)
class SolverSettings:
    """Iteration limits and tolerances shared by the iterative routines."""

    max_iters: int = 500
    rel_tol: float = 1e-11
    seed: int = 20260801
    #: |U_jj| below pivot_floor_scale * n marks the factorisation as singular
    pivot_floor_scale: float = 1e-300
    #: eigenvalues closer than deflation_tol_scale * ||A||_inf are one cluster
    deflation_tol_scale: float = 1e-12
    #: accept a slowly-decaying sigma_min iteration once its increments drop
    #: below stagnation_tol * sigma (degenerate-cluster regime, see below)
    stagnation_tol: float = 1e-6


@dataclass
class Tridiagonal:
    """Complex tridiagonal matrix stored as (sub, diag, sup) bands."""

    dl: np.ndarray
    d: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        self.dl = np.asarray(self.dl, dtype=complex)
        self.d = np.asarray(self.d, dtype=complex)
        self.du = np.asarray(self.du, dtype=complex)
        n = len(self.d)
        if len(self.dl) != max(n - 1, 0) or len(self.du) != max(n - 1, 0):
            raise ValueError("band lengths must be n-1, n, n-1")

    @property
    def n(self) -> int:
        return len(self.d)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = self.d[(slice(None),) + (None,) * (x.ndim - 1)] * x
        y[1:] += self.dl[(slice(None),) + (None,) * (x.ndim - 1)] * x[:-1]
        y[:-1] += self.du[(slice(None),) + (None,) * (x.ndim - 1)] * x[1:]
        return y

    def shifted(self, z: complex) -> "Tridiagonal":
        return Tridiagonal(self.dl.copy(), self.d - z, self.du.copy())

    def adjoint(self) -> "Tridiagonal":
        return Tridiagonal(np.conj(self.du), np.conj(self.d), np.conj(self.dl))

    def norm_inf(self) -> float:
        a = np.abs(self.d).copy()
        a[1:] += np.abs(self.dl)
        a[:-1] += np.abs(self.du)
        return float(a.max()) if len(a) else 0.0

    def to_dense(self) -> np.ndarray:
        A = np.diag(self.d)
        if self.n > 1:
            A += np.diag(self.dl, -1) + np.diag(self.du, 1)
        return A


class SingularFactorError(Exception):
    """Raised when a solve is requested from a singular factorisation."""

    def __init__(self, pivot_index: int):
        super().__init__("singular factor: |U[%d,%d]| below pivot floor" % (pivot_index, pivot_index))
        self.pivot_index = pivot_index


class BandedLU:
    """LU factorisation of a tridiagonal matrix with partial pivoting.

    Wraps zgbtrf on the (2*kl + ku + 1) = 4 row banded storage. A factor is
    declared singular when LAPACK reports an exact zero pivot or when the
    smallest |U_jj| falls below the pivot floor; solves then raise
    SingularFactorError, which the resolvent-norm code maps to kappa = +inf.
    """

    def __init__(self, T: Tridiagonal, settings: SolverSettings | None = None):
        st = settings or SolverSettings()
        n = T.n
        ab = np.zeros((4, n), dtype=complex, order="F")
        ab[2, :] = T.d
        if n > 1:
            ab[1, 1:] = T.du
            ab[3, :-1] = T.dl
        lu, ipiv, info = _lapack.zgbtrf(ab, 1, 1)
        if info < 0:
            raise ValueError("zgbtrf: illegal argument %d" % (-info))
        self._lu = lu
        self._ipiv = ipiv
        self.n = n
        udiag = np.abs(lu[2, :])
        floor = st.pivot_floor_scale * max(n, 1)
        self.min_pivot = float(udiag.min()) if n else 0.0
        if info > 0:
            self.singular = True
            self.pivot_index = int(info - 1)
        elif self.min_pivot < floor:
            self.singular = True
            self.pivot_index = int(np.argmin(udiag))
        else:
            self.singular = False
            self.pivot_index = -1

    def solve(self, b: np.ndarray, conj_transpose: bool = False) -> np.ndarray:
        """Solve A x = b (or A^H x = b). Accepts (n,) or (n, k) right sides."""
        if self.singular:
            raise SingularFactorError(self.pivot_index)
        b = np.asarray(b, dtype=complex)
        squeeze = b.ndim == 1
        if squeeze:
            b = b[:, None]
        x, info = _lapack.zgbtrs(self._lu, 1, 1, b, self._ipiv,
                                 trans=2 if conj_transpose else 0)
        if info != 0:
            raise RuntimeError("zgbtrs failed with info=%d" % info)
        return x[:, 0] if squeeze else x


@dataclass(frozen=True)
class SigmaMinResult:
    """Smallest singular value estimate with convergence bookkeeping."""

    value: float
    converged: bool
    iterations: int
    exactly_singular: bool = False


def smallest_singular_value(T: Tridiagonal, settings: SolverSettings | None = None) -> SigmaMinResult:
    """Smallest singular value of a tridiagonal matrix.

    Block-2 inverse iteration on A^*A through the banded LU (one solve with A,
    one with A^H per step), with deterministic seeded start. The block of two
    vectors keeps convergence honest when the two smallest singular values are
    (nearly) degenerate, which happens for symmetric spike pairs. An exactly
    singular factorisation short-circuits to sigma = 0.

    Convergence is certified through the Ritz residual r = A^*(A v) - sigma^2 v
    of the block's lowest Ritz pair: sigma^2 then lies within ||r|| of a true
    eigenvalue of A^*A, so ||r|| <= rel_tol sigma^2 pins the value to working
    accuracy (the threshold is floored at the rounding noise of the two
    matvecs). A plain value-drift test cannot certify anything here -- at
    linear rate rho the drift underestimates the remaining error by the factor
    rho/(1-rho), and it once accepted a rate-0.5 iteration seven digits early.

    When many singular values cluster at the bottom (far from any resolvent
    peak all of them sit near |Im shift|), the iteration's rate tends to 1,
    the residual never reaches the certificate, and the subspace never
    settles -- but every candidate value then lies inside the cluster, so the
    estimate is accurate to the cluster width. Increments below
    stagnation_tol * sigma that barely decay (ratio >= 0.9, the cluster
    signature) are therefore accepted instead of burning the iteration budget.
    """
    st = settings or SolverSettings()
    n = T.n
    lu = BandedLU(T, st)
    if lu.singular:
        return SigmaMinResult(0.0, True, 0, exactly_singular=True)
    TH = T.adjoint()
    noise_floor = 64.0 * np.finfo(float).eps * T.norm_inf()
    rng = np.random.default_rng(st.seed)
    X = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    X, _ = np.linalg.qr(X)
    sigma_prev = np.inf
    sigma = np.inf
    change_prev = np.inf
    converged = False
    it = 0
    for it in range(1, st.max_iters + 1):
        Y = lu.solve(X, conj_transpose=True)
        Z = lu.solve(Y)
        X, _ = np.linalg.qr(Z)
        AX = T.matvec(X)
        G = AX.conj().T @ AX
        w, V = np.linalg.eigh(0.5 * (G + G.conj().T))
        sigma = float(np.sqrt(max(w[0], 0.0)))
        v = X @ V[:, 0]
        resid = float(np.linalg.norm(TH.matvec(AX @ V[:, 0]) - w[0] * v))
        if resid <= max(st.rel_tol * sigma * sigma,
                        noise_floor * (T.norm_inf() + sigma)):
            converged = True
            break
        change = abs(sigma - sigma_prev)
        if it >= 8 and change <= st.stagnation_tol * sigma and change >= 0.9 * change_prev:
            converged = True
            break
        sigma_prev = sigma
        change_prev = change
    return SigmaMinResult(sigma, converged, it)


def all_eigenvalues(T: Tridiagonal, settings: SolverSettings | None = None) -> np.ndarray:
    """All n eigenvalues, sorted by (real, imaginary) part.

    Dense QR iteration with deflation on the densified matrix; refuses
    n > EIG_DENSE_CAP, where the O(n^3) cost stops being a desk-scale tool
    and callers should switch to shift-invert refinement of selected targets.
    """
    if T.n > EIG_DENSE_CAP:
        raise ValueError("n = %d exceeds the dense eigenvalue cap %d" % (T.n, EIG_DENSE_CAP))
    if T.n == 0:
        return np.array([], dtype=complex)
    ev = _dense_eigvals(T.to_dense())
    return ev[np.lexsort((ev.imag, ev.real))]


@dataclass
class EigenPair:
    """A refined eigenvalue with its unit eigenvector and residual."""

    value: complex
    vector: np.ndarray
    residual: float
    converged: bool
    iterations: int


def shift_invert_refine(T: Tridiagonal, shift: complex,
                        settings: SolverSettings | None = None,
                        x0: np.ndarray | None = None) -> EigenPair:
    """Eigenpair of the eigenvalue nearest to the given shift.

    Fixed-shift inverse iteration with the complex-symmetric Rayleigh quotient
    (x^T A x)/(x^T x), which is second-order accurate for the complex symmetric
    matrices assembled here; falls back to the Hermitian quotient when the
    bilinear normaliser degenerates. When the residual stalls above tolerance
    -- the signature of a near-degenerate pair straddling the shift, where the
    iterate wanders inside the two-dimensional cluster -- the shift is moved
    to the current Rayleigh quotient and the matrix refactored (at most four
    times), which breaks the tie. Deterministic for fixed settings.
    """
    st = settings or SolverSettings()
    n = T.n

    def factor(z: complex):
        B = T.shifted(z)
        lu = BandedLU(B, st)
        if lu.singular:
            # the shift is (numerically) an exact eigenvalue; nudge it slightly
            lu = BandedLU(T.shifted(z + 1e-12 * (1.0 + abs(z))), st)
        if lu.singular:
            raise RuntimeError("shift-invert factorisation singular after nudge")
        return lu

    lu = factor(shift)
    rng = np.random.default_rng(st.seed)
    if x0 is None:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        v = np.asarray(x0, dtype=complex).copy()
    v /= np.linalg.norm(v)
    scale = max(T.norm_inf(), 1.0)
    theta = shift
    residual = np.inf
    best_residual = np.inf
    stall = 0
    refactors = 0
    converged = False
    it = 0
    for it in range(1, st.max_iters + 1):
        w = lu.solve(v)
        v = w / np.linalg.norm(w)
        Av = T.matvec(v)
        bilinear = v @ v
        if abs(bilinear) > 0.1:
            theta = (v @ Av) / bilinear
        else:
            theta = np.vdot(v, Av)
        residual = float(np.linalg.norm(Av - theta * v))
        if residual <= st.rel_tol * scale:
            converged = True
            break
        if residual < 0.5 * best_residual:
            stall = 0
        else:
            stall += 1
        best_residual = min(best_residual, residual)
        if stall >= 5 and refactors < 4:
            lu = factor(complex(theta))
            refactors += 1
            stall = 0
            best_residual = residual
    return EigenPair(complex(theta), v, residual, converged, it)


def _neg_count(d: np.ndarray, e2: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each shift in xs (Sturm/LDL^T count),
    vectorised over the shifts. Vanishing pivots are replaced by -pivmin and
    counted as negative, which perturbs the matrix by at most pivmin and so
    cannot move the count unless an eigenvalue sits within pivmin of x."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    pivmin = 1e-290 * max(float(np.max(e2)) if len(e2) else 1.0, 1.0)
    q = d[0] - xs
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, len(d)):
        q = d[i] - xs - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def sturm_min_eigenvalue(d: np.ndarray, e: np.ndarray, tol_scale: float = 1e-10) -> float:
    """Smallest eigenvalue of the real symmetric tridiagonal (d, e) by
    bisection on the Sturm count, batched 63 shifts per sweep.

    Independent of the QR/LAPACK eigenvalue paths; used both as a production
    routine for ground energies of the real weighted forms and as a
    cross-check in the tests.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = len(d)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return float(d[0])
    e2 = e * e
    r = np.zeros(n)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo = float(np.min(d - r))
    hi = float(np.min(d))  # Rayleigh quotient of a basis vector
    scale = max(abs(lo), abs(hi), 1.0)
    tol = tol_scale * scale
    if hi - lo <= tol:
        return hi
    # make sure the bracket contains the smallest eigenvalue
    while _neg_count(d, e2, np.array([hi]))[0] < 1:
        hi += max(tol, 1e-6 * scale)
    batch = 63
    while hi - lo > tol:
        xs = np.linspace(lo, hi, batch + 2)[1:-1]
        counts = _neg_count(d, e2, xs)
        idx = np.searchsorted(counts, 1)
        if idx >= len(xs):
            lo = xs[-1]
        else:
            hi = xs[idx]
            lo = xs[idx - 1] if idx > 0 else lo
    return 0.5 * (lo + hi)
