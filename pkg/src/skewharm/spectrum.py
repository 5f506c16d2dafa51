"""Eigenvalues of the discretised operator, their validation, semiclassical
predictions for the normalized decaying family, and power-law fits.

Eigenvalue pipeline: a dense QR solve on a moderate grid proposes candidate
locations, semiclassical predictions add further candidates for the
power-decay family (whose central modes narrow too fast for any affordable
dense grid at extreme 1/eps), and every candidate is then refined by banded
shift-invert iteration on two finer grids (N_f and 2 N_f nodes). A candidate
only counts as an eigenvalue when both refinements converge, agree to 0.1%
(plus a separate 0.5% check on the real parts, which the modulus test alone
would not control when |Im| >> |Re|), carry negligible boundary mass, and
leave a small residual. The spectral bound Sigma(eps) is the smallest
validated real part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    EIG_DENSE_CAP,
    SolverSettings,
    Tridiagonal,
    all_eigenvalues,
    shift_invert_refine,
)
from .operators import Grid, assemble_H, auto_L, auto_grid, suggest_N
from .potentials import Potential

__all__ = [
    "SemiclassicalPrediction",
    "semiclassical_predict",
    "EigRecord",
    "SpectrumReport",
    "compute_spectrum",
    "sigma_of_epsilon",
    "conjecture_check",
    "FitResult",
    "scaling_fit",
    "sigma_sweep",
    "spectrum_table",
]


@dataclass(frozen=True)
class SemiclassicalPrediction:
    """Leading-order eigenvalue predictions for f with a single nondegenerate
    maximum f(0) = 1, f''(0) = -k and |x|^k f -> 1.

    Two families: mu_n, from the quadratic model at the maximum,
        omega = (1 - i k/(2 eps))^(1/2),      mu_n = i/eps + (2n+1) omega,
    and nu_n, from the harmonic wells the decay tail creates at +-z_eps,
        w = (i k/(2 eps))^(2 nu),  nu = 1/(k+2),   z_eps = (w - 1)^(1/2),
        D = ((k+2)/k) w - 1,       Omega = ((k+2)(1 - 1/w))^(1/2),
        nu_n = D + (2n+1) Omega.
    All roots are principal.
    """

    eps: float
    k: float
    omega: complex
    z: complex
    D: complex
    Omega: complex
    mu0: tuple[complex, ...]
    nu0: tuple[complex, ...]


def semiclassical_predict(p: Potential, eps: float, n_max: int = 5) -> SemiclassicalPrediction:
    if not getattr(p, "normalized_single_maximum", False):
        raise ValueError("predictions hold only for the normalized single-maximum family")
    k = float(p.k)
    nu_exp = 1.0 / (k + 2.0)
    omega = np.sqrt(1.0 - 1j * k / (2.0 * eps))
    w = (1j * k / (2.0 * eps)) ** (2.0 * nu_exp)
    z = np.sqrt(w - 1.0)
    D = ((k + 2.0) / k) * w - 1.0
    Omega = np.sqrt((k + 2.0) * (1.0 - 1.0 / w))
    ns = np.arange(n_max)
    mu = 1j / eps + (2 * ns + 1) * omega
    nu = D + (2 * ns + 1) * Omega
    return SemiclassicalPrediction(eps, k, complex(omega), complex(z), complex(D),
                                   complex(Omega), tuple(map(complex, mu)), tuple(map(complex, nu)))


@dataclass
class EigRecord:
    """One candidate eigenvalue and the fate of its validation."""

    shift: complex
    source: str  # "qr" or "predicted"
    value: complex | None = None
    residual: float = math.inf
    displacement: float = math.inf
    re_displacement: float = math.inf
    boundary_mass: float = math.inf
    condition: float = math.inf
    accuracy: float = math.inf
    converged: bool = False
    validated: bool = False
    corroborated: bool = False
    reason: str = ""


@dataclass
class SpectrumReport:
    """Validated eigenvalues (ascending real part) plus full diagnostics."""

    kind: str
    eps: float
    grid: Grid
    m: int
    eigenvalues: list[complex]
    records: list[EigRecord]
    diagnostics: dict = field(default_factory=dict)


def _boundary_mass(v: np.ndarray, g: Grid, frac: float = 0.9) -> float:
    x = g.nodes()
    mask = np.abs(x) > frac * g.L
    return float(np.sum(np.abs(v[mask]) ** 2))


def _tail_shifts(p: Potential, eps: float, n_max: int) -> list[complex]:
    """Candidate shifts for monotone potentials approaching a plateau.

    The lowest true modes anchor at the turning scale x_t ~ eps^(-1/3), with
    Re lambda ~ x_t^2 and Im lambda ~ f(x_t)/eps just below the plateau; the
    Airy quasimodes further out in the f' tail are pseudo-modes (they carry
    the resolvent growth, not eigenvalues) and are useless as shifts -- the
    deep pseudospectrum around them is numerically singular, so iterating
    there just echoes the shift back. A small fan of real parts around x_t^2
    is enough: shift-invert plus the validation gates land on whatever true
    modes sit in the band. The QR grid never sees these modes because of the
    sqrt(f/eps) oscillation they pick up through the center.
    """
    L = auto_L(p, eps)
    x_t = min(max(eps ** (-1.0 / 3.0), 1.0), 0.8 * L)
    # the band sits below the local plateau value by ~0.66 eps^(1/3)
    base_im = float(p(x_t)) / eps - 0.66 * eps ** (-2.0 / 3.0)
    re0 = x_t * x_t
    out = [complex(re0 * (0.9 + 0.12 * n), base_im) for n in range(n_max + 2)]
    return out + [z.conjugate() for z in out]


def compute_spectrum(p: Potential, eps: float, g: Grid | None = None, m: int = 5,
                     settings: SolverSettings | None = None,
                     include_predictions: bool = True,
                     qr_n_cap: int = 2600) -> SpectrumReport:
    """Lowest-m validated eigenvalues of H (by real part).

    g is the proposal grid for the dense QR solve; validation always happens
    on a pair of finer grids (resolution-matched N_f and 2 N_f) via banded
    shift-invert, so the dense solve only needs to localise candidates.

    Identity checks are tiered. Where the eigenvector condition number leaves
    headroom, a jittered restart must re-converge onto the value. Where the
    resolvent around the value is numerically singular (strongly non-normal
    tail modes), local probes stall at their entry point and decide nothing;
    such candidates are accepted only if an independent dense solve on a
    staggered grid reproduces the value, and rejected otherwise -- echoes of
    the singular sea are grid noise and fail that test.
    """
    st = settings or SolverSettings()
    if g is None:
        L = auto_L(p, eps)
        g = Grid(L, min(suggest_N(p, eps, L), qr_n_cap, EIG_DENSE_CAP))
    A = assemble_H(p, eps, g)
    raw = all_eigenvalues(A, st)

    shifts: list[tuple[complex, str]] = []
    tol_dedup = st.deflation_tol_scale * A.norm_inf()
    for z in raw[: 4 * m]:
        if all(abs(z - s) > max(tol_dedup, 1e-9 * max(abs(z), 1.0)) for s, _ in shifts):
            shifts.append((complex(z), "qr"))
    if include_predictions and getattr(p, "normalized_single_maximum", False):
        pred = semiclassical_predict(p, eps, n_max=m + 1)
        for z in list(pred.mu0) + list(pred.nu0):
            shifts.append((z, "predicted"))
    if include_predictions and getattr(p, "kind", "") == "smoothed-linear":
        for z in _tail_shifts(p, eps, m + 1):
            shifts.append((z, "predicted"))

    L = g.L
    n_fine = max(2 * g.N, suggest_N(p, eps, L, n_max=32000))
    g1 = Grid(L, n_fine)
    g2 = Grid(L, 2 * n_fine)
    A1 = assemble_H(p, eps, g1)
    A2 = assemble_H(p, eps, g2)
    res_tol = 100.0 * st.rel_tol * max(A2.norm_inf(), 1.0)

    # Identity evidence of last resort: a second, fully independent pipeline
    # (dense solve on a staggered proposal grid, then refinement on its own
    # staggered fine-grid pair). A true eigenvalue is a fixed point of the
    # discretisation family, so both pipelines land on it to within its
    # pseudospectral fuzz; an echo of the iteration entering the numerically
    # singular sea is grid noise and the endpoints stay macroscopically
    # apart. Comparing endpoint to endpoint (not endpoint to raw staggered
    # value) matters: the staggered dense solve carries its own O(h^2) error,
    # which for the fuzziest modes exceeds the identity radius. Everything is
    # computed lazily -- only deep-pseudospectrum candidates ever need it.
    staggered: dict[str, object] = {}

    def corroborated(z: complex) -> float:
        if "values" not in staggered:
            gs = Grid(L, min(int(1.31 * g.N) + 7, EIG_DENSE_CAP))
            staggered["values"] = all_eigenvalues(assemble_H(p, eps, gs), st)
            g1s = Grid(L, int(1.37 * n_fine))
            g2s = Grid(L, 2 * g1s.N)
            staggered["grids"] = (g1s, g2s)
            staggered["ops"] = (assemble_H(p, eps, g1s), assemble_H(p, eps, g2s))
        vals = staggered["values"]
        zs = complex(vals[int(np.argmin(np.abs(vals - z)))])
        if abs(zs - z) > 0.1 * max(abs(z), 1.0):
            return math.inf
        g1s, g2s = staggered["grids"]
        A1s, A2s = staggered["ops"]
        e1s = shift_invert_refine(A1s, zs, st)
        if not e1s.converged:
            return math.inf
        x0s = _interp_vector(e1s.vector, g1s, g2s)
        e2s = shift_invert_refine(A2s, e1s.value, st, x0=x0s)
        if not e2s.converged:
            return math.inf
        return abs(e2s.value - z)

    records: list[EigRecord] = []

    # validated copies of one mode scatter by its pseudospectral fuzz, well
    # above machine precision, so the clustering radius follows the measured
    # two-grid scatter of the pair, capped an order below ladder spacings
    same_tol = 1e-4

    def same_mode(a: EigRecord, b: EigRecord) -> bool:
        rad = max(same_tol, min(1e-2, 2.0 * max(a.displacement, b.displacement)))
        return abs(a.value - b.value) <= rad * max(abs(b.value), 1.0)

    def lowest_m_filled(zre: float) -> bool:
        """Can this candidate still enter the reported lowest-m set? If not,
        the expensive second pipeline is not worth running for it."""
        uniq: list[EigRecord] = []
        for r in records:
            if r.validated and all(not same_mode(r, u) for u in uniq):
                uniq.append(r)
        if len(uniq) < m:
            return False
        mth = sorted(u.value.real for u in uniq)[m - 1]
        return zre > mth + same_tol * max(abs(mth), 1.0)

    for shift, source in sorted(shifts, key=lambda t: t[0].real):
        rec = EigRecord(shift, source)
        records.append(rec)
        e1 = shift_invert_refine(A1, shift, st)
        x0 = _interp_vector(e1.vector, g1, g2)
        e2 = shift_invert_refine(A2, e1.value if e1.converged else shift, st, x0=x0)
        rec.converged = e1.converged and e2.converged
        if not rec.converged:
            rec.reason = "refinement did not converge"
            continue
        rec.value = e2.value
        rec.residual = e2.residual
        rec.displacement = abs(e2.value - e1.value) / max(abs(e2.value), 1e-300)
        rec.re_displacement = abs(e2.value.real - e1.value.real) / max(1.0, abs(e2.value.real))
        rec.boundary_mass = max(_boundary_mass(e1.vector, g1), _boundary_mass(e2.vector, g2))
        if rec.residual > res_tol:
            rec.reason = "residual %.2e above tolerance" % rec.residual
            continue
        # eigenvalue condition of a complex-symmetric matrix from its own
        # eigenvector: kappa = ||v||^2 / |v^T v| (the left eigenvector is the
        # plain transpose). Condition times machine-level backward error is
        # the worst-case accuracy floor.
        v = e2.vector / np.linalg.norm(e2.vector)
        vtv = abs(np.dot(v, v))
        rec.condition = 1.0 / vtv if vtv > 0 else math.inf
        rec.accuracy = rec.condition * np.finfo(float).eps * A2.norm_inf()
        if rec.boundary_mass > 1e-6:
            rec.reason = "boundary mass %.2e" % rec.boundary_mass
            continue
        scale = max(abs(rec.value), 1.0)
        fuzz = max(rec.displacement, rec.re_displacement)
        if fuzz > 2e-2:
            # scatters between grids by more than any reporting tolerance
            rec.reason = "grid-family scatter %.2e" % fuzz
            continue
        if fuzz > 1e-3 or rec.accuracy > 5e-3 * scale:
            # Fuzzy mode: the grid-family scatter (or the worst-case
            # condition floor) exceeds the healthy-regime radius, so the
            # value is only determined up to its pseudospectral fuzz and the
            # local probe below cannot decide anything. Identity must come
            # from the independent pipeline agreeing within the fuzz.
            if lowest_m_filled(rec.value.real):
                rec.reason = "fuzzy mode outside the reported window"
                continue
            gap = corroborated(rec.value)
            if gap <= 5e-3 * scale:
                rec.corroborated = True
                rec.validated = True
            else:
                rec.reason = ("fuzzy mode (scatter %.2e, condition %.2g), "
                              "independent pipeline lands %.2e away"
                              % (fuzz, rec.condition, gap))
            continue
        # Reproducibility: rerun from an independent random start at a
        # slightly displaced shift. Deep in the pseudospectrum A - z is
        # numerically singular, so a tiny residual alone proves nothing --
        # the iteration "converges" wherever it entered. A true eigenvalue
        # pulls the rerun back onto itself; a pseudo-mode echoes the
        # displaced entry point instead.
        jitter = e2.value * (1.0 + 1e-4) + 1e-4j
        e3 = shift_invert_refine(A2, jitter, st)
        if e3.converged and abs(e3.value - e2.value) <= 1e-5 * scale:
            rec.validated = True
            continue
        if e3.converged and abs(e3.value - jitter) <= 0.25 * abs(jitter - e2.value):
            # The rerun parked at its entry point: within the probe radius
            # the resolvent is already beyond double precision, so the probe
            # can neither return nor escape and decides nothing. Fall back to
            # the independent-pipeline test.
            if lowest_m_filled(rec.value.real):
                rec.reason = "probe stalled and outside the reported window"
                continue
            gap = corroborated(rec.value)
            if gap <= 5e-3 * scale:
                rec.corroborated = True
                rec.validated = True
            else:
                rec.reason = ("probe stalled and independent pipeline lands "
                              "%.2e away" % gap)
            continue
        rec.reason = ("not reproducible from displaced start (%.6g%+.6gj)"
                      % (e3.value.real, e3.value.imag)) if e3.converged \
            else "not reproducible: rerun did not converge"

    # deduplicate validated values (several shifts may land on one mode)
    unique: list[EigRecord] = []
    for rec in sorted((r for r in records if r.validated), key=lambda r: r.residual):
        if all(not same_mode(rec, u) for u in unique):
            unique.append(rec)
    values = sorted((r.value for r in unique), key=lambda z: (z.real, abs(z.imag), z.imag))
    diagnostics = {
        "qr_grid": (g.L, g.N),
        "fine_grids": (g1.N, g2.N),
        "candidates": len(records),
        "validated": len(unique),
        "qr_eigenvalue_count": len(raw),
    }
    return SpectrumReport(getattr(p, "kind", "?"), eps, g, m, values[:m], records, diagnostics)


def _interp_vector(v: np.ndarray, g_from: Grid, g_to: Grid) -> np.ndarray:
    xf = g_from.nodes()
    xt = g_to.nodes()
    return np.interp(xt, xf, v.real) + 1j * np.interp(xt, xf, v.imag)


def sigma_of_epsilon(report: SpectrumReport) -> float:
    """Spectral bound: smallest validated real part (ties broken towards the
    eigenvalue with smaller |Im|, which sorted order already guarantees)."""
    if not report.eigenvalues:
        raise ValueError("no validated eigenvalues in report")
    return float(report.eigenvalues[0].real)


def conjecture_check(p: Potential, eps: float, g: Grid | None = None,
                     settings: SolverSettings | None = None) -> dict:
    """Compare the measured spectral bound with min(Re mu_0, Re nu_0)."""
    rep = compute_spectrum(p, eps, g, m=3, settings=settings)
    pred = semiclassical_predict(p, eps, n_max=1)
    predicted = min(pred.mu0[0].real, pred.nu0[0].real)
    measured = sigma_of_epsilon(rep)
    branch = "mu" if pred.mu0[0].real <= pred.nu0[0].real else "nu"
    return {
        "eps": eps,
        "sigma_measured": measured,
        "sigma_predicted": predicted,
        "branch": branch,
        "rel_err": abs(measured - predicted) / abs(predicted),
        "report": rep,
    }


@dataclass(frozen=True)
class FitResult:
    """Least-squares power law value ~ constant * eps^exponent."""

    exponent: float
    constant: float
    r2: float
    n_points: int
    decades: float


def scaling_fit(eps_list, values) -> FitResult:
    """Log-log least squares fit; requires >= 4 points spanning >= 2 decades."""
    eps_arr = np.asarray(list(eps_list), dtype=float)
    val_arr = np.asarray(list(values), dtype=float)
    if len(eps_arr) < 4:
        raise ValueError("need at least 4 epsilon values, got %d" % len(eps_arr))
    decades = float(np.log10(eps_arr.max() / eps_arr.min()))
    if decades < 2.0:
        raise ValueError("epsilon values span only %.2f decades (need >= 2)" % decades)
    if np.any(val_arr <= 0):
        raise ValueError("power-law fit needs positive values")
    lx = np.log(eps_arr)
    ly = np.log(val_arr)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(math.exp(intercept)), r2, len(eps_arr), decades)


def sigma_sweep(p: Potential, eps_list, m: int = 3,
                settings: SolverSettings | None = None) -> tuple[list[SpectrumReport], list[float]]:
    """compute_spectrum + sigma_of_epsilon over a list of eps values."""
    reports, sigmas = [], []
    for eps in eps_list:
        rep = compute_spectrum(p, eps, m=m, settings=settings)
        reports.append(rep)
        sigmas.append(sigma_of_epsilon(rep))
    return reports, sigmas


def spectrum_table(p: Potential, eps: float, m: int = 5, g: Grid | None = None,
                   settings: SolverSettings | None = None) -> list[dict]:
    """Rows (n, re_lambda, im_lambda, re_mu0, im_mu0, re_nu0, im_nu0) pairing
    measured eigenvalues with both prediction families; prediction columns are
    NaN for potentials outside the normalized decaying family."""
    rep = compute_spectrum(p, eps, g, m=m, settings=settings)
    try:
        pred = semiclassical_predict(p, eps, n_max=m)
        mu, nu = pred.mu0, pred.nu0
    except ValueError:
        mu = nu = tuple(complex(math.nan, math.nan) for _ in range(m))
    rows = []
    for n in range(m):
        lam = rep.eigenvalues[n] if n < len(rep.eigenvalues) else complex(math.nan, math.nan)
        rows.append({
            "n": n,
            "re_lambda": lam.real,
            "im_lambda": lam.imag,
            "re_mu0": mu[n].real,
            "im_mu0": mu[n].imag,
            "re_nu0": nu[n].real,
            "im_nu0": nu[n].imag,
        })
    return rows
