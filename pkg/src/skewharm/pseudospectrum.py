"""Resolvent norms along the imaginary axis and what they imply.

kappa(eps, lambda) = 1/sigma_min(H - i lambda) is the norm of the resolvent
at the purely imaginary point i lambda (it never exceeds 1 because the
numerical range keeps distance >= 1 from the imaginary axis). The scan
machinery samples kappa adaptively: a coarse logarithmic sweep of the
reachable lambda range plus refinement windows around each critical value
of f scaled by 1/eps, around lambda = 0, and around the global peak location
eps^(-4/(k+4)) for decaying potentials; every local peak is then bisected
until its location is pinned to 0.5%. Psi(eps) is the reciprocal of the
scanned maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import SolverSettings, smallest_singular_value
from .operators import Grid, assemble_H, assemble_dyadic_block, auto_grid, numerical_range_gap
from .potentials import Potential

__all__ = [
    "KappaResult",
    "kappa",
    "Scan",
    "scan_lambda",
    "psi_of_epsilon",
    "RegimePrediction",
    "classify_regimes",
    "LocalizedBound",
    "localized_bound",
    "avoided_domain",
]


@dataclass(frozen=True)
class KappaResult:
    """A single resolvent-norm evaluation with its validation bookkeeping."""

    value: float
    sigma_min: float
    converged: bool
    grid: Grid
    two_grid_rel: float | None = None
    flag: str = ""


def kappa(p: Potential, eps: float, lam: float, g: Grid | None = None,
          settings: SolverSettings | None = None, validate: bool = False) -> KappaResult:
    """Resolvent norm 1/sigma_min(H - i lambda) at a single point.

    With validate=True the value is recomputed on a grid with twice the node
    count; disagreement beyond 1% is flagged rather than hidden. An exactly
    singular factorisation (i lambda numerically an eigenvalue) maps to +inf.
    """
    g = g or auto_grid(p, eps)
    r = smallest_singular_value(assemble_H(p, eps, g, lam=lam), settings)
    value = math.inf if r.value == 0.0 else 1.0 / r.value
    flag = "" if r.converged else "noconv"
    two_rel = None
    if validate:
        g2 = Grid(g.L, 2 * g.N)
        r2 = smallest_singular_value(assemble_H(p, eps, g2, lam=lam), settings)
        v2 = math.inf if r2.value == 0.0 else 1.0 / r2.value
        if math.isfinite(value) and math.isfinite(v2) and v2 > 0:
            two_rel = abs(value - v2) / v2
            if two_rel > 0.01:
                flag = (flag + "+twogrid").lstrip("+")
    return KappaResult(value, r.value, r.converged, g, two_rel, flag)


@dataclass
class Scan:
    """An adaptive kappa scan over lambda at fixed eps."""

    kind: str
    eps: float
    grid: Grid
    lam: np.ndarray
    kappa: np.ndarray
    tag: list[str]
    flag: list[str]
    #: refined local peaks: label -> (lambda, kappa); labels are "cv:<value>",
    #: "zero", "infinity", and "global"
    peaks: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def psi(self) -> float:
        return 1.0 / float(np.max(self.kappa))

    @property
    def lam_argmax(self) -> float:
        return float(self.lam[int(np.argmax(self.kappa))])

    def any_flagged(self) -> bool:
        return any(f for f in self.flag)


def _infinity_peak_location(p: Potential, eps: float) -> float | None:
    k = getattr(p, "decay_exponent", None)
    if k is None:
        return None
    return eps ** (-4.0 / (k + 4.0))


def scan_lambda(p: Potential, eps: float, g: Grid | None = None,
                settings: SolverSettings | None = None, n_coarse: int = 48,
                peak_rtol: float = 5e-3, validate_peaks: bool = True) -> Scan:
    """Adaptive resolvent-norm scan along the imaginary axis.

    Deterministic for fixed inputs, and monotone in the following sense: the
    reported maximum can only grow when extra sample points are added, since
    it is a maximum over evaluated points.
    """
    g = g or auto_grid(p, eps)
    cache: dict[float, KappaResult] = {}

    def ev(lam: float) -> float:
        lam = float(lam)
        if lam not in cache:
            cache[lam] = kappa(p, eps, lam, g, settings)
        return cache[lam].value

    lo_r, hi_r = p.range_closure()
    x = g.nodes()
    fx = p(x)
    f_hi = hi_r if math.isfinite(hi_r) else float(np.max(fx))
    f_lo = lo_r if math.isfinite(lo_r) else float(np.min(fx))
    inf_peak = _infinity_peak_location(p, eps)
    lam_hi = 1.2 * max(f_hi / eps, 10.0, 3.0 * (inf_peak or 0.0))
    lam_lo = 1.2 * min(f_lo / eps, -10.0) if f_lo < 0 else -10.0

    ev(0.0)
    for lam in np.geomspace(1.0, lam_hi, n_coarse):
        ev(lam)
    for lam in -np.geomspace(1.0, -lam_lo, max(n_coarse // 4, 8)):
        ev(lam)

    def refine(center_lo: float, center_hi: float, label: str):
        pts = sorted(set(float(t) for t in np.linspace(center_lo, center_hi, 13)))
        vals = [ev(t) for t in pts]
        for _ in range(60):
            i = int(np.argmax(vals))
            left = pts[max(i - 1, 0)]
            right = pts[min(i + 1, len(pts) - 1)]
            if right - left <= peak_rtol * max(abs(pts[i]), 1.0):
                break
            new = [0.5 * (left + pts[i]), 0.5 * (pts[i] + right)]
            for t in new:
                if t not in pts:
                    pts.append(t)
            pts.sort()
            vals = [ev(t) for t in pts]
        i = int(np.argmax(vals))
        self_peaks[label] = (pts[i], vals[i])

    self_peaks: dict[str, tuple[float, float]] = {}
    for c in p.critical_values():
        center = c / eps
        if abs(center) < 1e-12:
            refine(-2.0, 2.0, "cv:%g" % c)
        else:
            w = 0.1 * abs(center)
            refine(center - w, center + w, "cv:%g" % c)
    if getattr(p, "decay_exponent", None) is not None:
        refine(-2.0, 2.0, "zero")
        if inf_peak is not None:
            refine(inf_peak / 2.0, 2.0 * inf_peak, "infinity")

    # refine the global maximum among everything sampled so far
    lams = np.array(sorted(cache))
    vals = np.array([cache[t].value for t in lams])
    i = int(np.argmax(vals))
    left = lams[max(i - 1, 0)]
    right = lams[min(i + 1, len(lams) - 1)]
    refine(left, right, "global")

    if validate_peaks:
        lam_star, _ = self_peaks["global"]
        chk = kappa(p, eps, lam_star, g, settings, validate=True)
        cache[lam_star] = chk

    lams = np.array(sorted(cache))
    kvals = np.array([cache[t].value for t in lams])
    flags = [cache[t].flag for t in lams]
    tags = [_tag_point(p, eps, t) for t in lams]
    return Scan(getattr(p, "kind", "?"), eps, g, lams, kvals, tags, flags, self_peaks)


def _tag_point(p: Potential, eps: float, lam: float) -> str:
    """Which resolvent regime a scan point belongs to."""
    if numerical_range_gap(p, eps, lam) > 0.0:
        return "range_gap"
    s = eps * lam
    k = getattr(p, "decay_exponent", None)
    for c in p.critical_values():
        if abs(c) > 1e-12 and abs(s - c) <= 0.05 * abs(c):
            return "critical_spike"
    if k is not None:
        inf_peak = eps ** (-4.0 / (k + 4.0))
        if abs(lam) <= 2.0:
            return "lambda_zero"
        if inf_peak / 2.0 <= abs(lam) <= 2.0 * inf_peak:
            return "infinity_peak"
    elif abs(s) <= 0.05 * max(abs(s), 1e-12) and any(abs(c) < 1e-12 for c in p.critical_values()):
        return "critical_spike"
    return "generic"


def psi_of_epsilon(p: Potential, eps_list, L: float | None = None, N: int | None = None,
                   settings: SolverSettings | None = None) -> list[dict]:
    """Psi(eps) = 1/max kappa for each eps, with the same grid rule applied
    per eps (auto unless L, N pinned). Returns one row per eps."""
    rows = []
    for eps in eps_list:
        g = auto_grid(p, eps, L=L, N=N)
        s = scan_lambda(p, eps, g, settings)
        rows.append({
            "eps": eps,
            "psi": s.psi,
            "lam_argmax": s.lam_argmax,
            "flag": "flagged" if s.any_flagged() else "",
        })
    return rows


@dataclass(frozen=True)
class RegimePrediction:
    """Power-law envelope kappa <~ constant * eps^exponent for one regime tag."""

    tag: str
    exponent: float
    constant: float
    n_points: int
    predicted_lambda: float | None = None


def classify_regimes(p: Potential, eps: float, scan: Scan) -> list[RegimePrediction]:
    """Group scanned points by regime tag and fit the envelope constant
    max kappa/eps^exponent for each tag present in the scan."""
    k = getattr(p, "decay_exponent", None)
    exponents = {
        "generic": 2.0 / 3.0,
        "critical_spike": 0.5,
        "infinity_peak": 2.0 / (k + 4.0) if k else 2.0 / 3.0,
        "lambda_zero": 2.0 / (k + 2.0) if k else 0.5,
    }
    out = []
    tags = np.array(scan.tag)
    for tag, expo in exponents.items():
        mask = tags == tag
        if not np.any(mask):
            continue
        vals = scan.kappa[mask]
        const = float(np.max(vals) / eps**expo)
        pred = None
        if tag == "infinity_peak" and k:
            pred = eps ** (-4.0 / (k + 4.0))
        out.append(RegimePrediction(tag, expo, const, int(mask.sum()), pred))
    mask = tags == "range_gap"
    if np.any(mask):
        # here the envelope is the exact bound kappa <= 1/gap, so the fitted
        # constant is sup kappa*gap and should sit at or below 1
        gaps = np.array([numerical_range_gap(p, eps, t) for t in scan.lam[mask]])
        const = float(np.max(scan.kappa[mask] * gaps))
        out.append(RegimePrediction("range_gap", 1.0, const, int(mask.sum())))
    return out


@dataclass(frozen=True)
class LocalizedBound:
    """Dyadic one-scale constants C_j and the sandwich they induce on kappa."""

    eps: float
    lam: float
    c_j: tuple[float, ...]
    inf_c: float
    kappa: float
    #: kappa * inf_j C_j; the two-sided localisation bound says this ratio
    #: stays within [1, C] for a moderate constant C
    ratio: float


def localized_bound(p: Potential, eps: float, lam: float, j_max: int = 12,
                    nodes_per_interval: int = 800,
                    settings: SolverSettings | None = None,
                    g: Grid | None = None) -> LocalizedBound:
    """Compute C_j = sigma_min(P_j) for j = 0..j_max and compare the model
    prediction (inf_j C_j)^-1 with the directly computed kappa."""
    cs = []
    for j in range(j_max + 1):
        B = assemble_dyadic_block(p, eps, lam, j, nodes_per_interval)
        cs.append(smallest_singular_value(B, settings).value)
    inf_c = float(min(cs))
    kap = kappa(p, eps, lam, g, settings).value
    return LocalizedBound(eps, lam, tuple(cs), inf_c, kap, kap * inf_c)


def avoided_domain(scan: Scan, lam_out: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Right envelope of the spectrum-free disks certified by the scan.

    Around each sample i lambda_j the resolvent norm certifies a disk of
    radius r_j = 1/(2 kappa_j) free of spectrum; the returned boundary is
    x(lambda) = max_j sqrt(max(r_j^2 - (lambda - lambda_j)^2, 0)), the
    rightmost extent of that union over the imaginary axis.
    """
    lam_out = scan.lam if lam_out is None else np.asarray(lam_out, dtype=float)
    finite = np.isfinite(scan.kappa) & (scan.kappa > 0)
    lj = scan.lam[finite]
    rj = 1.0 / (2.0 * scan.kappa[finite])
    x = np.zeros_like(lam_out)
    for i, t in enumerate(lam_out):
        d2 = rj * rj - (t - lj) ** 2
        m = float(np.max(d2)) if len(d2) else 0.0
        x[i] = math.sqrt(m) if m > 0 else 0.0
    return x, lam_out
