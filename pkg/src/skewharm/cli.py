"""Command-line driver: sweep orchestration and data export.

Each epsilon in a run is an independent job; jobs execute concurrently up to
--jobs workers, but the reduction is by job index, so output bytes do not
depend on the parallelism degree. A job that throws is recorded in the run
summary and its siblings keep going. The process exits 0 only when every
job succeeded and every embedded invariant check (contraction of kappa,
numerical-range bounds, decay certificates) held.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import RunConfig, parse_epsilon
from .linalg import SolverSettings
from .operators import auto_grid, numerical_range_gap
from .potentials import from_cli_name
from .pseudospectrum import avoided_domain, psi_of_epsilon, scan_lambda
from .reporting import csv_text, json_report, sig17
from .spectrum import (compute_spectrum, scaling_fit, sigma_of_epsilon,
                       spectrum_table)
from .hypocoercivity import (contraction_margin, evolve, make_params,
                             verify_decay)

__all__ = ["main", "build_parser", "run"]

SCHEMAS = {
    "scan": ["eps", "lambda", "kappa", "tag", "flag"],
    "psi": ["eps", "psi", "lam_argmax", "flag"],
    "spectrum": ["n", "re_lambda", "im_lambda", "re_mu0", "im_mu0",
                 "re_nu0", "im_nu0"],
    "sigma-fit": ["eps", "sigma"],
    "decay": ["t", "norm_sq", "phi"],
    "domain": ["lambda", "x"],
}
#: commands whose CSV schema has no eps column get one file per eps
PER_EPS_FILES = ("spectrum", "decay", "domain")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="skewharm",
        description="Spectra, resolvent norms, and decay rates of "
                    "-d^2/dx^2 + x^2 + (i/eps) f(x).")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, blurb in [
            ("scan", "resolvent-norm scan kappa(lambda) along the imaginary axis"),
            ("psi", "pseudospectral bound Psi(eps) with optional power-law fit"),
            ("spectrum", "validated eigenvalues next to semiclassical predictions"),
            ("sigma-fit", "spectral bound Sigma(eps) sweep and power-law fit"),
            ("decay", "time evolution with a certified decay functional"),
            ("domain", "spectrum-avoiding envelope certified by a scan"),
    ]:
        q = sub.add_parser(name, help=blurb)
        q.add_argument("--f", default="fex",
                       choices=["fex", "bump", "x2", "x", "sl", "const"],
                       help="potential: fex=(1+x^2)^(-k/2) family, bump=double bump, "
                            "x2=quadratic, x=linear, sl=smoothed linear, const=constant")
        q.add_argument("--k", type=float, default=4.0,
                       help="decay exponent for --f fex / sl")
        q.add_argument("--c", type=float, default=1.0,
                       help="level for --f const")
        q.add_argument("--eps", default=None,
                       help='single epsilon literal, e.g. "2^-14" or "1e-3"')
        q.add_argument("--eps-list", default=None,
                       help="comma-separated epsilon literals")
        q.add_argument("--L", type=float, default=None, help="half-width override")
        q.add_argument("--N", type=int, default=None, help="grid size override")
        q.add_argument("--n", type=int, default=5,
                       help="number of eigenvalues (spectrum / sigma-fit)")
        q.add_argument("--out", default=None, help="output path (default stdout)")
        q.add_argument("--format", default="csv", choices=["csv", "json"])
        q.add_argument("--jobs", type=int, default=1)
        q.add_argument("--seed", type=int, default=0)
        if name == "decay":
            q.add_argument("--T", type=float, default=3.0, help="final time")
            q.add_argument("--dt", type=float, default=None, help="step override")
            q.add_argument("--recipe", default=None,
                           choices=["general", "quadratic", "linear",
                                    "smoothed-linear", "beta-profile"],
                           help="decay-functional parameter recipe (default: auto)")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.eps is not None and args.eps_list is not None:
        raise ValueError("--eps and --eps-list are mutually exclusive")
    if args.eps_list is not None:
        eps = tuple(t.strip() for t in args.eps_list.split(",") if t.strip())
    elif args.eps is not None:
        eps = (args.eps.strip(),)
    else:
        eps = ("2^-8",)
    extra = {}
    if args.command == "decay":
        extra = {"T": args.T, "dt": args.dt, "recipe": args.recipe}
    return RunConfig(command=args.command, f=args.f, k=args.k, c=args.c,
                     eps=eps, L=args.L, N=args.N, n=args.n, out=args.out,
                     format=args.format, jobs=args.jobs, seed=args.seed,
                     **extra)


def _check_scan_invariants(p, eps, scan, problems: list) -> None:
    kap = np.asarray(scan.kappa)
    # the discrete ground energy sits O(h^2) below 1, so kappa may top out at
    # 1/e0_h; auto grids keep that within 1e-4
    if np.any(kap > 1.0 + 1e-4):
        problems.append("eps=%s: kappa exceeds 1 by %.3g"
                        % (sig17(eps), float(kap.max()) - 1.0))
    for lam, k in zip(scan.lam, kap):
        gap = numerical_range_gap(p, eps, float(lam))
        if gap > 0.0 and k > 1.05 / math.sqrt(1.0 + gap * gap):
            problems.append("eps=%s lambda=%s: kappa %.4g above range-gap bound %.4g"
                            % (sig17(eps), sig17(lam), k,
                               1.05 / math.sqrt(1.0 + gap * gap)))
            break
    if scan.any_flagged():
        problems.append("eps=%s: %d flagged scan points"
                        % (sig17(eps), sum(1 for f in scan.flag if f)))


def _job(cfg: RunConfig, p, eps_text: str):
    """One (command, eps) unit of work -> (rows, diagnostics, problems)."""
    eps = parse_epsilon(eps_text)
    st = SolverSettings(seed=cfg.seed or SolverSettings().seed)
    g = auto_grid(p, eps, L=cfg.L, N=cfg.N)
    problems: list[str] = []

    if cfg.command == "scan":
        s = scan_lambda(p, eps, g, settings=st)
        _check_scan_invariants(p, eps, s, problems)
        rows = [{"eps": eps, "lambda": float(l), "kappa": float(k),
                 "tag": t, "flag": f}
                for l, k, t, f in zip(s.lam, s.kappa, s.tag, s.flag)]
        diag = {"psi": s.psi, "lam_argmax": s.lam_argmax,
                "peaks": {k: list(v) for k, v in s.peaks.items()}}
        return rows, diag, problems

    if cfg.command == "psi":
        row = psi_of_epsilon(p, [eps], L=cfg.L, N=cfg.N, settings=st)[0]
        if row["psi"] < 1.0 - 1e-4:
            problems.append("eps=%s: psi %.6g below 1" % (sig17(eps), row["psi"]))
        if row["flag"]:
            problems.append("eps=%s: psi scan flagged" % sig17(eps))
        return [row], {"psi": row["psi"]}, problems

    if cfg.command in ("spectrum", "sigma-fit"):
        rep = compute_spectrum(p, eps, g=g, m=cfg.n, settings=st)
        if not rep.eigenvalues:
            raise RuntimeError("no validated eigenvalues at eps=%s" % eps_text)
        sig = sigma_of_epsilon(rep)
        lo, hi = p.range_closure()
        for lam in rep.eigenvalues:
            if lam.real < 1.0 - 1e-3:
                problems.append("eps=%s: eigenvalue %s left of Re=1"
                                % (sig17(eps), lam))
            if not (lo / eps - 1e-6 <= lam.imag <= hi / eps + 1e-6):
                problems.append("eps=%s: eigenvalue %s outside the range strip"
                                % (sig17(eps), lam))
        if sig < 1.0 - 1e-4:
            problems.append("eps=%s: sigma %.6g below 1" % (sig17(eps), sig))
        diag = {"sigma": sig, "n_validated": len(rep.eigenvalues)}
        if cfg.command == "sigma-fit":
            return [{"eps": eps, "sigma": sig}], diag, problems
        rows = spectrum_table(p, eps, m=cfg.n, g=g, settings=st)
        return rows, diag, problems

    if cfg.command == "decay":
        params = make_params(p, eps, recipe=cfg.recipe or "auto", g=g)
        trace = evolve(p, eps, g=g, T=cfg.T, dt=cfg.dt, params=params,
                       settings=st)
        report = verify_decay(trace, params.eta)
        margin = contraction_margin(trace)
        if not report["holds"]:
            problems.append("eps=%s: decay certificate violated (worst ratio %.4g)"
                            % (sig17(eps), report["worst_ratio"]))
        if margin > 1.0 + 1e-6:
            problems.append("eps=%s: contraction violated by %.3g"
                            % (sig17(eps), margin - 1.0))
        if trace.flags:
            problems.append("eps=%s: evolution flags %s" % (sig17(eps), trace.flags))
        rows = [{"t": float(t), "norm_sq": float(n), "phi": float(ph)}
                for t, n, ph in zip(trace.times, trace.norm_sq, trace.phi)]
        diag = {"eta": float(params.eta), "fitted_rate": trace.fitted_rate,
                "id1_max": trace.id1_max, "contraction_margin": margin,
                "verify": report, "flags": list(trace.flags)}
        return rows, diag, problems

    if cfg.command == "domain":
        s = scan_lambda(p, eps, g, settings=st)
        _check_scan_invariants(p, eps, s, problems)
        x, lam_out = avoided_domain(s)
        rows = [{"lambda": float(l), "x": float(v)} for l, v in zip(lam_out, x)]
        return rows, {"psi": s.psi}, problems

    raise ValueError("unknown command %r" % cfg.command)


def _fit_diag(eps_values, values, what: str):
    try:
        fit = scaling_fit(eps_values, values)
    except ValueError as e:
        return {"fit_skipped": str(e)}
    return {"fit": {"quantity": what, "exponent": fit.exponent,
                    "constant": fit.constant, "r2": fit.r2,
                    "n_points": fit.n_points, "decades": fit.decades}}


def _out_path(cfg: RunConfig, eps_text: str) -> str | None:
    if cfg.out is None:
        return None
    if len(cfg.eps) == 1 or cfg.command not in PER_EPS_FILES \
            or cfg.format == "json":
        return cfg.out
    stem, dot, suffix = cfg.out.rpartition(".")
    tag = eps_text.replace("^", "pow")
    return "%s_%s.%s" % (stem, tag, suffix) if dot else "%s_%s" % (cfg.out, tag)


def _emit(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def run(cfg: RunConfig) -> int:
    p = from_cli_name(cfg.f, k=cfg.k, c=cfg.c)
    results: list = [None] * len(cfg.eps)
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(_job, cfg, p, t) for t in cfg.eps]
        for i, fut in enumerate(futures):
            try:
                results[i] = fut.result()
            except Exception as e:  # record, keep siblings running
                results[i] = e

    failures = [{"eps": t, "error": "%s: %s" % (type(r).__name__, r)}
                for t, r in zip(cfg.eps, results) if isinstance(r, Exception)]
    good = [(t, r) for t, r in zip(cfg.eps, results)
            if not isinstance(r, Exception)]
    problems = [msg for _, (_, _, probs) in good for msg in probs]

    diagnostics = {"failures": failures, "invariant_problems": problems,
                   "per_eps": {t: diag for t, (_, diag, _) in good}}
    if cfg.command in ("psi", "sigma-fit") and len(good) >= 2:
        key = "psi" if cfg.command == "psi" else "sigma"
        diagnostics.update(_fit_diag([parse_epsilon(t) for t, _ in good],
                                     [r[0][0][key] for _, r in good], key))

    fields = SCHEMAS[cfg.command]
    if cfg.format == "json":
        blocks = [{"eps": t, "rows": rows} for t, (rows, _, _) in good]
        _emit(cfg.out, json_report(cfg, blocks, diagnostics))
    elif cfg.command in PER_EPS_FILES and len(cfg.eps) > 1:
        for t, (rows, _, _) in good:
            _emit(_out_path(cfg, t), csv_text(fields, rows, cfg))
    else:
        rows = [row for _, (block, _, _) in good for row in block]
        text = csv_text(fields, rows, cfg)
        if "fit" in diagnostics:
            fit = diagnostics["fit"]
            head, _, tail = text.partition("\n" + ",".join(fields))
            text = (head + "\n" + "\n".join(
                "# fit_%s: %s" % (k, sig17(v) if isinstance(v, float) else v)
                for k, v in sorted(fit.items())) + "\n" + ",".join(fields) + tail)
        _emit(cfg.out, text)

    for f in failures:
        print("job failed (eps=%s): %s" % (f["eps"], f["error"]), file=sys.stderr)
    for msg in problems:
        print("invariant check failed: %s" % msg, file=sys.stderr)
    return 1 if failures or problems else 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = config_from_args(args)
    except ValueError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
