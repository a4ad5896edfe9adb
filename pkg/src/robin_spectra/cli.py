"""Batch command line: solves, sweeps and convergence studies written as CSV.

Every subcommand writes ``<out>/<table>.csv`` (17 significant digits), a
``<out>/<table>.config.json`` echo of the effective parameters, and two-column
``.dat`` files for plotting.  ``--figures`` additionally renders PNGs.

Parameters come from built-in defaults, then an optional JSON ``--config``
file, then explicit flags (highest precedence).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics, disc, effective, geometry, model1d, tubular2d
from .eigensolve import EigensolveError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


COMMON = {"out": "robin_out", "figures": False}

DEFAULTS = {
    "solve-effective": {"domain": "ellipse:2:1", "n_arc": 1024, "h": 1e-2, "gamma": None, "h_sweep": None,
                        "b": 0.0, "variant": "semiclassical", "k": 5, "cutoff": None, "c": 1.0,
                        "alpha": 0.5, "sign": 1, "fd": 0},
    "disc-effective": {"h": 1e-2, "h_sweep": None, "b": 0.0, "k": 1},
    "solve-disc": {"h": 1e-3, "gamma": None, "h_sweep": None, "b": 0.0, "n_r": 1024,
                   "extrapolate": False},
    "solve-tubular": {"domain": "circle:1", "n_arc": 1024, "h": 1e-2, "h_sweep": None, "b": 0.0,
                      "rho": 0.2, "n_s": 64, "n_tau": 48, "k": 2, "iterative": False,
                      "extrapolate": False, "sandwich": False, "c": 1.0, "alpha": 0.5, "eta": 0.0},
    "model1d": {"operator": "H00", "T": 20.0, "n": 4000, "B": 0.0, "B_sweep": None, "kappa": 1.0,
                "h": 1e-3, "h_sweep": None, "rho": 0.2, "k": 2, "extrapolate": False,
                "domain": "ellipse:2:1", "n_arc": 1024, "n_s": 64},
    "expansion-table": {"domain": "ellipse:2:1", "n_arc": 1024, "gamma_sweep": "10:1000:5",
                        "n": "1,2,3", "b": 0.0},
    "convergence": {"target": "model1d", "base": 0, "domain": "ellipse:2:1", "n_arc": 1024, "h": 1e-3,
                    "b": 0.0},
    "agmon-check": {"domain": "ellipse:2:1", "n_arc": 1024, "hbar_sweep": "0.1:0.001:3",
                    "epsilon": 0.5, "n": 1, "rho": 0.2},
}

HELP = {
    "solve-effective": "lowest eigenvalues of a periodic effective boundary operator",
    "disc-effective": "closed-form effective spectrum of the unit disc",
    "solve-disc": "ground state of the full magnetic Robin Laplacian on the unit disc (radial modes)",
    "solve-tubular": "2D boundary-layer operator in tubular coordinates (optionally the bracket check)",
    "model1d": "1D half-line model operators (H00, HBT, transverse, born-oppenheimer)",
    "expansion-table": "eigenvalues vs three-term expansion over a gamma sweep",
    "convergence": "grid refinement study n, 2n, 4n with observed order",
    "agmon-check": "weighted-norm and tail-mass localization of the Dirichlet-model ground state",
}


# ---------------------------------------------------------------------------
# parsing


def _sweep(spec: str | None) -> list[float] | None:
    """'a:b:n' -> n geometrically spaced points from a to b (a, b same sign)."""
    if spec is None:
        return None
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    parts = str(spec).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"bad sweep {spec!r}; expected 'start:stop:points'") from None
    if n < 1:
        raise ConfigError("sweep needs at least one point")
    if a == 0 or b == 0 or (a > 0) != (b > 0):
        raise ConfigError(f"geometric sweep {spec!r} needs nonzero endpoints of one sign")
    return [float(v) for v in np.geomspace(a, b, n)]


def _int_list(spec) -> list[int]:
    if isinstance(spec, (list, tuple)):
        return [int(v) for v in spec]
    try:
        out = [int(v) for v in str(spec).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad index list {spec!r}") from None
    if not out or min(out) < 1:
        raise ConfigError("indices start at 1")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robin-spectra", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="Exit codes: 0 ok, 2 configuration error, 3 numerical failure.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def common(sp):
        sp.add_argument("--config", help="JSON file with parameters (flags override it)")
        sp.add_argument("--out", help="output directory (default robin_out)")
        sp.add_argument("--figures", action="store_true", default=argparse.SUPPRESS,
                        help="also render PNG figures with matplotlib")

    def opt(sp, name, type=float, **kw):
        sp.add_argument(f"--{name.replace('_', '-')}", dest=name, type=type, default=argparse.SUPPRESS, **kw)

    def flag(sp, name, help=None):
        sp.add_argument(f"--{name.replace('_', '-')}", dest=name, action="store_true",
                        default=argparse.SUPPRESS, help=help)

    s = sub.add_parser("solve-effective", help=HELP["solve-effective"])
    common(s)
    opt(s, "domain", str, help="preset id (circle:R, ellipse:a:b, limacon:e) or CSV path")
    opt(s, "n_arc", int, help="arc-length samples")
    opt(s, "h")
    opt(s, "gamma")
    opt(s, "h_sweep", str, help="geometric sweep start:stop:points")
    opt(s, "b")
    opt(s, "variant", str, choices=effective.VARIANTS)
    opt(s, "k", int)
    opt(s, "cutoff", int, help="Fourier cutoff M (default: resolution-based)")
    opt(s, "c")
    opt(s, "alpha")
    opt(s, "sign", int, choices=(-1, 1))
    opt(s, "fd", int, help="also solve with the finite-difference path on this many points")

    s = sub.add_parser("disc-effective", help=HELP["disc-effective"])
    common(s)
    opt(s, "h")
    opt(s, "h_sweep", str)
    opt(s, "b")
    opt(s, "k", int)

    s = sub.add_parser("solve-disc", help=HELP["solve-disc"])
    common(s)
    opt(s, "h")
    opt(s, "gamma")
    opt(s, "h_sweep", str)
    opt(s, "b")
    opt(s, "n_r", int)
    flag(s, "extrapolate", "Richardson-combine n_r and 2 n_r")

    s = sub.add_parser("solve-tubular", help=HELP["solve-tubular"])
    common(s)
    opt(s, "domain", str)
    opt(s, "n_arc", int)
    opt(s, "h")
    opt(s, "h_sweep", str)
    opt(s, "b")
    opt(s, "rho")
    opt(s, "n_s", int)
    opt(s, "n_tau", int)
    opt(s, "k", int)
    flag(s, "iterative", "use shift-invert Lanczos (needed above the dense cap)")
    flag(s, "extrapolate", "Richardson-combine the grid and its 2x refinement")
    flag(s, "sandwich", "compare with the two bracket operators")
    opt(s, "c")
    opt(s, "alpha")
    opt(s, "eta")

    s = sub.add_parser("model1d", help=HELP["model1d"])
    common(s)
    opt(s, "operator", str, choices=("H00", "HBT", "transverse", "born-oppenheimer"))
    opt(s, "T")
    opt(s, "n", int)
    opt(s, "B")
    opt(s, "B_sweep", str, help="comma list of B values")
    opt(s, "kappa")
    opt(s, "h")
    opt(s, "h_sweep", str)
    opt(s, "rho")
    opt(s, "k", int)
    flag(s, "extrapolate")
    opt(s, "domain", str)
    opt(s, "n_arc", int)
    opt(s, "n_s", int, help="s points for born-oppenheimer")

    s = sub.add_parser("expansion-table", help=HELP["expansion-table"])
    common(s)
    opt(s, "domain", str)
    opt(s, "n_arc", int)
    opt(s, "gamma_sweep", str, help="geometric sweep of |gamma|, e.g. 10:1000:5 (gamma is taken negative)")
    opt(s, "n", str, help="comma list of level indices")
    opt(s, "b")

    s = sub.add_parser("convergence", help=HELP["convergence"])
    common(s)
    opt(s, "target", str, choices=("model1d", "effective", "effective-fd", "tubular", "disc"))
    opt(s, "base", int, help="base grid size (0: target default)")
    opt(s, "domain", str)
    opt(s, "n_arc", int)
    opt(s, "h")
    opt(s, "b")

    s = sub.add_parser("agmon-check", help=HELP["agmon-check"])
    common(s)
    opt(s, "domain", str)
    opt(s, "n_arc", int)
    opt(s, "hbar_sweep", str)
    opt(s, "epsilon")
    opt(s, "n", int)
    opt(s, "rho")

    s = sub.add_parser("run", help="run the command named in a JSON config file")
    s.add_argument("config_file")
    s.add_argument("--out")
    s.add_argument("--figures", action="store_true", default=argparse.SUPPRESS)
    return p


def resolve_config(command: str, explicit: dict, config_path: str | None) -> dict:
    """defaults < config file < explicit flags."""
    cfg = {}
    if config_path:
        try:
            cfg = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        named = cfg.pop("command", command)
        if named != command:
            raise ConfigError(f"config is for {named!r}, not {command!r}")
    allowed = {**COMMON, **DEFAULTS[command]}
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    merged = {**allowed, **cfg, **explicit}
    merged["command"] = command
    return merged


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_table(rows: list[dict], path: Path, columns: list[str] | None = None) -> Path:
    columns = columns or list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
    return path


def write_dat(path: Path, x, y, header: str) -> Path:
    with open(path, "w") as fh:
        fh.write(f"# {header}\n")
        for a, b in zip(x, y):
            fh.write(f"{_fmt(a)} {_fmt(b)}\n")
    return path


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ROBIN_SPECTRA_THREADS", "1")))
    except ValueError:
        raise ConfigError("ROBIN_SPECTRA_THREADS must be an integer") from None


def pmap(func, items):
    """Ordered parallel map over sweep points (bounded pool)."""
    items = list(items)
    with ThreadPoolExecutor(_threads()) as pool:
        return list(pool.map(func, items))


def _domain(cfg):
    curve = geometry.resolve_curve(cfg["domain"])
    return geometry.arc_length_reparametrize(curve, int(cfg["n_arc"]))


def _h_points(cfg, key="h"):
    sweep = _sweep(cfg.get(f"{key}_sweep"))
    if sweep is not None:
        return sweep
    return [cfg[key]]


# ---------------------------------------------------------------------------
# commands (each returns (table name, rows, dat specs, figure specs))


def cmd_solve_effective(cfg):
    profile, met = _domain(cfg)
    if cfg.get("gamma") is not None and cfg.get("h_sweep") is None:
        points = [("gamma", float(cfg["gamma"]))]
    else:
        points = [("h", h) for h in _h_points(cfg)]
    cutoff = effective.FourierCutoff(int(cfg["cutoff"])) if cfg.get("cutoff") else None

    def one(pt):
        kind, val = pt
        kw = {kind: val}
        spec = effective.EffectiveSpec(profile, met.beta0, b=float(cfg["b"]), variant=cfg["variant"],
                                       sign=int(cfg["sign"]), c=float(cfg["c"]), alpha=float(cfg["alpha"]), **kw)
        res = effective.solve_effective(spec, cutoff, int(cfg["k"]))
        fd = effective.solve_effective_fd(spec, int(cfg["fd"]), int(cfg["k"])) if cfg["fd"] else None
        return spec, res, fd

    rows = []
    for spec, res, fd in pmap(one, points):
        for j, lam in enumerate(res.eigenvalues):
            row = {"h": spec.h, "b": spec.b, "index": j + 1, "eigenvalue": lam,
                   "residual": res.residuals[j], "cutoff": res.meta["cutoff"],
                   "below_floor": res.meta["below_floor"], "variant": spec.variant}
            if fd is not None:
                row.update(fd_eigenvalue=fd.eigenvalues[j], fd_residual=fd.residuals[j],
                           fd_difference=fd.eigenvalues[j] - lam, fd_n=fd.meta["n"])
            rows.append(row)
    dats = [(f"eigenvalue_n{n}", "h", "eigenvalue", n) for n in range(1, int(cfg["k"]) + 1)]
    figs = [("eigenvalue", "h", "eigenvalue", "index", True, False, False)] if len(points) > 1 else []
    return "solve_effective", rows, dats, figs


def cmd_disc_effective(cfg):
    rows = []
    b = float(cfg["b"])
    k = int(cfg["k"])
    for h in _h_points(cfg):
        vals = disc.disc_effective_lambda(h, b, k)
        inf, m = disc.magnetic_offset(b)
        for j, lam in enumerate(vals):
            # closed form: exact, so the residual column is identically zero
            rows.append({"h": h, "b": b, "index": j + 1, "eigenvalue": lam, "residual": 0.0,
                         "offset": inf, "m_star": m})
    return "disc_effective", rows, [], []


def cmd_solve_disc(cfg):
    b = float(cfg["b"])
    if cfg.get("gamma") is not None and cfg.get("h_sweep") is None:
        params = [disc.DiscParams(b=b, gamma=float(cfg["gamma"]), n_r=int(cfg["n_r"]))]
    else:
        params = [disc.DiscParams(b=b, h=h, n_r=int(cfg["n_r"])) for h in _h_points(cfg)]
    results = [disc.solve_disc_full(p, extrapolate=bool(cfg["extrapolate"])) for p in params]
    rows = []
    for p, r in zip(params, results):
        h = r.h
        exp = asymptotics.disc_expansion(b, h=h)
        # solver residual: tridiagonal certification for the minimizing mode
        cert = disc.solve_disc_radial(p, r.m_star, vectors=True).residuals[0]
        rows.append({"h": h, "gamma": p.g, "b": b, "index": 1, "lambda_2d": r.lam1, "mu1": r.mu1,
                     "residual": cert, "expansion_h_form": exp["h_form"],
                     "expansion_residual": r.mu1 - exp["h_form"], "normalized_residual": r.residual,
                     "target": r.target, "m_star": r.m_star, "n_r": p.n_r,
                     "extrapolated": bool(cfg["extrapolate"])})
    dats = [("normalized_residual", "h", "normalized_residual", None)]
    figs = [("normalized_residual", "h", "normalized_residual", None, True, False, False)] if len(rows) > 1 else []
    return "solve_disc", rows, dats, figs


def cmd_solve_tubular(cfg):
    profile, met = _domain(cfg)
    hs = _h_points(cfg)
    b = float(cfg["b"])
    if cfg["sandwich"]:
        ns, nt = int(cfg["n_s"]), int(cfg["n_tau"])
        rows = tubular2d.sandwich_report(profile, met.beta0, hs, b=b, c=float(cfg["c"]),
                                         alpha=float(cfg["alpha"]), k=int(cfg["k"]), rho=float(cfg["rho"]),
                                         eta=float(cfg["eta"]), grid=lambda h: (ns, nt))
        dats = [(f"gap_upper_n{n}", "h", "gap_upper", n) for n in range(1, int(cfg["k"]) + 1)]
        figs = [("gap_upper", "h", "gap_upper", "n", True, True, True)] if len(hs) > 1 else []
        return "tubular_sandwich", rows, dats, figs

    def one(h):
        spec = tubular2d.TubularSpec(profile, h, met.beta0, b, float(cfg["rho"]), int(cfg["n_s"]), int(cfg["n_tau"]))
        if cfg["extrapolate"]:
            return spec, tubular2d.solve_tubular_extrapolated(spec, int(cfg["k"]), cfg["iterative"] or None)
        return spec, tubular2d.solve_tubular(spec, int(cfg["k"]), iterative=bool(cfg["iterative"]))

    rows = []
    for spec, res in pmap(one, hs):
        for j, lam in enumerate(res.eigenvalues):
            rows.append({"h": spec.h, "b": b, "index": j + 1, "mu_hat": lam, "residual": res.residuals[j],
                         "error_estimate": res.meta.get("error_estimate", [math.nan] * len(res))[j],
                         "n_s": res.meta["n_s"], "n_tau": res.meta["n_tau"], "T": res.meta["T"]})
    return "solve_tubular", rows, [(f"mu_hat_n{n}", "h", "mu_hat", n) for n in range(1, int(cfg["k"]) + 1)], []


def cmd_model1d(cfg):
    op = cfg["operator"]
    k = int(cfg["k"])
    ext = bool(cfg["extrapolate"])
    rows = []
    if op == "H00":
        r = model1d.solve_H00(float(cfg["T"]), int(cfg["n"]), k, extrapolate=ext)
        for j, lam in enumerate(r.eigenvalues):
            rows.append({"T": cfg["T"], "n": cfg["n"], "index": j + 1, "eigenvalue": lam,
                         "residual": r.residuals[j], "expansion": -1.0 if j == 0 else math.nan,
                         "error": lam + 1 if j == 0 else math.nan})
        return "model1d_H00", rows, [], []
    if op == "HBT":
        Bs = [float(v) for v in str(cfg["B_sweep"]).split(",")] if cfg.get("B_sweep") else [float(cfg["B"])]

        def one(B):
            spec = model1d.HalfLineSpec(float(cfg["T"]), int(cfg["n"]), B)
            return B, model1d.solve_HBT(spec, k, extrapolate=ext), model1d.solve_HBT(spec, k, "weighted", ext)

        for B, tr, wt in pmap(one, Bs):
            lam = tr.eigenvalues[0]
            rows.append({"B": B, "index": 1, "eigenvalue": lam, "residual": tr.residuals[0],
                         "weighted_eigenvalue": wt.eigenvalues[0], "weighted_residual": wt.residuals[0],
                         "expansion": -1 - B, "error": lam + 1 + B,
                         "normalized_residual": (lam + 1 + B) / B**2 if B else math.nan})
        absB = [abs(r["B"]) for r in rows if r["B"]]
        if len(absB) >= 4:
            slope = float(np.polyfit(np.log(absB), np.log([abs(r["error"]) for r in rows if r["B"]]), 1)[0])
            for r in rows:
                r["fitted_slope"] = slope
        figs = [("error", "B", "error", None, False, False, False)] if len(rows) > 1 else []
        return "model1d_HBT", rows, [("error", "B", "error", None)], figs
    if op == "transverse":
        kap = float(cfg["kappa"])

        def one(h):
            return h, model1d.solve_transverse(model1d.TransverseSpec(kap, h, float(cfg["rho"])), extrapolate=ext)

        for h, st in pmap(one, _h_points(cfg)):
            expn = -1 - kap * math.sqrt(h) - kap**2 * h / 2
            rows.append({"h": h, "kappa": kap, "index": 1, "eigenvalue": st.lam1,
                         "residual": float(st.meta["residuals"][0]), "lambda2": st.lam2,
                         "lambda2_residual": float(st.meta["residuals"][1]), "expansion": expn,
                         "error": st.lam1 - expn, "normalized_residual": (st.lam1 - expn) / h,
                         "lambda2_scaled": st.lam2 * h ** (float(cfg["rho"]) - 0.5),
                         **{f"moment{m}": model1d.transverse_moments(st, m) for m in range(4)}})
        return "model1d_transverse", rows, [("normalized_residual", "h", "normalized_residual", None)], []
    if op == "born-oppenheimer":
        profile, _ = _domain(cfg)
        ns = int(cfg["n_s"])
        s = -profile.L + 2 * profile.L * np.arange(ns) / ns
        for h in _h_points(cfg):
            bo = model1d.born_oppenheimer_correction(profile, h, float(cfg["rho"]), s)
            for sj, R, lam, gap in zip(bo["s"], bo["R"], bo["lam1"], bo["gap"]):
                rows.append({"h": h, "s": sj, "R_h": R, "R_h_over_h": R / h, "lambda1": lam,
                             "residual": 0.0 if gap > 0 else math.nan, "gap": gap})
        return "model1d_born_oppenheimer", rows, [("R_h", "s", "R_h", None)], []
    raise ConfigError(f"unknown model1d operator {op!r}")


def cmd_expansion_table(cfg):
    profile, met = _domain(cfg)
    if not met.kappa_pp < -geometry.DEGENERATE_KPP_TOL:
        raise ConfigError(f"domain {cfg['domain']}: curvature maximum is degenerate; "
                          "three-term expansion undefined")
    gammas = _sweep(cfg["gamma_sweep"])
    if any(g == 0 for g in gammas):
        raise ConfigError("gamma sweep must avoid 0")
    gammas = [-abs(g) for g in gammas]
    ns = _int_list(cfg["n"])
    b = float(cfg["b"])

    def one(g):
        spec = effective.EffectiveSpec(profile, met.beta0, gamma=g, b=b, variant="semiclassical")
        return g, effective.solve_effective(spec, None, max(ns))

    rows = []
    for g, res in pmap(one, gammas):
        h = g ** -2
        for n in ns:
            lam = res.eigenvalues[n - 1]
            ex = asymptotics.effective_expansion(g, n, met.kappa_max, met.kappa_pp)
            ex2 = asymptotics.expansion_three_term(g, n, met.kappa_max, met.kappa_pp)
            rows.append({"gamma": g, "h": h, "index": n, "computed": lam, "residual": res.residuals[n - 1],
                         "expansion": ex, "expansion_residual": lam - ex,
                         "normalized_residual": abs(lam - ex) / h**0.75,
                         "computed_2d_scale": g**2 * lam, "expansion_2d_scale": ex2,
                         "expansion_residual_2d_scale": g**2 * lam - ex2,
                         "kappa_max": met.kappa_max, "kappa_pp": met.kappa_pp, "cutoff": res.meta["cutoff"]})
    dats = [(f"normalized_residual_n{n}", "h", "normalized_residual", n) for n in ns]
    figs = [("normalized_residual", "h", "normalized_residual", "index", True, True, False)]
    return "expansion_table", rows, dats, figs


def _observed(values):
    e1, e2 = abs(values[0] - values[1]), abs(values[1] - values[2])
    ratio = e1 / e2 if e2 > 0 else math.inf
    return ratio, (math.log2(ratio) if 0 < ratio < math.inf else math.inf)


def cmd_convergence(cfg):
    target = cfg["target"]
    base = int(cfg["base"])
    h, b = float(cfg["h"]), float(cfg["b"])
    second_order = True
    if target == "model1d":
        base = base or 1000
        solve = lambda n: model1d.solve_H00(20.0, n, 1)  # noqa: E731
        label = "H00 on (0,20)"
    elif target in ("effective", "effective-fd"):
        profile, met = _domain(cfg)
        spec = effective.EffectiveSpec(profile, met.beta0, h=h, b=b, variant="full")
        if target == "effective":
            base = base or 6
            second_order = False
            solve = lambda n: effective.solve_effective(spec, effective.FourierCutoff(n), 1)  # noqa: E731
            label = "Fourier cutoff M"
        else:
            base = base or 256
            solve = lambda n: effective.solve_effective_fd(spec, n, 1)  # noqa: E731
            label = "finite differences"
    elif target == "tubular":
        profile, met = _domain(cfg)
        base = base or 8

        def solve(n):
            spec = tubular2d.TubularSpec(profile, h, met.beta0, b, 0.2, 2 * n, 4 * n)
            return tubular2d.solve_tubular(spec, 1, iterative=spec.dim > 4096)

        label = "tubular grid (2n x 4n)"
    elif target == "disc":
        base = base or 256

        def solve(n):
            p = disc.DiscParams(b=b, h=h, n_r=n)
            _, m = disc.magnetic_offset(b)
            return disc.solve_disc_radial(p, m)

        label = "disc radial n_r"
    else:
        raise ConfigError(f"unknown convergence target {target!r}")
    grids = [base, 2 * base, 4 * base]
    results = pmap(solve, grids)
    values = [float(r.eigenvalues[0]) for r in results]
    ratio, order = _observed(values)
    flag = second_order and order < 1.7
    rows = [{"target": target, "grid": n, "eigenvalue": v, "residual": r.residuals[0],
             "increment": math.nan if i == 0 else abs(v - values[i - 1]),
             "error_ratio": ratio, "observed_order": order, "low_order_flag": flag, "label": label}
            for i, (n, v, r) in enumerate(zip(grids, values, results))]
    return "convergence_" + target.replace("-", "_"), rows, [("eigenvalue", "grid", "eigenvalue", None)], []


def cmd_agmon_check(cfg):
    profile, met = _domain(cfg)
    hbars = _sweep(cfg["hbar_sweep"])

    def one(hb):
        return asymptotics.agmon_weight_check(profile, hb, float(cfg["epsilon"]), int(cfg["n"]), float(cfg["rho"]))

    rows = []
    for r in pmap(one, hbars):
        rows.append({"hbar": r["hbar"], "index": int(cfg["n"]), "eigenvalue": r["eigenvalue"],
                     "residual": math.nan, "weighted_ratio": r["ratio"], "tail_cut": r["tail_cut"],
                     "tail_mass": r["tail_mass"], "log_tail_mass": r["log_tail_mass"], "grid": r["grid"]})
    # residual of the eigenpair behind each row
    for row in rows:
        res = effective.dirichlet_fluxfree(profile, row["hbar"], None, int(cfg["n"]))
        row["residual"] = res.residuals[int(cfg["n"]) - 1]
    dats = [("weighted_ratio", "hbar", "weighted_ratio", None), ("log_tail_mass", "hbar", "log_tail_mass", None)]
    figs = [("log_tail_mass", "hbar", "log_tail_mass", None, True, False, False)]
    return "agmon_check", rows, dats, figs


COMMANDS = {
    "solve-effective": cmd_solve_effective,
    "disc-effective": cmd_disc_effective,
    "solve-disc": cmd_solve_disc,
    "solve-tubular": cmd_solve_tubular,
    "model1d": cmd_model1d,
    "expansion-table": cmd_expansion_table,
    "convergence": cmd_convergence,
    "agmon-check": cmd_agmon_check,
}


def execute(cfg: dict) -> list[Path]:
    """Run one resolved configuration and write its outputs."""
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    name, rows, dats, figs = COMMANDS[cfg["command"]](cfg)
    if not rows:
        raise ConfigError("nothing to compute (empty sweep)")
    written = [write_table(rows, out / f"{name}.csv")]
    echo = {k: _jsonable(v) for k, v in sorted(cfg.items())}
    (out / f"{name}.config.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    written.append(out / f"{name}.config.json")
    for tag, x, y, idx in dats:
        sel = [r for r in rows if idx is None or r.get("index", r.get("n")) == idx]
        sel.sort(key=lambda r: r[x])
        written.append(write_dat(out / f"{name}_{tag}.dat", [r[x] for r in sel], [r[y] for r in sel], f"{x} {y}"))
    if cfg.get("figures"):
        from .plotting import plot_table

        for tag, x, y, group, logx, logy, absy in figs:
            written.append(plot_table(rows, x, y, out / f"{name}_{tag}.png", group=group, logx=logx,
                                      logy=logy, absy=absy, title=name))
    return written


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, usage errors 2
        return int(exc.code or 0)
    if not args.command:
        parser.print_help()
        return EXIT_OK
    ns = vars(args)
    command = ns.pop("command")
    try:
        if command == "run":
            path = ns.pop("config_file")
            try:
                raw = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
            command = raw.get("command") if isinstance(raw, dict) else None
            if command not in COMMANDS:
                raise ConfigError(f"config {path} names no known command (got {command!r})")
            config_path = path
        else:
            config_path = ns.pop("config", None)
        explicit = {k: v for k, v in ns.items() if v is not None}
        cfg = resolve_config(command, explicit, config_path)
        written = execute(cfg)
    except ConfigError as exc:
        print(f"robin-spectra {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EigensolveError as exc:
        print(f"robin-spectra {command}: numerical failure [eigensolve]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (geometry.GeometryError, model1d.Model1DError, effective.EffectiveError, disc.DiscError,
            tubular2d.TubularError, asymptotics.AsymptoticsError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"robin-spectra {command}: invalid parameters [{module}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"robin-spectra {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
