"""Acceptance criteria C1-C10, each at its stated tolerance and runtime budget.

Every test records one ``PASS``/``FAIL`` line (printed in the pytest terminal
summary, or directly when run as ``python3 tests/test_acceptance.py``).
"""

import math
import time

import numpy as np
import pytest

from robin_spectra import asymptotics as asy
from robin_spectra import disc as dk
from robin_spectra import effective as ef
from robin_spectra import eigensolve as es
from robin_spectra import model1d as m1
from robin_spectra import tubular2d as tb
from robin_spectra.geometry import arc_length_reparametrize, preset

RESULTS: list[str] = []


def record(cid: str, title: str, ok: bool, detail: str, elapsed: float, budget: float):
    ok_all = bool(ok) and elapsed < budget
    line = f"{'PASS' if ok_all else 'FAIL'} {cid} {title}: {detail} [{elapsed:.2f}s / budget {budget:g}s]"
    RESULTS.append(line)
    print(line)
    assert ok_all, line


@pytest.fixture(scope="module")
def disc_profile():
    return arc_length_reparametrize(preset("circle:1"), 256)


@pytest.fixture(scope="module")
def ellipse_profile():
    return arc_length_reparametrize(preset("ellipse:2:1"), 1024)


def test_c1_disc_effective_exact(disc_profile):
    t0 = time.perf_counter()
    prof, met = disc_profile
    worst = 0.0
    for h in (1e-2, 1e-3, 1e-4):
        for b in (0.0, 1.0, 2.0, 3.7):
            lam = ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, h=h, b=b, variant="full"), k=1).eigenvalues[0]
            inf, _ = dk.magnetic_offset(b)
            exact = -1 - math.sqrt(h) + (inf - 0.5) * h
            worst = max(worst, abs(lam - exact))
    record("C1", "disc effective exactness", worst <= 1e-10, f"max |error| = {worst:.2e} (tol 1e-10)",
           time.perf_counter() - t0, 1.0)


def test_c2_model_order():
    t0 = time.perf_counter()
    T, n = 40.0, 8000
    Bs = [s * v for v in (1e-3, 3e-3, 1e-2, 3e-2, 1e-1) for s in (1, -1)]
    errs, refused = {}, []
    for B in Bs:
        try:
            lam = m1.solve_HBT(m1.HalfLineSpec(T, n, B), 1, extrapolate=True).eigenvalues[0]
        except m1.Model1DError:
            refused.append(B)
            continue
        errs[B] = abs(lam + 1 + B)
    ok = not refused and len(errs) >= 4
    slope = math.nan
    if len(errs) >= 2:
        x = np.log(np.abs(list(errs)))
        slope = float(np.polyfit(x, np.log(list(errs.values())), 1)[0])
    ok = ok and abs(slope - 2.0) <= 0.2
    detail = f"slope {slope:.3f} over {len(errs)} admissible B (target 2.0 +- 0.2)"
    if refused:
        detail += f"; refused B = {refused} (|B| T >= 1/3, weight 1 - B tau not positive-definite on (0, {T:g}))"
    record("C2", "half-line model order", ok, detail, time.perf_counter() - t0, 10.0)


def _monotone_with_blip(r):
    ups = [(r[i + 1] - r[i]) / r[i] for i in range(len(r) - 1) if r[i + 1] > r[i]]
    return len(ups) == 0 or (len(ups) == 1 and ups[0] <= 0.05)


def test_c3_three_term(ellipse_profile):
    t0 = time.perf_counter()
    prof, met = ellipse_profile
    hs = (1e-2, 1e-3, 1e-4, 1e-5)
    ok, parts = True, []
    for b in (0.0, 1.0):
        lams = [ef.solve_effective(ef.EffectiveSpec(prof, met.beta0, h=h, b=b, variant="semiclassical"),
                                   k=3, vectors=True).eigenvalues for h in hs]
        for n in (1, 2, 3):
            third = (2 * n - 1) * math.sqrt(-met.kappa_pp / 2)
            r = [abs(lam[n - 1] - (-1 - met.kappa_max * h**0.5 + third * h**0.75)) / h**0.75
                 for lam, h in zip(lams, hs)]
            good = _monotone_with_blip(r)
            ok &= good
            parts.append(f"b={b:g},n={n}: " + "/".join(f"{v:.3g}" for v in r) + ("" if good else " (not monotone)"))
    record("C3", "three-term expansion trend", ok, "r/h^(3/4) " + "; ".join(parts), time.perf_counter() - t0, 30.0)


def test_c4_disc_end_to_end():
    t0 = time.perf_counter()
    ok, parts = True, []
    for b in (0.0, 1.0):
        dev = {}
        for h in (1e-2, 1e-3):
            r = dk.solve_disc_full(dk.DiscParams(b=b, h=h, n_r=1024), extrapolate=True)
            dev[h] = abs(r.residual - r.target) / abs(r.target)
        good = dev[1e-3] <= 0.10 and dev[1e-3] < dev[1e-2]
        ok &= good
        parts.append(f"b={b:g}: rel. deviation {dev[1e-2]:.3%} (h=1e-2) -> {dev[1e-3]:.3%} (h=1e-3)")
    record("C4", "disc ground state end-to-end", ok, "; ".join(parts), time.perf_counter() - t0, 120.0)


def test_c5_flux_periodicity(disc_profile, ellipse_profile):
    t0 = time.perf_counter()
    worst, parts = 0.0, []
    for name, (prof, met) in (("disc", disc_profile), ("ellipse", ellipse_profile)):
        period = ef.flux_period(prof.L, met.beta0)
        parts.append(f"{name} period {period:.12g}")
        for h in (1e-2, 1e-3):
            for b in (0.0, 0.3, 1.0, 3.7):
                spec = ef.EffectiveSpec(prof, met.beta0, h=h, b=b)
                cut = ef.default_cutoff(spec.replace(b=b + period))
                a = ef.solve_effective(spec, cut, 5).eigenvalues
                c = ef.solve_effective(spec.replace(b=b + period), cut, 5).eigenvalues
                worst = max(worst, float(np.max(np.abs(a - c))))
    period_ok = abs(ef.flux_period(disc_profile[0].L, disc_profile[1].beta0) - 2.0) < 1e-10
    record("C5", "flux periodicity", worst <= 1e-10 and period_ok,
           f"max spectral shift {worst:.2e} (tol 1e-10); " + ", ".join(parts), time.perf_counter() - t0, 5.0)


def test_c6_bracket_sandwich(disc_profile, ellipse_profile):
    t0 = time.perf_counter()
    ok, parts = True, []
    for name, (prof, met) in (("disc", disc_profile), ("ellipse", ellipse_profile)):
        for h in (1e-1, 1e-2, 1e-3):
            try:
                rows = tb.sandwich_report(prof, met.beta0, [h], b=0.0, c=1.0, alpha=0.5, k=2, rho=0.2)
            except tb.TubularError as exc:
                ok = False
                parts.append(f"{name} h={h:g}: not computable ({exc})")
                continue
            for r in rows:
                ok &= r["ordered"]
                parts.append(f"{name} h={h:g} n={r['n']}: gaps {r['gap_lower']:.2e}/{r['gap_upper']:.2e} "
                             f"slack {r['slack']:.2e} {'ok' if r['ordered'] else 'violated'}")
    record("C6", "bracket sandwich", ok, "; ".join(parts), time.perf_counter() - t0, 300.0)


def test_c7_harmonic_spacing(ellipse_profile):
    t0 = time.perf_counter()
    prof, met = ellipse_profile
    ratio = {}
    for hbar in (1e-2, 1e-3):
        lam = ef.dirichlet_fluxfree(prof, hbar, None, 2).eigenvalues
        ratio[hbar] = (lam[1] - lam[0]) / (2 * hbar * math.sqrt(-met.kappa_pp / 2))
    ok = 0.9 <= ratio[1e-3] <= 1.1 and abs(ratio[1e-3] - 1) < abs(ratio[1e-2] - 1)
    record("C7", "harmonic spacing", ok, f"ratio {ratio[1e-2]:.5f} (hbar=1e-2) -> {ratio[1e-3]:.5f} (hbar=1e-3)",
           time.perf_counter() - t0, 10.0)


def test_c8_trial_residual(ellipse_profile):
    t0 = time.perf_counter()
    prof, _ = ellipse_profile
    ok, parts = True, []
    for n in (1, 2, 3):
        rs = [asy.hermite_trial_residual(prof, n, hb)["ratio"] for hb in (1e-1, 3e-2, 1e-2)]
        good = all(r <= 3 * rs[0] for r in rs)
        ok &= good
        parts.append(f"n={n}: " + "/".join(f"{v:.3f}" for v in rs))
    record("C8", "trial-state residual", ok, "residual/hbar^1.5 " + "; ".join(parts), time.perf_counter() - t0, 10.0)


def test_c9_agmon(ellipse_profile):
    t0 = time.perf_counter()
    prof, _ = ellipse_profile
    rs = [asy.agmon_weight_check(prof, hb, 0.5) for hb in (1e-1, 1e-2, 1e-3)]
    ratios = [r["ratio"] for r in rs]
    tails = [r["log_tail_mass"] for r in rs]
    ok = all(x <= 2 * ratios[0] for x in ratios) and all(b < a for a, b in zip(tails, tails[1:]))
    record("C9", "Agmon localization", ok,
           "weighted ratio " + "/".join(f"{x:.3f}" for x in ratios)
           + "; log tail mass " + "/".join(f"{x:.1f}" for x in tails), time.perf_counter() - t0, 10.0)


def test_c10_property_suites(disc_profile, ellipse_profile):
    t0 = time.perf_counter()
    checks = {}
    dprof, dmet = disc_profile
    eprof, emet = ellipse_profile

    # residual certificates on representative solves
    res = [
        m1.solve_H00(20.0, 4000, 2),
        ef.solve_effective(ef.EffectiveSpec(eprof, emet.beta0, h=1e-3, b=1.0), k=5),
        dk.solve_disc_radial(dk.DiscParams(b=1.0, h=1e-3, n_r=1024), 0, vectors=True),
        tb.solve_tubular(tb.TubularSpec(dprof, 1e-2, dmet.beta0, b=1.0, n_s=32, n_tau=32), 2),
        ef.dirichlet_fluxfree(eprof, 1e-2, None, 3),
    ]
    worst = max(float(np.max(r.residuals / (1 + np.abs(r.eigenvalues)))) for r in res)
    checks["residuals"] = (worst <= 1e-8, f"max r/(1+|lam|) {worst:.1e}")

    # cross paths
    gap = 0.0
    for prof, met, b in ((dprof, dmet, 3.7), (dprof, dmet, 0.0), (eprof, emet, 0.0)):
        spec = ef.EffectiveSpec(prof, met.beta0, h=1e-2, b=b, variant="full")
        a = ef.solve_effective(spec, k=3).eigenvalues
        f = ef.solve_effective_fd(spec, 4096, 3).eigenvalues
        gap = max(gap, float(np.max(np.abs(a - f))))
    checks["fourier_vs_fd"] = (gap <= 1e-6, f"{gap:.1e}")
    gap = 0.0
    for B in (-0.008, 0.0, 0.008):
        s = m1.HalfLineSpec(40.0, 8000, B)
        gap = max(gap, abs(m1.solve_HBT(s, 1, "transformed").eigenvalues[0]
                           - m1.solve_HBT(s, 1, "weighted").eigenvalues[0]))
    checks["transformed_vs_weighted"] = (gap <= 1e-6, f"{gap:.1e}")

    # truncation monotonicity
    mono = True
    p = dk.DiscParams(b=1.0, h=1e-2, n_r=1000)
    for m in (0, 1):
        free = dk.solve_disc_radial(p, m).eigenvalues[0]
        mono &= all(dk.solve_disc_radial(p, m, wall=d).eigenvalues[0] >= free for d in (0.2, 0.4))
    dt = 0.05
    small = tb.solve_tubular(tb.TubularSpec(dprof, 1e-2, dmet.beta0, 1.0, n_s=16, n_tau=32, T=32 * dt), 1)
    large = tb.solve_tubular(tb.TubularSpec(dprof, 1e-2, dmet.beta0, 1.0, n_s=16, n_tau=64, T=64 * dt), 1)
    mono &= small.eigenvalues[0] >= large.eigenvalues[0]
    checks["truncation_monotone"] = (mono, "ok" if mono else "violated")

    # generic solver properties
    rng = np.random.default_rng(7)
    agree = 0.0
    for n in (5, 64, 512):
        d, e = rng.normal(size=n), rng.normal(size=n - 1)
        t = es.eigh_tridiagonal(es.HermitianSystem(diag=d, offdiag=e), min(n, 5), vectors=False).eigenvalues
        A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        agree = max(agree, float(np.max(np.abs(t - np.linalg.eigvalsh(A)[: len(t)]))))
    checks["bisection_vs_dense"] = (agree <= 1e-10, f"{agree:.1e}")

    ok = all(v[0] for v in checks.values())
    detail = "; ".join(f"{k} {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in checks.items())
    record("C10", "property suites", ok, detail, time.perf_counter() - t0, 60.0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
