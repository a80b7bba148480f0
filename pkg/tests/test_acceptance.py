"""Acceptance criteria 1-11; each prints one PASS/FAIL line.

Run as ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from ferrospot.coeffs import (
    boundary_m3,
    c3_sign_change_kd,
    classify_grid,
    compute_coeffs,
    compute_nu,
    fold_curve,
    nu_from_integrals,
)
from ferrospot.envelope import (
    core_limit,
    decay_rate_estimate,
    rescale,
    solve_canonical,
    weighted_residual,
)
from ferrospot.modes import build_center_modes, default_points, build_hyperbolic_mode, symplectic_form
from ferrospot.profiles import PatternKind, PatternRequest, junction_mismatch, profile_pieces
from ferrospot.spectrum import (
    LOG_SQRT2_PLUS_1,
    CountTarget,
    FerrofluidParams,
    count_zeros_argument_principle,
    counting_box,
    delta1,
    locus_residual,
    real_spectrum,
)
from ferrospot.verify import (
    MOMENT_CONSTANTS,
    check_bessel_moments,
    default_eps_list,
    fit_scaling_exponent,
    negative_controls,
    nu_integrals_quadrature,
)

REPORT: list[str] = []


def _report(n: int, ok: bool, elapsed: float, limit: float | None, detail: str) -> None:
    timed = limit is None or elapsed < limit
    status = "PASS" if ok and timed else "FAIL"
    budget = f"{elapsed:.2f}s" + (f" (< {limit:g}s)" if limit is not None else "")
    line = f"criterion {n}: {status} [{budget}] {detail}"
    REPORT.append(line)
    print(line)
    assert ok, line
    assert timed, line


def test_criterion_01_nu_sign_boundary():
    t = time.perf_counter()
    worst = 0.0
    for D, M0 in ((0.3, 0.1), (1.0, 0.5), (4.0, 0.9), (12.0, 0.3)):
        f = lambda x: compute_nu(FerrofluidParams.on_locus(x, M0, D))  # noqa: E731
        root = brentq(f, 0.5, 1.5, xtol=1e-14, rtol=1e-15)
        worst = max(worst, abs(root - LOG_SQRT2_PLUS_1))
    _report(1, worst < 1e-10, time.perf_counter() - t, 1.0, f"max |kD* - log(sqrt2+1)| = {worst:.1e}")


def _one_sign_change(p: FerrofluidParams, j: int) -> bool:
    a, b = (2 * j - 1) * math.pi / 2, (2 * j + 1) * math.pi / 2
    xs = np.linspace(a, b, 2002)[1:-1]
    vals = np.array([delta1(x, p).real for x in xs])
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1]))) == 1


def test_criterion_02_real_spectrum():
    t = time.perf_counter()
    rng = np.random.default_rng(20261015)
    failures = []
    for i in range(20):
        p = FerrofluidParams.on_locus(float(rng.uniform(0.3, 8.0)), float(rng.uniform(0.1, 0.9)),
                                      float(rng.uniform(0.3, 5.0)))
        lam = np.array(real_spectrum(p, 20).lambdas)
        ok = lam[0] > math.pi / (2 * p.D) and bool(np.all(np.diff(lam) > 0))
        ok &= all(_one_sign_change(p, j) for j in range(1, 11))
        ok &= count_zeros_argument_principle(counting_box(0, p), CountTarget.DELTA2, p) == 4
        ok &= all(count_zeros_argument_principle(counting_box(j, p), CountTarget.DELTA2, p) == 1
                  for j in range(1, 6))
        if not ok:
            failures.append(i)
    _report(2, not failures, time.perf_counter() - t, 10.0, f"20 random sets, failing: {failures}")


def test_criterion_03_hopf_double_root():
    t = time.perf_counter()
    worst = max(max(abs(v) for v in locus_residual(kd, kd)) for kd in (0.25, 0.5, 1, 2, 5, 10))
    _report(3, worst < 1e-10, time.perf_counter() - t, 1.0, f"max |f|, |f'| = {worst:.1e}")


_PHYSICAL = [(1.0, 0.5), (1.0, 0.6), (3.0, 0.45), (0.5, 0.7), (2.0, 0.8)]


def _mode_values(u):
    return np.concatenate([u.psi_m, u.psi_p, [u.eta], u.alpha_m, u.alpha_p, [u.gamma]])


def _coarse_view(u):
    """Fine-grid mode restricted to every other sample."""
    return np.concatenate([u.psi_m[::2], u.psi_p[::2], [u.eta], u.alpha_m[::2], u.alpha_p[::2], [u.gamma]])


def test_criterion_04_symplectic_normalisation():
    t = time.perf_counter()
    err, drift = 0.0, 0.0
    for D, M0 in _PHYSICAL:
        p = FerrofluidParams.from_physical(D, M0)
        n0 = default_points(p)
        vals = {}
        for n in (n0, 2 * n0):
            e, f = build_center_modes(p, n)
            vals[n] = np.array([symplectic_form(f, e.conj()), symplectic_form(e, f.conj()),
                                symplectic_form(f, f.conj())])
        err = max(err, float(np.max(np.abs(vals[n0] - np.array([1, -1, 0])))))
        drift = max(drift, float(np.max(np.abs(vals[n0] - vals[2 * n0]))))
        spec = real_spectrum(p, 5)
        for j in range(1, 6):
            modes = {}
            for n in (n0, 2 * n0):
                plus = build_hyperbolic_mode(p, j, 1, spec, points=n)
                minus = build_hyperbolic_mode(p, j, -1, spec, points=n)
                err = max(err, abs(symplectic_form(minus, plus) - 1.0))
                modes[n] = (plus, minus)
            for coarse, fine in zip(modes[n0], modes[2 * n0]):
                scale = np.max(np.abs(_mode_values(coarse)))
                drift = max(drift, float(np.max(np.abs(_mode_values(coarse) - _coarse_view(fine)))) / scale)
    ok = err < 1e-8 and drift < 1e-9
    _report(4, ok, time.perf_counter() - t, 5.0, f"max Omega error {err:.1e}, grid-doubling drift {drift:.1e}")


def test_criterion_05_nu_forms():
    t = time.perf_counter()
    closed_vs_int, closed_vs_quad = 0.0, 0.0
    for kd in np.linspace(0.2, 12, 10):
        for m0 in np.linspace(0.1, 0.9, 10):
            p = FerrofluidParams.on_locus(float(kd), float(m0), 1.0 + float(kd) / 5)
            nu = compute_nu(p)
            closed_vs_int = max(closed_vs_int, abs(nu_from_integrals(p) / nu - 1))
            closed_vs_quad = max(closed_vs_quad, abs(nu_from_integrals(p, nu_integrals_quadrature(p)) / nu - 1))
    ok = closed_vs_int < 1e-12 and closed_vs_quad < 1e-8
    _report(5, ok, time.perf_counter() - t, 5.0,
            f"closed vs integral {closed_vs_int:.1e}, closed vs quadrature {closed_vs_quad:.1e}")


def test_criterion_06_envelope():
    t = time.perf_counter()
    env = solve_canonical()
    core = abs(core_limit(env) - env.q0)
    slope = abs(decay_rate_estimate(env, 12.0) + 1.0)
    resid = weighted_residual(env, np.linspace(0.05, 12.0, 400))
    rescaled = 0.0
    for c0, c3 in ((0.5, -2.0), (2.0, -0.3)):
        r = rescale(env, c0, c3)
        s = np.linspace(0.1, 6.0, 60)
        direct = math.sqrt(c0 / abs(c3)) * env.q_of(math.sqrt(c0) * s)
        rescaled = max(rescaled, float(np.max(np.abs(r.q_of(s) - direct))), weighted_residual(r, s))
    try:
        rescale(env, 1.0, 0.5)
        rejected = False
    except ValueError:
        rejected = True
    ok = env.q0 > 0 and core < 1e-6 and slope < 1e-2 and resid <= 1e-8 and rescaled < 1e-7 and rejected
    _report(6, ok, time.perf_counter() - t, 10.0,
            f"q0={env.q0:.10f}, core fit {core:.1e}, slope error {slope:.1e}, residual {resid:.1e}, "
            f"rescaling {rescaled:.1e}, c3>0 rejected={rejected}")


def test_criterion_07_scaling_laws():
    t = time.perf_counter()
    expected = {PatternKind.SPOT_A: 0.5, PatternKind.SPOT_B_DOWN: 0.375, PatternKind.RING_UP: 0.75,
                PatternKind.SPOT_A_FOLD: 0.25}
    eps = default_eps_list()
    got = {k: fit_scaling_exponent(k, eps)[0] for k in expected}
    ok = all(abs(got[k] - v) <= 0.02 for k, v in expected.items())
    detail = ", ".join(f"{k.value} {got[k]:.4f}" for k in expected)
    _report(7, ok, time.perf_counter() - t, 30.0, detail)


def test_criterion_08_junctions():
    t = time.perf_counter()
    spot = FerrofluidParams.from_physical(1.0, 0.5)
    rich = FerrofluidParams.from_physical(1.0, 0.6)
    # leading junction (core -> transition) decays like r0^(-3/2) for spots and r0^(-1/2) for rings
    cases = [(PatternKind.SPOT_A, spot, -1.5), (PatternKind.SPOT_B_DOWN, rich, -1.5),
             (PatternKind.SPOT_B_UP, rich, -1.5), (PatternKind.RING_UP, rich, -0.5),
             (PatternKind.RING_DOWN, rich, -0.5)]
    slopes, ok = {}, True
    for kind, p, predicted in cases:
        r0s = np.array([20.0, 40.0, 80.0]) / p.k
        errs = [junction_mismatch(PatternRequest(kind, p, 1e-6, r0=r0)) for r0 in r0s]
        slopes[kind.value] = np.polyfit(np.log(r0s), np.log(errs), 1)[0]
        ok &= abs(slopes[kind.value] - predicted) <= 0.15
    fold = FerrofluidParams.from_physical(1.0, 0.42356)
    fold_pieces = len(profile_pieces(PatternRequest(PatternKind.SPOT_A_FOLD, fold, 1e-4)))
    detail = ", ".join(f"{k} {v:.3f}" for k, v in slopes.items()) + f"; SpotAFold has {fold_pieces} piece"
    _report(8, ok and fold_pieces == 1, time.perf_counter() - t, 10.0, detail)


def test_criterion_09_bessel_moments():
    t = time.perf_counter()
    worst, ok = 0.0, True
    for k in (0.5, 1.0, 3.63):
        rep = check_bessel_moments(k)
        for r in rep.results:
            worst = max(worst, abs(r.truncated - r.constant) / r.tolerance)
            ok &= abs(r.truncated - r.constant) <= 3.0 / math.sqrt(rep.R)
    _report(9, ok and len(MOMENT_CONSTANTS) == 4, time.perf_counter() - t, 10.0,
            f"worst truncated error / 3R^(-1/2) = {worst:.2f}")


_ORDER = {"None": 0, "A-": 1, "A+": 2, "A+B-R+R-": 3}


def test_criterion_10_region_map():
    t = time.perf_counter()
    ds = np.linspace(0.5, 20.0, 50)
    ms = np.linspace(0.05, 0.95, 50)
    grid = classify_grid(ds, ms, workers=4)
    ordered, complete = 0, 0
    for i in range(ds.size):
        ranks = [_ORDER[rc.label] for rc in grid[i * ms.size:(i + 1) * ms.size]]
        if set(ranks) == set(_ORDER.values()):
            complete += 1
            ordered += all(b >= a for a, b in zip(ranks, ranks[1:]))
    m3_20 = boundary_m3(20.0)
    m3_ok = m3_20 is not None and abs(m3_20 - 0.56) <= 0.01
    band_ok = complete > 0 and ordered == complete
    kd_star = {m0: c3_sign_change_kd(m0) for m0 in (0.46, 0.5, 0.55)}
    kd_ok = all(v is not None and abs(v - 1.8) <= 0.1 for v in kd_star.values())
    shown = ", ".join(f"M0={m}: {'none' if v is None else f'{v:.3f}'}" for m, v in kd_star.items())
    _report(10, band_ok and m3_ok and kd_ok, time.perf_counter() - t, 60.0,
            f"band order {ordered}/{complete} D values, M3(20)={m3_20:.4f}, "
            f"c3 sign change kD* [{shown}]")


def test_criterion_11_negative_controls():
    t = time.perf_counter()
    outcomes = negative_controls()
    missed = [c.name for c in outcomes if not c.tripped]
    _report(11, not missed, time.perf_counter() - t, None,
            f"{len(outcomes) - len(missed)}/{len(outcomes)} controls tripped; missed: {missed}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
