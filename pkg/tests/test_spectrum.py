from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from ferrospot.spectrum import (
    LOG_SQRT2_PLUS_1,
    ContourProximityError,
    CountTarget,
    FerrofluidParams,
    NonUniqueLocusError,
    Rectangle,
    RootSource,
    SpectrumError,
    SpectrumResult,
    calm_physical,
    count_zeros_argument_principle,
    counting_box,
    delta0,
    delta1,
    delta1_root_in,
    delta2,
    delta3,
    delta3_imaginary_root,
    hopf_locus,
    locus_residual,
    m0_from_mu,
    mu_from_m0,
    real_spectrum,
    solve_hopf_wavenumber,
    ystar_bound,
)
import ferrospot.spectrum as spectrum_mod


@pytest.fixture
def p1() -> FerrofluidParams:
    return FerrofluidParams.on_locus(1.0, 0.5, D=1.0)


def test_mu_m0_roundtrip():
    for m0 in (0.01, 0.3, 0.5, 0.99):
        mu = mu_from_m0(m0)
        assert mu > 1.0
        assert m0_from_mu(mu) == pytest.approx(m0, rel=1e-15)
    assert mu_from_m0(0.5) == 3.0


def test_params_validation():
    with pytest.raises(ValueError):
        FerrofluidParams(D=0.0, M0=0.5)
    with pytest.raises(ValueError):
        FerrofluidParams(D=1.0, M0=1.0)
    with pytest.raises(ValueError):
        FerrofluidParams(D=1.0, M0=0.5, kD=-1.0)
    p = FerrofluidParams(D=2.0, M0=0.5)
    assert p.calM == calm_physical(2.0, 0.5)
    assert not p.at_locus


def test_delta0_trivial_zeros(p1):
    assert delta0(0.0, p1) == 0
    assert abs(delta0(math.pi, p1)) < 1e-14


def test_delta0_vanishes_at_hopf_point(p1):
    assert abs(delta0(1j * p1.kD, p1)) < 1e-12


def test_delta0_factorises(p1):
    for z in (0.3, 2.0 + 0.5j, -1.1 + 3j, 7.7):
        lhs = delta0(z, p1)
        rhs = cmath.sin(z) * cmath.cos(z) * delta2(z, p1)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_delta2_at_zero_and_positive_on_r0(p1):
    assert delta2(0.0, p1) == pytest.approx(p1.upsilon0)
    xs = np.linspace(-math.pi / 2 + 1e-6, math.pi / 2 - 1e-6, 2001)
    assert all(delta2(x, p1).real > 0.0 for x in xs)


def test_delta2_even(p1):
    for x in (0.2, 1.3, 4.0, 9.1):
        assert delta2(x, p1) == pytest.approx(delta2(-x, p1), rel=1e-14)


def test_pole_guard(p1):
    with pytest.raises(ValueError):
        delta2(math.pi / 2, p1)
    with pytest.raises(ValueError):
        delta3(3 * math.pi / 2 + 1e-9, p1)
    assert math.isfinite(abs(delta2(math.pi / 2 + 1e-6, p1)))


def test_delta3_imaginary_zero(p1):
    # y0 with calM tanh y0 = y0, from a 30-digit findroot
    y0 = delta3_imaginary_root(p1)
    assert y0 == pytest.approx(1.5454596875878506, rel=1e-14)
    assert abs(delta3(1j * y0, p1)) < 1e-12
    assert abs(delta3(-1j * y0, p1)) < 1e-12


def test_missing_upsilon_is_an_error():
    with pytest.raises(ValueError):
        delta1(1.0, FerrofluidParams(D=1.0, M0=0.5, kD=1.0))


def test_hopf_locus_small_kd_limit():
    ups, cal_m = hopf_locus(1e-4)
    assert cal_m == pytest.approx(1.0, abs=1e-7)
    assert abs(ups) < 1e-7


@pytest.mark.parametrize("kd", [0.5, 1.0, 2.0, 5.0])
def test_hopf_double_root(kd):
    f, df = locus_residual(kd, kd)
    assert abs(f) < 1e-10
    assert abs(df) < 1e-10


def test_upsilon_positive_on_grid():
    for kd in np.geomspace(1e-3, 50, 300):
        ups, cal_m = hopf_locus(float(kd))
        assert ups > 0.0 and cal_m > 0.0
        assert math.sinh(kd) * math.cosh(kd) > kd


def test_solve_hopf_none_for_weak_field():
    assert solve_hopf_wavenumber(0.01, 1.01) is None
    assert FerrofluidParams.from_physical(0.01, m0_from_mu(1.01)) is None


def test_solve_hopf_roundtrip_and_band():
    # (1, 0.45) lies in the A+ band
    kd = solve_hopf_wavenumber(1.0, mu_from_m0(0.45))
    assert kd == pytest.approx(1.1640111495975123, rel=1e-12)
    assert kd > LOG_SQRT2_PLUS_1
    for D, m0 in ((0.5, 0.7), (3.0, 0.4), (20.0, 0.2)):
        kd = solve_hopf_wavenumber(D, mu_from_m0(m0))
        assert hopf_locus(kd)[1] == pytest.approx(calm_physical(D, m0), rel=1e-10)


def test_solve_hopf_reports_multiple_brackets(monkeypatch):
    real = spectrum_mod.hopf_locus

    def wiggly(x):
        ups, cal_m = real(x)
        return ups, cal_m + 3.0 * math.sin(4.0 * x)

    monkeypatch.setattr(spectrum_mod, "hopf_locus", wiggly)
    with pytest.raises(NonUniqueLocusError) as info:
        solve_hopf_wavenumber(1.0, mu_from_m0(0.5))
    assert len(info.value.brackets) > 1


def test_spectrum_kd1_first_delta1_root(p1):
    # 30-digit root of delta2 on R_1
    assert delta1_root_in(1, p1) == pytest.approx(4.3348326502907117, rel=1e-14)
    res = real_spectrum(p1, 3)
    assert res.lambdas == pytest.approx((math.pi, 4.3348326502907117, 2 * math.pi), rel=1e-14)
    assert res.sources == (RootSource.SIN, RootSource.DELTA1, RootSource.SIN)


def test_spectrum_ladder_properties():
    rng = np.random.default_rng(7)
    for _ in range(10):
        p = FerrofluidParams.on_locus(float(rng.uniform(0.3, 8.0)), 0.5, float(rng.uniform(0.3, 5.0)))
        res = real_spectrum(p, 12)
        lam = np.array(res.lambdas)
        assert lam[0] > math.pi / (2 * p.D)
        assert np.all(np.diff(lam) > 0)
        for value, src in zip(res.lambdas, res.sources):
            if src is RootSource.DELTA1:
                s = value * p.D
                assert abs(delta1(s, p)) <= 1e-10 * (1 + s * s)


def test_spectrum_result_validates():
    with pytest.raises(SpectrumError):
        SpectrumResult(1.0, 1.0, (2.0, 1.9), (RootSource.SIN, RootSource.SIN), (1, 1))
    with pytest.raises(SpectrumError):
        SpectrumResult(1.0, 1.0, (1.0,), (RootSource.SIN,), (1,))


def test_argument_principle_counts(p1):
    assert count_zeros_argument_principle(counting_box(0, p1), CountTarget.DELTA2, p1) == 4
    for j in range(1, 6):
        assert count_zeros_argument_principle(counting_box(j, p1), "Delta2", p1) == 1
    assert count_zeros_argument_principle(counting_box(0, p1), CountTarget.DELTA3, p1) == 4


def test_argument_principle_simple_boxes(p1):
    # tiny box around the real root: one zero; box away from everything: none
    root = delta1_root_in(1, p1)
    assert count_zeros_argument_principle(Rectangle(root - 0.1, root + 0.1, -0.1, 0.1), "Delta2", p1) == 1
    assert count_zeros_argument_principle(Rectangle(root + 0.2, root + 0.3, 0.5, 0.6), "Delta2", p1) == 0


def test_contour_proximity(p1):
    root = delta1_root_in(1, p1)
    with pytest.raises(ContourProximityError):
        count_zeros_argument_principle(Rectangle(root, root + 0.2, -0.1, 0.1), "Delta2", p1)


def test_no_root_on_pole_lines(p1):
    y_star = ystar_bound(p1)
    ys = np.linspace(-y_star, y_star, 801)
    for j in range(6):
        x = (2 * j + 1) * math.pi / 2
        assert min(abs(delta1(complex(x, y), p1)) for y in ys) > 0.0


def test_box_horizontal_edges_clear(p1):
    for j in range(0, 6):
        box = counting_box(j, p1)
        assert box.y1 >= max(ystar_bound(p1), 10.0)
        xs = np.linspace(box.x0 + 1e-3, box.x1 - 1e-3, 101)
        for y in (box.y0, box.y1):
            assert min(abs(delta2(complex(x, y), p1)) for x in xs) > 0.0
