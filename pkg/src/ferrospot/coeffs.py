"""Normal-form coefficients c0, c3, nu, the mode constants m, bD and region maps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .spectrum import (
    LOG_SQRT2_PLUS_1,
    FerrofluidParams,
    calm_physical,
    hopf_locus,
    sech2,
)

RESONANCE_GUARD = 1e-8
EPS_REF = 1e-4


class ResonanceError(ArithmeticError):
    """The 2k denominator in c3 is too close to zero."""


class ConditionError(ValueError):
    """A parameter-space inequality required by a pattern class fails."""


@dataclass(frozen=True)
class NormalFormCoeffs:
    kD: float
    D: float
    M0: float
    c0: float
    c3: float
    c3_tilde: float
    nu: float
    m: float
    bD: float
    bD_tilde: float

    @property
    def k(self) -> float:
        return self.kD / self.D


def _kd(params: FerrofluidParams) -> float:
    if params.kD is None:
        raise ValueError("params must carry kD")
    return params.kD


def compute_c0(params: FerrofluidParams) -> float:
    x = _kd(params)
    ups, cal_m = hopf_locus(x)
    return x * x / (ups + x ** 3 * cal_m * math.tanh(x) * sech2(x))


def resonance_denominator(kD: float) -> float:
    """2 kD calM tanh(2kD) - upsilon0 - 4 kD^2 on the locus, in cancellation-free form."""
    x = kD
    t = math.tanh(x)
    s = sech2(x)
    return x * x * (4.0 * math.tanh(2.0 * x) - 5.0 * t - 3.0 * x * s) / (t + x * s)


def compute_c3(params: FerrofluidParams) -> tuple[float, float]:
    """Return ``(c3, c3_tilde)``; both share the sign of the bracket's negative."""
    x = _kd(params)
    M0 = params.M0
    D = params.D
    ups, cal_m = hopf_locus(x)
    den = resonance_denominator(x)
    if abs(den) < RESONANCE_GUARD:
        raise ResonanceError(f"2k resonance denominator {den:.3e} at kD={x}")
    s = sech2(x)
    e2 = math.exp(-2.0 * x)
    e4 = e2 * e2
    e8 = e4 * e4
    # (cosh4x - 4cosh2x - 3) sech^2(x) / cosh2x
    ratio = 4.0 * (1.0 + e8) / ((1.0 + e4) * (1.0 + e2) ** 2)
    sech_2x = 2.0 * e2 / (1.0 + e4)
    sech_4x = 2.0 * e4 / (1.0 + e8)
    head = (ratio - (4.0 + 3.0 * sech_2x) * s) * (4.0 * sech_4x + s - 2.0) / den
    inner = (head + s * s / ups) if ups > 0.0 else math.inf
    first = x * cal_m ** 2 * M0 ** 2 / 4.0 * inner
    # 4 calM (M0^2 sech2x - cosh^2 x) cosech2x = 4 calM (2 M0^2 / sinh4x - coth(x)/2)
    two_over_sinh4x = 4.0 * e4 / (1.0 - e8)
    last = 4.0 * cal_m * (M0 * M0 * two_over_sinh4x - 0.5 / math.tanh(x))
    bracket = first + 1.5 * x + last
    c0 = compute_c0(params)
    c3 = -(c0 * x ** 3 / (2.0 * D ** 4)) * bracket
    c3_tilde = -bracket
    if c3 != 0.0 and c3_tilde != 0.0 and (c3 > 0) != (c3_tilde > 0):
        raise ArithmeticError("c3 and c3_tilde disagree in sign")
    return c3, c3_tilde


def compute_m(params: FerrofluidParams) -> float:
    x = _kd(params)
    _, cal_m = hopf_locus(x)
    m2 = 1.0 + (x * math.tanh(x) - 1.0) * cal_m * sech2(x)
    if not m2 > 0.0:
        raise ArithmeticError(f"m^2 = {m2} is not positive at kD={x}")
    return math.sqrt(m2)


def compute_bD(params: FerrofluidParams) -> float:
    """Constant making Omega(f, conj f) vanish for f = f~ + i bD e.

    The denominator carries a single power of k, as the symplectic condition
    and the length dimension of bD require.
    """
    x = _kd(params)
    k = params.k
    _, cal_m = hopf_locus(x)
    t = math.tanh(x)
    s = sech2(x)
    if x < 20.0:
        ch2 = math.cosh(x) ** 2
        shch = math.sinh(x) * math.cosh(x)
        num = x * ch2 + 4.0 / 3.0 * x ** 3 - shch - 2.0 * x * x * t - x ** 3 * s
        den_geo = shch + x
        ratio = num / den_geo
    else:
        # divide through by sinh x cosh x to stay finite
        ratio = (x / t + 4.0 / 3.0 * x ** 3 * s / t - 1.0 - 2.0 * x * x * s - x ** 3 * s * s / t) / (
            1.0 + x * s / t
        )
    m2 = 1.0 + (x * t - 1.0) * cal_m * s
    return ratio / (k * m2)


def compute_bD_tilde(params: FerrofluidParams) -> float:
    x = _kd(params)
    return compute_bD(params) - params.D * math.tanh(x) + 1.0 / params.k


def compute_nu(params: FerrofluidParams) -> float:
    x = _kd(params)
    k = params.k
    _, cal_m = hopf_locus(x)
    m = compute_m(params)
    pref = params.M0 * math.sqrt(3.0 * k * math.pi / 2.0) * k * cal_m / (params.D * m ** 3)
    return pref * (1.0 - 2.0 * sech2(x))


def nu_integrals(params: FerrofluidParams) -> tuple[float, float, float, float]:
    """Closed forms of the four depth integrals I1..I4 of j(y) = cosh(k(D+y))/cosh(kD)."""
    x = _kd(params)
    k = params.k
    D = params.D
    t = math.tanh(x)
    s = sech2(x)
    i1 = (t + x * s) / (2.0 * k)
    i2 = k * t - k * k * i1
    i3 = 0.5 - i1 / (2.0 * D)
    i4 = t / k
    return i1, i2, i3, i4


def nu_from_integrals(params: FerrofluidParams, integrals: Optional[Sequence[float]] = None) -> float:
    """nu assembled from I1..I4; defaults to their closed forms."""
    x = _kd(params)
    k = params.k
    D = params.D
    _, cal_m = hopf_locus(x)
    m = compute_m(params)
    i1, i2, i3, i4 = nu_integrals(params) if integrals is None else integrals
    c = params.M0 * math.sqrt(k * math.pi / 2.0) * k * cal_m / (D * m ** 3)
    bracket = 2.0 * i2 / (k * k * D) + (2.0 * i4 - 5.0 * i1) / D + 2.0 * i3 + 2.0 * k * math.tanh(x) * i4
    return c / math.sqrt(3.0) * bracket


def compute_coeffs(params: FerrofluidParams) -> NormalFormCoeffs:
    c3, c3t = compute_c3(params)
    bD = compute_bD(params)
    x = _kd(params)
    return NormalFormCoeffs(
        kD=x,
        D=params.D,
        M0=params.M0,
        c0=compute_c0(params),
        c3=c3,
        c3_tilde=c3t,
        nu=compute_nu(params),
        m=compute_m(params),
        bD=bD,
        bD_tilde=bD - params.D * math.tanh(x) + 1.0 / params.k,
    )


def fold_curve(coeffs: NormalFormCoeffs, eps: float) -> float:
    """Positive branch of nu on the fold curve; the other branch is its negative."""
    if coeffs.c3 <= 0.0:
        raise ConditionError("fold curve requires c3 > 0")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return eps ** 0.25 * abs(math.log(eps)) ** 0.5 * math.sqrt(2.0 * coeffs.c3 * math.sqrt(coeffs.c0))


def near_fold_threshold(coeffs: NormalFormCoeffs, eps_ref: float = EPS_REF, factor: float = 0.05) -> float:
    c3 = abs(coeffs.c3)
    return factor * math.sqrt(2.0 * c3 * math.sqrt(coeffs.c0)) * eps_ref ** 0.25 * abs(math.log(eps_ref)) ** 0.5


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

class Pattern(str, Enum):
    SPOT_A_UP = "SpotAUp"
    SPOT_A_DOWN = "SpotADown"
    SPOT_B_DOWN = "SpotBDown"
    SPOT_B_UP = "SpotBUp"
    RING_UP = "RingUp"
    RING_DOWN = "RingDown"
    NONE = "None"


class Flag(str, Enum):
    NO_BIFURCATION = "NoBifurcation"
    SHALLOW = "ShallowDepthUnphysical"
    NEAR_FOLD = "NearFold"


@dataclass(frozen=True)
class RegionClassification:
    D: float
    M0: float
    kD: Optional[float]
    patterns: frozenset[Pattern]
    flags: frozenset[Flag]
    coeffs: Optional[NormalFormCoeffs] = field(default=None, compare=False)

    @property
    def label(self) -> str:
        """Band label: None, A-, A+ or A+B-R+R-."""
        if Pattern.SPOT_B_DOWN in self.patterns:
            return "A+B-R+R-"
        if Pattern.SPOT_A_UP in self.patterns:
            return "A+"
        if Pattern.SPOT_A_DOWN in self.patterns:
            return "A-"
        return "None"


_FOUR = frozenset({Pattern.SPOT_A_UP, Pattern.SPOT_B_DOWN, Pattern.RING_UP, Pattern.RING_DOWN})


def classify_coeffs(coeffs: NormalFormCoeffs, *, fold_factor: float = 0.05,
                    eps_ref: float = EPS_REF) -> tuple[frozenset[Pattern], frozenset[Flag]]:
    flags: set[Flag] = set()
    if abs(coeffs.nu) < near_fold_threshold(coeffs, eps_ref, fold_factor):
        flags.add(Flag.NEAR_FOLD)
    if coeffs.nu == 0.0:
        return frozenset(), frozenset(flags)
    if coeffs.c3_tilde < 0.0 and coeffs.kD < LOG_SQRT2_PLUS_1:
        # small-kD branch of c3 < 0: classified by the sign of nu alone
        flags.add(Flag.SHALLOW)
        up = coeffs.nu > 0.0
        return frozenset({Pattern.SPOT_A_UP if up else Pattern.SPOT_A_DOWN}), frozenset(flags)
    if coeffs.nu < 0.0:
        return frozenset({Pattern.SPOT_A_DOWN}), frozenset(flags)
    if coeffs.c3_tilde < 0.0:
        return _FOUR, frozenset(flags)
    return frozenset({Pattern.SPOT_A_UP}), frozenset(flags)


def classify_region(D: float, M0: float, *, fold_factor: float = 0.05,
                    eps_ref: float = EPS_REF) -> RegionClassification:
    params = FerrofluidParams.from_physical(D, M0)
    if params is None:
        return RegionClassification(D, M0, None, frozenset({Pattern.NONE}),
                                    frozenset({Flag.NO_BIFURCATION}))
    coeffs = compute_coeffs(params)
    patterns, flags = classify_coeffs(coeffs, fold_factor=fold_factor, eps_ref=eps_ref)
    return RegionClassification(D, M0, params.kD, patterns, flags, coeffs)


def classify_grid(D_values: Iterable[float], M0_values: Iterable[float], *,
                  workers: int = 1, **kwargs) -> list[RegionClassification]:
    """Row-major (D outer, M0 inner) classification; result order is deterministic."""
    points = [(float(d), float(m)) for d in D_values for m in M0_values]
    if workers <= 1:
        return [classify_region(d, m, **kwargs) for d, m in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: classify_region(p[0], p[1], **kwargs), points))


# ---------------------------------------------------------------------------
# boundary curves
# ---------------------------------------------------------------------------

_M0_TOL = 1e-6


def _m0_for_calm(D: float, target: float) -> float:
    """M0 in (0,1) with calm_physical(D, M0) = target (monotone in M0)."""
    return float(brentq(lambda m: calm_physical(D, m) - target, 1e-12, 1.0 - 1e-12,
                        xtol=1e-14, rtol=1e-14))


def boundary_m1(D: float) -> float:
    """Onset of a critical wavenumber: calM_physical = 1."""
    return _m0_for_calm(D, 1.0)


def boundary_m2(D: float) -> float:
    """nu = 0, i.e. kD = log(sqrt2 + 1)."""
    return _m0_for_calm(D, hopf_locus(LOG_SQRT2_PLUS_1)[1])


def _c3t_physical(D: float, M0: float) -> float:
    params = FerrofluidParams.from_physical(D, M0)
    if params is None:
        return math.nan
    return compute_c3(params)[1]


def boundary_m3(D: float, *, scan: int = 60) -> Optional[float]:
    """First M0 above M2(D) where c3 becomes negative; None if there is none."""
    lo = boundary_m2(D) + 1e-9
    grid = np.linspace(lo, 0.999, scan)
    vals = [_c3t_physical(D, m) for m in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa > 0.0 and fb < 0.0:
            return float(brentq(lambda m: _c3t_physical(D, m), a, b, xtol=_M0_TOL * 1e-2))
    return None


@dataclass(frozen=True)
class BoundaryCurves:
    D: tuple[float, ...]
    M1: tuple[float, ...]
    M2: tuple[float, ...]
    M3: tuple[Optional[float], ...]


def boundary_curves(D_grid: Iterable[float]) -> BoundaryCurves:
    ds = tuple(float(d) for d in D_grid)
    if any(d <= 0.0 for d in ds):
        raise ValueError("D grid must be positive")
    return BoundaryCurves(
        D=ds,
        M1=tuple(boundary_m1(d) for d in ds),
        M2=tuple(boundary_m2(d) for d in ds),
        M3=tuple(boundary_m3(d) for d in ds),
    )


def c3_sign_change_kd(M0: float, *, kd_lo: float = LOG_SQRT2_PLUS_1, kd_hi: float = 30.0,
                      scan: int = 300) -> Optional[float]:
    """Smallest kD above log(sqrt2+1) where c3_tilde changes sign at fixed M0."""
    f = lambda x: compute_c3(FerrofluidParams.on_locus(x, M0))[1]  # noqa: E731
    grid = np.linspace(kd_lo, kd_hi, scan)
    vals = [f(x) for x in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa * fb < 0.0:
            return float(brentq(f, a, b, xtol=1e-10))
    return None
