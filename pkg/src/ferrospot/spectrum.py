"""Dispersion relation, Hamiltonian-Hopf locus and the real eigenvalue ladder."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

LOG_SQRT2_PLUS_1 = math.log(math.sqrt(2.0) + 1.0)

_POLE_GUARD = 1e-8


class SpectrumError(RuntimeError):
    """A root that the theory guarantees could not be bracketed or counted."""


class NonUniqueLocusError(SpectrumError):
    """More than one critical wavenumber solves the locus equation."""

    def __init__(self, brackets: list[tuple[float, float]]):
        self.brackets = brackets
        super().__init__(f"locus equation has {len(brackets)} roots, brackets {brackets}")


class ContourProximityError(SpectrumError):
    """The counting contour passes too close to a zero."""


# ---------------------------------------------------------------------------
# stable hyperbolic helpers
# ---------------------------------------------------------------------------

def sech2(x: float) -> float:
    """sech(x)^2 without overflow."""
    e = math.exp(-2.0 * abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def _sinh_minus_id(y: float) -> float:
    """sinh(y) - y, accurate for small y."""
    if abs(y) > 0.5:
        return math.sinh(y) - y
    term = y * y * y / 6.0
    total = term
    n = 3
    while abs(term) > 1e-18 * abs(total):
        term *= y * y / ((n + 1) * (n + 2))
        total += term
        n += 2
    return total


def _t_minus_xs(x: float) -> float:
    """tanh(x) - x sech^2(x) = (sinh 2x - 2x) / (2 cosh^2 x)."""
    if x > 20.0:
        return math.tanh(x) - x * sech2(x)
    return _sinh_minus_id(2.0 * x) * sech2(x) / 2.0


def hopf_locus(kD: float) -> tuple[float, float]:
    """Return ``(upsilon_H, calM_H)`` at scaled wavenumber ``kD``."""
    if not kD > 0.0:
        raise ValueError("kD must be positive")
    t = math.tanh(kD)
    s = sech2(kD)
    den = t + kD * s
    return kD * kD * _t_minus_xs(kD) / den, 2.0 * kD / den


def locus_residual(kD: float, x: float) -> tuple[float, float]:
    """``f(x) = calM_H x tanh x - x^2 - upsilon_H`` and ``f'(x)`` at the locus of ``kD``."""
    ups, cal_m = hopf_locus(kD)
    f = cal_m * x * math.tanh(x) - x * x - ups
    df = cal_m * (math.tanh(x) + x * sech2(x)) - 2.0 * x
    return f, df


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

def mu_from_m0(M0: float) -> float:
    return (1.0 + M0) / (1.0 - M0)


def m0_from_mu(mu: float) -> float:
    return (mu - 1.0) / (mu + 1.0)


def calm_physical(D: float, M0: float) -> float:
    """mu (mu-1)^2 D / (mu+1), written in M0 to avoid cancellation."""
    return 2.0 * M0 * M0 * (1.0 + M0) * D / (1.0 - M0) ** 2


@dataclass(frozen=True)
class FerrofluidParams:
    """Scaled layer parameters.

    ``calM`` and ``upsilon0`` are the coefficients entering the dispersion
    relation. On the locus they equal ``hopf_locus(kD)``.
    """

    D: float
    M0: float
    kD: Optional[float] = None
    calM: float = field(default=float("nan"))
    upsilon0: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        if not self.D > 0.0:
            raise ValueError("D must be positive")
        if not 0.0 < self.M0 < 1.0:
            raise ValueError("M0 must lie in (0, 1)")
        if self.kD is not None and not self.kD > 0.0:
            raise ValueError("kD must be positive")
        if math.isnan(self.calM):
            object.__setattr__(self, "calM", calm_physical(self.D, self.M0))

    @property
    def mu(self) -> float:
        return mu_from_m0(self.M0)

    @property
    def k(self) -> float:
        if self.kD is None:
            raise ValueError("kD not set")
        return self.kD / self.D

    @property
    def calM_physical(self) -> float:
        return calm_physical(self.D, self.M0)

    @property
    def at_locus(self) -> bool:
        if self.kD is None or math.isnan(self.upsilon0):
            return False
        ups, cal_m = hopf_locus(self.kD)
        return math.isclose(ups, self.upsilon0, rel_tol=1e-10, abs_tol=1e-14) and math.isclose(
            cal_m, self.calM, rel_tol=1e-10
        )

    @property
    def physically_consistent(self) -> bool:
        """True when ``calM`` is the value implied by ``(D, M0)``."""
        return math.isclose(self.calM, self.calM_physical, rel_tol=1e-9)

    @classmethod
    def on_locus(cls, kD: float, M0: float, D: float = 1.0) -> "FerrofluidParams":
        """Reduced parametrisation: ``(calM, upsilon0)`` from ``kD`` alone."""
        ups, cal_m = hopf_locus(kD)
        return cls(D=D, M0=M0, kD=kD, calM=cal_m, upsilon0=ups)

    @classmethod
    def from_physical(cls, D: float, M0: float) -> Optional["FerrofluidParams"]:
        """Solve for the critical ``kD`` at ``(D, M0)``; ``None`` if there is none."""
        kD = solve_hopf_wavenumber(D, mu_from_m0(M0))
        if kD is None:
            return None
        ups, _ = hopf_locus(kD)
        return cls(D=D, M0=M0, kD=kD, upsilon0=ups)

    def with_kd(self, kD: float) -> "FerrofluidParams":
        return replace(self, kD=kD)


def _require_coeffs(params: FerrofluidParams) -> tuple[float, float]:
    if math.isnan(params.upsilon0):
        raise ValueError("upsilon0 not set; build params with on_locus or from_physical")
    return params.calM, params.upsilon0


# ---------------------------------------------------------------------------
# dispersion functions
# ---------------------------------------------------------------------------

def delta0(sigma: complex, params: FerrofluidParams) -> complex:
    cal_m, ups = _require_coeffs(params)
    s, c = cmath.sin(sigma), cmath.cos(sigma)
    return cal_m * sigma * s * s - (sigma * sigma - ups) * s * c


def delta1(sigma: complex, params: FerrofluidParams) -> complex:
    cal_m, ups = _require_coeffs(params)
    return cal_m * sigma * cmath.sin(sigma) - (sigma * sigma - ups) * cmath.cos(sigma)


def _check_pole(sigma: complex) -> None:
    if abs(complex(sigma).imag) < _POLE_GUARD:
        x = complex(sigma).real
        j = round(x / math.pi - 0.5)
        if abs(x - (j + 0.5) * math.pi) < _POLE_GUARD:
            raise ValueError(f"sigma={sigma} is within {_POLE_GUARD} of a pole of tan")


def delta2(sigma: complex, params: FerrofluidParams) -> complex:
    _check_pole(sigma)
    cal_m, ups = _require_coeffs(params)
    return cal_m * sigma * cmath.tan(sigma) - (sigma * sigma - ups)


def delta3(sigma: complex, params: FerrofluidParams) -> complex:
    _check_pole(sigma)
    cal_m, _ = _require_coeffs(params)
    return -sigma * (cal_m * cmath.tan(sigma) - sigma)


def delta3_imaginary_root(params: FerrofluidParams) -> float:
    """y0 > 0 with calM tanh(y0) = y0 (requires calM > 1)."""
    cal_m, _ = _require_coeffs(params)
    if cal_m <= 1.0:
        raise SpectrumError("calM <= 1: no nonzero imaginary root of delta3")
    return brentq(lambda y: cal_m * math.tanh(y) - y, 1e-8, cal_m + 1.0, xtol=1e-15, rtol=1e-15)


# ---------------------------------------------------------------------------
# critical wavenumber
# ---------------------------------------------------------------------------

def solve_hopf_wavenumber(D: float, mu: float, *, scan_points: int = 400) -> Optional[float]:
    """kD > 0 with ``calM_H(kD) = mu (mu-1)^2 D / (mu+1)``, or ``None``.

    calM_H tends to 1 as kD -> 0 and grows without bound, so there is no
    root when the physical calM is at most 1.
    """
    if not D > 0.0 or not mu > 1.0:
        raise ValueError("need D > 0 and mu > 1")
    target = calm_physical(D, m0_from_mu(mu))
    if target <= 1.0:
        return None
    k_lo = 1e-6
    k_max = 1.0
    while hopf_locus(k_max)[1] <= target:
        k_max *= 2.0
    grid = np.geomspace(k_lo, 2.0 * k_max, scan_points)
    vals = np.array([hopf_locus(x)[1] - target for x in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    brackets = [(float(grid[i]), float(grid[i + 1])) for i in idx]
    if not brackets:
        return None
    if len(brackets) > 1:
        raise NonUniqueLocusError(brackets)
    a, b = brackets[0]
    return float(brentq(lambda x: hopf_locus(x)[1] - target, a, b, xtol=1e-14, rtol=1e-15))


# ---------------------------------------------------------------------------
# real ladder
# ---------------------------------------------------------------------------

class RootSource(str, Enum):
    DELTA1 = "Delta1Root"
    SIN = "SinRoot"


@dataclass(frozen=True)
class SpectrumResult:
    kD: float
    D: float
    lambdas: tuple[float, ...]
    sources: tuple[RootSource, ...]
    branch_index: tuple[int, ...]

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas)
        if lam.size and (np.any(np.diff(lam) <= 0.0) or lam[0] <= math.pi / (2.0 * self.D)):
            raise SpectrumError("ladder is not strictly increasing above pi/(2D)")


def delta1_root_in(j: int, params: FerrofluidParams) -> float:
    """The root of delta1 in R_j = ((2j-1) pi/2, (2j+1) pi/2), j >= 1."""
    if j < 1:
        raise ValueError("j must be >= 1")
    a = (2 * j - 1) * math.pi / 2.0
    b = (2 * j + 1) * math.pi / 2.0
    f = lambda x: delta1(x, params).real  # noqa: E731
    fa, fb = f(a), f(b)
    if fa * fb >= 0.0:
        raise SpectrumError(f"delta1 does not change sign on R_{j}")
    x = brentq(f, a, b, xtol=1e-13, rtol=1e-15)
    # one Newton step on delta2 for the last bits
    cal_m, _ = _require_coeffs(params)
    for _ in range(2):
        g = delta2(x, params).real
        dg = cal_m * (math.tan(x) + x / math.cos(x) ** 2) - 2.0 * x
        step = g / dg
        if abs(step) < 1e-12 and a < x - step < b:
            x -= step
    return float(x)


def real_spectrum(params: FerrofluidParams, n_max: int) -> SpectrumResult:
    """First ``n_max`` positive real eigenvalues, interleaving delta1 roots and j pi/D."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if params.kD is None:
        raise ValueError("params must carry kD")
    D = params.D
    entries: list[tuple[float, RootSource, int]] = []
    j = 1
    while len(entries) < n_max:
        lam_t = delta1_root_in(j, params) / D
        lam_s = j * math.pi / D
        pair = sorted([(lam_t, RootSource.DELTA1, j), (lam_s, RootSource.SIN, j)])
        entries.extend(pair)
        j += 1
    entries = entries[:n_max]
    return SpectrumResult(
        kD=params.kD,
        D=D,
        lambdas=tuple(e[0] for e in entries),
        sources=tuple(e[1] for e in entries),
        branch_index=tuple(e[2] for e in entries),
    )


# ---------------------------------------------------------------------------
# argument principle
# ---------------------------------------------------------------------------

class CountTarget(str, Enum):
    DELTA2 = "Delta2"
    DELTA3 = "Delta3"


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("degenerate rectangle")


def _scaled_sincos(z: complex) -> tuple[complex, complex]:
    """sin z and cos z times exp(-|Im z|); same phase, no overflow."""
    x, y = z.real, z.imag
    ay = abs(y)
    ch = 0.5 * (1.0 + math.exp(-2.0 * ay))
    sh = math.copysign(0.5 * (1.0 - math.exp(-2.0 * ay)), y)
    return complex(math.sin(x) * ch, math.cos(x) * sh), complex(math.cos(x) * ch, -math.sin(x) * sh)


def _entire_form(target: CountTarget, params: FerrofluidParams) -> Callable[[complex], complex]:
    """cos(z) times delta2 or delta3, scaled by exp(-|Im z|).

    Multiplying by cos removes the tan poles without adding zeros: where
    cos z = 0 the product reduces to calM z sin z (or -calM z sin z) != 0.
    """
    cal_m, ups = _require_coeffs(params)
    if target is CountTarget.DELTA2:
        def f(z: complex) -> complex:
            s, c = _scaled_sincos(z)
            return cal_m * z * s - (z * z - ups) * c
    else:
        def f(z: complex) -> complex:
            s, c = _scaled_sincos(z)
            return -z * (cal_m * s - z * c)
    return f


def _boundary(rect: Rectangle) -> list[tuple[complex, complex]]:
    a = complex(rect.x0, rect.y0)
    b = complex(rect.x1, rect.y0)
    c = complex(rect.x1, rect.y1)
    d = complex(rect.x0, rect.y1)
    return [(a, b), (b, c), (c, d), (d, a)]


def _edge_winding(f: Callable[[complex], complex], p: complex, q: complex, n0: int,
                  min_abs: float) -> tuple[float, float]:
    ts = np.linspace(0.0, 1.0, n0 + 1)
    total = 0.0
    smallest = math.inf
    stack = [(float(ts[i]), float(ts[i + 1])) for i in range(n0)][::-1]
    cache: dict[float, complex] = {}

    def val(t: float) -> complex:
        if t not in cache:
            cache[t] = f(p + (q - p) * t)
        return cache[t]

    while stack:
        t0, t1 = stack.pop()
        v0, v1 = val(t0), val(t1)
        smallest = min(smallest, abs(v0), abs(v1))
        if smallest < min_abs:
            raise ContourProximityError(f"|f| = {smallest:.3e} on contour near {p + (q - p) * t0}")
        dphi = cmath.phase(v1 / v0)
        if abs(dphi) > math.pi / 8.0 and t1 - t0 > 1e-12:
            tm = 0.5 * (t0 + t1)
            stack.append((tm, t1))
            stack.append((t0, tm))
            continue
        total += dphi
    return total, smallest


def count_zeros_argument_principle(
    region: Rectangle,
    target: CountTarget | str,
    params: FerrofluidParams,
    *,
    min_abs: float = 1e-8,
    samples_per_edge: int = 64,
) -> int:
    """Number of zeros of delta2 or delta3 inside ``region`` by phase accumulation."""
    f = _entire_form(CountTarget(target), params)
    total = 0.0
    for p, q in _boundary(region):
        w, _ = _edge_winding(f, p, q, samples_per_edge, min_abs)
        total += w
    winding = total / (2.0 * math.pi)
    n = round(winding)
    if abs(winding - n) > 1e-6:
        raise SpectrumError(f"non-integer winding {winding}")
    return int(n)


def ystar_bound(params: FerrofluidParams) -> float:
    """Positive root of |z|^2 - upsilon0 = 4 calM |z|."""
    cal_m, ups = _require_coeffs(params)
    return 2.0 * cal_m + math.sqrt(4.0 * cal_m * cal_m + ups)


def counting_box(j: int, params: FerrofluidParams, *, grow: float = 1.5,
                 max_tries: int = 20) -> Rectangle:
    """K_j = R_j x i[-y*, y*] with y* grown until |delta2| is bounded away from 0 on Im = +-y*."""
    y_star = max(ystar_bound(params), 10.0)
    x0 = (2 * j - 1) * math.pi / 2.0
    x1 = (2 * j + 1) * math.pi / 2.0
    f = _entire_form(CountTarget.DELTA2, params)
    xs = np.linspace(x0, x1, 201)
    for _ in range(max_tries):
        # |delta2| = |f| / |cos z e^{-|y|}| and |cos z| e^{-|y|} <= 1
        if all(abs(f(complex(x, sgn * y_star))) > 1e-6 * y_star * y_star
               for x in xs for sgn in (1.0, -1.0)):
            return Rectangle(x0, x1, -y_star, y_star)
        y_star *= grow
    raise SpectrumError(f"no admissible y* found for K_{j}")
