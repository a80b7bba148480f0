"""Bessel functions J, Y, I, K of orders 0 and 1 for real positive arguments.

Algorithms by regime:

* ``J``/``Y``: power series for ``x <= 2``, Miller backward recurrence with
  Neumann series for ``2 < x < 25``, Hankel asymptotics for ``x >= 25``.
* ``I``: power series for ``x <= 30``, asymptotic series above.
* ``K``: power series for ``x <= 2``, trapezoidal quadrature of
  ``int_0^inf exp(-x cosh t) cosh(n t) dt`` for ``2 < x < 30``, asymptotic
  series above.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

EULER_GAMMA = 0.57721566490153286061
_TWO_OVER_PI = 2.0 / math.pi

_JY_SERIES_MAX = 2.0
_JY_HANKEL_MIN = 25.0
_I_SERIES_MAX = 30.0
_K_SERIES_MAX = 2.0
_K_ASYM_MIN = 30.0
# exp(709.78) is the largest finite double
_I_OVERFLOW = 700.0

_N_SERIES = 40
_MILLER_START = 80


class Family(str, Enum):
    J = "J"
    Y = "Y"
    I = "I"  # noqa: E741
    K = "K"


class Regime(str, Enum):
    SMALL_ARG = "SmallArg"
    LARGE_ARG = "LargeArg"


@dataclass(frozen=True)
class BesselKind:
    family: Family
    order: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.order not in (0, 1):
            raise ValueError(f"only orders 0 and 1 are supported, got {self.order}")

    @classmethod
    def parse(cls, label: str) -> "BesselKind":
        """Build from a label such as ``"J0"`` or ``"K1"``."""
        if len(label) != 2 or not label[1].isdigit():
            raise ValueError(f"bad Bessel label {label!r}")
        return cls(Family(label[0].upper()), int(label[1]))


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------

def _harmonic(n: int) -> float:
    return math.fsum(1.0 / j for j in range(1, n + 1))


# (x^2/4)^k / (k!)^2 and (x^2/4)^k / (k! (k+1)!) are built by recurrence, but
# the digamma sums are fixed numbers
_H = np.array([_harmonic(k) for k in range(_N_SERIES)])
_PSI = -EULER_GAMMA + _H  # psi(k+1)
_PSI_PAIR = _PSI + (-EULER_GAMMA + np.array([_harmonic(k + 1) for k in range(_N_SERIES)]))


def _asym_coeffs(order: int, n: int) -> NDArray[np.float64]:
    """a_k(nu) = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k)."""
    mu = 4.0 * order * order
    out = np.empty(n)
    out[0] = 1.0
    for k in range(1, n):
        out[k] = out[k - 1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
    return out


_ASYM = {0: _asym_coeffs(0, 40), 1: _asym_coeffs(1, 40)}


def _series_terms(x: NDArray[np.float64], sign: float) -> tuple[NDArray, NDArray]:
    """Rows of (sign x^2/4)^k/(k!)^2 and (sign x^2/4)^k/(k!(k+1)!), shape (K, n)."""
    z = sign * x * x / 4.0
    a = np.empty((_N_SERIES, x.size))
    b = np.empty((_N_SERIES, x.size))
    a[0] = 1.0
    b[0] = 1.0
    for k in range(1, _N_SERIES):
        a[k] = a[k - 1] * z / (k * k)
        b[k] = b[k - 1] * z / (k * (k + 1))
    return a, b


# ---------------------------------------------------------------------------
# J and Y
# ---------------------------------------------------------------------------

def _jy_series(x: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    a, b = _series_terms(x, -1.0)
    j0 = a.sum(axis=0)
    j1 = 0.5 * x * b.sum(axis=0)
    lg = np.log(0.5 * x)
    y0 = _TWO_OVER_PI * ((lg + EULER_GAMMA) * j0 - (a[1:] * _H[1:, None]).sum(axis=0))
    y1 = (
        -_TWO_OVER_PI / x
        + _TWO_OVER_PI * lg * j1
        - (0.5 * x / math.pi) * (b * _PSI_PAIR[:, None]).sum(axis=0)
    )
    return j0, j1, y0, y1


def _jy_miller(x: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    n_top = _MILLER_START
    jn = np.zeros((n_top + 2, x.size))
    jn[n_top] = 1e-30
    for n in range(n_top, 0, -1):
        jn[n - 1] = (2.0 * n / x) * jn[n] - jn[n + 1]
    norm = jn[0] + 2.0 * jn[2:n_top + 1:2].sum(axis=0)
    jn /= norm
    j0, j1 = jn[0], jn[1]
    ks = np.arange(1, n_top // 2)
    signs = np.where(ks % 2 == 0, 1.0, -1.0)[:, None]
    even = jn[2 * ks]
    lg = np.log(0.5 * x) + EULER_GAMMA
    y0 = _TWO_OVER_PI * lg * j0 - (4.0 / math.pi) * (signs * even / ks[:, None]).sum(axis=0)
    diff = jn[2 * ks - 1] - jn[2 * ks + 1]
    y1 = (
        -_TWO_OVER_PI * j0 / x
        + _TWO_OVER_PI * lg * j1
        + _TWO_OVER_PI * (signs * diff / ks[:, None]).sum(axis=0)
    )
    return j0, j1, y0, y1


def _hankel_pq(x: NDArray[np.float64], order: int) -> tuple[NDArray, NDArray]:
    coeffs = _ASYM[order]
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    inv = 1.0 / x
    pw = np.ones_like(x)
    for k in range(len(coeffs)):
        term = coeffs[k] * pw
        # P collects even k with sign (-1)^(k/2), Q odd k with (-1)^((k-1)/2)
        if k % 2 == 0:
            p += term if (k // 2) % 2 == 0 else -term
        else:
            q += term if ((k - 1) // 2) % 2 == 0 else -term
        pw = pw * inv
    return p, q


def _jy_hankel(x: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    amp = np.sqrt(_TWO_OVER_PI / x)
    out = []
    for order in (0, 1):
        p, q = _hankel_pq(x, order)
        chi = x - (0.5 * order + 0.25) * math.pi
        c, s = np.cos(chi), np.sin(chi)
        out.append((amp * (p * c - q * s), amp * (p * s + q * c)))
    (j0, y0), (j1, y1) = out
    return j0, j1, y0, y1


def _jy_all(x: NDArray[np.float64]) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    res = [np.full_like(x, np.nan) for _ in range(4)]
    for mask, fn in (
        (x <= _JY_SERIES_MAX, _jy_series),
        ((x > _JY_SERIES_MAX) & (x < _JY_HANKEL_MIN), _jy_miller),
        (x >= _JY_HANKEL_MIN, _jy_hankel),
    ):
        if np.any(mask):
            vals = fn(x[mask])
            for r, v in zip(res, vals):
                r[mask] = v
    return res[0], res[1], res[2], res[3]


# ---------------------------------------------------------------------------
# I and K (exponentially scaled internally)
# ---------------------------------------------------------------------------

def _ie_all(x: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    """exp(-x) I0(x), exp(-x) I1(x)."""
    i0 = np.empty_like(x)
    i1 = np.empty_like(x)
    small = x <= _I_SERIES_MAX
    if np.any(small):
        xs = x[small]
        # the series needs more terms than _N_SERIES at x=30
        z = xs * xs / 4.0
        a = np.ones_like(xs)
        b = np.ones_like(xs)
        sa = a.copy()
        sb = b.copy()
        for k in range(1, 90):
            a = a * z / (k * k)
            b = b * z / (k * (k + 1))
            sa += a
            sb += b
        scale = np.exp(-xs)
        i0[small] = sa * scale
        i1[small] = 0.5 * xs * sb * scale
    big = ~small
    if np.any(big):
        xb = x[big]
        pref = 1.0 / np.sqrt(2.0 * math.pi * xb)
        for order, dest in ((0, i0), (1, i1)):
            coeffs = _ASYM[order]
            acc = np.zeros_like(xb)
            pw = np.ones_like(xb)
            for k in range(len(coeffs)):
                acc += (-1) ** k * coeffs[k] * pw
                pw = pw / xb
            dest[big] = pref * acc
    return i0, i1


# fine enough for the Gaussian-width integrand up to x = 30
_K_STEP = 0.08


def _ke_quadrature(x: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    """exp(x) K0(x), exp(x) K1(x) by trapezoid rule on the cosh integral."""
    # integrand exp(-x (cosh t - 1)); cut off once it drops below 1e-40
    t_max = float(np.arccosh(1.0 + 92.0 / x.min()))
    t = np.arange(0.0, t_max + _K_STEP, _K_STEP)
    w = np.full(t.size, _K_STEP)
    w[0] *= 0.5
    ex = np.exp(-np.outer(x, np.cosh(t) - 1.0))
    k0 = ex @ w
    k1 = ex @ (w * np.cosh(t))
    return k0, k1


def _k_series(x: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    a, b = _series_terms(x, 1.0)
    i0 = a.sum(axis=0)
    i1 = 0.5 * x * b.sum(axis=0)
    lg = np.log(0.5 * x)
    k0 = -(lg + EULER_GAMMA) * i0 + (a[1:] * _H[1:, None]).sum(axis=0)
    k1 = 1.0 / x + lg * i1 - 0.25 * x * (b * _PSI_PAIR[:, None]).sum(axis=0)
    return k0, k1


def _ke_all(x: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= _K_SERIES_MAX
    if np.any(small):
        xs = x[small]
        a, b = _k_series(xs)
        scale = np.exp(xs)
        k0[small] = a * scale
        k1[small] = b * scale
    mid = (~small) & (x < _K_ASYM_MIN)
    if np.any(mid):
        a, b = _ke_quadrature(x[mid])
        k0[mid] = a
        k1[mid] = b
    big = x >= _K_ASYM_MIN
    if np.any(big):
        xb = x[big]
        pref = np.sqrt(math.pi / (2.0 * xb))
        for order, dest in ((0, k0), (1, k1)):
            coeffs = _ASYM[order]
            acc = np.zeros_like(xb)
            pw = np.ones_like(xb)
            for k in range(len(coeffs)):
                acc += coeffs[k] * pw
                pw = pw / xb
            dest[big] = pref * acc
    return k0, k1


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def _prepare(x: ArrayLike, family: Family) -> tuple[NDArray[np.float64], bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(float)
    if np.any(np.isnan(arr)):
        raise ValueError("NaN argument")
    if family in (Family.Y, Family.K):
        if np.any(arr <= 0.0):
            raise ValueError(f"{family.value} is defined only for x > 0")
    elif np.any(arr < 0.0):
        raise ValueError(f"{family.value} is evaluated only for x >= 0")
    return arr, scalar


def _finish(values: NDArray[np.float64], scalar: bool) -> float | NDArray[np.float64]:
    return float(values[0]) if scalar else values


def _eval(family: Family, order: int, x: NDArray[np.float64], scaled: bool) -> NDArray:
    if family in (Family.J, Family.Y):
        # x == 0 only reaches here for J
        out = np.empty_like(x)
        zero = x == 0.0
        out[zero] = 1.0 if order == 0 else 0.0
        if np.any(~zero):
            j0, j1, y0, y1 = _jy_all(x[~zero])
            table = {(Family.J, 0): j0, (Family.J, 1): j1, (Family.Y, 0): y0, (Family.Y, 1): y1}
            out[~zero] = table[(family, order)]
        return out
    if family is Family.I:
        if not scaled and np.any(x > _I_OVERFLOW):
            raise OverflowError(f"I{order}(x) overflows for x > {_I_OVERFLOW}")
        i0, i1 = _ie_all(x)
        res = i0 if order == 0 else i1
        return res if scaled else res * np.exp(x)
    k0, k1 = _ke_all(x)
    res = k0 if order == 0 else k1
    if scaled:
        return res
    with np.errstate(under="ignore"):
        return res * np.exp(-x)


def bessel(kind: BesselKind, x: ArrayLike) -> float | NDArray[np.float64]:
    """Evaluate the Bessel function ``kind`` at real ``x``.

    ``Y`` and ``K`` require ``x > 0``. ``I`` raises :class:`OverflowError`
    rather than returning ``inf`` once ``x`` exceeds 700.
    """
    arr, scalar = _prepare(x, kind.family)
    return _finish(_eval(kind.family, kind.order, arr, scaled=False), scalar)


def bessel_scaled(kind: BesselKind, x: ArrayLike) -> float | NDArray[np.float64]:
    """``exp(-x) I_n(x)`` or ``exp(x) K_n(x)``; other families are unscaled."""
    arr, scalar = _prepare(x, kind.family)
    return _finish(_eval(kind.family, kind.order, arr, scaled=True), scalar)


def j0(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.J, 0), x)


def j1(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.J, 1), x)


def y0(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.Y, 0), x)


def y1(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.Y, 1), x)


def i0(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.I, 0), x)


def i1(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.I, 1), x)


def k0(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.K, 0), x)


def k1(x: ArrayLike) -> float | NDArray[np.float64]:
    return bessel(BesselKind(Family.K, 1), x)


# ---------------------------------------------------------------------------
# leading-order expansions
# ---------------------------------------------------------------------------

SMALL_ARG_MAX = 0.1
LARGE_ARG_MIN = 10.0


def bessel_asymptotic(
    kind: BesselKind,
    x: ArrayLike,
    regime: Regime | Literal["SmallArg", "LargeArg"],
) -> float | NDArray[np.float64]:
    """Leading term of the small- or large-argument expansion, no corrections."""
    regime = Regime(regime)
    arr, scalar = _prepare(x, kind.family)
    if regime is Regime.SMALL_ARG and np.any(arr >= SMALL_ARG_MAX):
        raise ValueError(f"SmallArg expansion requires x < {SMALL_ARG_MAX}")
    if regime is Regime.LARGE_ARG and np.any(arr <= LARGE_ARG_MIN):
        raise ValueError(f"LargeArg expansion requires x > {LARGE_ARG_MIN}")
    fam, n = kind.family, kind.order
    if regime is Regime.SMALL_ARG:
        small = {
            (Family.J, 0): lambda z: np.ones_like(z),
            (Family.J, 1): lambda z: 0.5 * z,
            (Family.Y, 0): lambda z: _TWO_OVER_PI * np.log(z),
            (Family.Y, 1): lambda z: -_TWO_OVER_PI / z,
            (Family.I, 0): lambda z: np.ones_like(z),
            (Family.I, 1): lambda z: 0.5 * z,
            (Family.K, 0): lambda z: -np.log(z),
            (Family.K, 1): lambda z: 1.0 / z,
        }
        return _finish(small[(fam, n)](arr), scalar)
    amp = np.sqrt(_TWO_OVER_PI / arr)
    phase = arr - math.pi / 4.0
    if fam is Family.I and np.any(arr > _I_OVERFLOW):
        raise OverflowError(f"I{n}(x) overflows for x > {_I_OVERFLOW}")
    large = {
        (Family.J, 0): lambda z: amp * np.cos(phase),
        (Family.J, 1): lambda z: amp * np.sin(phase),
        (Family.Y, 0): lambda z: amp * np.sin(phase),
        (Family.Y, 1): lambda z: -amp * np.cos(phase),
        (Family.I, 0): lambda z: np.exp(z) / np.sqrt(2.0 * math.pi * z),
        (Family.I, 1): lambda z: np.exp(z) / np.sqrt(2.0 * math.pi * z),
        (Family.K, 0): lambda z: np.sqrt(math.pi / (2.0 * z)) * np.exp(-z),
        (Family.K, 1): lambda z: np.sqrt(math.pi / (2.0 * z)) * np.exp(-z),
    }
    with np.errstate(under="ignore"):
        return _finish(large[(fam, n)](arr), scalar)
