"""Eigenmodes of the limiting linear operator and the symplectic form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import simpson

from .coeffs import compute_bD, compute_m
from .spectrum import FerrofluidParams, RootSource, SpectrumResult, real_spectrum

DEFAULT_POINTS = 2048


class ModeLabel(str, Enum):
    E = "E"
    F = "F"
    E_PLUS = "EplusN"
    E_MINUS = "EminusN"


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Eigenmode:
    """Six components (psi-, psi+, eta, alpha-, alpha+, gamma) sampled in depth.

    ``psi_m``/``alpha_m`` live on ``y_m`` in [-D, 0]; ``psi_p``/``alpha_p`` on
    ``y_p`` in [0, D]; ``eta`` and ``gamma`` are scalars.
    """

    y_m: NDArray[np.float64]
    y_p: NDArray[np.float64]
    psi_m: NDArray[np.complex128]
    psi_p: NDArray[np.complex128]
    eta: complex
    alpha_m: NDArray[np.complex128]
    alpha_p: NDArray[np.complex128]
    gamma: complex
    label: ModeLabel
    mu: float
    index: int = 0

    def conj(self) -> "Eigenmode":
        return Eigenmode(self.y_m, self.y_p, np.conj(self.psi_m), np.conj(self.psi_p),
                         complex(np.conj(self.eta)), np.conj(self.alpha_m), np.conj(self.alpha_p),
                         complex(np.conj(self.gamma)), self.label, self.mu, self.index)

    def scaled(self, c: complex) -> "Eigenmode":
        return Eigenmode(self.y_m, self.y_p, c * self.psi_m, c * self.psi_p, c * self.eta,
                         c * self.alpha_m, c * self.alpha_p, c * self.gamma, self.label,
                         self.mu, self.index)

    def plus(self, other: "Eigenmode", c: complex = 1.0) -> "Eigenmode":
        """self + c * other."""
        _check_grids(self, other)
        return Eigenmode(self.y_m, self.y_p, self.psi_m + c * other.psi_m,
                         self.psi_p + c * other.psi_p, self.eta + c * other.eta,
                         self.alpha_m + c * other.alpha_m, self.alpha_p + c * other.alpha_p,
                         self.gamma + c * other.gamma, self.label, self.mu, self.index)


def _check_grids(u1: Eigenmode, u2: Eigenmode) -> None:
    if (u1.y_m.shape != u2.y_m.shape or u1.y_p.shape != u2.y_p.shape
            or not np.array_equal(u1.y_m, u2.y_m) or not np.array_equal(u1.y_p, u2.y_p)):
        raise GridMismatchError("modes sampled on different depth grids")
    if u1.mu != u2.mu:
        raise GridMismatchError("modes built for different mu")


def symplectic_form(u1: Eigenmode, u2: Eigenmode) -> complex:
    """mu int(psi1- a2- - a1- psi2-) + int(psi1+ a2+ - a1+ psi2+) - (eta1 g2 - g1 eta2)."""
    _check_grids(u1, u2)
    lower = simpson(u1.psi_m * u2.alpha_m - u1.alpha_m * u2.psi_m, x=u1.y_m)
    upper = simpson(u1.psi_p * u2.alpha_p - u1.alpha_p * u2.psi_p, x=u1.y_p)
    return complex(u1.mu * lower + upper - (u1.eta * u2.gamma - u1.gamma * u2.eta))


def default_points(params: FerrofluidParams) -> int:
    """Interval count per half-layer: DEFAULT_POINTS, raised to 256 per unit kD.

    The centre modes vary like cosh(k y), so Simpson's error grows like (kD/n)^4.
    """
    kd = params.kD if params.kD is not None else 0.0
    return max(DEFAULT_POINTS, 2 * math.ceil(128.0 * kd))


def depth_grids(D: float, n: int = DEFAULT_POINTS) -> tuple[NDArray, NDArray]:
    """Uniform grids with ``n`` intervals (``n`` even) per half-layer."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even number of intervals")
    return np.linspace(-D, 0.0, n + 1), np.linspace(0.0, D, n + 1)


def _require_consistent(params: FerrofluidParams) -> None:
    if params.kD is None or not params.at_locus:
        raise ValueError("params must lie on the locus")
    if not params.physically_consistent:
        raise ValueError("calM must equal mu (mu-1)^2 D/(mu+1) for the modes to be eigenvectors")


def surface_amplitude_factor(params: FerrofluidParams) -> float:
    """2/m: the surface component of a + conj(a) with e's eta entry 1/m."""
    return 2.0 / compute_m(params)


def build_center_modes(params: FerrofluidParams, n: Optional[int] = None,
                       bD: Optional[float] = None) -> tuple[Eigenmode, Eigenmode]:
    """The Jordan pair (e, f) at the eigenvalue ik, f = f~ + i bD e."""
    _require_consistent(params)
    n = default_points(params) if n is None else n
    D, M0, mu = params.D, params.M0, params.mu
    k, x = params.k, params.kD
    m = compute_m(params)
    bD = compute_bD(params) if bD is None else bD
    y_m, y_p = depth_grids(D, n)
    chd = math.cosh(x)
    a = k * (D + y_m)
    b = k * (D - y_p)
    ch_a = np.cosh(a) / chd
    ch_b = np.cosh(b) / chd
    sh_a = np.sinh(a) / chd
    sh_b = np.sinh(b) / chd
    e = Eigenmode(
        y_m, y_p,
        psi_m=(M0 * ch_a / m).astype(complex),
        psi_p=(-mu * M0 * ch_b / m).astype(complex),
        eta=complex(1.0 / m),
        alpha_m=1j * k * M0 * ch_a / m,
        alpha_p=-1j * k * mu * M0 * ch_b / m,
        gamma=complex(1j * k / m),
        label=ModeLabel.E, mu=mu,
    )
    km = k * m
    f_tilde = Eigenmode(
        y_m, y_p,
        psi_m=-1j * M0 * (a * sh_a - ch_a) / km,
        psi_p=1j * mu * M0 * (b * sh_b - ch_b) / km,
        eta=complex(-1j * (x * math.tanh(x) - 1.0) / km),
        alpha_m=(M0 * k * k * (D + y_m) * sh_a / km).astype(complex),
        alpha_p=(-mu * M0 * k * k * (D - y_p) * sh_b / km).astype(complex),
        gamma=complex(k * k * D * math.tanh(x) / km),
        label=ModeLabel.F, mu=mu,
    )
    return e, f_tilde.plus(e, 1j * bD)


def _raw_hyperbolic(params: FerrofluidParams, lam: float, source: RootSource, j: int,
                    sign: int, y_m: NDArray, y_p: NDArray) -> Eigenmode:
    D, M0, mu = params.D, params.M0, params.mu
    label = ModeLabel.E_PLUS if sign > 0 else ModeLabel.E_MINUS
    if source is RootSource.DELTA1:
        ls = sign * lam
        c_m = np.cos(ls * (D + y_m))
        c_p = np.cos(ls * (D - y_p))
        c0 = math.cos(ls * D)
        return Eigenmode(
            y_m, y_p,
            psi_m=(M0 * c_m).astype(complex), psi_p=(-mu * M0 * c_p).astype(complex),
            eta=complex(c0),
            alpha_m=(ls * M0 * c_m).astype(complex), alpha_p=(-ls * mu * M0 * c_p).astype(complex),
            gamma=complex(ls * c0), label=label, mu=mu,
        )
    w = j * math.pi / D
    c_m = np.cos(w * (D + y_m))
    c_p = np.cos(w * (D - y_p))
    return Eigenmode(
        y_m, y_p,
        psi_m=c_m.astype(complex), psi_p=c_p.astype(complex), eta=0j,
        alpha_m=(sign * w * c_m).astype(complex), alpha_p=(sign * w * c_p).astype(complex),
        gamma=0j, label=label, mu=mu,
    )


def build_hyperbolic_mode(params: FerrofluidParams, n: int, sign: int,
                          spectrum: Optional[SpectrumResult] = None,
                          points: Optional[int] = None) -> Eigenmode:
    """e_{+n} (sign=+1) or e_{-n} (sign=-1), normalised so Omega(e_{-n}, e_{+n}) = 1.

    With N = Omega of the unnormalised pair, e_{+n} is divided by sqrt|N| and
    e_{-n} by sign(N) sqrt|N|.
    """
    _require_consistent(params)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if spectrum is None:
        spectrum = real_spectrum(params, n)
    if not 1 <= n <= len(spectrum.lambdas):
        raise IndexError(f"mode index {n} outside ladder of length {len(spectrum.lambdas)}")
    lam = spectrum.lambdas[n - 1]
    source = spectrum.sources[n - 1]
    j = spectrum.branch_index[n - 1]
    y_m, y_p = depth_grids(params.D, default_points(params) if points is None else points)
    plus = _raw_hyperbolic(params, lam, source, j, 1, y_m, y_p)
    minus = _raw_hyperbolic(params, lam, source, j, -1, y_m, y_p)
    norm = symplectic_form(minus, plus).real
    if norm == 0.0:
        raise ArithmeticError("degenerate hyperbolic pair")
    scale = math.sqrt(abs(norm))
    chosen = plus if sign > 0 else minus
    c = scale if sign > 0 else math.copysign(scale, norm)
    out = chosen.scaled(1.0 / c)
    return Eigenmode(out.y_m, out.y_p, out.psi_m, out.psi_p, out.eta, out.alpha_m, out.alpha_p,
                     out.gamma, out.label, out.mu, n)


def hyperbolic_norm_sign(params: FerrofluidParams, n: int,
                         spectrum: Optional[SpectrumResult] = None) -> int:
    """Sign of Omega(e^-, e^+) before normalisation."""
    if spectrum is None:
        spectrum = real_spectrum(params, n)
    y_m, y_p = depth_grids(params.D, default_points(params))
    lam, src, j = spectrum.lambdas[n - 1], spectrum.sources[n - 1], spectrum.branch_index[n - 1]
    plus = _raw_hyperbolic(params, lam, src, j, 1, y_m, y_p)
    minus = _raw_hyperbolic(params, lam, src, j, -1, y_m, y_p)
    return 1 if symplectic_form(minus, plus).real > 0 else -1


# ---------------------------------------------------------------------------
# operator action for residual checks
# ---------------------------------------------------------------------------

def _d2(f: NDArray, h: float) -> NDArray:
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (h * h)
    return out


def _d1_end(f: NDArray, h: float, at_end: bool) -> complex:
    """Second-order one-sided derivative at the first (or last) sample."""
    if at_end:
        return (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)


def apply_l_infinity(u: Eigenmode, params: FerrofluidParams) -> Eigenmode:
    """Discrete action of the limiting operator (1/r terms dropped)."""
    h_m = u.y_m[1] - u.y_m[0]
    h_p = u.y_p[1] - u.y_p[0]
    ups = params.upsilon0 / params.D ** 2
    dpsi_top = _d1_end(u.psi_m, h_m, at_end=True)
    return Eigenmode(
        u.y_m, u.y_p,
        psi_m=u.alpha_m, psi_p=u.alpha_p, eta=u.gamma,
        alpha_m=-_d2(u.psi_m, h_m), alpha_p=-_d2(u.psi_p, h_p),
        gamma=ups * u.eta - (u.mu - 1.0) * u.mu * dpsi_top,
        label=u.label, mu=u.mu, index=u.index,
    )


def boundary_residuals(u: Eigenmode) -> tuple[complex, complex, complex, complex]:
    """Linearised boundary operator: bottom, top, interface flux, interface jump."""
    h_m = u.y_m[1] - u.y_m[0]
    h_p = u.y_p[1] - u.y_p[0]
    bottom = _d1_end(u.psi_m, h_m, at_end=False)
    top = _d1_end(u.psi_p, h_p, at_end=True)
    flux = u.mu * _d1_end(u.psi_m, h_m, at_end=True) - _d1_end(u.psi_p, h_p, at_end=False)
    jump = u.alpha_m[-1] - u.alpha_p[0] - (u.mu - 1.0) * u.gamma
    return bottom, top, flux, jump


def mode_residual(lhs: Eigenmode, rhs: Eigenmode) -> float:
    """Max abs difference over all sampled components."""
    _check_grids(lhs, rhs)
    parts = [
        np.max(np.abs(lhs.psi_m - rhs.psi_m)), np.max(np.abs(lhs.psi_p - rhs.psi_p)),
        abs(lhs.eta - rhs.eta), np.max(np.abs(lhs.alpha_m - rhs.alpha_m)),
        np.max(np.abs(lhs.alpha_p - rhs.alpha_p)), abs(lhs.gamma - rhs.gamma),
    ]
    return float(max(parts))


def jordan_chain_residuals(params: FerrofluidParams, n: Optional[int] = None,
                           bD: Optional[float] = None) -> tuple[float, float]:
    """max|L e - ik e| and max|L f - ik f - e|."""
    e, f = build_center_modes(params, n, bD)
    ik = 1j * params.k
    le = apply_l_infinity(e, params)
    lf = apply_l_infinity(f, params)
    return mode_residual(le, e.scaled(ik)), mode_residual(lf, f.scaled(ik).plus(e))
