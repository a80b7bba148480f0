"""Core Bessel solutions, matched amplitudes and leading-order surface profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import specfun as sf
from .coeffs import (
    ConditionError,
    Flag,
    NormalFormCoeffs,
    classify_coeffs,
    compute_coeffs,
)
from .envelope import Envelope, default_canonical, rescale
from .spectrum import FerrofluidParams

QUARTER_PI = math.pi / 4.0


class SingularityError(ValueError):
    """An unbounded core solution was evaluated at r = 0."""


class ConfigurationError(ValueError):
    """Region breakpoints are not strictly increasing."""


# ---------------------------------------------------------------------------
# linear core solutions
# ---------------------------------------------------------------------------

def _radius(r: ArrayLike, allow_zero: bool) -> NDArray[np.float64]:
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("r must be non-negative")
    if not allow_zero and np.any(arr == 0.0):
        raise SingularityError("solution is unbounded at r = 0")
    return arr


def core_solution_V(j: int, k: float, r: ArrayLike) -> NDArray[np.complex128]:
    """V_j(r) as a complex array of shape (2, *r.shape)."""
    if j not in (1, 2, 3, 4):
        raise ValueError("j must be 1..4")
    r = _radius(r, allow_zero=j in (1, 2))
    kr = k * r
    if j in (1, 2):
        z0, z1 = sf.j0(kr), sf.j1(kr)
    else:
        z0, z1 = sf.y0(kr), sf.y1(kr)
    c = math.sqrt(k * math.pi / 2.0)
    if j in (1, 3):
        a = r * z1 + 1j * (z1 / k - r * z0)
        b = z1 - 1j * z0
    else:
        a = z0 + 1j * z1
        b = np.zeros_like(a)
    return c * np.array([a, b])


def core_solution_V_adjoint(j: int, k: float, r: ArrayLike) -> NDArray[np.complex128]:
    """V*_j(r), dual to V_j under the real pairing ``inner``."""
    if j not in (1, 2, 3, 4):
        raise ValueError("j must be 1..4")
    r = _radius(r, allow_zero=j in (3, 4))
    kr = k * r
    c = math.sqrt(k * math.pi / 2.0)
    if j in (1, 2):
        if np.any(r == 0.0):
            raise SingularityError("adjoint of a bounded solution is singular at r = 0")
        z0, z1 = sf.y0(kr), sf.y1(kr)
    else:
        z0, z1 = sf.j0(kr), sf.j1(kr)
    if j == 1:
        return c * np.array([np.zeros_like(r, dtype=complex), r * (z0 + 1j * z1)])
    if j == 3:
        return c * np.array([np.zeros_like(r, dtype=complex), -r * (z0 + 1j * z1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        second = r * r * (z1 - z0 / kr - 1j * z0)
    if j == 2:
        return c * np.array([-r * (z1 - 1j * z0), second])
    return c * np.array([r * (z1 - 1j * z0), -second])


def core_solution_W(j: int, lam: float, r: ArrayLike) -> NDArray[np.float64]:
    """W_{j,n}(r) for eigenvalue ``lam``; shape (2, *r.shape)."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    r = _radius(r, allow_zero=j == 1)
    x = lam * r
    c = math.sqrt(lam / 2.0)
    if j == 1:
        a, b = sf.i0(x), sf.i1(x)
        return c * np.array([a + b, a - b])
    a, b = sf.k0(x), sf.k1(x)
    return c * np.array([a - b, a + b])


def core_solution_W_adjoint(j: int, lam: float, r: ArrayLike) -> NDArray[np.float64]:
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    r = _radius(r, allow_zero=j == 2)
    x = lam * r
    c = math.sqrt(lam / 2.0)
    if j == 1:
        if np.any(r == 0.0):
            raise SingularityError("adjoint of W_1 is singular at r = 0")
        a, b = sf.k0(x), sf.k1(x)
        return c * np.array([r * (b + a), r * (b - a)])
    a, b = sf.i0(x), sf.i1(x)
    return c * np.array([r * (b - a), r * (b + a)])


def inner(x: NDArray, y: NDArray) -> NDArray[np.float64]:
    """<x, y> = (1/2) sum(conj(x) y + x conj(y)) over the first axis."""
    return np.real(np.sum(np.conj(x) * y, axis=0))


# ---------------------------------------------------------------------------
# requests and amplitudes
# ---------------------------------------------------------------------------

class PatternKind(str, Enum):
    SPOT_A = "SpotA"
    SPOT_A_FOLD = "SpotAFold"
    SPOT_B_DOWN = "SpotBDown"
    SPOT_B_UP = "SpotBUp"
    RING_UP = "RingUp"
    RING_DOWN = "RingDown"


class Region(str, Enum):
    CORE = "Core"
    TRANSITION = "Transition"
    TRANSITION_B1 = "TransitionB1"
    TRANSITION_B2 = "TransitionB2"
    RESCALING = "Rescaling"


@dataclass(frozen=True)
class PatternRequest:
    pattern: PatternKind
    params: FerrofluidParams
    eps: float
    r0: Optional[float] = None
    delta0: float = 0.2
    delta1: float = 0.1
    delta2: float = 0.1
    r_grid: Optional[Sequence[float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pattern", PatternKind(self.pattern))
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        for name in ("delta0", "delta1", "delta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.params.kD is None:
            raise ValueError("params must carry kD")

    @property
    def radius0(self) -> float:
        return self.r0 if self.r0 is not None else 20.0 / self.params.k


@dataclass(frozen=True)
class Amplitudes:
    d1: float
    d2: float
    phase: float


@dataclass(frozen=True)
class Piece:
    region: Region
    lo: float
    hi: float
    fn: Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass
class PatternProfile:
    pattern: PatternKind
    r: NDArray[np.float64]
    eta: NDArray[np.float64]
    region: NDArray[np.str_]
    amplitudes: Amplitudes
    meta: dict[str, float] = field(default_factory=dict)
    provenance: str = "matched"


@dataclass
class _Context:
    req: PatternRequest
    coeffs: NormalFormCoeffs
    env: Optional[Envelope]

    @property
    def k(self) -> float:
        return self.req.params.k

    @property
    def two_over_m(self) -> float:
        return 2.0 / self.coeffs.m

    @property
    def q0(self) -> float:
        return self.env.q0 if self.env is not None else math.nan


def _sgn(x: float) -> float:
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def _context(req: PatternRequest, canonical: Optional[Envelope] = None) -> _Context:
    coeffs = compute_coeffs(req.params)
    pat = req.pattern
    if pat is PatternKind.SPOT_A:
        if coeffs.nu == 0.0:
            raise ConditionError("nu = 0 (kD = log(sqrt2+1)): spot A needs nu != 0")
        return _Context(req, coeffs, None)
    if pat is PatternKind.SPOT_A_FOLD:
        if coeffs.c3 <= 0.0:
            raise ConditionError("c3 <= 0: the spot A fold needs c3 > 0")
        _, flags = classify_coeffs(coeffs)
        if Flag.NEAR_FOLD not in flags:
            raise ConditionError("|nu| above the near-fold threshold")
        return _Context(req, coeffs, None)
    if coeffs.c3_tilde >= 0.0:
        raise ConditionError("c3_tilde >= 0: rings/spot B do not exist here")
    if pat in (PatternKind.SPOT_B_DOWN, PatternKind.SPOT_B_UP) and coeffs.nu <= 0.0:
        raise ConditionError("nu <= 0: spot B needs nu > 0")
    canon = canonical if canonical is not None else default_canonical()
    return _Context(req, coeffs, rescale(canon, coeffs.c0, coeffs.c3))


def matched_amplitudes(req: PatternRequest, canonical: Optional[Envelope] = None) -> Amplitudes:
    """Leading-order (d1, d2) and the phase arccos(sgn nu)."""
    return _amplitudes(_context(req, canonical))


def _amplitudes(ctx: _Context) -> Amplitudes:
    c = ctx.coeffs
    eps = ctx.req.eps
    sg = _sgn(c.nu)
    phase = 0.0 if sg > 0 else math.pi
    pat = ctx.req.pattern
    if pat is PatternKind.SPOT_A:
        return Amplitudes(0.0, eps ** 0.5 * sg * math.sqrt(c.c0) / abs(c.nu), phase)
    if pat is PatternKind.SPOT_A_FOLD:
        d2 = sg * math.sqrt(2.0 * math.sqrt(c.c0) / c.c3) * eps ** 0.25 / math.sqrt(abs(math.log(eps)))
        return Amplitudes(0.0, d2, phase)
    if pat in (PatternKind.SPOT_B_DOWN, PatternKind.SPOT_B_UP):
        d2 = -(eps ** 0.375) * sg * math.sqrt(ctx.q0 / abs(c.nu))
        if pat is PatternKind.SPOT_B_UP:
            d2 = -d2
        return Amplitudes(0.0, d2, phase)
    sign = 1.0 if pat is PatternKind.RING_UP else -1.0
    return Amplitudes(sign * eps ** 0.75 * ctx.q0, 0.0, phase)


# ---------------------------------------------------------------------------
# piecewise profiles
# ---------------------------------------------------------------------------

def _cos_phase(k: float, r: NDArray) -> NDArray:
    return np.cos(k * r - QUARTER_PI)


def _sin_phase(k: float, r: NDArray) -> NDArray:
    return np.sin(k * r - QUARTER_PI)


def _envelope_qp(env: Envelope, s: NDArray) -> tuple[NDArray, NDArray]:
    q = env.q_of(s)
    p = env.dq_of(s) + q / (2.0 * s)
    return q, p


def _pieces_spot_a(ctx: _Context) -> list[Piece]:
    c, k, eps = ctx.coeffs, ctx.k, ctx.req.eps
    pref = eps ** 0.5 * _sgn(c.nu) * 2.0 * math.sqrt(c.c0) / (c.m * abs(c.nu))
    r0 = ctx.req.radius0
    r_out = ctx.req.delta0 * eps ** -0.5
    ck = math.sqrt(k * math.pi / 2.0)
    d0 = ctx.req.delta0
    rc0 = math.sqrt(c.c0)
    return [
        Piece(Region.CORE, 0.0, r0, lambda r: pref * ck * sf.j0(k * r)),
        Piece(Region.TRANSITION, r0, r_out, lambda r: pref * _cos_phase(k, r) / np.sqrt(r)),
        Piece(Region.RESCALING, r_out, math.inf,
              lambda r: pref * np.exp(rc0 * (d0 - math.sqrt(eps) * r)) * _cos_phase(k, r) / np.sqrt(r)),
    ]


def _pieces_spot_a_fold(ctx: _Context) -> list[Piece]:
    c, k, eps = ctx.coeffs, ctx.k, ctx.req.eps
    amp = _amplitudes(ctx).d2
    ck = math.sqrt(k * math.pi / 2.0)
    return [Piece(Region.CORE, 0.0, ctx.req.radius0, lambda r: amp * ctx.two_over_m * ck * sf.j0(k * r))]


def spot_b_breakpoints(ctx: _Context) -> tuple[float, float, float, float]:
    req = ctx.req
    eps, d1, d2 = req.eps, req.delta1, req.delta2
    root = math.sqrt(ctx.q0 * abs(ctx.coeffs.nu))
    r_b1 = d2 * eps ** -0.375 / (root * (1.0 - d1) * (1.0 - d2))
    r_b2 = eps ** -0.375 / (d1 * root)
    return req.radius0, r_b1, r_b2, req.delta0 * eps ** -0.5


def _pieces_spot_b(ctx: _Context) -> list[Piece]:
    c, k, eps = ctx.coeffs, ctx.k, ctx.req.eps
    sg = _sgn(c.nu)
    mirror = -1.0 if ctx.req.pattern is PatternKind.SPOT_B_UP else 1.0
    a = mirror * ctx.two_over_m
    q0 = ctx.q0
    d1 = ctx.req.delta1
    ck = math.sqrt(k * math.pi / 2.0)
    small = eps ** 0.375 * math.sqrt(q0 / abs(c.nu))
    big = eps ** 0.75 * q0
    r0, r_b1, r_b2, r_out = spot_b_breakpoints(ctx)
    env = ctx.env
    return [
        Piece(Region.CORE, 0.0, r0, lambda r: -sg * a * small * ck * sf.j0(k * r)),
        Piece(Region.TRANSITION, r0, r_b1, lambda r: -sg * a * small * _cos_phase(k, r) / np.sqrt(r)),
        Piece(Region.TRANSITION_B1, r_b1, r_b2,
              lambda r: -sg * a * (big * (1.0 - d1) * np.sqrt(r) + small / np.sqrt(r)) * _cos_phase(k, r)),
        Piece(Region.TRANSITION_B2, r_b2, r_out, lambda r: -sg * a * big * np.sqrt(r) * _cos_phase(k, r)),
        Piece(Region.RESCALING, r_out, math.inf,
              lambda r: -sg * a * eps ** 0.5 * env.q_of(math.sqrt(eps) * r) * _cos_phase(k, r)),
    ]


def _pieces_ring(ctx: _Context) -> list[Piece]:
    c, k, eps = ctx.coeffs, ctx.k, ctx.req.eps
    sign = 1.0 if ctx.req.pattern is PatternKind.RING_UP else -1.0
    a = sign * eps ** 0.75 * ctx.two_over_m
    q0 = ctx.q0
    bt = c.bD_tilde
    ck = math.sqrt(k * math.pi / 2.0)
    r0 = ctx.req.radius0
    r_out = ctx.req.delta0 * eps ** -0.5
    env = ctx.env

    def rescaling(r: NDArray) -> NDArray:
        q, p = _envelope_qp(env, math.sqrt(eps) * r)
        return a * (eps ** -0.25 * q * _sin_phase(k, r) + bt * eps ** 0.25 * p * _cos_phase(k, r))

    return [
        Piece(Region.CORE, 0.0, r0, lambda r: a * q0 * ck * (r * sf.j1(k * r) + bt * sf.j0(k * r))),
        Piece(Region.TRANSITION, r0, r_out,
              lambda r: a * q0 * (np.sqrt(r) * _sin_phase(k, r) + bt * _cos_phase(k, r) / np.sqrt(r))),
        Piece(Region.RESCALING, r_out, math.inf, rescaling),
    ]


_BUILDERS = {
    PatternKind.SPOT_A: _pieces_spot_a,
    PatternKind.SPOT_A_FOLD: _pieces_spot_a_fold,
    PatternKind.SPOT_B_DOWN: _pieces_spot_b,
    PatternKind.SPOT_B_UP: _pieces_spot_b,
    PatternKind.RING_UP: _pieces_ring,
    PatternKind.RING_DOWN: _pieces_ring,
}


def profile_pieces(req: PatternRequest, canonical: Optional[Envelope] = None,
                   *, check_order: bool = True) -> list[Piece]:
    """The region formulas with their radial extents."""
    ctx = _context(req, canonical)
    pieces = _BUILDERS[req.pattern](ctx)
    if check_order:
        edges = [p.lo for p in pieces] + [pieces[-1].hi]
        if any(b <= a for a, b in zip(edges[:-1], edges[1:])):
            raise ConfigurationError(f"region breakpoints not increasing: {edges}")
    return pieces


def _default_grid(pieces: list[Piece], k: float) -> NDArray[np.float64]:
    last = pieces[-1]
    r_end = last.hi if math.isfinite(last.hi) else 3.0 * last.lo
    n = int(min(max(40.0 * k * r_end / (2.0 * math.pi), 2000), 200000))
    return np.linspace(0.0, r_end, n)


def build_profile(req: PatternRequest, canonical: Optional[Envelope] = None) -> PatternProfile:
    ctx = _context(req, canonical)
    pieces = profile_pieces(req, canonical)
    r = np.asarray(req.r_grid, dtype=float) if req.r_grid is not None else _default_grid(pieces, ctx.k)
    if np.any(r < 0.0):
        raise ValueError("radii must be non-negative")
    # radii outside every piece (beyond a finite last edge) stay NaN
    eta = np.full(r.shape, np.nan)
    region = np.full(r.shape, "", dtype=object)
    for i, piece in enumerate(pieces):
        upper = (r <= piece.hi) if i == len(pieces) - 1 else (r < piece.hi)
        mask = (r >= piece.lo) & upper
        if np.any(mask):
            eta[mask] = piece.fn(r[mask])
            region[mask] = piece.region.value
    amps = _amplitudes(ctx)
    c = ctx.coeffs
    meta = {"c0": c.c0, "c3": c.c3, "nu": c.nu, "m": c.m, "bD_tilde": c.bD_tilde,
            "q0": ctx.q0, "eps": req.eps, "r0": req.radius0, "kD": c.kD}
    provenance = "mirror, not independently matched" if req.pattern is PatternKind.SPOT_B_UP else "matched"
    return PatternProfile(req.pattern, r, eta, region.astype(str), amps, meta, provenance)


def eta_spot_a(req: PatternRequest) -> PatternProfile:
    if req.pattern is not PatternKind.SPOT_A:
        raise ValueError("request is not SpotA")
    return build_profile(req)


def eta_spot_a_fold(req: PatternRequest) -> PatternProfile:
    if req.pattern is not PatternKind.SPOT_A_FOLD:
        raise ValueError("request is not SpotAFold")
    return build_profile(req)


def eta_spot_b(req: PatternRequest, canonical: Optional[Envelope] = None) -> PatternProfile:
    if req.pattern not in (PatternKind.SPOT_B_DOWN, PatternKind.SPOT_B_UP):
        raise ValueError("request is not SpotB")
    return build_profile(req, canonical)


def eta_ring(req: PatternRequest, sign: int = 1, canonical: Optional[Envelope] = None) -> PatternProfile:
    kind = PatternKind.RING_UP if sign > 0 else PatternKind.RING_DOWN
    if req.pattern not in (PatternKind.RING_UP, PatternKind.RING_DOWN):
        raise ValueError("request is not a ring")
    if req.pattern is not kind:
        req = PatternRequest(kind, req.params, req.eps, req.r0, req.delta0, req.delta1, req.delta2, req.r_grid)
    return build_profile(req, canonical)


def core_amplitude(req: PatternRequest, canonical: Optional[Envelope] = None, n: int = 4001) -> float:
    """max |eta| over the core region 0 <= r <= r0."""
    piece = profile_pieces(req, canonical, check_order=False)[0]
    r = np.linspace(0.0, piece.hi, n)
    return float(np.max(np.abs(piece.fn(r))))


def junction_mismatch(req: PatternRequest, index: int = 0, canonical: Optional[Envelope] = None,
                      n: int = 801) -> float:
    """sup |left - right| over one period 2 pi/k starting at breakpoint ``index``."""
    pieces = profile_pieces(req, canonical, check_order=False)
    if not 0 <= index < len(pieces) - 1:
        raise IndexError("no such junction")
    left, right = pieces[index], pieces[index + 1]
    rb = left.hi
    k = req.params.k
    r = np.linspace(rb, rb + 2.0 * math.pi / k, n)
    return float(np.max(np.abs(left.fn(r) - right.fn(r))))
