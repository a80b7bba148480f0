"""Independent residual checks, Bessel moment quadrature and scaling fits.

Derivatives here come from Richardson-extrapolated central differences and
integrals from Gauss-Legendre panels, so nothing is shared with the formula
modules except the Bessel functions themselves.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad

from . import specfun as sf
from .coeffs import boundary_m2, compute_coeffs, nu_from_integrals, nu_integrals
from .envelope import Envelope, default_canonical, rescale
from .modes import apply_l_infinity, build_center_modes, mode_residual, symplectic_form
from .profiles import (
    PatternKind,
    PatternRequest,
    core_amplitude,
    core_solution_V,
    core_solution_W,
)
from .spectrum import FerrofluidParams, hopf_locus, locus_residual, real_spectrum


class QuadratureError(RuntimeError):
    pass


class ResidualTarget(str, Enum):
    CORE_V = "CoreV"
    CORE_W = "CoreW"
    ENVELOPE_Q = "EnvelopeQ"
    GL_FORMAL = "GLFormal"
    MODES_JORDAN_CHAIN = "ModesJordanChain"


@dataclass(frozen=True)
class VerifyConfig:
    core_tol: float = 1e-8
    envelope_tol: float = 1e-8
    gl_tol: float = 1e-6
    jordan_tol: float = 1e-5
    moment_const: float = 3.0
    moment_accel_tol: float = 1e-9
    fd_scale: float = 1e-3


DEFAULT_CONFIG = VerifyConfig()


@dataclass(frozen=True)
class ResidualReport:
    target: ResidualTarget
    max_residual: float
    grid_spec: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {"target": self.target.value, "max_residual": self.max_residual,
                "grid_spec": self.grid_spec, "tolerance": self.tolerance, "pass": self.passed}


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def richardson_derivative(f: Callable[[NDArray], NDArray], x: NDArray, h: NDArray | float,
                          levels: int = 3) -> NDArray:
    """Central differences at h, h/2, ... combined in a Richardson table."""
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    table = []
    for i in range(levels):
        hi = h / 2 ** i
        table.append((f(x + hi) - f(x - hi)) / (2.0 * hi))
    for j in range(1, levels):
        factor = 4.0 ** j
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0]


# ---------------------------------------------------------------------------
# core solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Perturbation:
    """Multiply one coefficient of a formula by (1 + rel)."""

    name: str
    rel: float = 1e-3


def _v_fn(j: int, k: float, pert: Optional[Perturbation]) -> Callable[[NDArray], NDArray]:
    if pert is not None and pert.name == f"V{j}":
        # scale the imaginary part of the first component
        def f(r: NDArray) -> NDArray:
            v = core_solution_V(j, k, r)
            v[0] = v[0].real + 1j * (1.0 + pert.rel) * v[0].imag
            return v
        return f
    return lambda r: core_solution_V(j, k, r)


def _w_fn(j: int, lam: float, pert: Optional[Perturbation]) -> Callable[[NDArray], NDArray]:
    if pert is not None and pert.name == f"W{j}":
        def f(r: NDArray) -> NDArray:
            w = core_solution_W(j, lam, r)
            w[1] = (1.0 + pert.rel) * w[1]
            return w
        return f
    return lambda r: core_solution_W(j, lam, r)


def _weighted(res: NDArray, terms: Sequence[NDArray]) -> float:
    scale = sum(np.abs(t) for t in terms)
    return float(np.max(np.abs(res) / np.maximum(1.0, scale)))


def core_v_residual(j: int, k: float, r: NDArray, *, h_scale: float = 1e-3,
                    perturb: Optional[Perturbation] = None) -> float:
    """Residual of V_j in a' = ika + b - (a - conj a)/(2r), b' = ikb - (b + conj b)/(2r)."""
    f = _v_fn(j, k, perturb)
    h = h_scale * np.minimum(r, 1.0 / k)
    dv = richardson_derivative(f, r, h)
    a, b = f(r)
    ta = [1j * k * a, b, -(a - np.conj(a)) / (2.0 * r)]
    tb = [1j * k * b, -(b + np.conj(b)) / (2.0 * r)]
    return max(_weighted(dv[0] - sum(ta), [dv[0], *ta]), _weighted(dv[1] - sum(tb), [dv[1], *tb]))


def core_w_residual(j: int, lam: float, r: NDArray, *, h_scale: float = 1e-3,
                    perturb: Optional[Perturbation] = None) -> float:
    """Relative residual of W_{j,n} in the (a_n, a_-n) pair."""
    f = _w_fn(j, lam, perturb)
    h = h_scale * np.minimum(r, 1.0 / lam)
    dw = richardson_derivative(f, r, h)
    p, m = f(r)
    coup = (p - m) / (2.0 * r)
    tp = [lam * p, -coup]
    tm = [-lam * m, coup]
    worst = 0.0
    for d, t in ((dw[0], tp), (dw[1], tm)):
        scale = np.abs(d) + sum(np.abs(x) for x in t)
        worst = max(worst, float(np.max(np.abs(d - sum(t)) / scale)))
    return worst


def check_core_odes(params: FerrofluidParams, r_range: tuple[float, float] = (0.1, 50.0), *,
                    n_points: int = 200, n_modes: int = 5, perturb: Optional[Perturbation] = None,
                    config: VerifyConfig = DEFAULT_CONFIG) -> list[ResidualReport]:
    """Substitute V_1..V_4 and W_{1,n}, W_{2,n} (n = 1..n_modes) into their ODE pairs."""
    lo, hi = r_range
    if not 0.0 < lo < hi:
        raise ValueError("r_range must lie in (0, inf)")
    k = params.k
    r = np.geomspace(lo, hi, n_points)
    v_res = max(core_v_residual(j, k, r, h_scale=config.fd_scale, perturb=perturb) for j in (1, 2, 3, 4))
    lams = real_spectrum(params, n_modes).lambdas
    w_res = 0.0
    for lam in lams:
        # keep K_0(lam r) above underflow
        rw = r[lam * r <= 600.0]
        for j in (1, 2):
            w_res = max(w_res, core_w_residual(j, lam, rw, h_scale=config.fd_scale, perturb=perturb))
    spec = f"r in [{lo}, {hi}], {n_points} geometric points"
    return [
        ResidualReport(ResidualTarget.CORE_V, v_res, spec + "; weighted |res|/max(1, sum|terms|)",
                       config.core_tol),
        ResidualReport(ResidualTarget.CORE_W, w_res, spec + f"; n = 1..{n_modes}, lam r <= 600; relative",
                       config.core_tol),
    ]


# ---------------------------------------------------------------------------
# envelope and formal Ginzburg-Landau operator
# ---------------------------------------------------------------------------

def _envelope_terms(env: Envelope, s: NDArray, c0: float, c3: float, h: float) -> tuple[NDArray, NDArray]:
    d2 = richardson_derivative(env.dq_of, s, np.minimum(h, s / 20.0))
    q = env.q_of(s)
    dq = env.dq_of(s)
    terms = [d2, dq / s, -q / (4.0 * s * s), -c0 * q, -c3 * q ** 3]
    return sum(terms), sum(np.abs(t) for t in terms)


def check_envelope(env: Optional[Envelope] = None, s_range: tuple[float, float] = (0.05, 12.0), *,
                   n_points: int = 300, perturb: Optional[Perturbation] = None,
                   config: VerifyConfig = DEFAULT_CONFIG) -> ResidualReport:
    """Weighted residual |res|/(1 + sum|terms|) of the envelope ODE."""
    env = env if env is not None else default_canonical()
    c0, c3 = env.c0, env.c3
    if perturb is not None and perturb.name == "c0":
        c0 *= 1.0 + perturb.rel
    if perturb is not None and perturb.name == "c3":
        c3 *= 1.0 + perturb.rel
    s = np.linspace(s_range[0], s_range[1], n_points) / env.rate
    res, scale = _envelope_terms(env, s, c0, c3, 0.02 / env.rate)
    worst = float(np.max(np.abs(res) / (1.0 + scale)))
    return ResidualReport(ResidualTarget.ENVELOPE_Q, worst,
                          f"canonical s in {s_range}, {n_points} points", config.envelope_tol)


def check_gl_formal(params: FerrofluidParams, eps: float, *, delta0: float = 0.2, n_points: int = 300,
                    canonical: Optional[Envelope] = None, perturb: Optional[Perturbation] = None,
                    config: VerifyConfig = DEFAULT_CONFIG) -> ResidualReport:
    """Relative residual of A = eps^(1/2) q(eps^(1/2) r) in the formal GL operator."""
    c = compute_coeffs(params)
    if c.c3_tilde >= 0.0:
        raise ValueError("formal GL check needs c3_tilde < 0")
    env = rescale(canonical if canonical is not None else default_canonical(), c.c0, c.c3)
    c0, c3 = c.c0, c.c3
    if perturb is not None and perturb.name == "c3":
        c3 *= 1.0 + perturb.rel
    if perturb is not None and perturb.name == "c3_sign":
        c3 = -c3
    se = math.sqrt(eps)
    amp = lambda r: se * env.q_of(se * r)  # noqa: E731
    damp = lambda r: eps * env.dq_of(se * r)  # noqa: E731
    r = np.linspace(delta0 / se, 5.0 / se, n_points)
    d2 = richardson_derivative(damp, r, 0.02 / (se * env.rate))
    a = amp(r)
    terms = [d2, damp(r) / r, -a / (4.0 * r * r), -c0 * eps * a, -c3 * a ** 3]
    res = sum(terms)
    worst = float(np.max(np.abs(res) / sum(np.abs(t) for t in terms)))
    return ResidualReport(ResidualTarget.GL_FORMAL, worst,
                          f"r in [{delta0}, 5] eps^-1/2, eps={eps}, {n_points} points; relative",
                          config.gl_tol)


# ---------------------------------------------------------------------------
# eigenmodes
# ---------------------------------------------------------------------------

def check_jordan_chain(params: FerrofluidParams, n: int = 16384, *, perturb: Optional[Perturbation] = None,
                       config: VerifyConfig = DEFAULT_CONFIG) -> ResidualReport:
    """max(|L e - ik e|, |L f - ik f - e|) relative to max|L e|."""
    e, f = build_center_modes(params, n)
    if perturb is not None and perturb.name == "psi":
        e = e.__class__(**{**e.__dict__, "psi_m": e.psi_m * (1.0 + perturb.rel)})
    ik = 1j * params.k
    le = apply_l_infinity(e, params)
    lf = apply_l_infinity(f, params)
    scale = max(np.max(np.abs(le.psi_m)), np.max(np.abs(le.alpha_m)), abs(le.gamma))
    res = max(mode_residual(le, e.scaled(ik)), mode_residual(lf, f.scaled(ik).plus(e))) / scale
    return ResidualReport(ResidualTarget.MODES_JORDAN_CHAIN, float(res),
                          f"{n} depth points per layer; relative to max|L e|", config.jordan_tol)


def symplectic_defect(params: FerrofluidParams, n: Optional[int] = None, bD: Optional[float] = None) -> float:
    """max |Omega(f, conj e) - 1|, |Omega(e, conj f) + 1|, |Omega(f, conj f)|."""
    e, f = build_center_modes(params, n, bD)
    return max(abs(symplectic_form(f, e.conj()) - 1.0), abs(symplectic_form(e, f.conj()) + 1.0),
               abs(symplectic_form(f, f.conj())))


# ---------------------------------------------------------------------------
# nu integrals by quadrature
# ---------------------------------------------------------------------------

def nu_integrals_quadrature(params: FerrofluidParams) -> tuple[float, float, float, float]:
    """I_1..I_4 of j(y) = cosh(k(D+y))/cosh(kD) by adaptive quadrature."""
    k, D = params.k, params.D
    decay = math.exp(-2.0 * k * D)

    def j(y: float) -> float:
        return (math.exp(k * y) + math.exp(-k * (2.0 * D + y))) / (1.0 + decay)

    def dj(y: float) -> float:
        return k * (math.exp(k * y) - math.exp(-k * (2.0 * D + y))) / (1.0 + decay)

    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    i1 = quad(lambda y: j(y) ** 2, -D, 0.0, **opts)[0]
    i2 = quad(lambda y: dj(y) ** 2, -D, 0.0, **opts)[0]
    i3 = quad(lambda y: (D + y) / D * j(y) * dj(y), -D, 0.0, **opts)[0]
    i4 = quad(j, -D, 0.0, **opts)[0]
    return i1, i2, i3, i4


# ---------------------------------------------------------------------------
# Bessel moments
# ---------------------------------------------------------------------------

MOMENT_CONSTANTS = {"J0_eta2": 2.0, "J0_gamma2": 1.0, "J1_eta_gamma": -1.0, "J1_gamma2": 1.5}

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def j0_zeros(count: int) -> NDArray[np.float64]:
    """First ``count`` positive zeros of J_0 by Newton from McMahon's estimate."""
    out = np.empty(count)
    for m in range(1, count + 1):
        beta = (m - 0.25) * math.pi
        t = beta + 1.0 / (8.0 * beta)
        for _ in range(8):
            step = sf.j0(t) / sf.j1(t)
            t += step
            if abs(step) < 1e-15 * t:
                break
        out[m - 1] = t
    return out


def _moment_integrand(name: str, k: float, rel: float) -> Callable[[NDArray], NDArray]:
    # eta = J0(ks), gamma = -k J1(ks)
    def g(s: NDArray) -> NDArray:
        x = k * s
        j0, j1 = sf.j0(x), sf.j1(x)
        if name == "J0_eta2":
            v = s * j0 * k * j0 * j0
        elif name == "J0_gamma2":
            v = s * j0 * (k * j1) ** 2 / k
        elif name == "J1_eta_gamma":
            v = s * j1 * j0 * (-k * j1)
        else:
            v = j1 * (k * j1) ** 2 / k ** 2
        return v * (1.0 + rel)
    return g


@dataclass(frozen=True)
class MomentResult:
    name: str
    constant: float
    truncated: float
    accelerated: float
    tolerance: float
    accel_tolerance: float

    @property
    def passed(self) -> bool:
        return (abs(self.truncated - self.constant) <= self.tolerance
                and abs(self.accelerated - self.constant) <= self.accel_tolerance)


@dataclass(frozen=True)
class MomentReport:
    k: float
    R: float
    results: tuple[MomentResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "R": self.R, "pass": self.passed,
                "results": [{**asdict(r), "pass": r.passed} for r in self.results]}


def check_bessel_moments(k: float, R: Optional[float] = None, *, perturb: Optional[Perturbation] = None,
                         config: VerifyConfig = DEFAULT_CONFIG) -> MomentReport:
    """The four moments on [0, R], raw and accelerated, against their constants."""
    R = 200.0 / k if R is None else R
    if R < 50.0 / k:
        raise ValueError("R must be at least 50/k")
    zeros = j0_zeros(int(k * R / math.pi) + 2) / k
    zeros = zeros[zeros < R]
    edges = np.concatenate([[0.0], zeros])
    results = []
    for name, num in MOMENT_CONSTANTS.items():
        rel = perturb.rel if perturb is not None and perturb.name == name else 0.0
        g = _moment_integrand(name, k, rel)
        a, b = edges[:-1], edges[1:]
        nodes = 0.5 * (b - a)[:, None] * _GL_X[None, :] + 0.5 * (a + b)[:, None]
        panels = 0.5 * (b - a) * np.sum(_GL_W[None, :] * g(nodes), axis=1)
        tail_nodes = 0.5 * (R - b[-1]) * _GL_X + 0.5 * (R + b[-1])
        tail = 0.5 * (R - b[-1]) * np.sum(_GL_W * g(tail_nodes))
        partial = np.cumsum(panels)
        truncated = float(partial[-1] + tail)
        seq = partial[-40:]
        for _ in range(20):
            seq = 0.5 * (seq[1:] + seq[:-1])
        if abs(seq[-1] - seq[-2]) > 1e-8 / k:
            raise QuadratureError(f"{name}: averaged partial sums not settled")
        const = num / (math.pi * k * math.sqrt(3.0))
        results.append(MomentResult(name, const, truncated, float(seq[-1]),
                                    config.moment_const / math.sqrt(R),
                                    config.moment_accel_tol * abs(const)))
    return MomentReport(k, R, tuple(results))


# ---------------------------------------------------------------------------
# scaling exponents
# ---------------------------------------------------------------------------

def default_eps_list() -> list[float]:
    """1e-6 .. 1e-3, five points per decade."""
    return [float(x) for x in np.logspace(-6, -3, 16)]


def default_pattern_params(pattern: PatternKind) -> FerrofluidParams:
    pattern = PatternKind(pattern)
    if pattern is PatternKind.SPOT_A:
        return FerrofluidParams.from_physical(1.0, 0.5)
    if pattern is PatternKind.SPOT_A_FOLD:
        return FerrofluidParams.from_physical(1.0, boundary_m2(1.0) + 1e-4)
    return FerrofluidParams.from_physical(1.0, 0.6)


def fit_scaling_exponent(pattern: PatternKind, eps_list: Optional[Sequence[float]] = None,
                         params: Optional[FerrofluidParams] = None,
                         canonical: Optional[Envelope] = None) -> tuple[float, bool]:
    """Least-squares slope of log(max core |eta|) against log eps.

    The fold variant is fitted after dividing out |log eps|^(-1/2); the
    returned flag says whether that correction was applied.
    """
    pattern = PatternKind(pattern)
    eps = np.asarray(eps_list if eps_list is not None else default_eps_list(), dtype=float)
    if eps.size < 5 or math.log10(eps.max() / eps.min()) < 3.0 - 1e-9:
        raise ValueError("need at least 5 eps values spanning 3 decades")
    params = params if params is not None else default_pattern_params(pattern)
    amps = np.array([core_amplitude(PatternRequest(pattern, params, float(e)), canonical) for e in eps])
    log_corr = pattern is PatternKind.SPOT_A_FOLD
    if log_corr:
        amps = amps * np.sqrt(np.abs(np.log(eps)))
    slope = np.polyfit(np.log(eps), np.log(amps), 1)[0]
    return float(slope), log_corr


# ---------------------------------------------------------------------------
# negative controls and report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlOutcome:
    name: str
    baseline: float
    perturbed: float
    tolerance: float

    @property
    def tripped(self) -> bool:
        return self.baseline <= self.tolerance < self.perturbed


def negative_controls(params: Optional[FerrofluidParams] = None, rel: float = 1e-3) -> list[ControlOutcome]:
    """Inject a relative error ``rel`` into each formula and rerun its check."""
    p = params if params is not None else FerrofluidParams.from_physical(1.0, 0.6)
    cfg = DEFAULT_CONFIG
    out: list[ControlOutcome] = []

    for name, idx in (("V2", 0), ("W1", 1)):
        base = check_core_odes(p)[idx]
        pert = check_core_odes(p, perturb=Perturbation(name, rel))[idx]
        out.append(ControlOutcome(f"core {name}", base.max_residual, pert.max_residual, base.tolerance))

    base = check_envelope()
    pert = check_envelope(perturb=Perturbation("c0", rel))
    out.append(ControlOutcome("envelope c0", base.max_residual, pert.max_residual, base.tolerance))

    base = check_gl_formal(p, 1e-4)
    pert = check_gl_formal(p, 1e-4, perturb=Perturbation("c3", rel))
    out.append(ControlOutcome("formal GL c3", base.max_residual, pert.max_residual, base.tolerance))

    base = check_jordan_chain(p)
    pert = check_jordan_chain(p, perturb=Perturbation("psi", rel))
    out.append(ControlOutcome("Jordan chain psi", base.max_residual, pert.max_residual, base.tolerance))

    c = compute_coeffs(p)
    out.append(ControlOutcome("symplectic bD", symplectic_defect(p),
                              symplectic_defect(p, bD=c.bD * (1.0 + rel)), 1e-8))

    ints = nu_integrals(p)
    closed = c.nu
    bad = (ints[0] * (1.0 + rel),) + tuple(ints[1:])
    out.append(ControlOutcome("nu integral I1", abs(nu_from_integrals(p) / closed - 1.0),
                              abs(nu_from_integrals(p, bad) / closed - 1.0), 1e-12))

    def locus_defect(ups_rel: float) -> float:
        f, df = locus_residual(p.kD, p.kD)
        # upsilon_H enters f additively, so a relative shift moves f by rel * upsilon_H
        ups_h = hopf_locus(p.kD)[0]
        return max(abs(f - ups_rel * ups_h), abs(df))

    out.append(ControlOutcome("Hopf locus upsilon", locus_defect(0.0), locus_defect(rel), 1e-10))

    mom = check_bessel_moments(p.k)
    for name in MOMENT_CONSTANTS:
        bres = next(r for r in mom.results if r.name == name)
        pres = next(r for r in check_bessel_moments(p.k, perturb=Perturbation(name, rel)).results
                    if r.name == name)
        out.append(ControlOutcome(f"moment {name}", abs(bres.accelerated - bres.constant),
                                  abs(pres.accelerated - pres.constant), bres.accel_tolerance))
    return out


@dataclass
class VerificationSummary:
    residuals: list[ResidualReport]
    moments: MomentReport
    exponents: dict[str, float]
    controls: list[ControlOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (all(r.passed for r in self.residuals) and self.moments.passed
                and all(c.tripped for c in self.controls))

    def to_json(self) -> str:
        doc = {
            "pass": self.passed,
            "residuals": [r.to_dict() for r in self.residuals],
            "moments": self.moments.to_dict(),
            "exponents": self.exponents,
            "negative_controls": [{**asdict(c), "tripped": c.tripped} for c in self.controls],
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=float)


def run_all(params: Optional[FerrofluidParams] = None, *, with_controls: bool = True,
            workers: int = 4, config: VerifyConfig = DEFAULT_CONFIG) -> VerificationSummary:
    """Every check at its default settings; independent checks run in parallel."""
    p = params if params is not None else FerrofluidParams.from_physical(1.0, 0.6)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        core = pool.submit(check_core_odes, p, config=config)
        env = pool.submit(check_envelope, config=config)
        gl = pool.submit(check_gl_formal, p, 1e-4, config=config)
        jc = pool.submit(check_jordan_chain, p, config=config)
        mom = pool.submit(check_bessel_moments, p.k, config=config)
        exps = {kind.value: pool.submit(fit_scaling_exponent, kind)
                for kind in (PatternKind.SPOT_A, PatternKind.SPOT_B_DOWN, PatternKind.RING_UP,
                             PatternKind.SPOT_A_FOLD)}
        residuals = [*core.result(), env.result(), gl.result(), jc.result()]
        exponents = {name: fut.result()[0] for name, fut in sorted(exps.items())}
        moments = mom.result()
    controls = negative_controls(p) if with_controls else []
    return VerificationSummary(residuals, moments, exponents, controls)
