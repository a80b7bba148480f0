"""Bounded solution of the radial real Ginzburg-Landau equation.

    q'' = -q'/s + q/(4 s^2) + c0 q + c3 q^3,    c0 > 0 > c3,

with q ~ q0 s^(1/2) at the core and q ~ q+ exp(-sqrt(c0) s)/sqrt(s) far out.
The canonical case c0 = 1, c3 = -1 is found by shooting on q0; any other
(c0, c3) follows from the scaling q(s) = sqrt(c0/|c3|) q_can(sqrt(c0) s).
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

log = logging.getLogger(__name__)

CACHE_FORMAT = "ferrospot-envelope"
CACHE_VERSION = 1

S_MIN = 1e-4
S_MAX = 15.0
RTOL = 1e-10
ATOL = 1e-12
# shooting runs past S_MAX so that every trial settles into one of the two outcomes
_S_CLASSIFY = 40.0
_DIVERGE_REL = 1e-7


class EnvelopeError(RuntimeError):
    pass


class CacheError(EnvelopeError):
    pass


def _rhs(s: float, u: NDArray, c0: float, c3: float) -> list[float]:
    q, dq = u
    return [dq, -dq / s + q / (4.0 * s * s) + c0 * q + c3 * q ** 3]


def core_seed(q0: float, s: float, c0: float = 1.0, c3: float = -1.0) -> tuple[float, float]:
    """q and q' from q0 s^(1/2) (1 + c0 s^2/6 + c3 q0^2 s^3/12)."""
    a2 = c0 / 6.0
    a3 = c3 * q0 * q0 / 12.0
    rs = math.sqrt(s)
    poly = 1.0 + a2 * s * s + a3 * s ** 3
    dpoly = 2.0 * a2 * s + 3.0 * a3 * s * s
    return q0 * rs * poly, q0 * (0.5 / rs * poly + rs * dpoly)


def _zero_event(s: float, u: NDArray, *_: Any) -> float:
    return u[0]


_zero_event.terminal = True  # type: ignore[attr-defined]
_zero_event.direction = -1  # type: ignore[attr-defined]


def _turn_event(s: float, u: NDArray, *_: Any) -> float:
    return u[1]


_turn_event.terminal = True  # type: ignore[attr-defined]
_turn_event.direction = 1  # type: ignore[attr-defined]


def _integrate(q0: float, s_end: float, c0: float, c3: float, s_min: float,
               rtol: float, atol: float, events: bool):
    y0 = core_seed(q0, s_min, c0, c3)
    return solve_ivp(
        _rhs, (s_min, s_end), y0, method="DOP853", rtol=rtol, atol=atol,
        args=(c0, c3), dense_output=True,
        events=[_zero_event, _turn_event] if events else None,
    )


def classify_shot(q0: float, *, c0: float = 1.0, c3: float = -1.0, s_min: float = S_MIN,
                  s_end: float = _S_CLASSIFY, rtol: float = RTOL, atol: float = ATOL) -> int:
    """+1 if the trajectory crosses zero (q0 too large), -1 if it turns back up (too small), 0 if neither."""
    sol = _integrate(q0, s_end, c0, c3, s_min, rtol, atol, events=True)
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    return 0


@dataclass(frozen=True)
class ShootingRecord:
    lo: float
    hi: float
    history: tuple[tuple[float, int], ...]

    def monotone(self) -> bool:
        lows = [q for q, o in self.history if o < 0]
        highs = [q for q, o in self.history if o > 0]
        return not lows or not highs or max(lows) < min(highs)


def shoot(*, c0: float = 1.0, c3: float = -1.0, s_min: float = S_MIN, rtol: float = RTOL,
          atol: float = ATOL, lo: float = 0.5, hi: float = 4.0, max_iter: int = 200) -> ShootingRecord:
    history: list[tuple[float, int]] = []
    o_lo = classify_shot(lo, c0=c0, c3=c3, s_min=s_min, rtol=rtol, atol=atol)
    o_hi = classify_shot(hi, c0=c0, c3=c3, s_min=s_min, rtol=rtol, atol=atol)
    history += [(lo, o_lo), (hi, o_hi)]
    if o_lo != -1 or o_hi != 1:
        raise EnvelopeError(f"initial bracket [{lo}, {hi}] does not straddle the bounded solution")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        o = classify_shot(mid, c0=c0, c3=c3, s_min=s_min, rtol=rtol, atol=atol)
        history.append((mid, o))
        if o == 0:
            lo = hi = mid
            break
        if o > 0:
            hi = mid
        else:
            lo = mid
    else:
        raise EnvelopeError(f"shooting did not converge; bracket [{lo}, {hi}]")
    rec = ShootingRecord(lo, hi, tuple(history))
    if not rec.monotone():
        raise EnvelopeError("shooting outcomes are not monotone in q0")
    return rec


@dataclass
class CanonicalSolution:
    """Dense canonical envelope: ODE solution up to s_switch, exact linear tail beyond."""

    q0: float
    s_switch: float
    qplus: float
    s_min: float
    rtol: float
    atol: float
    _sol: Any = field(default=None, repr=False)

    def _dense(self):
        if self._sol is None:
            self._sol = _integrate(self.q0, self.s_switch, 1.0, -1.0, self.s_min, self.rtol,
                                   self.atol, events=False).sol
        return self._sol

    def state(self, s: ArrayLike) -> tuple[NDArray, NDArray]:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        q = np.empty_like(s)
        dq = np.empty_like(s)
        if np.any(s < self.s_min):
            raise ValueError(f"s below s_min={self.s_min}")
        inner = s <= self.s_switch
        if np.any(inner):
            qs, dqs = self._dense()(s[inner])
            q[inner], dq[inner] = qs, dqs
        outer = ~inner
        if np.any(outer):
            so = s[outer]
            tail = self.qplus * np.exp(-so) / np.sqrt(so)
            q[outer] = tail
            dq[outer] = -tail * (1.0 + 0.5 / so)
        return q, dq


def solve_canonical_solution(*, s_min: float = S_MIN, rtol: float = RTOL, atol: float = ATOL,
                             s_max: float = S_MAX) -> tuple[CanonicalSolution, ShootingRecord]:
    rec = shoot(s_min=s_min, rtol=rtol, atol=atol)
    lo_sol = _integrate(rec.lo, _S_CLASSIFY, 1.0, -1.0, s_min, rtol, atol, events=True)
    hi_sol = _integrate(rec.hi, _S_CLASSIFY, 1.0, -1.0, s_min, rtol, atol, events=True)
    t_end = min(lo_sol.t[-1], hi_sol.t[-1], s_max)
    grid = np.linspace(1.0, t_end, 4000)
    q_lo = lo_sol.sol(grid)[0]
    q_hi = hi_sol.sol(grid)[0]
    split = np.abs(q_hi - q_lo) > _DIVERGE_REL * np.abs(0.5 * (q_hi + q_lo))
    idx = int(np.argmax(split)) if np.any(split) else grid.size - 1
    # step back so the midpoint trajectory is still trustworthy
    s_switch = float(grid[max(idx - 40, 0)])
    q0 = 0.5 * (rec.lo + rec.hi)
    canon = CanonicalSolution(q0, s_switch, 0.0, s_min, rtol, atol)
    qs, _ = canon.state(s_switch)
    canon.qplus = float(qs[0] * math.sqrt(s_switch) * math.exp(s_switch))
    return canon, rec


@dataclass
class Envelope:
    """Envelope for coefficients (c0, c3) with samples on (0, s_max]."""

    c0: float
    c3: float
    q0: float
    qplus: float
    s: NDArray[np.float64]
    q: NDArray[np.float64]
    p: NDArray[np.float64]
    canonical: CanonicalSolution
    amp: float = 1.0
    rate: float = 1.0

    @property
    def decay_rate(self) -> float:
        return math.sqrt(self.c0)

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    def q_of(self, s: ArrayLike) -> NDArray[np.float64]:
        q, _ = self.canonical.state(self.rate * np.asarray(s, dtype=float))
        return self.amp * q

    def dq_of(self, s: ArrayLike) -> NDArray[np.float64]:
        _, dq = self.canonical.state(self.rate * np.asarray(s, dtype=float))
        return self.amp * self.rate * dq

    def p_of(self, s: ArrayLike) -> NDArray[np.float64]:
        """p = q' + q/(2s) using the dense-output derivative."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(s <= 0.0) or np.any(s > self.s_max * (1 + 1e-12)):
            raise ValueError(f"s outside (0, {self.s_max}]")
        return self.dq_of(s) + self.q_of(s) / (2.0 * s)


def _sample(canon: CanonicalSolution, c0: float, c3: float, amp: float, rate: float,
            n: int, s_max: float) -> Envelope:
    s = np.geomspace(canon.s_min / rate, s_max, n)
    env = Envelope(c0, c3, q0=amp * math.sqrt(rate) * canon.q0, qplus=0.0, s=s,
                   q=np.empty(0), p=np.empty(0), canonical=canon, amp=amp, rate=rate)
    env.q = env.q_of(s)
    env.p = env.p_of(s)
    # q = A q+ exp(-b s)/sqrt(b s) = (A q+/sqrt(b)) exp(-sqrt(c0) s)/sqrt(s)
    env.qplus = amp * canon.qplus / math.sqrt(rate)
    return env


def solve_canonical(*, n: int = 2000, s_min: float = S_MIN, s_max: float = S_MAX,
                    rtol: float = RTOL, atol: float = ATOL) -> Envelope:
    canon, _ = solve_canonical_solution(s_min=s_min, rtol=rtol, atol=atol, s_max=s_max)
    return _sample(canon, 1.0, -1.0, 1.0, 1.0, n, s_max)


def rescale(canon: Envelope, c0: float, c3: float, *, n: Optional[int] = None) -> Envelope:
    """Envelope for (c0, c3) from the canonical one."""
    if not c0 > 0.0:
        raise ValueError("c0 must be positive")
    if not c3 < 0.0:
        raise ValueError("c3 >= 0: the only bounded solution is q = 0")
    if canon.c0 != 1.0 or canon.c3 != -1.0:
        raise ValueError("rescale expects the canonical envelope")
    amp = math.sqrt(c0 / abs(c3))
    rate = math.sqrt(c0)
    return _sample(canon.canonical, c0, c3, amp, rate, n or canon.s.size, canon.s_max / rate)


_FD8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def ode_terms(env: Envelope, s: ArrayLike, h: float = 0.02) -> tuple[NDArray, NDArray]:
    """Residual q'' + q'/s - q/(4s^2) - c0 q - c3 q^3 and the sum of the term magnitudes.

    q'' comes from 8th-order central differences of the dense-output q'; the
    step shrinks near the core, where q behaves like sqrt(s).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    h = np.minimum(h, s / 20.0)
    offsets = np.arange(-4, 5)
    d2 = sum(w * env.dq_of(s + o * h) for w, o in zip(_FD8, offsets) if w != 0.0) / h
    q = env.q_of(s)
    dq = env.dq_of(s)
    terms = [d2, dq / s, -q / (4.0 * s * s), -env.c0 * q, -env.c3 * q ** 3]
    res = sum(terms)
    scale = sum(np.abs(t) for t in terms)
    return res, scale


def ode_residual(env: Envelope, s: ArrayLike, h: float = 0.02) -> NDArray[np.float64]:
    """Absolute ODE residual at ``s``."""
    res, _ = ode_terms(env, s, h)
    return np.abs(res)


def weighted_residual(env: Envelope, s: ArrayLike, h: float = 0.02) -> float:
    """max |residual| / (1 + sum of term magnitudes)."""
    res, scale = ode_terms(env, s, h)
    return float(np.max(np.abs(res) / (1.0 + scale)))


def decay_rate_estimate(env: Envelope, s: float, h: float = 1e-3) -> float:
    """d/ds log(sqrt(s) q) at s; tends to -sqrt(c0)."""
    f = lambda x: math.log(math.sqrt(x) * float(env.q_of(x)[0]))  # noqa: E731
    return (f(s + h) - f(s - h)) / (2.0 * h)


def fit_qplus(env: Envelope) -> float:
    """Mean of q sqrt(s) exp(sqrt(c0) s) over the last tenth of the sample range."""
    mask = env.s >= 0.9 * env.s_max
    vals = env.q[mask] * np.sqrt(env.s[mask]) * np.exp(math.sqrt(env.c0) * env.s[mask])
    return float(np.mean(vals))


def core_limit(env: Envelope, s_fit: float = 1e-3) -> float:
    """q(s)/sqrt(s) extrapolated to s = 0 with the known s^2 correction removed."""
    s = s_fit / env.rate
    return float(env.q_of(s)[0] / math.sqrt(s) / (1.0 + env.c0 * s * s / 6.0))


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def cache_key(c0: float, c3: float, rtol: float = RTOL, atol: float = ATOL,
              s_min: float = S_MIN, n: int = 2000) -> dict[str, Any]:
    return {"c0": c0, "c3": c3, "rtol": rtol, "atol": atol, "s_min": s_min, "n": n}


def cache_store(env: Envelope, path: str | os.PathLike, key: dict[str, Any]) -> None:
    """Atomic write: concurrent readers see either the old or the new file."""
    path = Path(path)
    doc = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "key": key,
        "canonical": {
            "q0": env.canonical.q0, "s_switch": env.canonical.s_switch,
            "qplus": env.canonical.qplus, "s_min": env.canonical.s_min,
            "rtol": env.canonical.rtol, "atol": env.canonical.atol,
        },
        "c0": env.c0, "c3": env.c3, "amp": env.amp, "rate": env.rate,
        "q0": env.q0, "qplus": env.qplus,
        "s": env.s.tolist(), "q": env.q.tolist(), "p": env.p.tolist(),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def cache_load(path: str | os.PathLike, key: dict[str, Any]) -> Envelope:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, ValueError) as exc:
        raise CacheError(f"corrupt cache file {path}: {exc}") from exc
    if doc.get("format") != CACHE_FORMAT or doc.get("version") != CACHE_VERSION:
        raise CacheError(f"cache version mismatch in {path}")
    if doc.get("key") != key:
        raise CacheError("cache key mismatch")
    try:
        c = doc["canonical"]
        canon = CanonicalSolution(c["q0"], c["s_switch"], c["qplus"], c["s_min"], c["rtol"], c["atol"])
        return Envelope(
            doc["c0"], doc["c3"], doc["q0"], doc["qplus"], np.array(doc["s"]), np.array(doc["q"]),
            np.array(doc["p"]), canon, doc["amp"], doc["rate"],
        )
    except (KeyError, TypeError) as exc:
        raise CacheError(f"malformed cache file {path}: {exc}") from exc


def load_or_solve(path: Optional[str | os.PathLike], *, n: int = 2000) -> Envelope:
    """Canonical envelope from the cache if valid, else solved (and stored when a path is given)."""
    key = cache_key(1.0, -1.0, n=n)
    if path is not None:
        try:
            return cache_load(path, key)
        except FileNotFoundError:
            pass
        except CacheError as exc:
            log.warning("recomputing envelope: %s", exc)
    env = solve_canonical(n=n)
    if path is not None:
        cache_store(env, path, key)
    return env


_DEFAULT: Optional[Envelope] = None


def default_canonical() -> Envelope:
    """Process-wide canonical envelope, solved once."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_or_solve(os.environ.get("FERROSPOT_ENVELOPE_CACHE"))
    return _DEFAULT
