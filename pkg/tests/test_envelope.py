from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ferrospot.envelope import (
    CacheError,
    cache_key,
    cache_load,
    cache_store,
    core_limit,
    decay_rate_estimate,
    load_or_solve,
    rescale,
    shoot,
    weighted_residual,
)

# scipy solve_bvp on [1e-3, 20] with the core and far-field asymptotics as boundary data
Q0_BVP = 2.17985885
Q_AT_1_BVP = 1.7708239419729894
# frozen value of the shooting parameter
Q0_FROZEN = 2.1798581264228414


def _direct_q0(c0: float, c3: float) -> float:
    """Independent bisection on q0 for q'' = -q'/s + q/(4s^2) + c0 q + c3 q^3."""
    s0 = 1e-5 / math.sqrt(c0)
    s_end = 30.0 / math.sqrt(c0)

    def rhs(s, u):
        return [u[1], -u[1] / s + u[0] / (4 * s * s) + c0 * u[0] + c3 * u[0] ** 3]

    def outcome(q0):
        y0 = [q0 * math.sqrt(s0), 0.5 * q0 / math.sqrt(s0)]
        sol = solve_ivp(rhs, (s0, s_end), y0, method="LSODA", rtol=1e-12, atol=1e-14)
        q = sol.y[0]
        if np.any(q < 0):
            return 1
        return -1

    scale = math.sqrt(c0 / abs(c3)) * c0 ** 0.25
    lo, hi = 0.5 * scale, 4.0 * scale
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if outcome(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_q0_against_bvp_oracle(canonical):
    assert canonical.q0 == pytest.approx(Q0_FROZEN, rel=1e-9)
    assert abs(canonical.q0 - Q0_BVP) < 1e-6
    assert core_limit(canonical) == pytest.approx(canonical.q0, rel=1e-6)


def test_profile_against_bvp_oracle(canonical):
    assert float(canonical.q_of(1.0)[0]) == pytest.approx(Q_AT_1_BVP, abs=1e-8)


def test_residual_small(canonical):
    s = np.linspace(0.05, 12.0, 400)
    assert weighted_residual(canonical, s) < 1e-8


@pytest.mark.parametrize("c0,c3", [(0.5, -2.0), (2.0, -0.3)])
def test_rescaling_matches_direct_shooting(canonical, c0, c3):
    env = rescale(canonical, c0, c3)
    assert env.q0 == pytest.approx(_direct_q0(c0, c3), rel=1e-7)
    s = np.linspace(0.1, 6.0, 50) / math.sqrt(c0)
    assert weighted_residual(env, s) < 1e-8


def test_shooting_own_solver_agrees(canonical):
    rec = shoot()
    assert rec.monotone()
    assert 0.5 * (rec.lo + rec.hi) == pytest.approx(canonical.q0, rel=1e-12)


def test_positive_monotone(canonical):
    q = canonical.q_of(np.linspace(1.5, 14.0, 500))
    assert np.all(q > 0)
    assert np.all(np.diff(q) < 0)


@pytest.mark.parametrize("c0", [1.0, 0.3, 2.5])
def test_decay_slope(canonical, c0):
    env = canonical if c0 == 1.0 else rescale(canonical, c0, -1.0)
    s = 10.0 / math.sqrt(c0)
    assert decay_rate_estimate(env, s) == pytest.approx(-math.sqrt(c0), abs=1e-6)


def test_p_envelope(canonical):
    s = np.array([0.3, 1.0, 4.0])
    assert np.allclose(canonical.p_of(s), canonical.dq_of(s) + canonical.q_of(s) / (2 * s))
    with pytest.raises(ValueError):
        canonical.p_of(0.0)


def test_rejects_nonnegative_c3(canonical):
    with pytest.raises(ValueError):
        rescale(canonical, 1.0, 0.5)
    with pytest.raises(ValueError):
        rescale(canonical, -1.0, -1.0)


def test_cache_round_trip(tmp_path, canonical):
    path = tmp_path / "env.json"
    key = cache_key(1.0, -1.0)
    cache_store(canonical, path, key)
    loaded = cache_load(path, key)
    assert loaded.q0 == canonical.q0
    s = np.linspace(0.1, 10, 30)
    assert np.array_equal(loaded.q_of(s), canonical.q_of(s))
    with pytest.raises(CacheError):
        cache_load(path, cache_key(1.0, -1.0, rtol=1e-8))


def test_cache_corruption_recovers(tmp_path, caplog):
    path = tmp_path / "env.json"
    path.write_text("{not json")
    with pytest.raises(CacheError):
        cache_load(path, cache_key(1.0, -1.0))
    env = load_or_solve(path, n=200)
    assert env.q0 == pytest.approx(Q0_FROZEN, rel=1e-9)
    assert json.loads(path.read_text())["format"] == "ferrospot-envelope"
    assert load_or_solve(path, n=200).q0 == env.q0
