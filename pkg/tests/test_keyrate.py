import math
from dataclasses import replace

import numpy as np
import pytest

from hdqkd.keyrate import (
    bbm92_noise,
    bbm92_rate,
    compute_rate,
    conditional_shannon_hab,
    find_sign_change,
    noise_at,
    qber,
    sweep,
)
from hdqkd.model import Protocol, ProtocolConfig, isotropic_time_state
from hdqkd.noise import NoiseParams, VisibilityError, per_frame_params, visibility
from hdqkd.povm import click_probabilities_p1


def joint_table_hab(v, d):
    p = np.full((d, d), (1 - v) / d**2) + np.eye(d) * v / d
    pb = p.sum(axis=0)

    def h(x):
        x = x[x > 0]
        return -np.sum(x * np.log2(x))

    return h(p.ravel()) - h(pb)


GRID = [(v, d) for v in (0.0, 0.3, 0.77, 0.95, 1.0) for d in (2, 4, 6, 8)]


@pytest.mark.parametrize("v,d", GRID)
def test_hab_matches_joint_table(v, d):
    assert abs(conditional_shannon_hab(v, d) - joint_table_hab(v, d)) < 1e-12


@pytest.mark.parametrize("v,d", GRID)
def test_qber_matches_clicks(v, d):
    tt = click_probabilities_p1(isotropic_time_state(v, d), d).TT
    assert abs(qber(v, d) + np.trace(tt) - 1) < 1e-12


def test_examples():
    assert conditional_shannon_hab(1.0, 4) == 0.0
    assert abs(conditional_shannon_hab(0.0, 8) - 3) < 1e-12
    assert qber(1.0, 4) == 0.0
    assert qber(0.0, 2) == 0.5
    with pytest.raises(ValueError):
        qber(1.5, 2)


def noiseless():
    return NoiseParams(lambda_d=0.0, eta_D=1.0, p_loss_B=0.0)


def test_noiseless_rate_d2():
    r = compute_rate(ProtocolConfig(Protocol.P1, 2), noiseless(), m=10)
    assert r.ok and r.v == 1.0
    assert 0.98 <= r.rate_per_coincidence <= 1.0
    assert r.rate_per_coincidence == r.rate_unclipped
    assert abs(r.rate_per_second - r.rate_per_coincidence * r.p_tt11 / r.noise.T) < 1e-9 * r.rate_per_second
    assert not r.upper_bound_only


def test_clipping_keeps_raw_value():
    r = compute_rate(ProtocolConfig(Protocol.P1, 2), NoiseParams(lambda_e_B=1e7), m=4)
    assert r.ok and r.rate_unclipped < 0
    assert r.rate_per_coincidence == 0.0 and r.rate_per_second == 0.0
    assert abs(r.rate_unclipped - (r.s_ae_lb - r.h_ab)) < 1e-15


def test_p2_flag_and_no_coincidences():
    assert compute_rate(ProtocolConfig(Protocol.P2, 2), noiseless(), m=2).upper_bound_only
    dead = NoiseParams(lambda_d=0.0, eta_D=0.0)
    with pytest.raises(VisibilityError):
        compute_rate(ProtocolConfig(Protocol.P1, 2), dead, m=2)


def test_p1_beats_p2_mid_solar_d4():
    noise = NoiseParams(lambda_e_B=2e5)
    r1 = compute_rate(ProtocolConfig(Protocol.P1, 4), noise, m=2)
    r2 = compute_rate(ProtocolConfig(Protocol.P2, 4), noise, m=2)
    assert r1.ok and r2.ok
    assert r1.rate_per_coincidence >= r2.rate_per_coincidence
    assert visibility(noise, "p1") > visibility(noise, "p2")


def test_bbm92_rescaling():
    base = NoiseParams(lambda_e_B=1e4)
    assert bbm92_noise(base, 2) == base
    cp, cd, ce = per_frame_params(base)
    cp8, cd8, ce8 = per_frame_params(bbm92_noise(base, 8))
    assert math.isclose(cp8, cp / 4) and math.isclose(cd8, cd / 4) and math.isclose(ce8, ce / 4)
    with pytest.raises(ValueError):
        bbm92_noise(base, 3)
    a = bbm92_rate(base, 2, m=3)
    b = compute_rate(ProtocolConfig(Protocol.P1, 2), base, m=3)
    assert a.protocol == "bbm92" and a.s_ae_lb == b.s_ae_lb and a.v == b.v


def test_noise_at():
    base = NoiseParams()
    assert noise_at(base, "solar_rate", 3e3).lambda_e_B == 3e3
    assert abs(noise_at(base, "loss_db", 10).p_loss_B - 0.9) < 1e-15
    with pytest.raises(ValueError):
        noise_at(base, "dark", 1.0)


def test_single_point_sweep_is_compute_rate():
    cfg = ProtocolConfig(Protocol.P1, 2)
    base = NoiseParams()
    (row,) = sweep(cfg, base, "solar_rate", [1e4], m=3)
    direct = compute_rate(cfg, noise_at(base, "solar_rate", 1e4), m=3)
    assert row.s_ae_lb == direct.s_ae_lb and row.v == direct.v


def test_sweep_records_errors_in_row():
    cfg = ProtocolConfig(Protocol.P1, 2)
    base = NoiseParams(lambda_d=0.0)
    rows = sweep(cfg, replace(base, eta_D=0.0), "solar_rate", [0.0, 1e3], m=2)
    assert len(rows) == 2
    assert all(r.status == "error" and "VisibilityError" in r.message for r in rows)
    with pytest.raises(ValueError):
        sweep(cfg, base, "solar_rate", [2.0, 1.0], m=2)
    with pytest.raises(ValueError):
        sweep(cfg, base, "solar_rate", [], m=2)


def test_sweep_parallel_preserves_order():
    cfg = ProtocolConfig(Protocol.P1, 2)
    grid = [1e2, 1e5, 1e6, 1e7]
    serial = sweep(cfg, NoiseParams(), "solar_rate", grid, m=2)
    par = sweep(cfg, NoiseParams(), "solar_rate", grid, m=2, jobs=2)
    assert [r.noise.lambda_e_B for r in par] == grid
    assert all(abs(a.s_ae_lb - b.s_ae_lb) < 1e-9 for a, b in zip(serial, par))
    rates = [r.rate_per_coincidence for r in serial]
    assert all(a >= b for a, b in zip(rates, rates[1:]))


@pytest.mark.parametrize("root", [3.7e3, 1.234e5, 9.9e5])
def test_find_sign_change_oracle(root):
    # smooth decreasing function with a known zero
    def f(x):
        return math.log(root / x)

    b = find_sign_change(f, 1e2, 1e7, rel_width=0.1)
    assert b.lo < root <= b.hi
    assert b.rel_width <= 0.1
    assert len(b.evaluations) < 30


def test_find_sign_change_step_function():
    b = find_sign_change(lambda x: 1.0 if x < 5e4 else -1.0, 1e3, 1e6, rel_width=0.05)
    assert b.lo < 5e4 <= b.hi and b.rel_width <= 0.05


def test_find_sign_change_rejects_bad_bracket():
    with pytest.raises(ValueError):
        find_sign_change(lambda x: -1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        find_sign_change(lambda x: 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        find_sign_change(lambda x: 1.0, 2.0, 1.0)
