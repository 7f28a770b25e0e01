"""Acceptance criteria, one test each, with a pass/fail line in the summary."""

import time

import numpy as np
import pytest

from hdqkd.entropy import (
    assemble_sdp,
    direct_entropy_oracle,
    gauss_radau,
    solve_entropy_bound,
)
from hdqkd.keyrate import (
    bbm92_rate,
    compute_rate,
    noise_at,
    qber,
    solar_threshold,
    sweep,
)
from hdqkd.linalg import random_density_matrix
from hdqkd.model import Protocol, ProtocolConfig, isotropic_time_state
from hdqkd.noise import NoiseParams, monte_carlo_estimate, p_good, p_tt11
from hdqkd.povm import (
    build_m0,
    build_m1_p1,
    build_m1_p2,
    build_m2_p1,
    click_probabilities,
    constraints_from_state,
    protocol_povms,
)

# Brackets for the zero-rate solar thresholds at d = 4, m = 6. Each endpoint is
# re-evaluated here, so a wrong bracket fails loudly instead of passing.
P1_BRACKET = (3.0e5, 4.0e5)
P2_BRACKET = (1.5e5, 2.5e5)


def test_c01_povm_completeness(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 4, 6, 8, 10):
        for build in (build_m0, build_m1_p1, build_m2_p1, build_m1_p2):
            worst = max(worst, build(d).completeness_error())
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 5
    assert criterion.record(1, ok, f"max deviation {worst:.2e} (tol 1e-10), {dt:.2f} s (< 5 s)")


def test_c02_click_operator_consistency(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    n_checks = 0
    for d in (2, 4, 6):
        for _ in range(20):
            rho = random_density_matrix(d * d, rng)
            for proto in (Protocol.P1, Protocol.P2):
                clicks = click_probabilities(rho, d, proto)
                for povm in protocol_povms(proto, d):
                    for e in povm:
                        direct = float(np.trace(e.operator @ rho).real)
                        worst = max(worst, abs(e.value_from_clicks(clicks) - direct))
                        n_checks += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 30
    assert criterion.record(2, ok, f"{n_checks} elements, max |click - Tr(E rho)| {worst:.2e} (tol 1e-12), "
                                   f"{dt:.1f} s (< 30 s)")


def test_c03_quadrature(criterion):
    q2 = gauss_radau(2)
    dev2 = max(np.max(np.abs(q2.nodes - [1 / 3, 1])), np.max(np.abs(q2.weights - [0.75, 0.25])))
    q10 = gauss_radau(10)
    dw = abs(q10.weights[-1] - 0.01)
    ds = abs(q10.weights.sum() - 1)
    dm = max(abs(np.dot(q10.weights, q10.nodes**k) - 1 / (k + 1)) for k in range(19))
    ok = dev2 < 1e-15 and dw <= 1e-12 and ds <= 1e-12 and dm <= 1e-10
    assert criterion.record(3, ok, f"m=2 deviation {dev2:.1e}; m=10 |w10-0.01| {dw:.1e}, |sum w-1| {ds:.1e}, "
                                   f"moments k<=18 {dm:.1e}")


def test_c04_ideal_point(criterion):
    t0 = time.perf_counter()
    rho = isotropic_time_state(1.0, 2)
    cons = constraints_from_state(protocol_povms(Protocol.P1, 2), rho)
    sol = solve_entropy_bound(assemble_sdp(cons, 2, gauss_radau(10)))
    oracle = direct_entropy_oracle(rho, 2)
    dt = time.perf_counter() - t0
    ok = sol.ok and 0.98 <= sol.objective_bits <= 1 + 1e-6 and abs(oracle - 1) < 1e-12 and dt < 60
    assert criterion.record(4, ok, f"bound {sol.objective_bits:.7f} bits ({sol.status.value}), oracle {oracle:.12f}, "
                                   f"{dt:.1f} s (< 60 s)")


def test_c05_lower_bound_property(criterion):
    t0 = time.perf_counter()
    q = gauss_radau(6)
    parts = []
    ok = True
    for d in (2, 4):
        for v in (0.85, 0.9, 0.95, 1.0):
            rho = isotropic_time_state(v, d)
            sol = solve_entropy_bound(assemble_sdp(constraints_from_state(protocol_povms(Protocol.P1, d), rho),
                                                   d, q))
            oracle = direct_entropy_oracle(rho, d)
            good = sol.ok and sol.objective_bits <= oracle + 1e-6
            ok &= good
            parts.append(f"d{d} v{v}: {sol.objective_bits:.4f}<={oracle:.4f}" if sol.ok
                         else f"d{d} v{v}: {sol.status.value}")
    dt = time.perf_counter() - t0
    ok &= dt < 15 * 60
    assert criterion.record(5, ok, "; ".join(parts) + f"; {dt / 60:.1f} min (< 15 min)")


def test_c06_noise_vs_monte_carlo(criterion):
    t0 = time.perf_counter()
    base = NoiseParams()
    worst = 0.0
    for n_sol in (0.0, 1e4, 1e6):
        p = noise_at(base, "solar_rate", n_sol)
        for proto in ("p1", "p2"):
            est = monte_carlo_estimate(p, proto, 10_000_000, seed=int(n_sol) + (proto == "p2"))
            z_tt = abs(est.p_tt11 - p_tt11(p, proto)) / est.stderr_tt11
            z_g = abs(est.p_good - p_good(p, proto)) / est.stderr_good
            worst = max(worst, z_tt, z_g)
    dt = time.perf_counter() - t0
    ok = worst <= 4 and dt < 120
    assert criterion.record(6, ok, f"max |z| {worst:.2f} over 12 comparisons (tol 4), {dt:.1f} s (< 120 s)")


def test_c07_qber_identity(criterion):
    worst = 0.0
    for d in (2, 4, 6, 8, 10, 12):
        for v in np.linspace(0, 1, 11):
            tt = click_probabilities(isotropic_time_state(v, d), d, Protocol.P1).TT
            errors = 1 - np.trace(tt)
            worst = max(worst, abs(errors - qber(v, d)), abs(errors - (1 - v - (1 - v) / d)))
    assert criterion.record(7, worst <= 1e-12, f"max deviation {worst:.1e} on 66 (v, d) points (tol 1e-12)")


def test_c08_solar_shape_and_threshold_ratio(criterion):
    t0 = time.perf_counter()
    base = NoiseParams()
    grid = np.geomspace(1e2, 1e6, 5)
    rows = sweep(ProtocolConfig(Protocol.P1, 4), base, "solar_rate", grid, m=6)
    all_ok = all(r.ok for r in rows)
    per_coinc = [r.rate_per_coincidence for r in rows]
    per_sec = [r.rate_per_second for r in rows]
    mono = all_ok and all(b <= a for a, b in zip(per_coinc, per_coinc[1:]))
    mono_s = all_ok and all(b <= a for a, b in zip(per_sec, per_sec[1:]))
    t1 = solar_threshold(ProtocolConfig(Protocol.P1, 4), base, *P1_BRACKET, m=6)
    t2 = solar_threshold(ProtocolConfig(Protocol.P2, 4), base, *P2_BRACKET, m=6)
    # conservative ratio: smallest P1 value over largest P2 value
    ratio_lo = t1.lo / t2.hi
    dt = time.perf_counter() - t0
    ok = mono and mono_s and ratio_lo >= 1.5 and dt < 45 * 60
    rates = ", ".join(f"{r:.4f}" for r in per_coinc)
    assert criterion.record(
        8, ok,
        f"P1 bits/coinc on 1e2..1e6 [{rates}] non-increasing={mono} (bits/s {mono_s}); "
        f"threshold P1 in [{t1.lo:.3g}, {t1.hi:.3g}], P2 in [{t2.lo:.3g}, {t2.hi:.3g}], "
        f"ratio >= {ratio_lo:.2f} (need 1.5); {dt / 60:.1f} min (< 45 min)")


@pytest.mark.slow
def test_c09_bbm92_crossover(criterion):
    t0 = time.perf_counter()
    base = NoiseParams(lambda_e_B=1e4)
    cfg = ProtocolConfig(Protocol.P1, 8)
    low = noise_at(base, "loss_db", 25.0)
    high = noise_at(base, "loss_db", 45.0)
    hd_low, bb_low = compute_rate(cfg, low, 5), bbm92_rate(low, 8, 5)
    hd_high, bb_high = compute_rate(cfg, high, 5), bbm92_rate(high, 8, 5)
    dt = time.perf_counter() - t0
    ok = (hd_low.rate_per_second > bb_low.rate_per_second
          and hd_high.rate_per_second < bb_high.rate_per_second and dt < 4 * 3600)
    assert criterion.record(
        9, ok,
        f"25 dB: d=8 {hd_low.rate_per_second:.4g} vs BBM92 {bb_low.rate_per_second:.4g} bit/s; "
        f"45 dB: d=8 {hd_high.rate_per_second:.4g} vs BBM92 {bb_high.rate_per_second:.4g} bit/s; "
        f"{dt / 3600:.2f} h (< 4 h)")


def test_c10_full_figure_not_a_target(criterion):
    # Only the problem size is checked; the d = 12, m = 10 solve itself is out of scope.
    d, m = 12, 10
    sigma = d * d
    n_blocks = 2 * d * m
    side = 4 * sigma
    ok = sigma == 144 and n_blocks == 240 and side == 576
    criterion.record(10, ok, f"not run by design: sigma {sigma}x{sigma}, {n_blocks} embedded PSD blocks of "
                             f"{side}x{side} (Gamma1 and Gamma2 per symbol and node)")
    assert ok
