"""Self-checks run by ``hdqkd validate``: each returns a list of named pass/fail checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import (
    SolverOptions,
    assemble_sdp,
    direct_entropy_oracle,
    gauss_radau,
    solve_entropy_bound,
)
from .linalg import random_density_matrix
from .model import Protocol, isotropic_time_state
from .noise import NoiseParams, monte_carlo_estimate, p_good, p_tt11
from .povm import (
    build_m0,
    build_m1_p1,
    build_m1_p2,
    build_m2_p1,
    click_probabilities,
    constraints_from_state,
    protocol_povms,
)


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def povm_suite(dims=(2, 4, 6, 8, 10), tol: float = 1e-10) -> list[Check]:
    out = []
    for d in dims:
        for build in (build_m0, build_m1_p1, build_m2_p1, build_m1_p2):
            err = build(d).completeness_error()
            out.append(Check("povm", f"{build.__name__} d={d} completeness", err <= tol, f"{err:.1e}"))
    return out


def click_suite(dims=(2, 4, 6), n_states: int = 5, seed: int = 0, tol: float = 1e-12) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for d in dims:
        for proto in (Protocol.P1, Protocol.P2):
            worst = 0.0
            for _ in range(n_states):
                rho = random_density_matrix(d * d, rng)
                clicks = click_probabilities(rho, d, proto)
                for povm in protocol_povms(proto, d):
                    for e in povm:
                        direct = float(np.real(np.trace(e.operator @ rho)))
                        worst = max(worst, abs(e.value_from_clicks(clicks) - direct))
            out.append(Check("clicks", f"{proto.value} d={d} weight x click = Tr(E rho)", worst <= tol,
                             f"{worst:.1e}"))
    return out


def noise_suite(base: NoiseParams, n_frames: int = 10_000_000, seed: int = 0,
                solar=(0.0, 1e4, 1e6), n_sigma: float = 4.0) -> list[Check]:
    out = []
    for proto in (Protocol.P1, Protocol.P2):
        for n_sol in solar:
            p = NoiseParams(T=base.T, lambda_p=base.lambda_p, lambda_d=base.lambda_d, lambda_e_B=n_sol,
                            eta_D=base.eta_D, p_loss_B=base.p_loss_B)
            mc = monte_carlo_estimate(p, proto, n_frames, seed=seed)
            z_tt = (mc.p_tt11 - p_tt11(p, proto)) / mc.stderr_tt11
            z_g = (mc.p_good - p_good(p, proto)) / mc.stderr_good
            ok = abs(z_tt) <= n_sigma and abs(z_g) <= n_sigma
            out.append(Check("noise", f"{proto.value} n_sol={n_sol:g} Monte Carlo", ok,
                             f"z_tt={z_tt:+.2f} z_good={z_g:+.2f}"))
    return out


def quadrature_suite(ms=range(1, 11), tol: float = 1e-10) -> list[Check]:
    out = []
    for m in ms:
        q = gauss_radau(m)
        err = max(abs(np.sum(q.weights * q.nodes**k) - 1.0 / (k + 1)) for k in range(2 * m - 1))
        ok = err <= tol and abs(q.weights[-1] - 1.0 / m**2) <= 1e-12 and q.nodes[-1] == 1.0
        out.append(Check("quadrature", f"m={m} moments up to degree {2 * m - 2}", ok, f"{err:.1e}"))
    return out


def entropy_suite(m: int = 10, opts: SolverOptions | None = None) -> list[Check]:
    out = []
    d = 2
    pure = isotropic_time_state(1.0, d)
    prod = np.diag([1.0, 0.0, 0.0, 0.0])
    flat = np.eye(4) / 4
    for name, rho, want in (("maximally entangled", pure, 1.0), ("|00>", prod, 0.0), ("I/4", flat, 0.0)):
        got = direct_entropy_oracle(rho, d)
        out.append(Check("entropy", f"oracle {name} = {want:g} bit", abs(got - want) < 1e-10, f"{got:.12f}"))

    q = gauss_radau(m)
    sol = solve_entropy_bound(assemble_sdp(constraints_from_state(protocol_povms("p1", d), pure), d, q), opts)
    ok = sol.ok and 0.98 <= sol.objective_bits <= 1.0 + 1e-6
    out.append(Check("entropy", f"p1 d=2 v=1 m={m} bound in [0.98, 1]", ok, _fmt(sol)))

    rho = isotropic_time_state(0.9, d)
    sol = solve_entropy_bound(assemble_sdp(constraints_from_state(protocol_povms("p1", d), rho), d, q), opts)
    oracle = direct_entropy_oracle(rho, d)
    ok = sol.ok and sol.objective_bits <= oracle + 1e-6
    out.append(Check("entropy", "p1 d=2 v=0.9 bound <= oracle", ok, f"{_fmt(sol)} oracle={oracle:.6f}"))

    sol = solve_entropy_bound(assemble_sdp([], d, q), opts)
    ok = sol.ok and sol.objective_bits <= 1e-6
    out.append(Check("entropy", "trace constraint only: bound <= 0", ok, _fmt(sol)))
    return out


def _fmt(sol) -> str:
    if not sol.ok:
        return f"{sol.status.value}: {sol.diagnostics}"
    return f"bound={sol.objective_bits:.6f} gap={sol.duality_gap:.1e}"


def run_all(noise: NoiseParams, seed: int = 0, m: int = 10, n_frames: int = 10_000_000,
            opts: SolverOptions | None = None) -> list[Check]:
    return (povm_suite() + click_suite(seed=seed) + noise_suite(noise, n_frames, seed)
            + quadrature_suite() + entropy_suite(m, opts))
