"""Devetak-Winter key rates, the BBM92 comparison and parameter sweeps."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import scipy.optimize

from .entropy.quadrature import gauss_radau
from .entropy.sdp import assemble_sdp
from .entropy.solvers import SolverOptions, solve_entropy_bound
from .model import Protocol, ProtocolConfig, isotropic_time_state
from .noise import NoiseParams, loss_db_to_prob, p_tt11, visibility
from .povm import click_probabilities, constraints_from_clicks, protocol_povms

AXES = ("solar_rate", "loss_db")
STATUS_ERROR = "error"


def _xlog2x(p: float) -> float:
    return 0.0 if p <= 0.0 else p * math.log2(p)


def conditional_shannon_hab(v: float, d: int) -> float:
    """``H(A|B)`` in bits for the time-of-arrival statistics of the isotropic state."""
    if not 0.0 <= v <= 1.0:
        raise ValueError("v must lie in [0, 1]")
    if d < 2:
        raise ValueError("d must be at least 2")
    same = v + (1.0 - v) / d
    other = (1.0 - v) / d
    return -(_xlog2x(same) + (d - 1) * _xlog2x(other))


def qber(v: float, d: int) -> float:
    """Probability that the two time-of-arrival symbols differ."""
    if not 0.0 <= v <= 1.0:
        raise ValueError("v must lie in [0, 1]")
    return 1.0 - v - (1.0 - v) / d


@dataclass
class KeyRateResult:
    """One evaluated scenario.

    ``rate_per_coincidence`` is the clipped Devetak-Winter rate;
    ``rate_unclipped`` keeps ``s_ae_lb - h_ab`` even when negative. Entries
    are NaN when the solve did not produce a bound.
    """

    protocol: str
    d: int
    m: int
    noise: NoiseParams
    v: float = float("nan")
    s_ae_lb: float = float("nan")
    h_ab: float = float("nan")
    rate_unclipped: float = float("nan")
    rate_per_coincidence: float = float("nan")
    rate_per_second: float = float("nan")
    p_tt11: float = float("nan")
    qber: float = float("nan")
    status: str = STATUS_ERROR
    upper_bound_only: bool = False
    duality_gap: float = float("nan")
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near_optimal")


def _base_protocol(protocol: Protocol) -> Protocol:
    return Protocol.P1 if protocol is Protocol.BBM92 else protocol


def rate_at_visibility(cfg: ProtocolConfig, v: float, m: int,
                       solver_opts: SolverOptions | None = None):
    """S(A|E) bound and H(A|B) for the isotropic state at visibility ``v``."""
    proto = _base_protocol(cfg.protocol)
    rho = isotropic_time_state(v, cfg.d)
    clicks = click_probabilities(rho, cfg.d, proto)
    cons = constraints_from_clicks(protocol_povms(proto, cfg.d), clicks)
    problem = assemble_sdp(cons, cfg.d, gauss_radau(m))
    return solve_entropy_bound(problem, solver_opts), conditional_shannon_hab(v, cfg.d)


def compute_rate(cfg: ProtocolConfig, noise: NoiseParams, m: int = 10,
                 solver_opts: SolverOptions | None = None) -> KeyRateResult:
    """Full pipeline: noise -> visibility -> constraints -> SDP -> Devetak-Winter.

    Raises :class:`hdqkd.noise.VisibilityError` when no coincidence can occur.
    Solver failures are reported through ``status`` rather than raised.
    """
    proto = cfg.protocol
    v = visibility(noise, proto)
    ptt = p_tt11(noise, proto)
    res = KeyRateResult(proto.value, cfg.d, m, noise, v=v, p_tt11=ptt, qber=qber(v, cfg.d),
                        upper_bound_only=proto is Protocol.P2)
    sol, h = rate_at_visibility(cfg, v, m, solver_opts)
    res.h_ab = h
    res.status = sol.status.value
    res.duality_gap = sol.duality_gap
    if sol.ok:
        res.s_ae_lb = sol.objective_bits
        res.rate_unclipped = sol.objective_bits - h
        res.rate_per_coincidence = max(res.rate_unclipped, 0.0)
        res.rate_per_second = res.rate_per_coincidence * ptt / noise.T
    else:
        res.message = sol.diagnostics
    return res


def bbm92_noise(noise: NoiseParams, reference_d: int) -> NoiseParams:
    """Frame of two bins of the same length as the reference protocol's bins."""
    if reference_d < 2 or reference_d % 2:
        raise ValueError("reference_d must be an even integer >= 2")
    return noise.with_frame_length(noise.T / (reference_d / 2))


def bbm92_rate(noise: NoiseParams, reference_d: int, m: int = 10,
               solver_opts: SolverOptions | None = None) -> KeyRateResult:
    return compute_rate(ProtocolConfig(Protocol.BBM92, 2), bbm92_noise(noise, reference_d), m, solver_opts)


def noise_at(noise_base: NoiseParams, axis: str, x: float) -> NoiseParams:
    if axis == "solar_rate":
        return replace(noise_base, lambda_e_B=float(x))
    if axis == "loss_db":
        return replace(noise_base, p_loss_B=loss_db_to_prob(float(x)))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


def _point(args) -> KeyRateResult:
    cfg, noise, m, opts = args
    try:
        return compute_rate(cfg, noise, m, opts)
    except Exception as exc:  # recorded in-row; the sweep goes on
        return KeyRateResult(cfg.protocol.value, cfg.d, m, noise, status=STATUS_ERROR,
                             upper_bound_only=cfg.protocol is Protocol.P2,
                             message=f"{type(exc).__name__}: {exc}")


def sweep(cfg: ProtocolConfig, noise_base: NoiseParams, axis: str, grid: Sequence[float],
          m: int = 10, solver_opts: SolverOptions | None = None, jobs: int = 1) -> list[KeyRateResult]:
    """One :class:`KeyRateResult` per grid point, in grid order.

    Points are independent; with ``jobs > 1`` they run in worker processes.
    """
    grid = [float(x) for x in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be ascending")
    tasks = [(cfg, noise_at(noise_base, axis, x), m, solver_opts) for x in grid]
    if jobs <= 1 or len(tasks) == 1:
        return [_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point, tasks))


# -- zero-rate threshold ------------------------------------------------------

@dataclass
class Bracket:
    """``f(lo) > 0 >= f(hi)``, with every evaluation kept for inspection."""

    lo: float
    hi: float
    evaluations: list = field(default_factory=list)

    @property
    def estimate(self) -> float:
        return math.sqrt(self.lo * self.hi)

    @property
    def rel_width(self) -> float:
        return self.hi / self.lo - 1.0


def find_sign_change(f: Callable[[float], float], lo: float, hi: float,
                     rel_width: float = 0.1) -> Bracket:
    """Shrink ``[lo, hi]`` (both > 0) around the point where ``f`` turns non-positive.

    Brent's method with a relative tolerance does the bulk of the work; the
    bracket is read back from the evaluation log and, if still wider than
    ``hi / lo <= 1 + rel_width``, finished by geometric bisection. ``f`` must
    be finite.
    """
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    evals = []
    seen = {}

    def g(x):
        # brentq re-evaluates the endpoints; each call may be an SDP solve
        if x not in seen:
            seen[x] = float(f(x))
            evals.append((x, seen[x]))
        y = seen[x]
        # brentq looks for a sign change; map "non-positive" onto "negative"
        return y if y > 0 else min(y, -1e-300)

    if not g(lo) > 0:
        raise ValueError(f"f(lo) = {evals[-1][1]} is not positive")
    if g(hi) > 0:
        raise ValueError(f"f(hi) = {evals[-1][1]} is positive")
    if hi / lo - 1 > rel_width:
        scipy.optimize.brentq(g, lo, hi, xtol=1e-300, rtol=0.5 * rel_width)
    a = max(x for x, y in evals if y > 0)
    b = min(x for x, y in evals if not y > 0 and x > a)
    while b / a - 1 > rel_width:
        c = math.sqrt(a * b)
        if g(c) > 0:
            a = c
        else:
            b = c
    return Bracket(a, b, evals)


def solar_threshold(cfg: ProtocolConfig, noise_base: NoiseParams, lo: float, hi: float,
                    m: int = 10, solver_opts: SolverOptions | None = None,
                    rel_width: float = 0.1) -> Bracket:
    """Solar photon rate at which the Devetak-Winter rate reaches zero.

    ``lo`` must give a positive rate and ``hi`` a non-positive one. Failed
    solves count as non-positive, so the bracket stays conservative.
    """
    def f(x):
        r = compute_rate(cfg, noise_at(noise_base, "solar_rate", x), m, solver_opts)
        return r.rate_unclipped if r.ok else -1.0

    return find_sign_change(f, lo, hi, rel_width)
