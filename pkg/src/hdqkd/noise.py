"""Poissonian photon-counting noise model and the resulting visibility.

The source sits in Alice's lab: her photons see no channel loss and no
environmental background. Bob's side collects channel loss, solar photons,
dark counts and detector inefficiency. Protocol 1 puts a polarization filter
in front of Bob's detectors that blocks half of the (unpolarized) background.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb, exp, factorial, sqrt

import numpy as np

from .model import Protocol

DEFAULT_FRAME_S = 5.4e-9
DEFAULT_DARK_HZ = 100.0
DEFAULT_ETA_D = 0.9
DEFAULT_LOSS_DB = 25.2
DEFAULT_PAIRS_PER_FRAME = 0.1


class VisibilityError(ValueError):
    """Raised when no coincidence can occur, so the visibility is undefined."""


def loss_db_to_prob(loss_db: float) -> float:
    return 1.0 - 10.0 ** (-loss_db / 10.0)


def loss_prob_to_db(p_loss: float) -> float:
    return -10.0 * np.log10(1.0 - p_loss)


@dataclass(frozen=True)
class NoiseParams:
    """Physical rates of the link.

    Attributes
    ----------
    T : float
        Time-frame length in seconds.
    lambda_p : float
        Pair production rate (pairs / s).
    lambda_d : float
        Dark count rate per side (counts / s).
    lambda_e_B : float
        Environmental (solar) photon rate reaching Bob (photons / s).
    eta_D : float
        Detection efficiency shared by all detectors.
    p_loss_B : float
        Probability that Bob's photon is lost in the channel.
    """

    T: float = DEFAULT_FRAME_S
    lambda_p: float = DEFAULT_PAIRS_PER_FRAME / DEFAULT_FRAME_S
    lambda_d: float = DEFAULT_DARK_HZ
    lambda_e_B: float = 0.0
    eta_D: float = DEFAULT_ETA_D
    p_loss_B: float = loss_db_to_prob(DEFAULT_LOSS_DB)
    p_loss_A: float = 0.0
    lambda_e_A: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("frame length T must be positive")
        for name in ("lambda_p", "lambda_d", "lambda_e_B"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("eta_D", "p_loss_B"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.p_loss_A != 0.0 or self.lambda_e_A != 0.0:
            raise ValueError("the source is in Alice's lab: p_loss_A and lambda_e_A must be 0")

    @classmethod
    def from_loss_db(cls, loss_db: float, **kw) -> NoiseParams:
        return cls(p_loss_B=loss_db_to_prob(loss_db), **kw)

    def with_frame_length(self, T: float) -> NoiseParams:
        """Same per-second rates on a different frame length."""
        return replace(self, T=T)


@dataclass(frozen=True)
class NoiseSummary:
    C_p: float
    C_d: float
    C_e_B: float
    p_tt11: float
    p_good: float
    v: float


def per_frame_params(p: NoiseParams) -> tuple[float, float, float]:
    """Poisson means per frame ``(C_p, C_d, C_e_B) = rate * T``."""
    return p.lambda_p * p.T, p.lambda_d * p.T, p.lambda_e_B * p.T


def _filtered(protocol) -> bool:
    return Protocol(protocol) is not Protocol.P2


def p_tt11(p: NoiseParams, protocol: Protocol | str) -> float:
    """Probability of exactly one click on each side in a frame (closed form)."""
    cp, cd, ce = per_frame_params(p)
    eta, pl = p.eta_D, p.p_loss_B
    if _filtered(protocol):
        pre = 0.5 * exp(-2 * cd - cp - 0.5 * ce * eta)
        bracket = (
            cp * eta**2 * (2 + ce - 2 * pl - ce * (1 - pl) * eta)
            + cd**2 * (2 + 2 * cp * (1 - eta) * (1 - eta * (1 - pl)))
            + cd * eta * (ce + cp * (4 - 2 * pl - 4 * eta + 4 * pl * eta
                                     + ce * (1 - eta) * (1 - (1 - pl) * eta)))
        )
        return pre * bracket
    pre = exp(-2 * cd - cp - ce * eta)
    bracket = (
        cd**2 * (1 + cp)
        + cd * (ce + cp * (2 + ce - cd * (2 - pl) - pl)) * eta
        + cp * (1 + ce - pl + cd * (cd - 2 * (1 + ce) - cd * pl + (2 + ce) * pl)) * eta**2
        + (1 - cd) * cp * ce * (-1 + pl) * eta**3
    )
    return pre * bracket


def p_good(p: NoiseParams, protocol: Protocol | str) -> float:
    """Probability that the single coincidence comes from one detected source pair."""
    cp, cd, ce = per_frame_params(p)
    eta, pl = p.eta_D, p.p_loss_B
    ce_eff = 0.5 * ce if _filtered(protocol) else ce
    return cp * (1 - pl) * eta**2 * exp(-2 * cd - cp - ce_eff * eta)


def visibility(p: NoiseParams, protocol: Protocol | str) -> float:
    """Isotropic-noise weight ``v = P_good / P_TT(1,1)``."""
    tt = p_tt11(p, protocol)
    if tt <= 0.0:
        raise VisibilityError("P_TT(1,1) = 0: no coincidences, visibility undefined")
    return p_good(p, protocol) / tt


def noise_summary(p: NoiseParams, protocol: Protocol | str) -> NoiseSummary:
    cp, cd, ce = per_frame_params(p)
    return NoiseSummary(cp, cd, ce, p_tt11(p, protocol), p_good(p, protocol), visibility(p, protocol))


# -- general counting distribution ------------------------------------------

def _poisson(mean: float, n: int) -> float:
    if n < 0:
        return 0.0
    if mean == 0.0:
        return 1.0 if n == 0 else 0.0
    return exp(-mean) * mean**n / factorial(n)


def joint_photon_distribution(n1: int, n2: int, p: NoiseParams, s_max: int = 1,
                              filtered: bool = True) -> float:
    """``P(n1, n2)``: photons reaching Alice / Bob behind the (optional) filter.

    The pair number is Poisson(C_p) truncated at ``s_max``; each pair member
    survives its channel independently and the background entering through a
    filter is Poisson(C_e / 2). ``s_max = 1`` is the single-pair regime the
    closed forms assume.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("photon numbers must be non-negative")
    cp, _, ce_b = per_frame_params(p)
    ce_a = p.lambda_e_A * p.T
    keep = 0.5 if filtered else 1.0
    pla, plb = p.p_loss_A, p.p_loss_B
    total = 0.0
    for s in range(s_max + 1):
        ps = _poisson(cp, s)
        if ps == 0.0:
            continue
        side_a = sum(comb(s, m) * (1 - pla) ** m * pla ** (s - m) * _poisson(keep * ce_a, n1 - m)
                     for m in range(min(s, n1) + 1))
        side_b = sum(comb(s, m) * (1 - plb) ** m * plb ** (s - m) * _poisson(keep * ce_b, n2 - m)
                     for m in range(min(s, n2) + 1))
        total += ps * side_a * side_b
    return total


def single_click_probability(n: int, c_d: float, eta: float) -> float:
    """Exactly one click from ``n`` incident photons plus Poisson(c_d) dark counts."""
    p_dark0, p_dark1 = exp(-c_d), c_d * exp(-c_d)
    one_photon = n * eta * (1 - eta) ** (n - 1) if n >= 1 else 0.0
    return p_dark1 * (1 - eta) ** n + p_dark0 * one_photon


def p_tt11_series(p: NoiseParams, protocol: Protocol | str, s_max: int = 1, n_max: int = 12) -> float:
    """``P_TT(1,1)`` summed from the counting distribution (independent of the closed form)."""
    _, cd, _ = per_frame_params(p)
    filt = _filtered(protocol)
    clicks = [single_click_probability(n, cd, p.eta_D) for n in range(n_max + 1)]
    return sum(clicks[n1] * clicks[n2] * joint_photon_distribution(n1, n2, p, s_max, filt)
               for n1 in range(n_max + 1) for n2 in range(n_max + 1))


# -- Monte Carlo ------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    p_tt11: float
    p_good: float
    stderr_tt11: float
    stderr_good: float
    n_frames: int


def monte_carlo_estimate(p: NoiseParams, protocol: Protocol | str, n_frames: int,
                         seed: int = 0, chunk: int = 1_000_000,
                         s_max: int | None = 1) -> MonteCarloEstimate:
    """Frame-by-frame simulation of the counting model.

    Per frame: Poisson(C_p) pairs; Alice detects each of her photons with
    probability eta_D; Bob's photons survive with probability 1 - p_loss_B
    and are then detected with eta_D; Bob's background is Poisson(C_e),
    thinned by 1/2 behind the protocol-1 filter, and detected with eta_D;
    each side adds Poisson(C_d) dark counts. A frame is a coincidence when
    each side has exactly one click, and a good one when both clicks come
    from the same source pair with nothing else firing.

    ``s_max`` mirrors the truncation of the closed forms: frames with more
    than ``s_max`` pairs are never counted, exactly as the truncated sum
    leaves them out. ``s_max=None`` simulates the untruncated Poisson
    source, which differs from the closed forms by the multi-pair terms.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    rng = np.random.default_rng(seed)
    cp, cd, ce = per_frame_params(p)
    eta, surv = p.eta_D, 1.0 - p.p_loss_B
    filt = _filtered(protocol)
    n_tt = 0
    n_good = 0
    done = 0
    while done < n_frames:
        n = min(chunk, n_frames - done)
        pairs = rng.poisson(cp, n)
        a_src = rng.binomial(pairs, eta)
        a_dark = rng.poisson(cd, n)
        b_arrive = rng.binomial(pairs, surv)
        b_src = rng.binomial(b_arrive, eta)
        env = rng.poisson(ce, n)
        if filt:
            env = rng.binomial(env, 0.5)
        b_env = rng.binomial(env, eta)
        b_dark = rng.poisson(cd, n)
        tt = (a_src + a_dark == 1) & (b_src + b_env + b_dark == 1)
        if s_max is not None:
            tt &= pairs <= s_max
        cand = tt & (a_src == 1) & (b_src == 1)
        # each side's detected photon is a uniformly random pair member, independently
        same_pair = rng.random(n) * np.maximum(pairs, 1) < 1.0
        n_tt += int(tt.sum())
        n_good += int((cand & same_pair).sum())
        done += n
    ptt = n_tt / n_frames
    pg = n_good / n_frames
    return MonteCarloEstimate(
        ptt, pg,
        sqrt(ptt * (1 - ptt) / n_frames),
        sqrt(pg * (1 - pg) / n_frames),
        n_frames,
    )
