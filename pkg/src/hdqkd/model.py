"""Time-bin states, the Franson-type interferometer and the effective TSUP kets.

Single-party spaces are ordered polarization (x) time, so ``|p, n>`` has index
``p * d + n`` with ``H = 0`` and ``V = 1``. Two-party spaces are ordered by
party: ``(pol_A, time_A) (x) (pol_B, time_B)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import basis_ket, projector, tensor

SQRT2 = np.sqrt(2.0)

KET_H = np.array([1.0, 0.0], dtype=complex)
KET_V = np.array([0.0, 1.0], dtype=complex)
KET_D = (KET_H + KET_V) / SQRT2
KET_A = (KET_H - KET_V) / SQRT2

# PBS port register: x (horizontal input / transmitted output), y (vertical)
_PORT_X = np.array([1.0, 0.0], dtype=complex)
_PORT_Y = np.array([0.0, 1.0], dtype=complex)


class Protocol(str, enum.Enum):
    P1 = "p1"
    P2 = "p2"
    BBM92 = "bbm92"


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol selector plus the time-bin count and interferometer phases.

    ``eta_bs`` is the TOA/TSUP beamsplitter ratio. It is kept for bookkeeping
    only; asymptotic rates do not depend on it.
    """

    protocol: Protocol = Protocol.P1
    d: int = 4
    phi_A: float = 0.0
    phi_B: float = 0.0
    eta_bs: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if self.d < 2 or self.d % 2:
            raise ValueError(f"d must be an even integer >= 2, got {self.d}")
        if self.protocol is Protocol.BBM92 and self.d != 2:
            raise ValueError("BBM92 is the d = 2 case of protocol 1")
        if not 0.0 <= self.eta_bs <= 1.0:
            raise ValueError("eta_bs must lie in [0, 1]")


@dataclass(frozen=True)
class TargetState:
    """Source state. ``ket`` lives in the protocol's measured space.

    For P1/BBM92 the polarization filters leave ``|DD>`` (x) temporal part, so
    ``ket`` is the temporal d**2 vector. For P2 it is the full
    ``(2d) x (2d)`` polarization-time state.
    """

    protocol: Protocol
    d: int
    ket: np.ndarray
    temporal: np.ndarray = field(repr=False)


def time_shift_op(d: int) -> np.ndarray:
    """Shift ``|n> -> |n+1>`` truncated to ``d`` bins; ``|d-1>`` maps to zero."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return np.eye(d, k=-1, dtype=complex)


def phase_shift_op(phi: float, dim_pol_time: int) -> np.ndarray:
    return np.exp(1j * phi) * np.eye(dim_pol_time, dtype=complex)


def pbs_unitary(d_time: int) -> np.ndarray:
    """Polarizing beamsplitter on pol (x) time (x) port: H is transmitted, V reflected."""
    eye_t = np.eye(d_time)
    hh = projector(KET_H)
    vv = projector(KET_V)
    xx = np.outer(_PORT_X, _PORT_X.conj())
    yy = np.outer(_PORT_Y, _PORT_Y.conj())
    xy = np.outer(_PORT_X, _PORT_Y.conj())
    yx = np.outer(_PORT_Y, _PORT_X.conj())
    return tensor(hh, eye_t, xx + yy) + tensor(vv, eye_t, yx + xy)


def interferometer_unitary_single(d: int, phi: float = 0.0) -> np.ndarray:
    """One party's delay-loop interferometer, input port x to output port x''.

    Built as ``PBS . Q_y . T_y . PBS`` on a time space of ``d + 1`` bins so the
    one-bin delay of the long arm never falls off the end. Returns a
    ``2(d+1)`` square matrix; its restriction to bins ``0..d-1`` is an
    isometry sending ``|H,n> -> |H,n>`` and ``|V,n> -> e^{i phi}|V,n+1>``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    dt = d + 1
    eye_pol = np.eye(2)
    shift = time_shift_op(dt)
    xx = np.outer(_PORT_X, _PORT_X.conj())
    yy = np.outer(_PORT_Y, _PORT_Y.conj())
    t_y = tensor(eye_pol, np.eye(dt), xx) + tensor(eye_pol, shift, yy)
    q_y = tensor(eye_pol, np.eye(dt), xx) + tensor(phase_shift_op(phi, 2 * dt), yy)
    pbs = pbs_unitary(dt)
    full = pbs @ q_y @ t_y @ pbs
    # <x''| full |x>, dropping the port register
    out_x = tensor(np.eye(2 * dt), _PORT_X.reshape(1, 2))
    in_x = tensor(np.eye(2 * dt), _PORT_X.reshape(2, 1))
    return out_x @ full @ in_x


def embed_time(ket: np.ndarray, d: int, d_new: int) -> np.ndarray:
    """Embed a pol (x) time ket on ``d`` bins into ``d_new >= d`` bins."""
    ket = np.asarray(ket).reshape(2, d)
    out = np.zeros((2, d_new), dtype=complex)
    out[:, :d] = ket
    return out.ravel()


def superposition_ket(i: int, sign: str | int, d: int) -> np.ndarray:
    """Neighbouring-bin superposition ``(|i> +- |i-1>)/sqrt(2)`` for ``1 <= i <= d-1``.

    ``sign`` is ``'+'``/``'-'`` (or ``+1``/``-1``).
    """
    if not 1 <= i <= d - 1:
        raise ValueError(f"superposition index i={i} must satisfy 1 <= i <= {d - 1}")
    s = _sign(sign)
    return (basis_ket(d, i) + s * basis_ket(d, i - 1)) / SQRT2


def _sign(sign) -> float:
    if sign in ("+", "plus", 1, +1.0):
        return 1.0
    if sign in ("-", "minus", -1, -1.0):
        return -1.0
    raise ValueError(f"unknown sign {sign!r}")


def effective_meas_ket(x: int, i: int, phi: float, d: int) -> np.ndarray:
    """Effective TSUP ket for detector ``x`` (1 = D, 2 = A) at time stamp ``i``.

    ``(|H,i> + (-1)^(x-1) e^{-i phi} |V,i-1>) / sqrt(2)`` in the 2d-dimensional
    polarization-time space, i.e. the interferometer pulled back onto the
    input state.
    """
    if x not in (1, 2):
        raise ValueError(f"detector index must be 1 or 2, got {x}")
    if not 1 <= i <= d - 1:
        raise ValueError(f"time stamp i={i} must satisfy 1 <= i <= {d - 1}")
    sgn = 1.0 if x == 1 else -1.0
    h_i = tensor(KET_H, basis_ket(d, i))
    v_prev = tensor(KET_V, basis_ket(d, i - 1))
    return (h_i + sgn * np.exp(-1j * phi) * v_prev) / SQRT2


def maximally_entangled_ket(d: int) -> np.ndarray:
    """``sum_k |kk> / sqrt(d)`` on the d**2 temporal space."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return v


def _two_party_pol_time(pol_ab: np.ndarray, time_ab: np.ndarray, d: int) -> np.ndarray:
    """Reorder ``(pol_A pol_B) (x) (time_A time_B)`` into party order."""
    t = np.kron(pol_ab, time_ab).reshape(2, 2, d, d)
    return t.transpose(0, 2, 1, 3).reshape(-1)


def target_state(cfg: ProtocolConfig) -> TargetState:
    d = cfg.d
    temporal = maximally_entangled_ket(d)
    if cfg.protocol is Protocol.P2:
        pol = (tensor(KET_H, KET_H) + tensor(KET_V, KET_V)) / SQRT2
        ket = _two_party_pol_time(pol, temporal, d)
    else:
        ket = temporal.copy()
    return TargetState(cfg.protocol, d, ket, temporal)


def full_polarization_state(rho_t: np.ndarray, protocol: Protocol | str, d: int) -> np.ndarray:
    """Lift a temporal state to the party-ordered polarization-time space.

    P1/BBM92 use ``|DD><DD| (x) rho_T`` (enforced by the filters). P2 uses the
    assumed ``|Phi+><Phi+| (x) rho_T`` with ``Phi+ = (|HH> + |VV>)/sqrt(2)``.
    """
    protocol = Protocol(protocol)
    if protocol is Protocol.P2:
        pol = (tensor(KET_H, KET_H) + tensor(KET_V, KET_V)) / SQRT2
    else:
        pol = tensor(KET_D, KET_D)
    full = np.kron(projector(pol), np.asarray(rho_t))
    t = full.reshape(2, 2, d, d, 2, 2, d, d)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = 4 * d * d
    return t.reshape(n, n)


def isotropic_time_state(v: float, d: int) -> np.ndarray:
    """``v |Phi><Phi| + (1 - v) I / d**2`` with ``Phi`` maximally entangled."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    phi = maximally_entangled_ket(d)
    return v * projector(phi) + (1.0 - v) * np.eye(d * d, dtype=complex) / (d * d)
