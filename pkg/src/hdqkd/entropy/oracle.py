"""Direct evaluation of S(A|E) for a given state, with Eve holding the purification."""

from __future__ import annotations

import numpy as np

from ..linalg import check_density_matrix, eig_hermitian, entropy_from_spectrum
from .sdp import key_pinching_projectors

RANK_TOL = 1e-12


def direct_entropy_oracle(rho_ab: np.ndarray, d: int) -> float:
    """``S(A|E)`` in bits after Alice's key map, Eve purifying ``rho_ab``.

    With ``rho_ab = sum_k lam_k |psi_k><psi_k|`` and the purification
    ``sum_k sqrt(lam_k) |psi_k>|k>_E``, the post-measurement state is
    ``sum_a |a><a| (x) M_a`` with ``(M_a)_{kl} = sqrt(lam_k lam_l) <psi_l|P_a|psi_k>``
    and ``rho_E = diag(lam)``. The result is ``S(rho_ÃE) - S(rho_E)``.
    """
    rho = check_density_matrix(np.asarray(rho_ab, dtype=complex))
    if rho.shape != (d * d, d * d):
        raise ValueError(f"state must be {d * d} x {d * d}")
    lam, vecs = eig_hermitian(rho)
    keep = lam > RANK_TOL
    lam, vecs = lam[keep], vecs[:, keep]
    sq = np.sqrt(lam)
    spectra = []
    for p in key_pinching_projectors(d):
        m = (vecs.conj().T @ p @ vecs).T * np.outer(sq, sq)
        spectra.append(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))
    s_ae = entropy_from_spectrum(np.clip(np.concatenate(spectra), 0.0, None))
    return float(s_ae - entropy_from_spectrum(lam))
