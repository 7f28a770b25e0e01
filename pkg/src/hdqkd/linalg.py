"""Dense complex linear algebra and entropy helpers.

Every operator in the package is a plain ``numpy.ndarray``. Tensor products
use the Kronecker convention: the left factor is the most significant index,
so ``|p, n>`` in a polarization (x) time space has flat index ``p * d + n``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10
DENSITY_HERMITIAN_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-12
DENSITY_PSD_TOL = -1e-10


class DensityMatrixError(ValueError):
    """Raised when a matrix violates the density-matrix invariants."""


def basis_ket(dim: int, index: int) -> np.ndarray:
    """Computational basis vector ``|index>`` of dimension ``dim``."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} outside [0, {dim})")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(ket: np.ndarray) -> np.ndarray:
    """Rank-one operator ``|ket><ket|``."""
    ket = np.asarray(ket, dtype=complex).ravel()
    return np.outer(ket, ket.conj())


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators (or kets).

    >>> tensor(np.eye(2), np.eye(2)).shape
    (4, 4)
    """
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(o) for o in ops))


def is_hermitian(h: np.ndarray, atol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= atol)


def hermitian_part(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    return 0.5 * (h + h.conj().T)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : ndarray
        Square operator on the product space ``dims[0] x dims[1] x ...``.
    dims : sequence of int
        Subsystem dimensions, most significant first.
    keep : iterable of int
        Indices of the subsystems that survive, in any order. The result is
        ordered by increasing subsystem index.
    """
    m = np.asarray(m)
    dims = [int(x) for x in dims]
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(f"operator of shape {m.shape} does not match subsystem dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep={keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    # trace out from the highest index down so remaining axis numbers stay valid
    traced = [k for k in range(n) if k not in keep]
    nsys = n
    for k in reversed(traced):
        t = np.trace(t, axis1=k, axis2=k + nsys)
        nsys -= 1
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def eig_hermitian(h: np.ndarray, atol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian operator, eigenvalues ascending.

    Raises ``ValueError`` if ``h`` is not Hermitian within ``atol``.
    """
    h = np.asarray(h)
    if not is_hermitian(h, atol):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    return np.linalg.eigh(hermitian_part(h))


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate the density-matrix invariants and return ``rho`` as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityMatrixError(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho, DENSITY_HERMITIAN_TOL):
        raise DensityMatrixError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > DENSITY_TRACE_TOL:
        raise DensityMatrixError(f"density matrix trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(hermitian_part(rho))[0]
    if lam_min < DENSITY_PSD_TOL:
        raise DensityMatrixError(f"density matrix has eigenvalue {lam_min:.3e} < 0")
    return rho


def entropy_from_spectrum(eigenvalues: np.ndarray) -> float:
    """Shannon entropy in bits of a probability vector, with 0 log 0 = 0."""
    p = np.asarray(eigenvalues, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits."""
    rho = check_density_matrix(rho)
    lam = np.linalg.eigvalsh(hermitian_part(rho))
    # tiny negative eigenvalues are numerical noise
    return entropy_from_spectrum(np.clip(lam, 0.0, None))


def complex_to_real_embedding(h: np.ndarray) -> np.ndarray:
    """Real symmetric form ``[[Re h, -Im h], [Im h, Re h]]`` of a Hermitian ``h``.

    ``h`` is PSD iff the embedding is; each eigenvalue of ``h`` shows up twice.
    """
    h = np.asarray(h)
    if not is_hermitian(h):
        raise ValueError("complex_to_real_embedding requires a Hermitian matrix")
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR decomposition of a Ginibre matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full-rank (or given-rank) density matrix, Hilbert-Schmidt style."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = hermitian_part(rho / np.trace(rho).real)
    return rho
