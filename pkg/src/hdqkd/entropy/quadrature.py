"""Gauss-Radau quadrature on [0, 1] with the node at t = 1 fixed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class Quadrature:
    m: int
    nodes: np.ndarray
    weights: np.ndarray

    def __iter__(self):
        return iter(zip(self.nodes, self.weights))


def _legendre_offdiag(k: np.ndarray) -> np.ndarray:
    # monic Legendre recurrence: beta_k = k^2 / (4k^2 - 1)
    return k / np.sqrt(4.0 * k * k - 1.0)


def gauss_radau(m: int) -> Quadrature:
    """m-point Gauss-Radau rule for the uniform weight on [0, 1], node m at 1.

    Golub's construction: take the (m-1)-point Legendre Jacobi matrix, solve
    for the last diagonal entry that makes x = 1 an eigenvalue of the
    extended m x m matrix, then read nodes and weights off its
    eigen-decomposition. The rule is exact up to degree 2m - 2 and the fixed
    node carries weight 1/m**2.
    """
    if m < 1:
        raise ValueError(f"Gauss-Radau needs m >= 1, got {m}")
    if m == 1:
        return Quadrature(1, np.array([1.0]), np.array([1.0]))

    b = _legendre_offdiag(np.arange(1, m, dtype=float))  # b_1 .. b_{m-1}
    n = m - 1
    jac = np.diag(b[: n - 1], 1) + np.diag(b[: n - 1], -1)
    rhs = np.zeros(n)
    rhs[-1] = b[n - 1] ** 2
    delta = np.linalg.solve(jac - np.eye(n), rhs)
    alpha_m = 1.0 + delta[-1]

    diag = np.zeros(m)
    diag[-1] = alpha_m
    x, vecs = scipy.linalg.eigh_tridiagonal(diag, b)
    w = 2.0 * vecs[0, :] ** 2  # mu_0 = int_{-1}^{1} dx
    x[-1] = 1.0  # exact by construction; remove the last-ulp wobble
    order = np.argsort(x)
    return Quadrature(m, 0.5 * (x[order] + 1.0), 0.5 * w[order])
