"""Assembly of the relative-entropy SDP into a solver-neutral conic form.

Variables are sigma (the state, d**2 x d**2) and, for every key symbol ``a``
and quadrature node ``i``, a general matrix ``zeta`` plus Hermitian ``eta``
and ``theta``. The program is

    min  c_m + sum_{i,a} w_i / (t_i ln 2) * ( Tr[P_a (zeta + zeta^+ + (1 - t_i) eta)] + t_i Tr[theta] )
    s.t. [[sigma, zeta], [zeta^+, eta]] >= 0,  [[sigma, zeta^+], [zeta, theta]] >= 0,
         Tr sigma = 1,  Tr(E_k sigma) = f_k.

Every matrix variable is written as a linear map from a flat real vector
``x``. A PSD block becomes a row block ``G`` with ``svec(S(x)) = G x``, where
``S`` is the block itself (real field) or its real embedding
``[[Re, -Im], [Im, Re]]`` (complex field). ``svec`` stacks the upper triangle
column by column and scales off-diagonal entries by sqrt(2), so that
``<svec X, svec Y> = Tr(XY)``.

When every constraint operator is real (as for the time-bin POVMs at zero
interferometer phase) the optimum is attained at real variables: for any
feasible point, averaging it with its entrywise conjugate keeps every block
PSD, keeps ``Tr(E_k sigma)`` and does not change the objective. The real
field is then exact and four times cheaper per block; ``field="auto"``
picks it whenever it is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .quadrature import Quadrature

FIELDS = ("auto", "real", "complex")
IMAG_TOL = 1e-14
DEP_ROW_TOL = 1e-10


def key_pinching_projectors(d: int) -> list[np.ndarray]:
    """``|a><a| (x) I_d`` on the d**2 temporal space, for a = 0 .. d-1."""
    if d < 2:
        raise ValueError("d must be at least 2")
    out = []
    for a in range(d):
        p = np.zeros((d * d, d * d))
        idx = a * d + np.arange(d)
        p[idx, idx] = 1.0
        out.append(p)
    return out


def objective_constant(quad: Quadrature) -> float:
    """``c_m = sum_i w_i / (t_i ln 2)``."""
    return float(np.sum(quad.weights / (quad.nodes * log(2.0))))


@dataclass
class ConicForm:
    """``min c.x + offset`` s.t. ``A_eq x = b_eq`` and ``mat(G_k x)`` PSD for every k."""

    c: np.ndarray
    offset: float
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    psd_maps: list
    psd_dims: list
    n_vars: int

    @property
    def n_psd_rows(self) -> int:
        return int(sum(g.shape[0] for g in self.psd_maps))


@dataclass
class _MatVar:
    re: sp.csr_matrix
    im: sp.csr_matrix


@dataclass
class SdpProblem:
    dim: int
    outcomes: int
    quadrature: Quadrature
    constraints: list
    key_projectors: list
    field: str
    conic: ConicForm
    sigma: _MatVar = field(repr=False)
    blocks: list = field(default_factory=list, repr=False)
    n_dropped_rows: int = 0

    @property
    def objective_constant(self) -> float:
        return self.conic.offset

    def sigma_from_x(self, x: np.ndarray) -> np.ndarray:
        s = (self.sigma.re @ x).reshape(self.dim, self.dim)
        if self.field == "complex":
            s = s + 1j * (self.sigma.im @ x).reshape(self.dim, self.dim)
        return s


# -- variable maps ----------------------------------------------------------

class _Builder:
    """Hands out column ranges of ``x`` and records matrix parametrizations."""

    def __init__(self, n: int, real: bool):
        self.n = n
        self.real = real
        self.n_vars = 0
        self._pending = []

    def _take(self, k: int) -> int:
        start = self.n_vars
        self.n_vars += k
        return start

    def hermitian(self) -> int:
        n = self.n
        iu, ju = np.triu_indices(n)
        off = iu != ju
        k_re = len(iu)
        start = self._take(k_re + (0 if self.real else int(off.sum())))
        cols_re = start + np.arange(k_re)
        re_rows = np.concatenate([iu * n + ju, (ju * n + iu)[off]])
        re_cols = np.concatenate([cols_re, cols_re[off]])
        re_vals = np.ones(len(re_rows))
        if self.real:
            im = (np.empty(0, int), np.empty(0, int), np.empty(0))
        else:
            cols_im = start + k_re + np.arange(int(off.sum()))
            io, jo = iu[off], ju[off]
            im = (np.concatenate([io * n + jo, jo * n + io]),
                  np.concatenate([cols_im, cols_im]),
                  np.concatenate([np.ones(len(io)), -np.ones(len(io))]))
        return self._record((re_rows, re_cols, re_vals), im)

    def general(self) -> int:
        n2 = self.n * self.n
        start = self._take(n2 if self.real else 2 * n2)
        rows = np.arange(n2)
        re = (rows, start + rows, np.ones(n2))
        if self.real:
            im = (np.empty(0, int), np.empty(0, int), np.empty(0))
        else:
            im = (rows, start + n2 + rows, np.ones(n2))
        return self._record(re, im)

    def _record(self, re, im) -> int:
        self._pending.append((re, im))
        return len(self._pending) - 1

    def finalize(self) -> list[_MatVar]:
        n2 = self.n * self.n
        shape = (n2, self.n_vars)
        out = []
        for (rr, rc, rv), (ir, ic, iv) in self._pending:
            out.append(_MatVar(sp.csr_matrix((rv, (rr, rc)), shape=shape),
                               sp.csr_matrix((iv, (ir, ic)), shape=shape)))
        return out


def _adjoint(v: _MatVar, n: int) -> _MatVar:
    perm = np.arange(n * n).reshape(n, n).T.ravel()
    return _MatVar(v.re[perm], -v.im[perm])


def svec_order(k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(rows, cols)`` of the svec entries of a k x k matrix: upper triangle, column-major."""
    lo_r, lo_c = np.tril_indices(k)
    return lo_c, lo_r


def svec(mat: np.ndarray) -> np.ndarray:
    r, c = svec_order(mat.shape[0])
    scale = np.where(r == c, 1.0, np.sqrt(2.0))
    return mat[r, c] * scale


def smat(vec: np.ndarray, k: int) -> np.ndarray:
    r, c = svec_order(k)
    scale = np.where(r == c, 1.0, 1.0 / np.sqrt(2.0))
    out = np.zeros((k, k))
    out[r, c] = vec * scale
    out[c, r] = vec * scale
    return out


def _block_map(parts: list[list[_MatVar]], n: int, real: bool) -> sp.csr_matrix:
    """svec map of the PSD matrix built from a 2 x 2 grid of n x n variable maps."""
    re_stack = sp.vstack([parts[0][0].re, parts[0][1].re, parts[1][0].re, parts[1][1].re]).tocsr()
    n2 = n * n
    k2 = 2 * n  # side of the Hermitian block

    def src(R, C):
        q = 2 * (R // n) + (C // n)
        return q * n2 + (R % n) * n + (C % n)

    if real:
        r, c = svec_order(k2)
        scale = np.where(r == c, 1.0, np.sqrt(2.0))
        return sp.diags(scale) @ re_stack[src(r, c)]

    im_stack = sp.vstack([parts[0][0].im, parts[0][1].im, parts[1][0].im, parts[1][1].im]).tocsr()
    k = 2 * k2
    r, c = svec_order(k)
    scale = np.where(r == c, 1.0, np.sqrt(2.0))
    top_r, left_c = r < k2, c < k2
    rr, cc = r % k2, c % k2
    # embedding [[Re, -Im], [Im, Re]]; svec only reads r <= c, so r in bottom implies c in right
    use_im = top_r != left_c
    sign = np.where(use_im & top_r, -1.0, 1.0)  # top-right quadrant carries -Im
    idx = src(rr, cc)
    both = sp.vstack([re_stack, im_stack]).tocsr()
    rows = np.where(use_im, idx + re_stack.shape[0], idx)
    return sp.diags(scale * sign) @ both[rows]


# -- constraints --------------------------------------------------------------

def _check_constraints(constraints, dim: int) -> list[tuple[np.ndarray, float]]:
    out = []
    for k, (e, f) in enumerate(constraints):
        e = np.asarray(e)
        if e.shape != (dim, dim):
            raise ValueError(f"constraint {k}: operator shape {e.shape} != ({dim}, {dim})")
        if not np.allclose(e, e.conj().T, atol=1e-10):
            raise ValueError(f"constraint {k}: operator is not Hermitian")
        f = float(f)
        if not -1e-10 <= f <= 1 + 1e-10:
            raise ValueError(f"constraint {k}: value {f} outside [0, 1]")
        out.append((e, f))
    return out


def constraint_rows(constraints, dim: int, complex_field: bool) -> tuple[np.ndarray, np.ndarray]:
    """Rows of ``Tr(E sigma)`` in the real coordinates of sigma's matrix entries.

    Returns ``(A, b)`` with ``A`` acting on ``[vec Re sigma, vec Im sigma]``
    (only the first half when ``complex_field`` is false). The trace row
    ``Tr sigma = 1`` comes first.
    """
    n2 = dim * dim
    rows = [np.concatenate([np.eye(dim).ravel(), np.zeros(n2)])]
    vals = [1.0]
    for e, f in constraints:
        et = np.asarray(e).T.ravel()
        rows.append(np.concatenate([et.real, -et.imag]))
        vals.append(f)
    a = np.array(rows)
    if not complex_field:
        a = a[:, :n2]
    return a, np.array(vals)


def independent_rows(a: np.ndarray, b: np.ndarray, tol: float = DEP_ROW_TOL) -> np.ndarray:
    """Indices of a maximal independent subset of rows, keeping inconsistent ones.

    Dependent rows whose right-hand side disagrees with the kept rows (beyond
    ``sqrt(tol)``) are retained so that the solver reports infeasibility
    instead of silently dropping data.
    """
    if a.shape[0] == 0:
        return np.arange(0)
    _, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag[0], 1.0)))
    keep = np.sort(piv[:rank])
    drop = np.sort(piv[rank:])
    if len(drop):
        coef, *_ = np.linalg.lstsq(a[keep].T, a[drop].T, rcond=None)
        mismatch = np.abs(coef.T @ b[keep] - b[drop])
        bad = drop[mismatch > np.sqrt(tol)]
        keep = np.sort(np.concatenate([keep, bad]))
    return keep


def constraint_rank(constraints, dim: int, complex_field: bool = True) -> int:
    """Rank of the affine constraint map on Hermitian sigma (trace row included)."""
    a, _ = constraint_rows(_check_constraints(constraints, dim), dim, True)
    n = dim
    # restrict to the Hermitian parametrization (diag re, upper re, upper im)
    b = _Builder(n, real=not complex_field)
    b.hermitian()
    (v,) = b.finalize()
    param = sp.vstack([v.re, v.im]).toarray()
    return int(np.linalg.matrix_rank(a @ param, tol=1e-9))


def hermitian_dof(dim: int, complex_field: bool = True) -> int:
    return dim * dim if complex_field else dim * (dim + 1) // 2


# -- assembly -----------------------------------------------------------------

def assemble_sdp(constraints, d: int, quadrature: Quadrature, field: str = "auto") -> SdpProblem:
    """Build the conic form of the entropy program.

    Parameters
    ----------
    constraints : sequence of (operator, value)
        ``Tr(E_k sigma) = f_k`` on the d**2 temporal space. ``Tr sigma = 1``
        is always added.
    d : int
        Number of key symbols; sigma is d**2 x d**2.
    quadrature : Quadrature
        Gauss-Radau rule; one (zeta, eta, theta) triple per node and symbol.
    field : {"auto", "real", "complex"}
        Variable field. ``"auto"`` uses real variables when all operators are
        real.
    """
    if field not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}")
    if d < 2:
        raise ValueError("d must be at least 2")
    dim = d * d
    cons = _check_constraints(constraints, dim)
    has_imag = any(np.max(np.abs(np.imag(e)), initial=0.0) > IMAG_TOL for e, _ in cons)
    if field == "auto":
        field = "complex" if has_imag else "real"
    if field == "real" and has_imag:
        raise ValueError("constraint operators have imaginary parts; the real field would drop them")
    real = field == "real"

    bld = _Builder(dim, real)
    handles = {"sigma": bld.hermitian()}
    for a in range(d):
        for i in range(quadrature.m):
            handles[("zeta", a, i)] = bld.general()
            handles[("eta", a, i)] = bld.hermitian()
            handles[("theta", a, i)] = bld.hermitian()
    maps = bld.finalize()
    var = {k: maps[h] for k, h in handles.items()}
    sig = var["sigma"]

    # objective
    n_vars = bld.n_vars
    c = np.zeros(n_vars)
    diag_rows = np.arange(dim) * (dim + 1)
    ln2 = log(2.0)
    for a in range(d):
        rows_a = a * d + np.arange(d)
        rows_a = rows_a * (dim + 1)
        for i, (t, w) in enumerate(quadrature):
            coef = w / (t * ln2)
            z, e, th = var[("zeta", a, i)], var[("eta", a, i)], var[("theta", a, i)]
            c += coef * 2.0 * np.asarray(z.re[rows_a].sum(axis=0)).ravel()
            c += coef * (1.0 - t) * np.asarray(e.re[rows_a].sum(axis=0)).ravel()
            c += coef * t * np.asarray(th.re[diag_rows].sum(axis=0)).ravel()
    offset = objective_constant(quadrature)

    # equalities
    a_ent, b_eq = constraint_rows(cons, dim, not real)
    keep = independent_rows(a_ent, b_eq)
    sig_stack = sig.re if real else sp.vstack([sig.re, sig.im]).tocsr()
    a_eq = sp.csr_matrix(a_ent[keep]) @ sig_stack
    a_eq.eliminate_zeros()

    # PSD blocks
    psd_maps, psd_dims, blocks = [], [], []
    side = 2 * dim if real else 4 * dim
    for a in range(d):
        for i in range(quadrature.m):
            z = var[("zeta", a, i)]
            zd = _adjoint(z, dim)
            g1 = _block_map([[sig, z], [zd, var[("eta", a, i)]]], dim, real)
            g2 = _block_map([[sig, zd], [z, var[("theta", a, i)]]], dim, real)
            psd_maps += [g1.tocsr(), g2.tocsr()]
            psd_dims += [side, side]
            blocks += [("gamma1", a, i), ("gamma2", a, i)]

    conic = ConicForm(c, offset, sp.csr_matrix(a_eq), b_eq[keep], psd_maps, psd_dims, n_vars)
    return SdpProblem(
        dim=dim, outcomes=d, quadrature=quadrature, constraints=cons,
        key_projectors=key_pinching_projectors(d), field=field, conic=conic,
        sigma=sig, blocks=blocks, n_dropped_rows=len(b_eq) - len(keep),
    )
