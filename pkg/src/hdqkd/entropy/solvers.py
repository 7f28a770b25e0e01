"""Solver adapters for the conic form and the safe-side entropy bound.

A backend is a callable ``(ConicForm, SolverOptions) -> RawSolve``. The
default is Clarabel (interior point, reports primal and dual objectives);
SCS is available when installed. Others can be added with
:func:`register_backend`.
"""

from __future__ import annotations

import enum
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sdp import ConicForm, SdpProblem, svec_order

GAP_REL_OPTIMAL = 1e-7


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    NEAR_OPTIMAL = "near_optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"

    @property
    def has_objective(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.NEAR_OPTIMAL)


@dataclass(frozen=True)
class SolverOptions:
    backend: str = "clarabel"
    tol: float = 1e-8
    max_iter: int = 200
    time_limit_s: float | None = None
    verbose: bool = False
    # Clarabel's supernodal factorization; several times faster than qdldl here
    direct_solve_method: str = "faer"


@dataclass
class RawSolve:
    """What a backend reports, objectives excluding the constant offset."""

    status: SolveStatus
    raw_status: str
    x: np.ndarray | None
    primal: float
    dual: float
    iterations: int = 0


@dataclass
class SdpSolution:
    status: SolveStatus
    objective_bits: float | None
    duality_gap: float
    sigma_star: np.ndarray | None = None
    primal_bits: float = float("nan")
    dual_bits: float = float("nan")
    backend: str = ""
    raw_status: str = ""
    iterations: int = 0
    solve_time_s: float = 0.0
    diagnostics: str = ""

    @property
    def ok(self) -> bool:
        return self.status.has_objective


Backend = Callable[[ConicForm, SolverOptions], RawSolve]
_BACKENDS: dict[str, Backend] = {}


def register_backend(name: str, fn: Backend) -> None:
    _BACKENDS[name] = fn


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _stack(form: ConicForm) -> tuple[sp.csc_matrix, np.ndarray]:
    """``A x + s = b`` with the zero cone first, then the PSD cones (``s = G x``)."""
    blocks = [form.A_eq] + [-g for g in form.psd_maps]
    a = sp.vstack(blocks).tocsc()
    b = np.concatenate([form.b_eq, np.zeros(form.n_psd_rows)])
    return a, b


def _relative_gap(p: float, d: float) -> float:
    return abs(p - d) / max(1.0, min(abs(p), abs(d)))


def _clarabel(form: ConicForm, opts: SolverOptions) -> RawSolve:
    import clarabel

    a, b = _stack(form)
    n = form.n_vars
    cones = [clarabel.ZeroConeT(form.A_eq.shape[0])]
    cones += [clarabel.PSDTriangleConeT(k) for k in form.psd_dims]
    st = clarabel.DefaultSettings()
    st.verbose = opts.verbose
    st.max_iter = opts.max_iter
    st.tol_gap_abs = opts.tol
    st.tol_gap_rel = opts.tol
    st.tol_feas = opts.tol
    st.direct_solve_method = opts.direct_solve_method
    if opts.time_limit_s is not None:
        st.time_limit = opts.time_limit_s
    p = sp.csc_matrix((n, n))
    sol = clarabel.DefaultSolver(p, form.c, a, b, cones, st).solve()
    raw = str(sol.status).split(".")[-1]
    if raw == "Solved":
        gap = _relative_gap(sol.obj_val, sol.obj_val_dual)
        status = SolveStatus.OPTIMAL if gap <= GAP_REL_OPTIMAL else SolveStatus.NEAR_OPTIMAL
    elif raw == "AlmostSolved":
        status = SolveStatus.NEAR_OPTIMAL
    elif raw in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        status = SolveStatus.INFEASIBLE
    else:
        status = SolveStatus.NUMERICAL_FAILURE
    return RawSolve(status, raw, np.asarray(sol.x), float(sol.obj_val),
                    float(sol.obj_val_dual), int(sol.iterations))


def _scs_permutation(k: int) -> np.ndarray:
    """Index into our svec (upper, column-major) for SCS's lower, column-major order."""
    r, c = svec_order(k)
    pos = {(i, j): n for n, (i, j) in enumerate(zip(r, c))}
    out = []
    for j in range(k):
        for i in range(j, k):
            out.append(pos[(j, i)])
    return np.array(out)


def _scs(form: ConicForm, opts: SolverOptions) -> RawSolve:
    import scs

    maps = [g[_scs_permutation(k)] for g, k in zip(form.psd_maps, form.psd_dims)]
    a = sp.vstack([form.A_eq] + [-g for g in maps]).tocsc()
    b = np.concatenate([form.b_eq, np.zeros(form.n_psd_rows)])
    data = {"A": a, "b": b, "c": form.c}
    cone = {"z": form.A_eq.shape[0], "s": list(form.psd_dims)}
    solver = scs.SCS(data, cone, eps_abs=opts.tol, eps_rel=opts.tol,
                     max_iters=max(opts.max_iter, 100_000), verbose=opts.verbose)
    sol = solver.solve()
    info = sol["info"]
    raw = info["status"]
    code = int(info["status_val"])
    if code == 1:
        gap = _relative_gap(info["pobj"], info["dobj"])
        status = SolveStatus.OPTIMAL if gap <= GAP_REL_OPTIMAL else SolveStatus.NEAR_OPTIMAL
    elif code == 2:
        status = SolveStatus.NEAR_OPTIMAL
    elif code in (-2, -7):
        status = SolveStatus.INFEASIBLE
    else:
        status = SolveStatus.NUMERICAL_FAILURE
    return RawSolve(status, raw, np.asarray(sol["x"]), float(info["pobj"]),
                    float(info["dobj"]), int(info["iter"]))


register_backend("clarabel", _clarabel)
register_backend("scs", _scs)


def solve_conic(form: ConicForm, opts: SolverOptions | None = None) -> RawSolve:
    opts = opts or SolverOptions()
    try:
        backend = _BACKENDS[opts.backend]
    except KeyError:
        raise ValueError(f"unknown solver backend {opts.backend!r}; have {available_backends()}") from None
    return backend(form, opts)


def solve_entropy_bound(problem: SdpProblem, solver_opts: SolverOptions | None = None) -> SdpSolution:
    """Solve the assembled program and return a safe-side lower bound on S(A|E).

    The reported bound is ``c_m + primal - |primal - dual|``. It is ``None``
    unless the backend reached an optimal or near-optimal point.
    """
    opts = solver_opts or SolverOptions()
    t0 = time.perf_counter()
    try:
        raw = solve_conic(problem.conic, opts)
    except ImportError as exc:
        return SdpSolution(SolveStatus.NUMERICAL_FAILURE, None, float("nan"), backend=opts.backend,
                           diagnostics=f"backend unavailable: {exc}")
    elapsed = time.perf_counter() - t0
    off = problem.conic.offset
    gap = abs(raw.primal - raw.dual) if np.isfinite(raw.primal) and np.isfinite(raw.dual) else float("nan")
    sol = SdpSolution(
        status=raw.status, objective_bits=None, duality_gap=gap,
        primal_bits=raw.primal + off, dual_bits=raw.dual + off,
        backend=opts.backend, raw_status=raw.raw_status,
        iterations=raw.iterations, solve_time_s=elapsed,
    )
    if raw.status.has_objective and np.isfinite(gap):
        sol.objective_bits = raw.primal + off - gap
        sol.sigma_star = problem.sigma_from_x(raw.x)
    else:
        if raw.status.has_objective:
            sol.status = SolveStatus.NUMERICAL_FAILURE
        sol.diagnostics = (f"{opts.backend} stopped with {raw.raw_status} after {raw.iterations} "
                           f"iterations (primal {raw.primal:.3e}, dual {raw.dual:.3e})")
    return sol
