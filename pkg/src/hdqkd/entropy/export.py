"""Self-describing JSON export of an assembled entropy SDP.

Top-level fields
----------------
format, version
    ``"hdqkd-entropy-sdp"`` and ``1``.
field
    ``"real"`` or ``"complex"``: the field of the matrix variables.
sigma_dim, key_outcomes
    ``d**2`` and ``d``.
quadrature
    ``{"m", "nodes", "weights"}``: the Gauss-Radau rule on [0, 1].
objective_constant
    ``c_m = sum_i w_i / (t_i ln 2)``; add it to the conic objective.
key_projectors
    One list of ``[row, col, re, im]`` entries per key symbol.
constraints
    ``[{"operator": [[row, col, re, im], ...], "value": f}]`` meaning
    ``Tr(E sigma) = f``. ``Tr sigma = 1`` is implied and not listed.
psd_blocks
    ``[{"name": "gamma1" | "gamma2", "a": a, "node": i, "dim": k}]``, in the
    same order as ``conic.psd``.
conic
    The compiled real problem ``min c.x + objective_constant`` subject to
    ``A_eq x = b_eq`` and ``smat(G_k x)`` PSD for each block:
    ``n_vars``; ``c`` as ``[[index, value]]``; ``A_eq`` as
    ``[[row, col, value]]`` with ``shape``; ``b_eq``; ``psd`` as
    ``[{"dim": k, "G": [[row, col, value]]}]``. ``svec`` lists the upper
    triangle column by column (``(0,0), (0,1), (1,1), (0,2), ...``) with
    off-diagonal entries scaled by sqrt(2).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .sdp import ConicForm, SdpProblem

FORMAT = "hdqkd-entropy-sdp"
VERSION = 1


def _op_triplets(op: np.ndarray, tol: float = 0.0) -> list:
    op = np.asarray(op)
    rows, cols = np.nonzero(np.abs(op) > tol)
    vals = op[rows, cols]
    return [[int(r), int(c), float(np.real(v)), float(np.imag(v))]
            for r, c, v in zip(rows, cols, vals)]


def _sparse_triplets(m) -> list:
    m = sp.coo_matrix(m)
    return [[int(r), int(c), float(v)] for r, c, v in zip(m.row, m.col, m.data)]


def canonical_dict(problem: SdpProblem) -> dict:
    form = problem.conic
    q = problem.quadrature
    return {
        "format": FORMAT,
        "version": VERSION,
        "field": problem.field,
        "sigma_dim": problem.dim,
        "key_outcomes": problem.outcomes,
        "quadrature": {"m": q.m, "nodes": q.nodes.tolist(), "weights": q.weights.tolist()},
        "objective_constant": form.offset,
        "key_projectors": [_op_triplets(p) for p in problem.key_projectors],
        "constraints": [{"operator": _op_triplets(e), "value": f} for e, f in problem.constraints],
        "psd_blocks": [{"name": n, "a": a, "node": i, "dim": k}
                       for (n, a, i), k in zip(problem.blocks, form.psd_dims)],
        "conic": {
            "n_vars": form.n_vars,
            "c": [[int(i), float(form.c[i])] for i in np.flatnonzero(form.c)],
            "A_eq": _sparse_triplets(form.A_eq),
            "A_eq_shape": list(form.A_eq.shape),
            "b_eq": form.b_eq.tolist(),
            "psd": [{"dim": k, "G": _sparse_triplets(g)} for g, k in zip(form.psd_maps, form.psd_dims)],
        },
    }


def export_sdp(problem: SdpProblem, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(canonical_dict(problem)))
    return path


def _from_triplets(entries, shape) -> sp.csr_matrix:
    if not entries:
        return sp.csr_matrix(shape)
    r, c, v = zip(*entries)
    return sp.csr_matrix((v, (r, c)), shape=shape)


def load_conic(path: str | Path) -> ConicForm:
    """Rebuild the compiled conic form from an exported file."""
    data = json.loads(Path(path).read_text())
    if data.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} file")
    cf = data["conic"]
    n = cf["n_vars"]
    c = np.zeros(n)
    for i, v in cf["c"]:
        c[i] = v
    psd_dims = [b["dim"] for b in cf["psd"]]
    psd_maps = [_from_triplets(b["G"], (k * (k + 1) // 2, n)) for b, k in zip(cf["psd"], psd_dims)]
    return ConicForm(
        c=c, offset=data["objective_constant"],
        A_eq=_from_triplets(cf["A_eq"], tuple(cf["A_eq_shape"])),
        b_eq=np.array(cf["b_eq"], dtype=float),
        psd_maps=psd_maps, psd_dims=psd_dims, n_vars=n,
    )
