"""Measurement-setting POVMs on the temporal space and the click-matrix algebra.

Detector 1 corresponds to the ``+`` superposition and detector 2 to ``-`` on
both sides. All operators act on the d**2 temporal space of Alice (x) Bob.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import basis_ket, projector, tensor
from .model import Protocol, superposition_ket

KINDS = ("TT", "SS", "TS", "ST")
SIGN_OF_DETECTOR = {1: "+", 2: "-"}
DETECTOR_OF_SIGN = {"+": 1, "-": 2}


@dataclass(frozen=True)
class ClickLabel:
    """One coincidence-click matrix entry, e.g. ``SS_{1,2}(3, 1)``."""

    kind: str
    i: int
    j: int
    a: int | None = None
    b: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown click kind {self.kind!r}")
        need_a = self.kind in ("SS", "ST")
        need_b = self.kind in ("SS", "TS")
        if need_a != (self.a is not None) or need_b != (self.b is not None):
            raise ValueError(f"detector labels a={self.a}, b={self.b} do not fit kind {self.kind}")
        for det in (self.a, self.b):
            if det is not None and det not in (1, 2):
                raise ValueError(f"detector index must be 1 or 2, got {det}")

    def __str__(self):
        dets = ",".join(str(x) for x in (self.a, self.b) if x is not None)
        sub = f"_{{{dets}}}" if dets else ""
        return f"{self.kind}{sub}({self.i},{self.j})"


@dataclass(frozen=True)
class PovmElement:
    """POVM operator with the click entries it is measured by.

    ``Tr(operator rho) = weight * sum(click(l) for l in labels)``. A
    ``residual`` element only repeats TT information already in ``M0``.
    """

    operator: np.ndarray
    weight: Fraction
    labels: tuple[ClickLabel, ...]
    residual: bool = False

    def value_from_clicks(self, clicks: ClickMatrices) -> float:
        return float(self.weight) * sum(clicks.entry(lab) for lab in self.labels)


@dataclass(frozen=True)
class LabeledPovm:
    setting: str
    protocol: Protocol
    d: int
    elements: tuple[PovmElement, ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def operators(self) -> list[np.ndarray]:
        return [e.operator for e in self.elements]

    def completeness_error(self) -> float:
        total = sum(self.operators)
        return float(np.max(np.abs(total - np.eye(self.d * self.d))))


@dataclass(frozen=True)
class ClickMatrices:
    """Normalized coincidence-click probabilities.

    ``SS[(a, b)]`` has shape (d-1, d-1) indexed by ``(i-1, j-1)``;
    ``TS[b]`` is d x (d-1) indexed ``(i, j-1)``; ``ST[a]`` is (d-1) x d.
    """

    d: int
    TT: np.ndarray
    SS: dict
    TS: dict
    ST: dict

    def entry(self, label: ClickLabel) -> float:
        i, j = label.i, label.j
        if label.kind == "TT":
            return float(self.TT[i, j])
        if label.kind == "SS":
            return float(self.SS[(label.a, label.b)][i - 1, j - 1])
        if label.kind == "TS":
            return float(self.TS[label.b][i, j - 1])
        return float(self.ST[label.a][i - 1, j])

    @property
    def ss_same(self) -> np.ndarray:
        return self.SS[(1, 1)] + self.SS[(2, 2)]

    @property
    def ss_opposite(self) -> np.ndarray:
        return self.SS[(1, 2)] + self.SS[(2, 1)]


# -- single-party bases ----------------------------------------------------

def _bin(d: int, i: int):
    return ("bin", i, None), basis_ket(d, i).real


def _sup(d: int, i: int, s: str):
    return ("sup", i, s), superposition_ket(i, s, d).real


def basis_b0(d: int) -> list:
    """Time-bin basis ``{|0>, ..., |d-1>}`` as (descriptor, ket) pairs."""
    return [_bin(d, i) for i in range(d)]


def basis_b1(d: int) -> list:
    """``{|1+>, |1->, |3+>, |3->, ...}``: superpositions at odd time stamps."""
    _check_even(d)
    return [_sup(d, i, s) for i in range(1, d, 2) for s in "+-"]


def basis_b2(d: int) -> list:
    """``{|0>, |2+>, |2->, ..., |d-1>}``: even superpositions plus the edge bins."""
    _check_even(d)
    inner = [_sup(d, i, s) for i in range(2, d - 1, 2) for s in "+-"]
    return [_bin(d, 0)] + inner + [_bin(d, d - 1)]


def _check_even(d: int):
    if d < 2 or d % 2:
        raise ValueError(f"d must be an even integer >= 2, got {d}")


def _pair_element(da, ka, db, kb) -> PovmElement:
    """Product projector ``|ka, kb>`` with the label/weight the setup gives it."""
    op = projector(tensor(ka, kb))
    (ta, i, sa), (tb, j, sb) = da, db
    if ta == "bin" and tb == "bin":
        lab, w = ClickLabel("TT", i, j), Fraction(1)
    elif ta == "bin":
        lab, w = ClickLabel("TS", i, j, b=DETECTOR_OF_SIGN[sb]), Fraction(2)
    elif tb == "bin":
        lab, w = ClickLabel("ST", i, j, a=DETECTOR_OF_SIGN[sa]), Fraction(2)
    else:
        lab = ClickLabel("SS", i, j, a=DETECTOR_OF_SIGN[sa], b=DETECTOR_OF_SIGN[sb])
        w = Fraction(4)
    return PovmElement(op, w, (lab,))


def _product_povm(setting: str, basis: list, d: int) -> LabeledPovm:
    elems = tuple(_pair_element(da, ka, db, kb) for da, ka in basis for db, kb in basis)
    return LabeledPovm(setting, Protocol.P1, d, elems)


def build_m0(d: int) -> LabeledPovm:
    """Time-of-arrival POVM ``{|i,j><i,j|}``, labelled ``TT(i,j)`` with weight 1."""
    _check_even(d)
    return _product_povm("M0", basis_b0(d), d)


def build_m1_p1(d: int) -> LabeledPovm:
    """Product basis of odd-index superpositions, weight 4 on ``SS`` clicks."""
    return _product_povm("M1", basis_b1(d), d)


def build_m2_p1(d: int) -> LabeledPovm:
    """Even-index superpositions completed by the edge bins.

    Interior pairs are ``SS`` clicks (weight 4), mixed pairs use the
    mismatched ``TS``/``ST`` clicks (weight 2), corners are ``TT`` (weight 1).
    For d = 2 only the four corners remain, which duplicates ``M0``.
    """
    return _product_povm("M2", basis_b2(d), d)


def phi_same(i: int, j: int, d: int) -> np.ndarray:
    return (tensor(superposition_ket(i, "+", d), superposition_ket(j, "+", d))
            + tensor(superposition_ket(i, "-", d), superposition_ket(j, "-", d))).real / np.sqrt(2)


def phi_opposite(i: int, j: int, d: int) -> np.ndarray:
    return (tensor(superposition_ket(i, "+", d), superposition_ket(j, "-", d))
            + tensor(superposition_ket(i, "-", d), superposition_ket(j, "+", d))).real / np.sqrt(2)


def m1_p2_unscaled(d: int) -> list[np.ndarray]:
    """Operator family of the P2 TSUP POVM before the 1/3 rescaling (sums to 3 I)."""
    return [3 * e.operator for e in build_m1_p2(d)]


def build_m1_p2(d: int) -> LabeledPovm:
    """TSUP POVM of protocol 2: same/opposite-phase projectors, edge terms, residual.

    Every element carries a factor 1/3. The rank-one terms add up to a
    diagonal operator ``S`` and the residual is ``I - S/3``, a sum of
    ``|x,y><x,y|/3`` over the bins that ``S`` covers only twice. For d = 2 that
    is ``(I - |00><00| - |11><11|)/3``; for larger d the non-corner edge bins
    are already covered three times and drop out of the residual too. The
    residual is TT information only and is flagged ``residual=True``.
    """
    _check_even(d)
    w = Fraction(2, 3)
    elems: list[PovmElement] = []
    for i in range(1, d):
        for j in range(1, d):
            elems.append(PovmElement(
                projector(phi_same(i, j, d)) / 3, w,
                (ClickLabel("SS", i, j, 1, 1), ClickLabel("SS", i, j, 2, 2))))
            elems.append(PovmElement(
                projector(phi_opposite(i, j, d)) / 3, w,
                (ClickLabel("SS", i, j, 1, 2), ClickLabel("SS", i, j, 2, 1))))
    for edge in (0, d - 1):
        for j in range(1, d):
            for s in "+-":
                ket = tensor(basis_ket(d, edge), superposition_ket(j, s, d)).real
                elems.append(PovmElement(projector(ket) / 3, w,
                                         (ClickLabel("TS", edge, j, b=DETECTOR_OF_SIGN[s]),)))
    for edge in (0, d - 1):
        for i in range(1, d):
            for s in "+-":
                ket = tensor(superposition_ket(i, s, d), basis_ket(d, edge)).real
                elems.append(PovmElement(projector(ket) / 3, w,
                                         (ClickLabel("ST", i, edge, a=DETECTOR_OF_SIGN[s]),)))
    covered = 3 * np.real(np.diag(sum(e.operator for e in elems)))
    missing = np.rint(3 - covered).astype(int)
    if np.any(missing < 0) or np.max(np.abs(3 - covered - missing)) > 1e-9:
        raise AssertionError("P2 TSUP family is not diagonal-completable")
    n = d * d
    residual = np.zeros((n, n), dtype=complex)
    labels = []
    for k in np.flatnonzero(missing):
        residual[k, k] = missing[k]
        labels.extend([ClickLabel("TT", k // d, k % d)] * missing[k])
    elems.append(PovmElement(residual / 3, Fraction(1, 3), tuple(labels), residual=True))
    return LabeledPovm("M1", Protocol.P2, d, tuple(elems))


def protocol_povms(protocol: Protocol | str, d: int) -> list[LabeledPovm]:
    """Measurement settings used as SDP constraints for a protocol."""
    protocol = Protocol(protocol)
    if protocol is Protocol.P2:
        return [build_m0(d), build_m1_p2(d)]
    return [build_m0(d), build_m1_p1(d), build_m2_p1(d)]


# -- click probabilities -----------------------------------------------------

def _expect(rho: np.ndarray, ket: np.ndarray) -> float:
    return float(np.real(np.vdot(ket, rho @ ket)))


def _check_rho(rho_t: np.ndarray, d: int) -> np.ndarray:
    rho_t = np.asarray(rho_t)
    if rho_t.shape != (d * d, d * d):
        raise ValueError(f"temporal state of shape {rho_t.shape} does not match d={d}")
    return rho_t


def _tt_ts_st(rho: np.ndarray, d: int):
    tt = np.array([[_expect(rho, tensor(basis_ket(d, i), basis_ket(d, j))) for j in range(d)]
                   for i in range(d)])
    ts, st = {}, {}
    for det, s in SIGN_OF_DETECTOR.items():
        ts[det] = np.array([[0.5 * _expect(rho, tensor(basis_ket(d, i), superposition_ket(j, s, d)))
                             for j in range(1, d)] for i in range(d)])
        st[det] = np.array([[0.5 * _expect(rho, tensor(superposition_ket(i, s, d), basis_ket(d, j)))
                             for j in range(d)] for i in range(1, d)])
    return tt, ts, st


def click_probabilities_p1(rho_t: np.ndarray, d: int) -> ClickMatrices:
    """Click probabilities behind the D-polarization filters (phases zero).

    ``TT(i,j) = <i,j|rho|i,j>``, ``SS_{a,b}(i,j) = <i s_a, j s_b|rho|...>/4``,
    ``TS_b(i,j) = <i, j s_b|rho|...>/2``, ``ST_a(i,j) = <i s_a, j|rho|...>/2``.
    """
    rho = _check_rho(rho_t, d)
    tt, ts, st = _tt_ts_st(rho, d)
    ss = {}
    for a, sa in SIGN_OF_DETECTOR.items():
        for b, sb in SIGN_OF_DETECTOR.items():
            ss[(a, b)] = np.array([[0.25 * _expect(rho, tensor(superposition_ket(i, sa, d),
                                                               superposition_ket(j, sb, d)))
                                    for j in range(1, d)] for i in range(1, d)])
    return ClickMatrices(d, tt, ss, ts, st)


def click_probabilities_p2(rho_t: np.ndarray, d: int) -> ClickMatrices:
    """Click probabilities for the (HH + VV) source with polarization assumed intact.

    The SS entries pick up interference between the ``++``/``--`` (or
    ``+-``/``-+``) paths, so ``SS_{1,1} = SS_{2,2}`` and ``SS_{1,2} = SS_{2,1}``.
    """
    rho = _check_rho(rho_t, d)
    tt, ts, st = _tt_ts_st(rho, d)

    def interfere(k1, k2):
        return 0.125 * float(np.real(np.vdot(k1, rho @ k1) + np.vdot(k1, rho @ k2)
                                     + np.vdot(k2, rho @ k1) + np.vdot(k2, rho @ k2)))

    same = np.zeros((d - 1, d - 1))
    opp = np.zeros((d - 1, d - 1))
    for i in range(1, d):
        ip, im = superposition_ket(i, "+", d), superposition_ket(i, "-", d)
        for j in range(1, d):
            jp, jm = superposition_ket(j, "+", d), superposition_ket(j, "-", d)
            same[i - 1, j - 1] = interfere(tensor(ip, jp), tensor(im, jm))
            opp[i - 1, j - 1] = interfere(tensor(ip, jm), tensor(im, jp))
    ss = {(1, 1): same, (2, 2): same.copy(), (1, 2): opp, (2, 1): opp.copy()}
    return ClickMatrices(d, tt, ss, ts, st)


def click_probabilities(rho_t: np.ndarray, d: int, protocol: Protocol | str) -> ClickMatrices:
    if Protocol(protocol) is Protocol.P2:
        return click_probabilities_p2(rho_t, d)
    return click_probabilities_p1(rho_t, d)


def constraints_from_state(povms: Sequence[LabeledPovm], rho: np.ndarray,
                           keep_residual: bool = False) -> list[tuple[np.ndarray, float]]:
    """Equality constraints ``Tr(E_k sigma) = f_k`` with ``f_k = Tr(E_k rho)``.

    Residual elements (the redundant TT combination of the P2 POVM) are
    skipped unless ``keep_residual`` is set.
    """
    rho = np.asarray(rho)
    out = []
    for povm in povms:
        for e in povm:
            if e.residual and not keep_residual:
                continue
            f = float(np.real(np.trace(e.operator @ rho)))
            out.append((e.operator, f))
    return out


def constraints_from_clicks(povms: Iterable[LabeledPovm], clicks: ClickMatrices,
                            keep_residual: bool = False) -> list[tuple[np.ndarray, float]]:
    """Same as :func:`constraints_from_state`, but with observed click matrices."""
    out = []
    for povm in povms:
        for e in povm:
            if e.residual and not keep_residual:
                continue
            out.append((e.operator, e.value_from_clicks(clicks)))
    return out


def subspace_overlap_witness(d: int) -> float:
    """Largest commutator norm between M1 and M2 elements of protocol 1.

    Non-zero values mean the two TSUP bases overlap, which is what lets them
    certify coherence across all time bins.
    """
    m1, m2 = build_m1_p1(d), build_m2_p1(d)
    best = 0.0
    for e1 in m1:
        for e2 in m2:
            c = e1.operator @ e2.operator - e2.operator @ e1.operator
            best = max(best, float(np.linalg.norm(c, 2)))
    return best
