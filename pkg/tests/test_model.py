import numpy as np
import pytest

from hdqkd.linalg import basis_ket, projector, tensor
from hdqkd.model import (
    KET_A,
    KET_D,
    KET_H,
    KET_V,
    Protocol,
    ProtocolConfig,
    effective_meas_ket,
    embed_time,
    interferometer_unitary_single,
    isotropic_time_state,
    phase_shift_op,
    superposition_ket,
    target_state,
    time_shift_op,
)
from hdqkd.povm import basis_b1, basis_b2

PHIS = [0.0, 0.3, np.pi / 2, 2.0]


def test_config_validation():
    assert ProtocolConfig("p1", 4).protocol is Protocol.P1
    with pytest.raises(ValueError):
        ProtocolConfig(Protocol.P1, 3)
    with pytest.raises(ValueError):
        ProtocolConfig(Protocol.P1, 0)
    with pytest.raises(ValueError):
        ProtocolConfig(Protocol.BBM92, 4)
    assert ProtocolConfig(Protocol.BBM92, 2).d == 2


def test_time_shift():
    t = time_shift_op(2)
    assert np.allclose(t @ basis_ket(2, 0), basis_ket(2, 1))
    assert np.allclose(t @ basis_ket(2, 1), 0)
    for d in (2, 3, 5):
        t = time_shift_op(d)
        want = np.diag([1.0] * (d - 1) + [0.0])
        assert np.allclose(t.conj().T @ t, want)


def test_phase_shift():
    assert np.allclose(phase_shift_op(0.0, 4), np.eye(4))
    assert np.allclose(phase_shift_op(np.pi, 4), -np.eye(4))
    assert np.max(np.abs(phase_shift_op(0.7, 6) @ phase_shift_op(-0.7, 6) - np.eye(6))) < 1e-14


@pytest.mark.parametrize("d", [2, 4])
@pytest.mark.parametrize("phi", PHIS)
def test_interferometer_action(d, phi):
    u = interferometer_unitary_single(d, phi)
    dt = d + 1
    h0 = tensor(KET_H, basis_ket(dt, 0))
    v0 = tensor(KET_V, basis_ket(dt, 0))
    v1 = tensor(KET_V, basis_ket(dt, 1))
    assert np.allclose(u @ h0, h0)
    assert np.allclose(u @ v0, np.exp(1j * phi) * v1)
    # physical domain: bins 0..d-1
    cols = [tensor(k, basis_ket(dt, n)) for k in (KET_H, KET_V) for n in range(d)]
    img = np.array([u @ c for c in cols]).T
    assert np.max(np.abs(img.conj().T @ img - np.eye(2 * d))) < 1e-12


def test_superposition_kets():
    for d in (2, 4, 6):
        for i in range(1, d):
            p, m = superposition_ket(i, "+", d), superposition_ket(i, "-", d)
            assert abs(np.vdot(p, m)) < 1e-15
            assert abs(np.vdot(superposition_ket(1, "+", d), basis_ket(d, 0)) - 1 / np.sqrt(2)) < 1e-15
    k = superposition_ket(1, "+", 2)
    assert np.allclose(k, (basis_ket(2, 1) + basis_ket(2, 0)) / np.sqrt(2))
    with pytest.raises(ValueError):
        superposition_ket(0, "+", 4)
    with pytest.raises(ValueError):
        superposition_ket(4, "-", 4)


@pytest.mark.parametrize("d", [2, 4, 6])
@pytest.mark.parametrize("phi", PHIS)
def test_effective_kets_from_interferometer(d, phi):
    u = interferometer_unitary_single(d, phi)
    for x, pol in ((1, KET_D), (2, KET_A)):
        for i in range(1, d):
            pulled = u.conj().T @ tensor(pol, basis_ket(d + 1, i))
            want = embed_time(effective_meas_ket(x, i, phi, d), d, d + 1)
            assert np.max(np.abs(pulled - want)) < 1e-12


@pytest.mark.parametrize("phi", PHIS)
def test_effective_kets_span(phi):
    d = 4
    for i in range(1, d):
        k1, k2 = effective_meas_ket(1, i, phi, d), effective_meas_ket(2, i, phi, d)
        assert abs(np.vdot(k1, k2)) < 1e-15
        span = projector(tensor(KET_H, basis_ket(d, i))) + projector(tensor(KET_V, basis_ket(d, i - 1)))
        assert np.max(np.abs(projector(k1) + projector(k2) - span)) < 1e-12


def test_effective_ket_overlaps():
    d = 4
    for i in range(1, d):
        k1 = effective_meas_ket(1, i, 0.0, d)
        # D polarization and the |i+> time superposition, both pieces of the effective ket
        d_plus = (tensor(KET_H, basis_ket(d, i)) + tensor(KET_V, basis_ket(d, i - 1))) / np.sqrt(2)
        assert abs(np.vdot(d_plus, k1) - 1) < 1e-12
        k2 = effective_meas_ket(2, i, 0.0, d)
        assert abs(np.vdot(tensor(KET_H, basis_ket(d, i)), k2) - 1 / np.sqrt(2)) < 1e-12


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_bases_orthonormal(d):
    for basis in (basis_b1(d), basis_b2(d)):
        kets = np.array([k for _, k in basis])
        assert np.max(np.abs(kets.conj() @ kets.T - np.eye(d))) < 1e-12


def test_target_states():
    t = target_state(ProtocolConfig(Protocol.P1, 2))
    assert np.allclose(t.ket, (tensor(basis_ket(2, 0), basis_ket(2, 0)) + tensor(basis_ket(2, 1), basis_ket(2, 1))) / np.sqrt(2))
    t2 = target_state(ProtocolConfig(Protocol.P2, 2))
    assert abs(np.linalg.norm(t2.ket) - 1) < 1e-12
    sv = np.linalg.svd(t2.ket.reshape(4, 4), compute_uv=False)
    assert np.sum(sv > 1e-12) == 4
    mix = np.eye(4) / 4
    assert abs(np.vdot(t.ket, mix @ t.ket) - 1 / 4) < 1e-15


def test_isotropic_state():
    phi = target_state(ProtocolConfig(Protocol.P1, 4)).ket
    assert np.allclose(isotropic_time_state(1.0, 4), projector(phi))
    assert np.allclose(isotropic_time_state(0.0, 4), np.eye(16) / 16)
    lam = np.linalg.eigvalsh(isotropic_time_state(0.9, 2))
    assert np.allclose(lam, [0.025, 0.025, 0.025, 0.925])
    with pytest.raises(ValueError):
        isotropic_time_state(1.1, 2)
