import math

import numpy as np
import pytest

from spindir.geometry import Direction
from spindir.multispin import (
    attainable_spins,
    decompose_multispin,
    j_squared,
    lift_rotation,
    total_j_projector,
    total_spin_ops,
)
from spindir.spins import coherent_state, rotation_about
from spindir.states import (
    ProductBasis,
    SpinJ,
    StateVector,
    basis_state,
    product_state,
    state_from_terms,
)


def test_attainable_spins():
    assert [s.j for s in attainable_spins(2)] == [1.0, 0.0]
    assert [s.j for s in attainable_spins(3)] == [1.5, 0.5]
    assert [s.j for s in attainable_spins(4)] == [2.0, 1.0, 0.0]


def test_total_spin_ops_commutation():
    jx, jy, jz = total_spin_ops(3)
    np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
    jj = j_squared(3)
    np.testing.assert_allclose(jj, jx @ jx + jy @ jy + jz @ jz, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_projectors_idempotent_hermitian_complete(n):
    spins = attainable_spins(n)
    projectors = [total_j_projector(n, j) for j in spins]
    dim = 2**n
    total = sum(projectors)
    np.testing.assert_allclose(total, np.eye(dim), atol=1e-10)
    for k, p in enumerate(projectors):
        np.testing.assert_allclose(p @ p, p, atol=1e-10)
        np.testing.assert_allclose(p, p.conj().T, atol=1e-10)
        for q in projectors[k + 1 :]:
            np.testing.assert_allclose(p @ q, np.zeros_like(p), atol=1e-10)


def test_projector_eigenvalue_property():
    # P_j projects onto the j(j+1) eigenspace of J^2
    jj = j_squared(3)
    p = total_j_projector(3, SpinJ(3))
    np.testing.assert_allclose(jj @ p, (1.5 * 2.5) * p, atol=1e-10)


def test_projector_rejects_unattainable_j():
    with pytest.raises(ValueError):
        total_j_projector(3, SpinJ(2))  # j=1 not attainable for 3 qubits
    with pytest.raises(ValueError):
        total_j_projector(2, SpinJ(4))


def test_three_spin_fixture_vectors():
    # |001> splits into a symmetric part and the orthogonal remainder
    state = basis_state("001")
    p_high = total_j_projector(3, SpinJ(3))
    p_low = total_j_projector(3, SpinJ(1))
    high = p_high @ state.amplitudes
    low = p_low @ state.amplitudes
    expected_high = state_from_terms(3, {"001": 1 / 3, "010": 1 / 3, "100": 1 / 3})
    expected_low = state_from_terms(3, {"001": 2 / 3, "010": -1 / 3, "100": -1 / 3})
    np.testing.assert_allclose(high, expected_high.amplitudes, atol=1e-10)
    np.testing.assert_allclose(low, expected_low.amplitudes, atol=1e-10)
    assert np.vdot(high, high).real == pytest.approx(1 / 3, abs=1e-12)
    assert np.vdot(low, low).real == pytest.approx(2 / 3, abs=1e-12)


def test_two_spin_singlet_fixture():
    state = basis_state("01")
    p0 = total_j_projector(2, SpinJ(0))
    expected = state_from_terms(2, {"01": 0.5, "10": -0.5})
    np.testing.assert_allclose(p0 @ state.amplitudes, expected.amplitudes, atol=1e-12)


def test_decompose_three_spin():
    parts = decompose_multispin(basis_state("001"))
    assert [j.j for j, _ in parts] == [1.5, 0.5]
    norms = [float(np.vdot(c.amplitudes, c.amplitudes).real) for _, c in parts]
    assert norms[0] == pytest.approx(1 / 3, abs=1e-12)
    assert norms[1] == pytest.approx(2 / 3, abs=1e-12)


def test_decompose_four_spin_signal():
    # two opposite spins along z and two opposite spins along x
    up = [1.0, 0.0]
    dn = [0.0, 1.0]
    px = [1 / math.sqrt(2), 1 / math.sqrt(2)]
    mx = [1 / math.sqrt(2), -1 / math.sqrt(2)]
    signal = product_state([up, dn, px, mx])
    parts = decompose_multispin(signal)
    assert [j.j for j, _ in parts] == [2.0, 1.0, 0.0]
    norms = [float(np.vdot(c.amplitudes, c.amplitudes).real) for _, c in parts]
    np.testing.assert_allclose(norms, [1 / 8, 5 / 8, 1 / 4], atol=1e-10)
    assert sum(norms) == pytest.approx(1.0, abs=1e-12)


def test_decompose_sums_to_input_and_orthogonal():
    rng = np.random.default_rng(31)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amps /= np.linalg.norm(amps)
    state = StateVector(ProductBasis(4), amps)
    parts = decompose_multispin(state)
    recon = sum(c.amplitudes for _, c in parts)
    np.testing.assert_allclose(recon, amps, atol=1e-12)
    for k, (_, a) in enumerate(parts):
        for _, b in parts[k + 1 :]:
            assert abs(np.vdot(a.amplitudes, b.amplitudes)) < 1e-10


def test_decompose_coherent_product_is_pure_top_block():
    n = 4
    d = Direction(0.0, 0.0)
    single = coherent_state(SpinJ(1), d).amplitudes
    state = product_state([single] * n)
    parts = decompose_multispin(state)
    norms = {j.j: float(np.vdot(c.amplitudes, c.amplitudes).real) for j, c in parts}
    assert norms[n / 2] == pytest.approx(1.0, abs=1e-12)


def test_decompose_requires_product_basis():
    from spindir.states import spin_basis_state

    with pytest.raises(ValueError):
        decompose_multispin(spin_basis_state(SpinJ(2), 0.0))


def test_lift_rotation_acts_per_qubit():
    rot = rotation_about([0.3, -1.0, 0.8], 1.234)
    lifted = lift_rotation(rot, 3)
    rng = np.random.default_rng(8)
    singles = [rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(3)]
    singles = [s / np.linalg.norm(s) for s in singles]
    from spindir.spins import su2_from_rotation

    u = su2_from_rotation(rot)
    rotated = product_state([u @ s for s in singles])
    direct = lifted @ product_state(singles).amplitudes
    np.testing.assert_allclose(direct, rotated.amplitudes, atol=1e-12)


def test_lift_rotation_commutes_with_projectors():
    rot = rotation_about([1.0, 0.2, -0.4], 0.77)
    lifted = lift_rotation(rot, 3)
    for j in attainable_spins(3):
        p = total_j_projector(3, j)
        np.testing.assert_allclose(lifted @ p, p @ lifted, atol=1e-10)
