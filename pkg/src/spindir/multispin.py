"""Total angular momentum on registers of spin-1/2 systems.

Projectors onto total-spin-j eigenspaces of N qubits, block decomposition of
register states, and the per-qubit tensor lift of classical rotations. Dense
matrices throughout; intended for small registers (N <= 12 or so).
"""

from __future__ import annotations

import math

import numpy as np

from .spins import su2_from_rotation
from .states import ProductBasis, SpinJ, StateVector

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def op_on_qubit(op: np.ndarray, k: int, num_qubits: int) -> np.ndarray:
    """Embed a single-qubit operator on qubit k of an N-qubit register."""
    if not 0 <= k < num_qubits:
        raise ValueError(f"qubit index {k} out of range")
    # qubit k is bit k of the index; numpy's kron stacks most-significant first
    return np.kron(np.eye(2 ** (num_qubits - 1 - k)), np.kron(op, np.eye(2**k)))


def total_spin_ops(num_qubits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective (Jx, Jy, Jz) = sum_k sigma_k/2 on the register."""
    dim = 2**num_qubits
    ops = [np.zeros((dim, dim), dtype=complex) for _ in range(3)]
    for k in range(num_qubits):
        for a in range(3):
            ops[a] += 0.5 * op_on_qubit(PAULI[a], k, num_qubits)
    return tuple(ops)


_J2_CACHE: dict[int, np.ndarray] = {}


def j_squared(num_qubits: int) -> np.ndarray:
    """Total J^2 operator (cached; treat as read-only)."""
    if num_qubits not in _J2_CACHE:
        jx, jy, jz = total_spin_ops(num_qubits)
        _J2_CACHE[num_qubits] = jx @ jx + jy @ jy + jz @ jz
    return _J2_CACHE[num_qubits]


def attainable_spins(num_qubits: int) -> list[SpinJ]:
    """Total-spin values of N qubits, descending: N/2, N/2 - 1, ..., 1/2 or 0."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    return [SpinJ(t) for t in range(num_qubits, -1, -2)]


def total_j_projector(num_qubits: int, j: SpinJ) -> np.ndarray:
    """Projector onto the total-spin-j eigenspace of J^2.

    Built as the Lagrange polynomial in J^2 that is 1 at j(j+1) and 0 at every
    other attainable k(k+1).
    """
    spins = attainable_spins(num_qubits)
    if j not in spins:
        raise ValueError(f"j={j.j} is not attainable for {num_qubits} qubits")
    j2 = j_squared(num_qubits)
    eye = np.eye(2**num_qubits)
    target = j.j * (j.j + 1)
    proj = eye.astype(complex)
    for k in spins:
        if k == j:
            continue
        other = k.j * (k.j + 1)
        proj = proj @ (j2 - other * eye) / (target - other)
    return proj


def decompose_multispin(state: StateVector) -> list[tuple[SpinJ, StateVector]]:
    """Split a register state into its total-spin-j components.

    Components are returned for every attainable j (descending), still expressed
    in the product basis; they sum to the input and their squared norms sum to
    the input's squared norm.
    """
    if not isinstance(state.basis, ProductBasis):
        raise ValueError("expected a state over a qubit product basis")
    out = []
    for j in attainable_spins(state.basis.num_qubits):
        comp = total_j_projector(state.basis.num_qubits, j) @ state.amplitudes
        out.append((j, StateVector(state.basis, comp)))
    return out


def lift_rotation(rot: np.ndarray, num_qubits: int) -> np.ndarray:
    """Per-qubit tensor power of the SU(2) lift of a rotation matrix.

    For even N this is an honest linear representation of any rotation group;
    for odd N it is projective (defined up to sign), with the sign pinned by the
    canonical axis-angle choice in su2_from_rotation.
    """
    u = su2_from_rotation(rot)
    full = u
    for _ in range(num_qubits - 1):
        full = np.kron(full, u)
    return full
