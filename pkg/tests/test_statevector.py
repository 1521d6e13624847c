from pathlib import Path

import numpy as np
import pytest

from soliton_vqe.statevector import (
    DimensionMismatch,
    QubitIndexError,
    StateTooLarge,
    StateVector,
    apply_controlled_ry,
    apply_rotation,
    inner_product,
    new_zero_state,
    product_state,
    reduced_density_matrix,
    single_qubit_density_matrix,
)
from tests.conftest import random_state

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def _rotation(sigma: np.ndarray, theta: float) -> np.ndarray:
    return np.cos(theta) * I2 - 1j * np.sin(theta) * sigma


def _basis(n_qubits: int, index: int) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index] = 1
    return StateVector(n_qubits, amps)


def test_zero_state_is_first_basis_vector() -> None:
    ############# Test
    one = new_zero_state(1)
    two = new_zero_state(2)
    ten = new_zero_state(10)

    ############# Behaviour check
    np.testing.assert_array_equal(one.amplitudes, [1, 0])
    np.testing.assert_array_equal(two.amplitudes, [1, 0, 0, 0])
    assert ten.dimension == 1024
    assert ten.norm() == pytest.approx(1.0)


def test_zero_state_register_limits() -> None:
    ############# Behaviour check
    with pytest.raises(ValueError):
        new_zero_state(0)
    with pytest.raises(StateTooLarge):
        new_zero_state(25)


def test_amplitude_count_must_match_register() -> None:
    ############# Behaviour check
    with pytest.raises(DimensionMismatch):
        StateVector(2, np.ones(3))


def test_x_rotation_by_quarter_turn_flips_with_phase() -> None:
    ############# Setup
    psi = new_zero_state(1)

    ############# Test
    apply_rotation(psi, "X", 0, np.pi / 2)

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, [0, -1j], atol=1e-15)


def test_x_rotation_by_half_turn_is_minus_identity() -> None:
    ############# Setup
    psi = new_zero_state(1)

    ############# Test
    apply_rotation(psi, "X", 0, np.pi)

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, [-1, 0], atol=1e-15)


def test_z_rotation_only_changes_the_phase_of_zero() -> None:
    ############# Setup
    psi = new_zero_state(1)

    ############# Test
    apply_rotation(psi, "Z", 0, 0.37)

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, [np.exp(-0.37j), 0])


@pytest.mark.parametrize("axis, sigma", [("X", X), ("Y", Y), ("Z", Z)])
def test_rotation_matches_kronecker_oracle(axis: str, sigma: np.ndarray, rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(3, rng)
    # qubit 1 of three sits in the middle of the Kronecker product
    oracle = np.kron(np.kron(I2, _rotation(sigma, 0.81)), I2) @ psi.amplitudes

    ############# Test
    apply_rotation(psi, axis, 1, 0.81)  # pyright: ignore[reportArgumentType]

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, oracle, atol=1e-14)


def test_controlled_ry_does_nothing_when_control_is_off() -> None:
    ############# Setup
    psi = new_zero_state(2)

    ############# Test
    apply_controlled_ry(psi, 0, 1, 1.234)

    ############# Behaviour check
    np.testing.assert_array_equal(psi.amplitudes, [1, 0, 0, 0])


def test_controlled_ry_quarter_turn_moves_target_to_one() -> None:
    ############# Setup
    psi = _basis(2, 0b01)  # qubit 0 set

    ############# Test
    apply_controlled_ry(psi, 0, 1, np.pi / 2)

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, [0, 0, 0, 1], atol=1e-15)


def test_controlled_ry_matches_kronecker_oracle(rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(3, rng)
    # control qubit 2 (leftmost factor), target qubit 0 (rightmost)
    oracle = np.kron(np.kron(P0, I2), I2) + np.kron(np.kron(P1, I2), _rotation(Y, 0.6))
    expected = oracle @ psi.amplitudes

    ############# Test
    apply_controlled_ry(psi, 2, 0, 0.6)

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-14)


def test_gates_preserve_the_norm(rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(4, rng)

    ############# Test
    for step in range(20):
        axis = "XYZ"[step % 3]
        apply_rotation(psi, axis, step % 4, rng.uniform(0, 2 * np.pi))  # pyright: ignore[reportArgumentType]
        apply_controlled_ry(psi, step % 4, (step + 1) % 4, rng.uniform(0, 2 * np.pi))

    ############# Behaviour check
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("axis", ["X", "Y", "Z"])
def test_opposite_rotation_restores_the_state(axis: str, rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(4, rng)
    original = psi.amplitudes.copy()

    ############# Test
    apply_rotation(psi, axis, 2, 1.37)  # pyright: ignore[reportArgumentType]
    apply_rotation(psi, axis, 2, -1.37)  # pyright: ignore[reportArgumentType]

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, original, rtol=0, atol=1e-12)


def test_gates_on_disjoint_qubits_commute(rng: np.random.Generator) -> None:
    ############# Setup
    first = random_state(5, rng)
    second = first.copy()

    ############# Test
    apply_rotation(first, "X", 0, 0.42)
    apply_controlled_ry(first, 2, 4, 1.1)
    apply_rotation(first, "Z", 3, -0.9)
    apply_rotation(second, "Z", 3, -0.9)
    apply_controlled_ry(second, 2, 4, 1.1)
    apply_rotation(second, "X", 0, 0.42)

    ############# Behaviour check
    np.testing.assert_allclose(first.amplitudes, second.amplitudes, rtol=0, atol=1e-12)


def test_gates_reject_qubits_outside_the_register() -> None:
    ############# Behaviour check
    with pytest.raises(QubitIndexError):
        apply_rotation(new_zero_state(2), "X", 2, 0.1)
    with pytest.raises(QubitIndexError):
        apply_controlled_ry(new_zero_state(2), -1, 0, 0.1)
    with pytest.raises(ValueError):
        apply_controlled_ry(new_zero_state(2), 1, 1, 0.1)


def test_inner_product_of_basis_states() -> None:
    ############# Behaviour check
    assert inner_product(_basis(1, 0), _basis(1, 0)) == 1
    assert inner_product(_basis(1, 0), _basis(1, 1)) == 0


def test_inner_product_conjugates_the_bra(rng: np.random.Generator) -> None:
    ############# Setup
    a = random_state(3, rng)
    b = random_state(3, rng)

    ############# Behaviour check
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))
    assert inner_product(a, a) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        inner_product(a, new_zero_state(2))


def test_product_state_puts_first_spinor_on_qubit_zero() -> None:
    ############# Test
    psi = product_state([[0, 1], [1, 0], [1, 0]])

    ############# Behaviour check
    np.testing.assert_array_equal(psi.amplitudes, _basis(3, 0b001).amplitudes)


def test_reduced_density_matrix_of_zero_state() -> None:
    ############# Test
    rho = reduced_density_matrix(new_zero_state(4), 0, 1)

    ############# Behaviour check
    np.testing.assert_allclose(rho.entries, np.diag([1, 0, 0, 0]))
    assert rho.qubit_pair == (0, 1)


def test_reduced_density_matrix_of_bell_pair() -> None:
    ############# Setup
    bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))

    ############# Test
    rho = reduced_density_matrix(bell, 0, 1)

    ############# Behaviour check
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[0, 3] = expected[3, 0] = expected[3, 3] = 0.5
    np.testing.assert_allclose(rho.entries, expected, atol=1e-15)


def test_reduced_density_matrix_matches_partial_trace_oracle(rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(5, rng)
    # tensor axes run from qubit 4 down to qubit 0; keep qubit 1 (axis 3) and qubit 3 (axis 1)
    t = psi.amplitudes.reshape((2,) * 5)
    oracle = np.einsum("pqrst,pQrSt->sqSQ", t, t.conj()).reshape(4, 4)

    ############# Test
    rho = reduced_density_matrix(psi, 1, 3)

    ############# Behaviour check
    np.testing.assert_allclose(rho.entries, oracle, atol=1e-12)
    np.testing.assert_allclose(rho.entries, rho.entries.conj().T, atol=1e-14)
    assert np.trace(rho.entries).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho.entries).min() > -1e-12


def test_reduced_density_matrix_needs_ordered_pair() -> None:
    ############# Behaviour check
    with pytest.raises(ValueError):
        reduced_density_matrix(new_zero_state(3), 2, 1)


def test_single_qubit_density_matrix_of_plus_state() -> None:
    ############# Setup
    plus = np.array([1, 1]) / np.sqrt(2)
    psi = product_state([[1, 0], plus])

    ############# Test
    rho = single_qubit_density_matrix(psi, 1)

    ############# Behaviour check
    np.testing.assert_allclose(rho, 0.5 * np.ones((2, 2)), atol=1e-15)


def test_statevector_dump_survives_a_file_round_trip(tmp_path: Path, rng: np.random.Generator) -> None:
    ############# Setup
    psi = random_state(4, rng)
    path = tmp_path / "state.bin"

    ############# Test
    psi.save(path)
    loaded = StateVector.load(path)

    ############# Behaviour check
    assert path.stat().st_size == 8 + 16 * 16
    assert loaded.n_qubits == 4
    np.testing.assert_array_equal(loaded.amplitudes, psi.amplitudes)


def test_truncated_dump_is_rejected() -> None:
    ############# Behaviour check
    with pytest.raises(ValueError):
        StateVector.from_bytes(b"\x02\x00")
    with pytest.raises(DimensionMismatch):
        StateVector.from_bytes(new_zero_state(2).to_bytes()[:-16])
