import numpy as np
import pytest

from soliton_vqe.ansatz import (
    ParameterLengthMismatch,
    gate_sequence,
    pad_parameters,
    param_count,
    prepare_state,
    random_parameters,
    reduce_angles,
)
from soliton_vqe.models import AnsatzSpec
from soliton_vqe.pauli_model import build_chain_hamiltonian, expectation
from soliton_vqe.statevector import inner_product, new_zero_state
from tests.conftest import soliton_chain


def test_parameter_counts_per_topology() -> None:
    ############# Behaviour check
    assert param_count(AnsatzSpec(n_qubits=4, n_layers=1)) == 16
    assert param_count(AnsatzSpec(n_qubits=10, n_layers=1)) == 40
    assert param_count(AnsatzSpec(n_qubits=10, n_layers=6)) == 240
    assert param_count(AnsatzSpec(n_qubits=4, n_layers=1, entangler_topology="linear")) == 15


def test_gate_sequence_orders_rotations_before_entanglers() -> None:
    ############# Test
    gates = gate_sequence(AnsatzSpec(n_qubits=3, n_layers=2))

    ############# Behaviour check
    assert len(gates) == 24
    assert [g.param for g in gates] == list(range(24))
    assert [(g.axis, g.qubits) for g in gates[:3]] == [("X", (0,)), ("Z", (0,)), ("X", (0,))]
    assert gates[3].qubits == (1,)
    entanglers = [g.qubits for g in gates[9:12]]
    assert entanglers == [(0, 1), (1, 2), (2, 0)]
    assert all(g.kind == "controlled_ry" for g in gates[9:12])
    assert gates[12].kind == "rotation"


def test_all_zero_angles_prepare_the_zero_state() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=2, n_layers=1)

    ############# Test
    psi = prepare_state(spec, np.zeros(spec.param_count))

    ############# Behaviour check
    np.testing.assert_allclose(psi.amplitudes, [1, 0, 0, 0])


def test_random_angles_prepare_a_normalized_state() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=4, n_layers=1)

    ############# Test
    psi = prepare_state(spec, random_parameters(spec, seed=7))

    ############# Behaviour check
    assert inner_product(psi, psi).real == pytest.approx(1.0, abs=1e-10)


def test_first_angle_drives_the_leading_x_rotation_on_qubit_zero() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=2, n_layers=1)
    theta = np.zeros(spec.param_count)
    theta[0] = np.pi / 2

    ############# Test
    psi = prepare_state(spec, theta)

    ############# Behaviour check
    # only qubit 0 is set
    assert abs(psi.amplitudes[0b01]) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert psi.amplitudes[0b01] == pytest.approx(-1j)


def test_random_parameters_are_seeded() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=10, n_layers=3)

    ############# Test
    first = random_parameters(spec, seed=11)
    again = random_parameters(spec, seed=11)
    other = random_parameters(spec, seed=12)

    ############# Behaviour check
    assert first.shape == (120,)
    np.testing.assert_array_equal(first, again)
    assert np.any(first != other)
    assert first.min() >= 0
    assert first.max() < 2 * np.pi


def test_wrong_parameter_length_is_rejected() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=3, n_layers=1)

    ############# Behaviour check
    with pytest.raises(ParameterLengthMismatch):
        prepare_state(spec, np.zeros(spec.param_count + 1))


def test_zero_padded_layer_acts_as_identity() -> None:
    ############# Setup
    shallow = AnsatzSpec(n_qubits=4, n_layers=2)
    deep = AnsatzSpec(n_qubits=4, n_layers=3)
    theta = random_parameters(shallow, seed=3)

    ############# Test
    padded = pad_parameters(theta, shallow, deep)

    ############# Behaviour check
    assert padded.shape == (deep.param_count,)
    np.testing.assert_allclose(
        prepare_state(deep, padded).amplitudes, prepare_state(shallow, theta).amplitudes, atol=1e-12
    )
    with pytest.raises(ValueError):
        pad_parameters(padded, deep, shallow)


def test_angles_are_periodic_under_two_pi() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=3, n_layers=1)
    theta = random_parameters(spec, seed=5)
    shifted = theta + 2 * np.pi * np.arange(-3, 3).repeat(2)[: spec.param_count]

    ############# Test
    reduced = reduce_angles(shifted)

    ############# Behaviour check
    np.testing.assert_allclose(reduced, theta, atol=1e-12)
    np.testing.assert_allclose(
        prepare_state(spec, shifted).amplitudes, prepare_state(spec, theta).amplitudes, atol=1e-12
    )


@pytest.mark.parametrize("param", [0, 1, 6, 7])
def test_energy_is_a_two_harmonic_function_of_each_angle(param: int) -> None:
    """Generators have eigenvalues in {-1, 0, 1}, so the energy is a trigonometric polynomial of degree two."""
    ############# Setup
    h = build_chain_hamiltonian(soliton_chain(n_qubits=2))
    spec = AnsatzSpec(n_qubits=2, n_layers=1)
    theta = random_parameters(spec, seed=1)

    def energy(angle: float) -> float:
        shifted = theta.copy()
        shifted[param] = angle
        return expectation(h, prepare_state(spec, shifted))

    grid = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    design = np.column_stack([np.ones_like(grid), np.cos(grid), np.sin(grid), np.cos(2 * grid), np.sin(2 * grid)])

    ############# Test
    coeffs, *_ = np.linalg.lstsq(design, [energy(a) for a in grid], rcond=None)

    ############# Behaviour check
    for angle in (0.3, 1.9, 4.4):
        basis = [1, np.cos(angle), np.sin(angle), np.cos(2 * angle), np.sin(2 * angle)]
        assert energy(angle) == pytest.approx(float(np.dot(coeffs, basis)), abs=1e-10)


def test_prepared_state_starts_from_the_zero_state_for_identity_layers() -> None:
    ############# Setup
    spec = AnsatzSpec(n_qubits=5, n_layers=2, entangler_topology="linear")

    ############# Test
    psi = prepare_state(spec, np.zeros(spec.param_count))

    ############# Behaviour check
    np.testing.assert_array_equal(psi.amplitudes, new_zero_state(5).amplitudes)
