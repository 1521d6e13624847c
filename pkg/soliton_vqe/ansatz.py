import functools
from typing import Literal, NamedTuple

import numpy as np
import numpy.typing as npt

from soliton_vqe.models import AnsatzSpec
from soliton_vqe.settings import settings
from soliton_vqe.statevector import (
    Axis,
    StateVector,
    apply_controlled_ry,
    apply_pauli,
    apply_rotation,
    assert_normalized,
    new_zero_state,
    project_qubit,
)

TWO_PI = 2 * np.pi

FloatArray = npt.NDArray[np.float64]


class ParameterLengthMismatch(ValueError):
    pass


class Gate(NamedTuple):
    kind: Literal["rotation", "controlled_ry"]
    axis: Axis
    qubits: tuple[int, ...]  # (qubit,) for rotations, (control, target) for entanglers
    param: int


def param_count(spec: AnsatzSpec) -> int:
    return spec.param_count


@functools.cache
def gate_sequence(spec: AnsatzSpec) -> tuple[Gate, ...]:
    """
    The frozen gate order, which also fixes how the parameter vector is consumed. Per layer:
    R_X, R_Z, R_X on qubit 0, then on qubit 1 and so on, then CR_Y(q -> q+1) for q = 0..N-2 and
    for the ring CR_Y(N-1 -> 0).
    """
    n = spec.n_qubits
    gates: list[Gate] = []
    for _ in range(spec.n_layers):
        for qubit in range(n):
            for axis in ("X", "Z", "X"):
                gates.append(Gate("rotation", axis, (qubit,), len(gates)))
        for control in range(n - 1):
            gates.append(Gate("controlled_ry", "Y", (control, control + 1), len(gates)))
        if spec.entangler_topology == "ring":
            gates.append(Gate("controlled_ry", "Y", (n - 1, 0), len(gates)))

    assert len(gates) == spec.param_count
    return tuple(gates)


def apply_gate(psi: StateVector, gate: Gate, theta: float) -> None:
    if gate.kind == "rotation":
        apply_rotation(psi, gate.axis, gate.qubits[0], theta)
    else:
        apply_controlled_ry(psi, gate.qubits[0], gate.qubits[1], theta)


def apply_generator(psi: StateVector, gate: Gate) -> None:
    """
    Replaces psi by G psi where the gate is exp(-i theta G): G is the Pauli matrix for rotations
    and |1><1| (control) times Y (target) for the controlled rotations.
    """
    if gate.kind == "rotation":
        apply_pauli(psi, gate.axis, gate.qubits[0])
    else:
        project_qubit(psi, gate.qubits[0], 1)
        apply_pauli(psi, "Y", gate.qubits[1])


def check_parameters(spec: AnsatzSpec, theta: npt.ArrayLike) -> FloatArray:
    angles = np.asarray(theta, dtype=np.float64)
    if angles.shape != (spec.param_count,):
        raise ParameterLengthMismatch(f"ansatz takes {spec.param_count} angles, got shape {angles.shape}")
    return angles


def prepare_state(spec: AnsatzSpec, theta: npt.ArrayLike) -> StateVector:
    """|psi(theta)> = U(theta)|0...0>."""
    angles = check_parameters(spec, theta)

    psi = new_zero_state(spec.n_qubits)
    for gate in gate_sequence(spec):
        apply_gate(psi, gate, angles[gate.param])

    if settings.DEBUG_CHECKS:
        assert_normalized(psi)
    return psi


def random_parameters(spec: AnsatzSpec, seed: int) -> FloatArray:
    return np.random.default_rng(seed).uniform(0.0, TWO_PI, size=spec.param_count)


def reduce_angles(theta: npt.ArrayLike) -> FloatArray:
    return np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)


def pad_parameters(theta: npt.ArrayLike, from_spec: AnsatzSpec, to_spec: AnsatzSpec) -> FloatArray:
    """
    Extends a parameter vector to a deeper ansatz of the same width by appending all-zero layers,
    which act as the identity.
    """
    if (from_spec.n_qubits, from_spec.entangler_topology) != (to_spec.n_qubits, to_spec.entangler_topology):
        raise ValueError("can only pad between ansatze of the same width and topology")
    if to_spec.n_layers < from_spec.n_layers:
        raise ValueError(f"cannot pad {from_spec.n_layers} layers down to {to_spec.n_layers}")

    angles = check_parameters(from_spec, theta)
    padded = np.zeros(to_spec.param_count)
    padded[: angles.size] = angles
    return padded
