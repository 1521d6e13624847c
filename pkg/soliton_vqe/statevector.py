import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Self

import numpy as np
import numpy.typing as npt

Axis = Literal["X", "Y", "Z"]

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-10

ComplexArray = npt.NDArray[np.complex128]


class DimensionMismatch(ValueError):
    """Two operands act on registers of different sizes."""

    pass


class QubitIndexError(IndexError):
    pass


class StateTooLarge(ValueError):
    """The requested register would exceed the memory guard."""

    pass


class StateNotNormalized(ValueError):
    pass


@dataclass(eq=False)
class StateVector:
    """
    Dense pure state of n qubits. Qubit j is bit j of the basis index, so amplitude k belongs to the
    basis state whose binary expansion, read from the least significant bit, lists the qubit values.

    Kernels in this module update `amplitudes` in place.
    """

    n_qubits: int
    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise DimensionMismatch(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def from_amplitudes(cls, amplitudes: npt.ArrayLike) -> Self:
        amps = np.asarray(amplitudes, dtype=np.complex128)
        n_qubits = int(amps.size).bit_length() - 1
        return cls(n_qubits, amps)

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits

    def copy(self) -> Self:
        return type(self)(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> ComplexArray:
        """A view with one axis per qubit. Qubit q lives on axis n_qubits - 1 - q."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def to_bytes(self) -> bytes:
        return np.array([self.n_qubits], dtype="<u8").tobytes() + self.amplitudes.astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> Self:
        if len(data) < 8:
            raise ValueError("statevector dump is truncated")
        n_qubits = int(np.frombuffer(data[:8], dtype="<u8")[0])
        if n_qubits > MAX_QUBITS:
            raise StateTooLarge(f"dump claims {n_qubits} qubits")
        amps = np.frombuffer(data[8:], dtype="<c16").astype(np.complex128)
        return cls(n_qubits, amps)

    def save(self, path: Path | str) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: Path | str) -> Self:
        return cls.from_bytes(Path(path).read_bytes())


@dataclass(frozen=True, eq=False)
class DensityMatrix2Q:
    """
    Two-qubit reduced density matrix. Rows and columns are ordered |q_i q_j> with q_i the high bit,
    i.e. index 2 * q_i + q_j.
    """

    entries: ComplexArray
    qubit_pair: tuple[int, int]


def new_zero_state(n_qubits: int) -> StateVector:
    if n_qubits < 1:
        raise ValueError(f"a register needs at least one qubit, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise StateTooLarge(f"{n_qubits} qubits exceeds the limit of {MAX_QUBITS}")

    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def product_state(spinors: list[npt.ArrayLike]) -> StateVector:
    """Tensor product of single-qubit states, spinors[q] describing qubit q."""
    if not spinors:
        raise ValueError("need at least one spinor")
    factors = [np.asarray(s, dtype=np.complex128).reshape(2) for s in spinors]
    # qubit 0 is the least significant bit, so it goes rightmost in the Kronecker product
    amps = functools.reduce(np.kron, reversed(factors))
    return StateVector(len(factors), amps)


def assert_normalized(psi: StateVector, tolerance: float = NORM_TOLERANCE) -> None:
    norm_sq = float(np.vdot(psi.amplitudes, psi.amplitudes).real)
    if abs(norm_sq - 1.0) > tolerance:
        raise StateNotNormalized(f"squared norm is {norm_sq!r}")


def check_same_register(a: StateVector, b: StateVector) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatch(f"registers of {a.n_qubits} and {b.n_qubits} qubits")


def _check_qubit(psi: StateVector, qubit: int) -> None:
    if not 0 <= qubit < psi.n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside a register of {psi.n_qubits}")


def _pair_views(tensor: ComplexArray, axis: int) -> tuple[ComplexArray, ComplexArray]:
    """Views onto the amplitudes with the given tensor axis at 0 and at 1. The axis is kept with length 1."""
    lo = [slice(None)] * tensor.ndim
    hi = [slice(None)] * tensor.ndim
    lo[axis] = slice(0, 1)
    hi[axis] = slice(1, 2)
    return tensor[tuple(lo)], tensor[tuple(hi)]


def _rotate_pair(lo: ComplexArray, hi: ComplexArray, axis: Axis, theta: float) -> None:
    # exp(-i theta sigma) = cos(theta) I - i sin(theta) sigma, no half angle
    c, s = np.cos(theta), np.sin(theta)
    if axis == "Z":
        lo *= np.exp(-1j * theta)
        hi *= np.exp(1j * theta)
        return

    old_lo = lo.copy()
    if axis == "X":
        lo *= c
        lo -= 1j * s * hi
        hi *= c
        hi -= 1j * s * old_lo
    elif axis == "Y":
        lo *= c
        lo -= s * hi
        hi *= c
        hi += s * old_lo
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")


def apply_rotation(psi: StateVector, axis: Axis, qubit: int, theta: float) -> None:
    """Applies R_axis(theta) = exp(-i theta sigma_axis) to one qubit, in place."""
    _check_qubit(psi, qubit)
    lo, hi = _pair_views(psi.tensor(), psi.n_qubits - 1 - qubit)
    _rotate_pair(lo, hi, axis, theta)


def apply_controlled_ry(psi: StateVector, control: int, target: int, theta: float) -> None:
    """Applies R_Y(theta) to `target` on the subspace where `control` is 1, in place."""
    _check_qubit(psi, control)
    _check_qubit(psi, target)
    if control == target:
        raise ValueError(f"control and target are both qubit {control}")

    n = psi.n_qubits
    control_axis, target_axis = n - 1 - control, n - 1 - target
    _, control_on = _pair_views(psi.tensor(), control_axis)
    lo, hi = _pair_views(control_on, target_axis)
    _rotate_pair(lo, hi, "Y", theta)


def apply_pauli(psi: StateVector, axis: Axis, qubit: int) -> None:
    _check_qubit(psi, qubit)
    lo, hi = _pair_views(psi.tensor(), psi.n_qubits - 1 - qubit)
    if axis == "X":
        old_lo = lo.copy()
        lo[...] = hi
        hi[...] = old_lo
    elif axis == "Y":
        old_lo = lo.copy()
        lo[...] = -1j * hi
        hi[...] = 1j * old_lo
    elif axis == "Z":
        hi *= -1
    else:
        raise ValueError(f"unknown Pauli axis {axis!r}")


def project_qubit(psi: StateVector, qubit: int, bit: int) -> None:
    """Applies |bit><bit| on one qubit, in place. The result is not renormalized."""
    _check_qubit(psi, qubit)
    lo, hi = _pair_views(psi.tensor(), psi.n_qubits - 1 - qubit)
    if bit == 0:
        hi[...] = 0
    elif bit == 1:
        lo[...] = 0
    else:
        raise ValueError(f"bit must be 0 or 1, got {bit}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating a."""
    check_same_register(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def reduced_density_matrix(psi: StateVector, i: int, j: int) -> DensityMatrix2Q:
    _check_qubit(psi, i)
    _check_qubit(psi, j)
    if not i < j:
        raise ValueError(f"qubit pair must be ordered i < j, got ({i}, {j})")

    n = psi.n_qubits
    tensor = np.moveaxis(psi.tensor(), (n - 1 - i, n - 1 - j), (0, 1))
    m = tensor.reshape(4, -1)
    return DensityMatrix2Q(entries=m @ m.conj().T, qubit_pair=(i, j))


def single_qubit_density_matrix(psi: StateVector, qubit: int) -> ComplexArray:
    _check_qubit(psi, qubit)
    m = np.moveaxis(psi.tensor(), psi.n_qubits - 1 - qubit, 0).reshape(2, -1)
    return m @ m.conj().T
