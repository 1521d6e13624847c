from collections.abc import Iterable
from typing import Annotated, Self

import numpy as np
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator

from soliton_vqe.models import ChainParams
from soliton_vqe.statevector import Axis, ComplexArray, DimensionMismatch, StateVector

MERGE_TOLERANCE = 1e-15
MAX_DENSE_QUBITS = 14
IMAGINARY_TOLERANCE = 1e-10

PauliOp = tuple[int, Axis]


class HamiltonianTooLarge(ValueError):
    """Refusing to materialize a dense matrix beyond the memory guard."""

    pass


class ComplexExpectation(ArithmeticError):
    """An expectation value came out with a non-negligible imaginary part."""

    pass


class PauliTerm(BaseModel):
    """
    A real coefficient times a tensor product of Pauli operators. Qubits not listed carry the identity.
    """

    model_config = ConfigDict(frozen=True)

    coefficient: Annotated[
        float,
        Field(validation_alias=AliasChoices("coefficient", "coeff"), serialization_alias="coeff", allow_inf_nan=False),
    ]
    operators: Annotated[
        tuple[PauliOp, ...], Field(validation_alias=AliasChoices("operators", "ops"), serialization_alias="ops")
    ]

    @field_validator("coefficient")
    @classmethod
    def check_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("zero-coefficient terms are dropped, not stored")
        return value

    @field_validator("operators")
    @classmethod
    def check_qubit_order(cls, ops: tuple[PauliOp, ...]) -> tuple[PauliOp, ...]:
        qubits = [q for q, _ in ops]
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {ops}")
        if any(a >= b for a, b in zip(qubits, qubits[1:], strict=False)):
            raise ValueError(f"qubit indices must be strictly increasing, got {qubits}")
        return ops

    def masks(self) -> tuple[int, int, complex]:
        """
        Returns (x_mask, z_mask, phase) with the string written as phase * X^x_mask Z^z_mask,
        using Y = iXZ on every qubit carrying a Y.
        """
        x_mask = z_mask = n_y = 0
        for qubit, axis in self.operators:
            bit = 1 << qubit
            if axis in ("X", "Y"):
                x_mask |= bit
            if axis in ("Z", "Y"):
                z_mask |= bit
            if axis == "Y":
                n_y += 1
        return x_mask, z_mask, 1j**n_y

    def __str__(self) -> str:
        ops = " ".join(f"{axis}{qubit}" for qubit, axis in self.operators) or "I"
        return f"{self.coefficient:+g}*{ops}"


class Hamiltonian(BaseModel):
    """
    A Hermitian operator written as a sum of real-weighted Pauli strings. Build instances with
    `from_terms`, which merges duplicate strings and drops negligible coefficients.
    """

    model_config = ConfigDict(frozen=True)

    n_qubits: Annotated[int, Field(ge=1)]
    terms: tuple[PauliTerm, ...] = ()

    @model_validator(mode="after")
    def check_terms(self) -> Self:
        seen = set()
        for term in self.terms:
            if any(q >= self.n_qubits for q, _ in term.operators):
                raise ValueError(f"term {term} acts outside a register of {self.n_qubits} qubits")
            if term.operators in seen:
                raise ValueError(f"operator string {term.operators} appears twice")
            seen.add(term.operators)
        return self

    @classmethod
    def from_terms(cls, n_qubits: int, raw_terms: Iterable[tuple[float, Iterable[PauliOp]]]) -> Self:
        merged: dict[tuple[PauliOp, ...], float] = {}
        for coeff, ops in raw_terms:
            ordered = tuple(sorted(ops))
            merged[ordered] = merged.get(ordered, 0.0) + coeff

        terms = tuple(
            PauliTerm(coefficient=c, operators=ops) for ops, c in merged.items() if abs(c) >= MERGE_TOLERANCE
        )
        return cls(n_qubits=n_qubits, terms=terms)

    def raw_terms(self) -> list[tuple[float, tuple[PauliOp, ...]]]:
        return [(t.coefficient, t.operators) for t in self.terms]

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatch(f"cannot add Hamiltonians on {self.n_qubits} and {other.n_qubits} qubits")
        return Hamiltonian.from_terms(self.n_qubits, self.raw_terms() + other.raw_terms())

    def __mul__(self, scalar: float) -> "Hamiltonian":
        return Hamiltonian.from_terms(self.n_qubits, [(scalar * c, ops) for c, ops in self.raw_terms()])

    __rmul__ = __mul__

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True)

    @classmethod
    def from_json(cls, data: str | bytes) -> Self:
        return cls.model_validate_json(data)


def chain_bonds(n_qubits: int, boundary: str) -> list[tuple[int, int]]:
    """Nearest-neighbour bonds (i, j). The periodic chain closes with (N-1, 0)."""
    bonds = [(q, q + 1) for q in range(n_qubits - 1)]
    if boundary == "periodic":
        bonds.append((n_qubits - 1, 0))
    return bonds


def build_chain_hamiltonian(params: ChainParams) -> Hamiltonian:
    """
    Heisenberg exchange, a DMI vector along z and a transverse field along x, with S = sigma/2:

        H = sum_<ij> [ -J/4 (XX + YY + ZZ) - D/4 (X_i Y_j - Y_i X_j) ] + B/2 sum_j X_j
    """
    j, d, b = params.j_exchange, params.dmi, params.field

    raw: list[tuple[float, list[PauliOp]]] = []
    for i, k in chain_bonds(params.n_qubits, params.boundary):
        for axis in ("X", "Y", "Z"):
            raw.append((-j / 4, [(i, axis), (k, axis)]))
        raw.append((-d / 4, [(i, "X"), (k, "Y")]))
        raw.append((d / 4, [(i, "Y"), (k, "X")]))
    for site in range(params.n_qubits):
        raw.append((b / 2, [(site, "X")]))

    return Hamiltonian.from_terms(params.n_qubits, raw)


def _check_register(h: Hamiltonian, psi: StateVector) -> None:
    if h.n_qubits != psi.n_qubits:
        raise DimensionMismatch(f"Hamiltonian on {h.n_qubits} qubits applied to a {psi.n_qubits}-qubit state")


def apply_hamiltonian_array(h: Hamiltonian, amplitudes: ComplexArray) -> ComplexArray:
    """Matrix-free H @ amplitudes for a flat array of length 2**n_qubits."""
    index = np.arange(amplitudes.size, dtype=np.int64)
    out = np.zeros_like(amplitudes)
    for term in h.terms:
        x_mask, z_mask, phase = term.masks()
        signs = np.where(np.bitwise_count(index & z_mask) & 1, -1.0, 1.0)
        # (P psi)[c] = phase * (-1)^popcount((c ^ x) & z) * psi[c ^ x]
        out += (term.coefficient * phase) * (signs * amplitudes)[index ^ x_mask]
    return out


def apply_hamiltonian(h: Hamiltonian, psi: StateVector) -> StateVector:
    _check_register(h, psi)
    return StateVector(psi.n_qubits, apply_hamiltonian_array(h, psi.amplitudes))


def expectation(h: Hamiltonian, psi: StateVector) -> float:
    _check_register(h, psi)
    value = complex(np.vdot(psi.amplitudes, apply_hamiltonian_array(h, psi.amplitudes)))
    if abs(value.imag) > IMAGINARY_TOLERANCE * max(1.0, abs(value.real)):
        raise ComplexExpectation(f"expectation value {value} is not real")
    return value.real


def to_dense(h: Hamiltonian) -> ComplexArray:
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise HamiltonianTooLarge(f"dense matrix of {h.n_qubits} qubits exceeds the limit of {MAX_DENSE_QUBITS}")

    dim = 1 << h.n_qubits
    index = np.arange(dim, dtype=np.int64)
    dense = np.zeros((dim, dim), dtype=np.complex128)
    for term in h.terms:
        x_mask, z_mask, phase = term.masks()
        cols = index ^ x_mask
        signs = np.where(np.bitwise_count(cols & z_mask) & 1, -1.0, 1.0)
        dense[index, cols] += term.coefficient * phase * signs
    return dense
