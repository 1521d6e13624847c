import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from soliton_vqe.statevector import (
    DensityMatrix2Q,
    DimensionMismatch,
    StateVector,
    reduced_density_matrix,
    single_qubit_density_matrix,
)

IMAGINARY_TOLERANCE = 1e-8
# eigenvalues of rho times its spin flip below this count as zero
EIGENVALUE_FLOOR = 1e-10
RATIO_THRESHOLD = 1e-6

_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_SPIN_FLIP = np.kron(_SIGMA_Y, _SIGMA_Y)


class CorruptDensityMatrix(ArithmeticError):
    """rho times its spin flip has eigenvalues with sizeable imaginary parts, so rho is not a density matrix."""

    pass


class TextureRow(NamedTuple):
    site: int
    mx: float
    my: float
    mz: float


@dataclass(frozen=True, eq=False)
class ConcurrenceMatrix:
    """Pairwise concurrences C_ij; symmetric with a zero diagonal."""

    values: npt.NDArray[np.float64]

    @property
    def n_qubits(self) -> int:
        return self.values.shape[0]

    def band(self, distance: int) -> npt.NDArray[np.float64]:
        """Entries C_{i,i+distance} along one off-diagonal."""
        return np.diagonal(self.values, offset=distance).copy()

    def beyond(self, distance: int) -> npt.NDArray[np.float64]:
        """Entries with |i - j| >= distance."""
        i, j = np.triu_indices(self.n_qubits, k=distance)
        return self.values[i, j]


def spin_flip(rho: DensityMatrix2Q) -> npt.NDArray[np.complex128]:
    return _SPIN_FLIP @ rho.entries.conj() @ _SPIN_FLIP


def concurrence(rho: DensityMatrix2Q) -> float:
    """
    Wootters concurrence max(0, l1 - l2 - l3 - l4), where the l_k are the square roots of the
    eigenvalues of rho times its spin flip, l1 the largest.
    """
    eigenvalues = np.linalg.eigvals(rho.entries @ spin_flip(rho))
    if np.max(np.abs(eigenvalues.imag)) > IMAGINARY_TOLERANCE:
        raise CorruptDensityMatrix(f"eigenvalues {eigenvalues} of qubit pair {rho.qubit_pair}")

    real = eigenvalues.real
    real = np.where(real < EIGENVALUE_FLOOR, 0.0, real)
    lambdas = np.sort(np.sqrt(real))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))


def concurrence_from_pure(amplitudes: npt.ArrayLike) -> float:
    """2|ad - bc| for a pure two-qubit state a|00> + b|01> + c|10> + d|11>."""
    a, b, c, d = np.asarray(amplitudes, dtype=np.complex128).reshape(4)
    return float(2 * abs(a * d - b * c))


def concurrence_matrix(psi: StateVector) -> ConcurrenceMatrix:
    n = psi.n_qubits
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = concurrence(reduced_density_matrix(psi, i, j))
    logging.debug("concurrence matrix over %d qubits, largest entry %.6f", n, values.max())
    return ConcurrenceMatrix(values)


def relative_concurrence(
    vqe: ConcurrenceMatrix, exact: ConcurrenceMatrix, threshold: float = RATIO_THRESHOLD
) -> npt.NDArray[np.float64]:
    """Elementwise vqe / exact. Entries whose exact value is at or below `threshold` are NaN (undefined)."""
    if vqe.values.shape != exact.values.shape:
        raise DimensionMismatch(f"concurrence matrices of shape {vqe.values.shape} and {exact.values.shape}")

    defined = exact.values > threshold
    ratio = np.full(exact.values.shape, np.nan)
    ratio[defined] = vqe.values[defined] / exact.values[defined]
    return ratio


def magnetization_texture(psi: StateVector) -> list[TextureRow]:
    """Per-site expectation values of sigma_x, sigma_y and sigma_z."""
    rows = []
    for site in range(psi.n_qubits):
        rho = single_qubit_density_matrix(psi, site)
        rows.append(
            TextureRow(
                site=site,
                mx=float(2 * rho[0, 1].real),
                my=float(-2 * rho[0, 1].imag),
                mz=float((rho[0, 0] - rho[1, 1]).real),
            )
        )
    return rows
