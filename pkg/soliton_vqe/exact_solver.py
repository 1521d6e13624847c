import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from soliton_vqe.pauli_model import Hamiltonian, apply_hamiltonian_array, to_dense
from soliton_vqe.statevector import ComplexArray, StateVector

MAX_DENSE_QUBITS = 12
MAX_LANCZOS_QUBITS = 16
RESIDUAL_TOLERANCE = 1e-9

SolverMethod = Literal["auto", "dense", "lanczos"]


class HilbertSpaceTooLarge(ValueError):
    pass


class EigensolverNotConverged(ArithmeticError):
    """Lanczos hit its restart cap. `residual` holds the best residual norm reached."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class AmbiguousGroundSpace(ValueError):
    """The requested tolerance cannot separate the ground cluster from the rest of the spectrum."""

    pass


class UndefinedDelta(ArithmeticError):
    """No level above the ground cluster is known, so (E - E0) / (E1 - E0) has no denominator."""

    pass


def degeneracy_tolerance(e0: float) -> float:
    return 1e-8 * max(1.0, abs(e0))


class SpectrumSummary(BaseModel):
    e0: float
    e1: float | None
    degeneracy: int
    residuals: list[float]


@dataclass(eq=False)
class Spectrum:
    """
    Lowest eigenpairs of a Hamiltonian, ascending. Always holds the whole ground cluster and, unless the
    Hilbert space is exhausted, at least one level above it.
    """

    eigenvalues: np.ndarray
    vectors: list[StateVector]
    ground_degeneracy: int
    residuals: np.ndarray

    @property
    def e0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def e1(self) -> float | None:
        above = self.eigenvalues[self.eigenvalues > self.e0 + degeneracy_tolerance(self.e0)]
        return float(above[0]) if above.size else None

    @property
    def ground_state(self) -> StateVector:
        return self.vectors[0]

    def summary(self) -> SpectrumSummary:
        return SpectrumSummary(
            e0=self.e0,
            e1=self.e1,
            degeneracy=self.ground_degeneracy,
            residuals=[float(r) for r in self.residuals],
        )


def _ground_cluster_size(eigenvalues: np.ndarray) -> int:
    e0 = float(eigenvalues[0])
    return int(np.count_nonzero(eigenvalues <= e0 + degeneracy_tolerance(e0)))


def _residuals(h: Hamiltonian, eigenvalues: np.ndarray, vectors: list[StateVector]) -> np.ndarray:
    return np.array(
        [
            np.linalg.norm(apply_hamiltonian_array(h, v.amplitudes) - lam * v.amplitudes)
            for lam, v in zip(eigenvalues, vectors, strict=True)
        ]
    )


def _dense_eigenpairs(h: Hamiltonian, m: int) -> Spectrum:
    eigenvalues, eigenvectors = scipy.linalg.eigh(to_dense(h))
    count = min(eigenvalues.size, max(m, _ground_cluster_size(eigenvalues) + 1))

    values = eigenvalues[:count]
    vectors = [StateVector(h.n_qubits, eigenvectors[:, k].copy()) for k in range(count)]
    return Spectrum(values, vectors, _ground_cluster_size(values), _residuals(h, values, vectors))


def _orthogonalize(w: ComplexArray, basis: ComplexArray) -> None:
    # two passes of classical Gram-Schmidt against the rows of `basis`
    if basis.shape[0] == 0:
        return
    for _ in range(2):
        w -= basis.T @ (basis.conj() @ w)


def _lowest_in_complement(
    apply: Callable[[ComplexArray], ComplexArray],
    locked: ComplexArray,
    start: ComplexArray,
    krylov_dim: int,
    max_restarts: int,
    tolerance: float,
) -> tuple[float, ComplexArray, float]:
    """
    Explicitly restarted Lanczos for the lowest eigenpair of H restricted to the orthogonal complement
    of the locked vectors, with full reorthogonalization at every step.
    """
    dim = start.size
    krylov_dim = max(1, min(krylov_dim, dim - locked.shape[0]))

    v = start.copy()
    _orthogonalize(v, locked)
    v /= np.linalg.norm(v)

    residual = np.inf
    for restart in range(max_restarts):
        basis = np.zeros((krylov_dim, dim), dtype=np.complex128)
        alphas: list[float] = []
        betas: list[float] = []
        basis[0] = v
        for k in range(krylov_dim):
            w = apply(basis[k])
            alphas.append(float(np.vdot(basis[k], w).real))
            _orthogonalize(w, locked)
            _orthogonalize(w, basis[: k + 1])
            beta = float(np.linalg.norm(w))
            if k + 1 == krylov_dim or beta < 1e-12:
                break
            betas.append(beta)
            basis[k + 1] = w / beta

        size = len(alphas)
        if size == 1:
            theta, coeffs = alphas[0], np.ones(1)
        else:
            ritz_values, ritz_vectors = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas))
            theta, coeffs = float(ritz_values[0]), ritz_vectors[:, 0]

        v = coeffs @ basis[:size]
        _orthogonalize(v, locked)
        v /= np.linalg.norm(v)
        theta = float(np.vdot(v, apply(v)).real)
        residual = float(np.linalg.norm(apply(v) - theta * v))
        logging.debug("Lanczos restart %d: Ritz value %.15f, residual %.3e", restart, theta, residual)
        if residual < tolerance:
            return theta, v, residual

    raise EigensolverNotConverged(
        f"Lanczos did not reach residual {tolerance:g} after {max_restarts} restarts", residual
    )


def _lanczos_eigenpairs(
    h: Hamiltonian, m: int, seed: int, krylov_dim: int, max_restarts: int, tolerance: float
) -> Spectrum:
    """
    Degenerate levels are resolved by locking: each converged vector is frozen and the next solve
    runs in its orthogonal complement from a fresh seeded start vector.
    """
    dim = 1 << h.n_qubits
    rng = np.random.default_rng(seed)

    def apply(amplitudes: ComplexArray) -> ComplexArray:
        return apply_hamiltonian_array(h, amplitudes)

    values: list[float] = []
    locked = np.zeros((0, dim), dtype=np.complex128)
    while locked.shape[0] < dim:
        start = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        theta, vec, _ = _lowest_in_complement(apply, locked, start, krylov_dim, max_restarts, tolerance)
        values.append(theta)
        locked = np.vstack([locked, vec])

        e0 = min(values)
        if len(values) >= m and any(x > e0 + degeneracy_tolerance(e0) for x in values):
            break

    order = np.argsort(values, kind="stable")
    eigenvalues = np.array(values)[order]
    vectors = [StateVector(h.n_qubits, locked[k].copy()) for k in order]
    return Spectrum(eigenvalues, vectors, _ground_cluster_size(eigenvalues), _residuals(h, eigenvalues, vectors))


def lowest_eigenpairs(
    h: Hamiltonian,
    m: int = 2,
    method: SolverMethod = "auto",
    seed: int = 0,
    krylov_dim: int = 100,
    max_restarts: int = 50,
    tolerance: float = RESIDUAL_TOLERANCE,
) -> Spectrum:
    """
    Returns the m lowest eigenpairs, widened to cover the whole ground cluster plus the first level
    above it. "auto" diagonalizes densely up to 12 qubits and runs matrix-free Lanczos beyond.
    """
    if m < 1:
        raise ValueError(f"need at least one eigenpair, asked for {m}")
    if h.n_qubits > MAX_LANCZOS_QUBITS:
        raise HilbertSpaceTooLarge(f"{h.n_qubits} qubits exceeds the solver limit of {MAX_LANCZOS_QUBITS}")

    if method == "auto":
        method = "dense" if h.n_qubits <= MAX_DENSE_QUBITS else "lanczos"

    if method == "dense":
        if h.n_qubits > MAX_DENSE_QUBITS:
            raise HilbertSpaceTooLarge(f"dense path is limited to {MAX_DENSE_QUBITS} qubits")
        spectrum = _dense_eigenpairs(h, m)
    else:
        spectrum = _lanczos_eigenpairs(h, m, seed, krylov_dim, max_restarts, tolerance)

    logging.info(
        "%s solve on %d qubits: E0=%.12f degeneracy=%d E1=%s",
        method,
        h.n_qubits,
        spectrum.e0,
        spectrum.ground_degeneracy,
        spectrum.e1,
    )
    return spectrum


def ground_space_projector(spectrum: Spectrum, tol: float | None = None) -> list[StateVector]:
    """Orthonormal basis of the E0 eigenspace, taking every returned level within `tol` of E0."""
    e0 = spectrum.e0
    if tol is None:
        tol = degeneracy_tolerance(e0)

    e1 = spectrum.e1
    if e1 is not None and e1 - e0 < tol:
        raise AmbiguousGroundSpace(f"tolerance {tol:g} merges E0={e0} with E1={e1}")
    in_cluster = spectrum.eigenvalues <= e0 + tol
    if in_cluster.all() and len(spectrum.vectors) < spectrum.vectors[0].dimension:
        raise AmbiguousGroundSpace("spectrum has no level above the ground cluster, so it may be incomplete")

    columns = np.column_stack([v.amplitudes for v, keep in zip(spectrum.vectors, in_cluster, strict=True) if keep])
    q, _ = np.linalg.qr(columns)
    n_qubits = spectrum.vectors[0].n_qubits
    return [StateVector(n_qubits, q[:, k].copy()) for k in range(q.shape[1])]


def delta_metric(e_vqe: float, spectrum: Spectrum) -> float:
    """(E_vqe - E0) / (E1 - E0): below 1 the variational energy beats the first excited level."""
    e1 = spectrum.e1
    if e1 is None:
        raise UndefinedDelta(f"no level above the ground cluster at E0={spectrum.e0}")
    return (e_vqe - spectrum.e0) / (e1 - spectrum.e0)
