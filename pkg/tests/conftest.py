import numpy as np
import pytest

from soliton_vqe.exact_solver import Spectrum, lowest_eigenpairs
from soliton_vqe.models import Boundary, ChainParams, ContinuumParams, OptimizerConfig
from soliton_vqe.pauli_model import Hamiltonian, build_chain_hamiltonian
from soliton_vqe.statevector import StateVector

REFERENCE_DMI = 0.63
REFERENCE_FIELD = 3.36e-3


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return StateVector(n_qubits, amps / np.linalg.norm(amps))


def random_hamiltonian(n_qubits: int, n_terms: int, rng: np.random.Generator) -> Hamiltonian:
    raw = []
    for _ in range(n_terms):
        support = rng.choice(n_qubits, size=rng.integers(1, n_qubits + 1), replace=False)
        ops = [(int(q), str(rng.choice(["X", "Y", "Z"]))) for q in support]
        raw.append((float(rng.normal()), ops))
    return Hamiltonian.from_terms(n_qubits, raw)


def soliton_chain(n_qubits: int = 10, boundary: Boundary = "open") -> ChainParams:
    return ChainParams(n_qubits=n_qubits, j_exchange=1.0, dmi=REFERENCE_DMI, field=REFERENCE_FIELD, boundary=boundary)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def heisenberg_pair() -> Hamiltonian:
    return build_chain_hamiltonian(ChainParams(n_qubits=2, j_exchange=1.0))


@pytest.fixture
def dmi_pair() -> Hamiltonian:
    return build_chain_hamiltonian(ChainParams(n_qubits=2, j_exchange=0.0, dmi=1.0))


@pytest.fixture
def reference_continuum() -> ContinuumParams:
    return ContinuumParams(j_exchange=1.0, dmi=REFERENCE_DMI, field=REFERENCE_FIELD)


@pytest.fixture(scope="session")
def soliton_spectrum() -> Spectrum:
    """Exact lowest levels of the ten-site chain at the reference couplings."""
    return lowest_eigenpairs(build_chain_hamiltonian(soliton_chain()), m=2)


@pytest.fixture
def quick_optimizer() -> OptimizerConfig:
    return OptimizerConfig(gradient_mode="adjoint_analytic", restarts=2, max_iterations=2_000)
