import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict
from scipy.optimize import root_scalar

from soliton_vqe.entanglement import TextureRow
from soliton_vqe.models import ChainParams, ContinuumParams
from soliton_vqe.pauli_model import chain_bonds
from soliton_vqe.statevector import StateVector, product_state

KAPPA_RESIDUAL = 1e-12
UNIT_TOLERANCE = 1e-6
_MAX_AGM_STEPS = 64


class SolitonLatticeUnstable(ValueError):
    """The couplings put the chain in the untwisted regime, where no soliton lattice exists."""

    pass


class NonUnitSpin(ValueError):
    pass


class NoSolitonLattice(BaseModel):
    """Returned instead of a modulus when pi * k0 <= 4 m: the field wins and the chain stays untwisted."""

    model_config = ConfigDict(frozen=True)

    k0: float
    m: float
    reason: str


class SolitonReport(BaseModel):
    kappa: float
    period: float
    energy_per_period: float
    k0: float
    m: float


class SolitonSolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    kappa: float
    period: float
    energy_per_period: float
    params: ContinuumParams

    @property
    def k0(self) -> float:
        return self.params.k0

    @property
    def m(self) -> float:
        return self.params.m

    def report(self) -> SolitonReport:
        return SolitonReport(
            kappa=self.kappa, period=self.period, energy_per_period=self.energy_per_period, k0=self.k0, m=self.m
        )


def _agm_ladder(kappa: float) -> tuple[list[float], list[float]]:
    """The a_n and c_n of the arithmetic-geometric mean started at (1, sqrt(1 - kappa^2)), c_0 = kappa."""
    a, b, c = 1.0, math.sqrt(1.0 - kappa * kappa), kappa
    a_list, c_list = [a], [c]
    for _ in range(_MAX_AGM_STEPS):
        if abs(c) <= 2.0 * np.finfo(float).eps * a:
            break
        a, b, c = (a + b) / 2, math.sqrt(a * b), (a - b) / 2
        a_list.append(a)
        c_list.append(c)
    return a_list, c_list


def _check_modulus(kappa: float, allow_one: bool = False) -> None:
    upper_ok = kappa <= 1.0 if allow_one else kappa < 1.0
    if not (kappa >= 0.0 and upper_ok):
        raise ValueError(f"elliptic modulus {kappa} outside {'[0, 1]' if allow_one else '[0, 1)'}")


def elliptic_K(kappa: float) -> float:
    """Complete elliptic integral of the first kind, K = pi / (2 AGM(1, sqrt(1 - kappa^2)))."""
    _check_modulus(kappa)
    a_list, _ = _agm_ladder(kappa)
    return math.pi / (2 * a_list[-1])


def elliptic_E(kappa: float) -> float:
    """Complete elliptic integral of the second kind, E = K (1 - sum_n 2^(n-1) c_n^2)."""
    _check_modulus(kappa, allow_one=True)
    if kappa == 1.0:
        return 1.0
    a_list, c_list = _agm_ladder(kappa)
    k = math.pi / (2 * a_list[-1])
    return k * (1.0 - math.fsum(2.0 ** (n - 1) * c * c for n, c in enumerate(c_list)))


def jacobi_am(u: npt.ArrayLike, kappa: float) -> npt.NDArray[np.float64] | float:
    """
    Jacobi amplitude by the descending AGM ladder. The result is continuous and monotone in u,
    not folded into any 2 pi window.
    """
    _check_modulus(kappa)
    u_arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u_arr)):
        raise ValueError("jacobi_am needs finite arguments")

    a_list, c_list = _agm_ladder(kappa)
    n = len(a_list) - 1
    phi = 2.0**n * a_list[-1] * u_arr
    for k in range(n, 0, -1):
        phi = (phi + np.arcsin(c_list[k] / a_list[k] * np.sin(phi))) / 2

    return float(phi) if phi.ndim == 0 else phi


def _kappa_condition(kappa: float, k0: float, m: float) -> float:
    return math.pi * kappa * k0 - 4 * m * elliptic_E(kappa)


def solve_kappa(params: ContinuumParams) -> float | NoSolitonLattice:
    """
    The modulus minimizing the soliton-lattice energy, the root of pi kappa k0 = 4 m E(kappa) on (0, 1).
    The left side increases and the right side decreases in kappa, so the root is unique when it exists.
    """
    k0, m = params.k0, params.m
    if m <= 0:
        raise ValueError("the soliton lattice needs a positive field")
    if math.pi * k0 <= 4 * m:
        logging.info("no soliton lattice: pi*k0=%.6g <= 4m=%.6g", math.pi * k0, 4 * m)
        return NoSolitonLattice(k0=k0, m=m, reason="pi * k0 <= 4 * m, the field keeps the chain untwisted")

    bracket = root_scalar(_kappa_condition, args=(k0, m), bracket=(0.0, 1.0), method="brentq", xtol=1e-15)
    kappa = float(bracket.root)

    # Newton polish, dE/dkappa = (E - K) / kappa
    for _ in range(8):
        residual = _kappa_condition(kappa, k0, m)
        if abs(residual) < KAPPA_RESIDUAL or kappa >= 1.0:
            break
        e, k = elliptic_E(kappa), elliptic_K(kappa)
        slope = math.pi * k0 - 4 * m * (e - k) / kappa
        kappa -= residual / slope

    logging.debug("kappa=%.15f residual=%.3e", kappa, _kappa_condition(kappa, k0, m))
    return kappa


def soliton_energy(kappa: float, params: ContinuumParams) -> float:
    """
    Energy per unit length of a soliton lattice with modulus kappa, relative to the uniform state along
    the field-preferred direction:

        eps = (a m^2 J / 2) (2E / (kappa^2 K) - 1 / kappa^2 - (pi / 2m) k0 / (kappa K))
    """
    k0, m = params.k0, params.m
    e, k = elliptic_E(kappa), elliptic_K(kappa)
    bracket = 2 * e / (kappa**2 * k) - 1 / kappa**2 - (math.pi / (2 * m)) * k0 / (kappa * k)
    return params.lattice_const * m * m * params.j_exchange / 2 * bracket


def soliton_solution(params: ContinuumParams) -> SolitonSolution:
    kappa = solve_kappa(params)
    if isinstance(kappa, NoSolitonLattice):
        raise SolitonLatticeUnstable(kappa.reason)

    period = 2 * kappa / params.m * elliptic_K(kappa)
    solution = SolitonSolution(
        kappa=kappa, period=period, energy_per_period=soliton_energy(kappa, params), params=params
    )
    logging.info(
        "soliton lattice: kappa=%.6f period=%.4f energy=%.6g",
        solution.kappa,
        solution.period,
        solution.energy_per_period,
    )
    return solution


def analytic_texture(sol: SolitonSolution, sites: int) -> list[TextureRow]:
    """Spins in the xy plane at angle phi(z) = 2 am(m z / kappa, kappa), z_j = j a."""
    if sites < 2:
        raise ValueError(f"a texture needs at least two sites, got {sites}")

    z = np.arange(sites) * sol.params.lattice_const
    phi = np.atleast_1d(2 * np.asarray(jacobi_am(sol.m * z / sol.kappa, sol.kappa)))
    return [TextureRow(site=j, mx=float(np.cos(p)), my=float(np.sin(p)), mz=0.0) for j, p in enumerate(phi)]


def _unit_vectors(texture: Sequence[TextureRow]) -> npt.NDArray[np.float64]:
    vectors = np.array([[row.mx, row.my, row.mz] for row in texture], dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise NonUnitSpin(f"texture has spin lengths {norms}")
    return vectors


def classical_energy(texture: Sequence[TextureRow], params: ChainParams) -> float:
    """
    Classical counterpart of the chain Hamiltonian for unit vectors n_j:

        E = sum_<ij> [ -J/4 n_i . n_j - D/4 (n_i x n_j)_z ] + B/2 sum_j n_j^x
    """
    if len(texture) != params.n_qubits:
        raise ValueError(f"texture has {len(texture)} sites, chain has {params.n_qubits}")
    n = _unit_vectors(texture)

    energy = 0.0
    for i, j in chain_bonds(params.n_qubits, params.boundary):
        cross_z = n[i, 0] * n[j, 1] - n[i, 1] * n[j, 0]
        energy += -params.j_exchange / 4 * float(n[i] @ n[j]) - params.dmi / 4 * cross_z
    energy += params.field / 2 * float(n[:, 0].sum())
    return energy


def classical_energy_density(texture: Sequence[TextureRow], params: ChainParams) -> float:
    """
    Energy per site of a texture measured from the uniform state along +x. This is the lattice counterpart of
    the continuum soliton-lattice energy when the chain is periodic.
    """
    uniform = [TextureRow(site=j, mx=1.0, my=0.0, mz=0.0) for j in range(params.n_qubits)]
    return (classical_energy(texture, params) - classical_energy(uniform, params)) / params.n_qubits


def coherent_product_state(texture: Sequence[TextureRow]) -> StateVector:
    """Product of spin-coherent states, qubit j polarized along the unit vector of row j."""
    n = _unit_vectors(texture)
    spinors = []
    for mx, my, mz in n:
        polar = math.acos(max(-1.0, min(1.0, mz)))
        azimuth = math.atan2(my, mx)
        spinors.append([math.cos(polar / 2), complex(math.cos(azimuth), math.sin(azimuth)) * math.sin(polar / 2)])
    return product_state(spinors)
