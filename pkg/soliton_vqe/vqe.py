import logging
import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Annotated, Literal, NamedTuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field

from soliton_vqe.ansatz import (
    apply_gate,
    apply_generator,
    check_parameters,
    gate_sequence,
    pad_parameters,
    prepare_state,
    random_parameters,
    reduce_angles,
)
from soliton_vqe.bfgs import BfgsResult, minimize_bfgs
from soliton_vqe.exact_solver import (
    Spectrum,
    UndefinedDelta,
    delta_metric,
    ground_space_projector,
)
from soliton_vqe.models import AnsatzSpec, GradientMode, OptimizerConfig, Topology
from soliton_vqe.pauli_model import Hamiltonian, apply_hamiltonian, expectation
from soliton_vqe.settings import worker_threads
from soliton_vqe.statevector import DimensionMismatch, StateVector, inner_product

FloatArray = npt.NDArray[np.float64]

VARIATIONAL_SLACK = 1e-9


class NonFiniteObjective(ArithmeticError):
    pass


class VariationalBoundViolated(ArithmeticError):
    """A variational energy came out below the exact ground energy."""

    pass


class AllRestartsFailed(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class EnergyObjective:
    hamiltonian: Hamiltonian

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits


@dataclass(frozen=True, eq=False)
class FidelityObjective:
    """Minimizes -sum_k |<phi_k|psi>|^2, i.e. the energy of -P for the projector P onto the targets."""

    targets: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("fidelity objective needs at least one target state")
        for target in self.targets:
            if abs(target.norm() - 1.0) > 1e-10:
                raise ValueError("fidelity targets must be normalized")

    @property
    def n_qubits(self) -> int:
        return self.targets[0].n_qubits


ObjectiveKind = EnergyObjective | FidelityObjective


def projector_fidelity(basis: Sequence[StateVector], psi: StateVector) -> float:
    return math.fsum(abs(inner_product(phi, psi)) ** 2 for phi in basis)


def _check_width(kind: ObjectiveKind, spec: AnsatzSpec) -> None:
    if kind.n_qubits != spec.n_qubits:
        raise DimensionMismatch(f"objective on {kind.n_qubits} qubits, ansatz on {spec.n_qubits}")


def _value_of_state(kind: ObjectiveKind, psi: StateVector) -> float:
    if isinstance(kind, EnergyObjective):
        return expectation(kind.hamiltonian, psi)
    return -projector_fidelity(kind.targets, psi)


def _observable_on(kind: ObjectiveKind, psi: StateVector) -> StateVector:
    if isinstance(kind, EnergyObjective):
        return apply_hamiltonian(kind.hamiltonian, psi)
    out = np.zeros_like(psi.amplitudes)
    for phi in kind.targets:
        out -= inner_product(phi, psi) * phi.amplitudes
    return StateVector(psi.n_qubits, out)


def evaluate_objective(kind: ObjectiveKind, spec: AnsatzSpec, theta: npt.ArrayLike) -> float:
    _check_width(kind, spec)
    value = _value_of_state(kind, prepare_state(spec, theta))
    if not math.isfinite(value):
        raise NonFiniteObjective(f"objective evaluated to {value}")
    return value


def _central_difference(kind: ObjectiveKind, spec: AnsatzSpec, theta: FloatArray, step: float) -> FloatArray:
    grad = np.empty_like(theta)
    shifted = theta.copy()
    for k in range(theta.size):
        shifted[k] = theta[k] + step
        f_plus = evaluate_objective(kind, spec, shifted)
        shifted[k] = theta[k] - step
        f_minus = evaluate_objective(kind, spec, shifted)
        shifted[k] = theta[k]
        grad[k] = (f_plus - f_minus) / (2 * step)
    return grad


def _adjoint(kind: ObjectiveKind, spec: AnsatzSpec, theta: FloatArray) -> FloatArray:
    """
    Reverse sweep. With psi_k the state after gate k and lam_k = U_{k+1}^+ ... U_K^+ O |psi>,
    df/dtheta_k = 2 Im <lam_k| G_k |psi_k> for a gate exp(-i theta_k G_k).
    """
    psi = prepare_state(spec, theta)
    lam = _observable_on(kind, psi)
    grad = np.empty_like(theta)
    for gate in reversed(gate_sequence(spec)):
        generated = psi.copy()
        apply_generator(generated, gate)
        grad[gate.param] = 2 * inner_product(lam, generated).imag
        apply_gate(psi, gate, -theta[gate.param])
        apply_gate(lam, gate, -theta[gate.param])
    return grad


def gradient(
    kind: ObjectiveKind,
    spec: AnsatzSpec,
    theta: npt.ArrayLike,
    mode: GradientMode = "central_difference",
    step: float = 1e-6,
) -> FloatArray:
    _check_width(kind, spec)
    angles = check_parameters(spec, theta)
    if mode == "central_difference":
        grad = _central_difference(kind, spec, angles, step)
    else:
        grad = _adjoint(kind, spec, angles)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteObjective("gradient has non-finite components")
    return grad


class RestartRecord(BaseModel):
    restart: int
    seed: Annotated[int | None, Field(description="Seed of the random start; None for supplied starts")]
    status: str
    message: str
    objective: float | None = None
    energy: float | None = None
    fidelity: float | None = None
    iterations: int = 0
    trace: list[tuple[int, float]] = []
    parameters: list[float] = []

    @property
    def succeeded(self) -> bool:
        return self.objective is not None


class VqeResult(BaseModel):
    """
    Outcome of one multi-start VQE run. `wall_time` stays out of the JSON so reruns are byte-stable.
    `best_energy`, `fidelity` and `best_parameters` all belong to the restart with the best objective.
    """

    n_qubits: int
    n_layers: int
    objective_kind: Literal["energy", "negative_fidelity"]
    best_restart: int
    best_objective: float
    best_energy: float | None
    best_parameters: list[float]
    mean_energy: float | None = None
    std_energy: float | None = None
    mean_fidelity: float | None = None
    std_fidelity: float | None = None
    fidelity: float | None = None
    delta: float | None = None
    per_restart: list[RestartRecord]
    wall_time: Annotated[float, Field(exclude=True)] = 0.0

    def spec(self, topology: Topology = "ring") -> AnsatzSpec:
        return AnsatzSpec(n_qubits=self.n_qubits, n_layers=self.n_layers, entangler_topology=topology)

    def best_state(self, spec: AnsatzSpec) -> StateVector:
        return prepare_state(spec, self.best_parameters)


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(np.mean(values)), std


def _run_restart(
    index: int,
    seed: int | None,
    theta0: FloatArray,
    kind: ObjectiveKind,
    spec: AnsatzSpec,
    cfg: OptimizerConfig,
    hamiltonian: Hamiltonian | None,
    basis: list[StateVector] | None,
) -> RestartRecord:
    def objective(theta: FloatArray) -> float:
        return evaluate_objective(kind, spec, theta)

    def grad(theta: FloatArray) -> FloatArray:
        return gradient(kind, spec, theta, cfg.gradient_mode, cfg.finite_difference_step)

    try:
        result: BfgsResult = minimize_bfgs(objective, grad, theta0, cfg)
    except (ArithmeticError, ValueError) as e:
        logging.exception("VQE restart %d failed", index)
        return RestartRecord(restart=index, seed=seed, status="failed", message=str(e))

    psi = prepare_state(spec, result.theta)
    record = RestartRecord(
        restart=index,
        seed=seed,
        status=result.status,
        message=result.message,
        objective=result.value,
        energy=expectation(hamiltonian, psi) if hamiltonian is not None else None,
        fidelity=projector_fidelity(basis, psi) if basis is not None else None,
        iterations=result.iterations,
        trace=result.trace,
        parameters=reduce_angles(result.theta).tolist(),
    )
    logging.info(
        "VQE restart %d (seed %s): %s after %d iterations, objective %.12f, fidelity %s",
        index,
        seed,
        record.status,
        record.iterations,
        record.objective,
        record.fidelity,
    )
    return record


def run_vqe(
    objective: ObjectiveKind | Hamiltonian,
    spec: AnsatzSpec,
    cfg: OptimizerConfig,
    oracle: Spectrum | None = None,
    hamiltonian: Hamiltonian | None = None,
    initial_parameters: Sequence[npt.ArrayLike] = (),
) -> VqeResult:
    """
    Runs cfg.restarts independent BFGS minimizations from random angles seeded base_seed + r, plus one
    extra run per supplied starting vector. A failed restart is recorded and the others carry on.

    With an oracle spectrum the fidelity is measured against its ground space and delta is reported.
    `hamiltonian` supplies energies when the objective itself is a fidelity.
    """
    started = time.perf_counter()
    kind = EnergyObjective(objective) if isinstance(objective, Hamiltonian) else objective
    _check_width(kind, spec)
    if isinstance(kind, EnergyObjective):
        hamiltonian = kind.hamiltonian

    basis: list[StateVector] | None = None
    if oracle is not None:
        basis = ground_space_projector(oracle)
    elif isinstance(kind, FidelityObjective):
        basis = list(kind.targets)

    starts: list[tuple[int | None, FloatArray]] = [
        (cfg.base_seed + r, random_parameters(spec, cfg.base_seed + r)) for r in range(cfg.restarts)
    ]
    starts += [(None, check_parameters(spec, theta)) for theta in initial_parameters]

    def run(index: int) -> RestartRecord:
        seed, theta0 = starts[index]
        return _run_restart(index, seed, theta0, kind, spec, cfg, hamiltonian, basis)

    threads = min(worker_threads(), len(starts))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run, range(len(starts))))
    else:
        records = [run(index) for index in range(len(starts))]

    succeeded = [r for r in records if r.succeeded]
    if not succeeded:
        raise AllRestartsFailed("; ".join(f"restart {r.restart}: {r.message}" for r in records))

    energies = [r.energy for r in succeeded if r.energy is not None]
    fidelities = [r.fidelity for r in succeeded if r.fidelity is not None]
    if oracle is not None:
        for energy in energies:
            if energy < oracle.e0 - VARIATIONAL_SLACK:
                raise VariationalBoundViolated(f"energy {energy!r} lies below E0={oracle.e0!r}")

    best = min(succeeded, key=lambda r: r.objective if r.objective is not None else math.inf)
    # the energy of the best-objective state, so it matches best_parameters and fidelity in both modes
    best_energy = best.energy

    delta = None
    if oracle is not None and best_energy is not None:
        try:
            delta = delta_metric(best_energy, oracle)
        except UndefinedDelta:
            logging.warning("delta is undefined: the oracle spectrum has a single level")

    mean_energy, std_energy = _mean_std(energies)
    mean_fidelity, std_fidelity = _mean_std(fidelities)
    result = VqeResult(
        n_qubits=spec.n_qubits,
        n_layers=spec.n_layers,
        objective_kind="energy" if isinstance(kind, EnergyObjective) else "negative_fidelity",
        best_restart=best.restart,
        best_objective=best.objective if best.objective is not None else math.nan,
        best_energy=best_energy,
        best_parameters=best.parameters,
        mean_energy=mean_energy,
        std_energy=std_energy,
        mean_fidelity=mean_fidelity,
        std_fidelity=std_fidelity,
        fidelity=best.fidelity,
        delta=delta,
        per_restart=records,
        wall_time=time.perf_counter() - started,
    )
    logging.info(
        "VQE with %d layers: best energy %s, fidelity %s, delta %s (%.1fs)",
        spec.n_layers,
        result.best_energy,
        result.fidelity,
        result.delta,
        result.wall_time,
    )
    return result


class SweepEntry(NamedTuple):
    n_layers: int
    result: VqeResult | None
    error: str | None


def layer_sweep(
    objective: ObjectiveKind | Hamiltonian,
    n_qubits: int,
    layers: Sequence[int],
    cfg: OptimizerConfig,
    oracle: Spectrum | None = None,
    topology: Topology = "ring",
    hamiltonian: Hamiltonian | None = None,
    warm_start: bool = False,
) -> list[SweepEntry]:
    """
    Runs run_vqe for each layer count. With warm_start each depth gets one extra start: the best
    parameters of the previous successful depth, zero-padded. A failing depth is recorded and skipped.
    """
    entries: list[SweepEntry] = []
    previous: tuple[AnsatzSpec, list[float]] | None = None
    for n_layers in layers:
        spec = AnsatzSpec(n_qubits=n_qubits, n_layers=n_layers, entangler_topology=topology)
        extra = []
        if warm_start and previous is not None:
            extra.append(pad_parameters(previous[1], previous[0], spec))
        try:
            result = run_vqe(objective, spec, cfg, oracle, hamiltonian=hamiltonian, initial_parameters=extra)
        except (ArithmeticError, ValueError) as e:
            logging.exception("VQE with %d layers failed", n_layers)
            entries.append(SweepEntry(n_layers, None, f"{type(e).__name__}: {e}"))
            continue
        entries.append(SweepEntry(n_layers, result, None))
        previous = (spec, result.best_parameters)
    return entries
