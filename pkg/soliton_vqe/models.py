import math
from typing import Annotated, Literal, Self

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, model_validator

from soliton_vqe.settings import settings

Boundary = Literal["open", "periodic"]
Topology = Literal["ring", "linear"]
GradientMode = Literal["central_difference", "adjoint_analytic"]
ExperimentMode = Literal["vqe_energy", "fidelity_max", "exact_only", "soliton_only"]


class ChainParams(BaseModel):
    """
    Couplings of the spin chain. J, D and B are in energy units; the DMI vector points along z
    and the field along x.
    """

    model_config = ConfigDict(frozen=True)

    n_qubits: Annotated[int, Field(ge=2, description="Number of sites (one qubit per spin-1/2)")]
    j_exchange: Annotated[float, Field(description="Ferromagnetic exchange J", allow_inf_nan=False)] = 1.0
    dmi: Annotated[float, Field(description="Dzyaloshinskii-Moriya coupling D", allow_inf_nan=False)] = 0.0
    field: Annotated[float, Field(description="Transverse field B along x", allow_inf_nan=False)] = 0.0
    boundary: Boundary = "open"


class AnsatzSpec(BaseModel):
    """
    Layout of the layered hardware-efficient circuit: per layer an X-Z-X rotation block on every qubit
    followed by a cascade of controlled-Y rotations.
    """

    model_config = ConfigDict(frozen=True)

    n_qubits: Annotated[int, Field(ge=2)]
    n_layers: Annotated[int, Field(ge=1)]
    entangler_topology: Topology = "ring"

    @property
    def entanglers_per_layer(self) -> int:
        return self.n_qubits if self.entangler_topology == "ring" else self.n_qubits - 1

    @property
    def params_per_layer(self) -> int:
        return 3 * self.n_qubits + self.entanglers_per_layer

    @property
    def param_count(self) -> int:
        return self.n_layers * self.params_per_layer


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: Annotated[int, Field(ge=1, description="BFGS iteration cap")] = 50_000
    gradient_mode: GradientMode = "central_difference"
    finite_difference_step: Annotated[float, Field(gt=0)] = 1e-6
    convergence_grad_tol: Annotated[float, Field(gt=0, description="Stop when the gradient inf-norm drops below")] = (
        1e-6
    )
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    restarts: Annotated[int, Field(ge=1, description="Independent random starts")] = 5
    base_seed: int = 0

    @model_validator(mode="after")
    def check_wolfe_constants(self) -> Self:
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError(f"Wolfe constants must satisfy 0 < c1 < c2 < 1, got {self.wolfe_c1}, {self.wolfe_c2}")
        return self


class ContinuumParams(BaseModel):
    """Continuum-limit couplings. The pitch k0 and the field scale m follow from J, D, B and a."""

    model_config = ConfigDict(frozen=True)

    j_exchange: Annotated[float, Field(gt=0)] = 1.0
    dmi: float
    field: Annotated[float, Field(ge=0)]
    lattice_const: Annotated[float, Field(gt=0)] = 1.0

    @property
    def k0(self) -> float:
        return self.dmi / (self.lattice_const * self.j_exchange)

    @property
    def m(self) -> float:
        return math.sqrt(2 * self.field / (self.lattice_const**2 * self.j_exchange))


class ChainConfig(BaseModel):
    """
    Chain section of an experiment config. Couplings are ratios to J, which is fixed to 1 internally.
    The physical scales are carried along as metadata only.
    """

    n_qubits: Annotated[int, Field(ge=2)] = 10
    dmi: Annotated[float, Field(description="D/J", allow_inf_nan=False)] = 0.63
    field: Annotated[float, Field(description="B/J", allow_inf_nan=False)] = 3.36e-3
    boundary: Boundary = "open"
    exchange_mry: Annotated[float | None, Field(description="Physical J in mRy (metadata)")] = 1.88
    field_tesla: Annotated[float | None, Field(description="Physical B in tesla (metadata)")] = 0.74

    def to_chain_params(self) -> ChainParams:
        return ChainParams(
            n_qubits=self.n_qubits, j_exchange=1.0, dmi=self.dmi, field=self.field, boundary=self.boundary
        )

    def to_continuum_params(self) -> ContinuumParams:
        return ContinuumParams(j_exchange=1.0, dmi=self.dmi, field=self.field)


class AnsatzSweep(BaseModel):
    layers: Annotated[list[int], Field(description="Layer counts to run, ascending")] = [1]
    topology: Topology = "ring"
    warm_start: Annotated[
        bool, Field(description="Seed each depth with the zero-padded best parameters of the previous one")
    ] = False

    @model_validator(mode="before")
    @classmethod
    def accept_single_layer_count(cls, data: object) -> object:
        if isinstance(data, dict) and "n_layers" in data:
            data = dict(data)
            data.setdefault("layers", [data.pop("n_layers")])
        return data

    @model_validator(mode="after")
    def check_layers(self) -> Self:
        if not self.layers:
            raise ValueError("layer sweep must not be empty")
        if any(n < 1 for n in self.layers):
            raise ValueError("layer counts must be at least 1")
        if any(a >= b for a, b in zip(self.layers, self.layers[1:], strict=False)):
            raise ValueError(f"layer sweep must be strictly ascending, got {self.layers}")
        return self

    def spec(self, n_qubits: int, n_layers: int) -> AnsatzSpec:
        return AnsatzSpec(n_qubits=n_qubits, n_layers=n_layers, entangler_topology=self.topology)


class OutputConfig(BaseModel):
    directory: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    csv: bool = True
    json_files: Annotated[
        bool, Field(validation_alias=AliasChoices("json_files", "json"), serialization_alias="json")
    ] = True
    svg: bool = False
    states: Annotated[bool, Field(description="Also dump prepared statevectors in binary form")] = False

    @model_validator(mode="after")
    def check_svg_inputs(self) -> Self:
        if self.svg and not self.csv:
            raise ValueError("svg plots are rendered from the CSV outputs, enable csv as well")
        return self


class ExperimentConfig(BaseModel):
    """A single experiment. Parsed from one JSON document; CLI flags override individual fields."""

    chain: ChainConfig = ChainConfig()
    ansatz: AnsatzSweep = AnsatzSweep()
    optimizer: OptimizerConfig = OptimizerConfig()
    mode: ExperimentMode = "vqe_energy"
    outputs: OutputConfig = Field(default_factory=OutputConfig)
    seed: Annotated[int, Field(description="Base seed for restarts and the Lanczos start vectors")] = 0

    def effective_optimizer(self) -> OptimizerConfig:
        return self.optimizer.model_copy(update={"base_seed": self.seed})
