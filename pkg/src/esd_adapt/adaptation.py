"""Local filters, filtered channel pipelines and closed-form reference results.

A pipeline starts from a (noisy) Bell state and applies, independently on each
qubit, an ordered list of stages: Kraus channels, local filters, unitaries, or
named filter *slots* that an optimiser fills in later.  Operations on
different qubits commute, so only the order within one qubit matters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from . import channels as ch
from .errors import DomainError, ZeroSuccess
from .linalg import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, dagger, trace
from .entanglement import EntanglementReport, concurrence_matrix, is_entangled
from .states import (
    BellKind,
    Side,
    TwoQubitState,
    bell,
    check_probability,
    conjugate,
    embed,
    werner,
)

ZERO_SUCCESS = 1e-12

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


# ---------------------------------------------------------------------------
# filters


def rz(angle):
    angle = np.asarray(angle, dtype=float)
    out = np.zeros(angle.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * angle)
    out[..., 1, 1] = np.exp(0.5j * angle)
    return out


def ry(angle):
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    out = np.zeros(angle.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def euler_unitary(angles) -> np.ndarray:
    """``Rz(a) Ry(b) Rz(d)`` for angles ``(a, b, d)``; shape ``(..., 3)`` is batched."""
    angles = np.asarray(angles, dtype=float)
    return rz(angles[..., 0]) @ ry(angles[..., 1]) @ rz(angles[..., 2])


def filter_matrix(r, u_angles, v_angles) -> np.ndarray:
    """``U(u) diag(1, sqrt(r)) V(v)``, vectorised over leading axes."""
    r = np.asarray(r, dtype=float)
    core = np.zeros(r.shape + (2, 2), dtype=complex)
    core[..., 0, 0] = 1.0
    core[..., 1, 1] = np.sqrt(r)
    return euler_unitary(u_angles) @ core @ euler_unitary(v_angles)


@dataclass(frozen=True)
class LocalFilter:
    """Single-qubit filter in canonical form ``U · diag(1, √r) · V``.

    ``r = 1`` gives a pure unitary; ``r = 1`` with all angles zero is the
    identity.
    """

    r: float = 1.0
    u_angles: tuple = (0.0, 0.0, 0.0)
    v_angles: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        r = float(self.r)
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"filter strength r must lie in [0, 1], got {r}")
        u = tuple(float(a) for a in self.u_angles)
        v = tuple(float(a) for a in self.v_angles)
        if len(u) != 3 or len(v) != 3:
            raise DomainError("filter angles come in triples")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u_angles", u)
        object.__setattr__(self, "v_angles", v)

    @classmethod
    def diagonal(cls, r: float) -> "LocalFilter":
        return cls(r)

    @property
    def matrix(self) -> np.ndarray:
        return filter_matrix(self.r, self.u_angles, self.v_angles)

    def to_dict(self) -> dict:
        return {"r": self.r, "u_angles": list(self.u_angles), "v_angles": list(self.v_angles)}

    @classmethod
    def from_dict(cls, data: dict) -> "LocalFilter":
        unknown = set(data) - {"r", "u_angles", "v_angles", "type"}
        if unknown:
            raise DomainError(f"unknown filter keys: {sorted(unknown)}")
        return cls(data.get("r", 1.0), tuple(data.get("u_angles", (0, 0, 0))),
                   tuple(data.get("v_angles", (0, 0, 0))))


def filter_norm(f: np.ndarray) -> float:
    """Largest eigenvalue of ``F†F``; a physical filter has this ``<= 1``."""
    return float(np.linalg.eigvalsh(dagger(f) @ f)[-1])


@dataclass(frozen=True)
class FilterOutcome:
    state: TwoQubitState
    success_rate: float


def apply_filter(state: TwoQubitState, f: LocalFilter | np.ndarray, side: Side | str) -> FilterOutcome:
    """Apply a filter on one qubit and renormalise.

    Raises :class:`ZeroSuccess` when the trace of the filtered operator falls
    below ``1e-12``.
    """
    m = f.matrix if isinstance(f, LocalFilter) else np.asarray(f, dtype=complex)
    out = conjugate(embed(m, side), state.rho)
    s = float(np.trace(out).real)
    if s < ZERO_SUCCESS:
        raise ZeroSuccess(f"filter success rate {s:.3e} is numerically zero")
    return FilterOutcome(TwoQubitState(out / s), s)


# ---------------------------------------------------------------------------
# pipelines

GATES = {"I": I2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z,
         "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)}


@dataclass(frozen=True)
class ChannelStage:
    channel: ch.KrausChannel


@dataclass(frozen=True, eq=False)
class FilterStage:
    """A filter given in canonical form or as an explicit matrix with ``F†F <= I``."""

    filter: LocalFilter | np.ndarray

    def __post_init__(self):
        if not isinstance(self.filter, LocalFilter):
            m = np.array(self.filter, dtype=complex).reshape(2, 2)
            if filter_norm(m) > 1 + 1e-12:
                raise DomainError("filter matrix violates F†F <= I")
            object.__setattr__(self, "filter", m)

    @property
    def matrix(self) -> np.ndarray:
        return self.filter.matrix if isinstance(self.filter, LocalFilter) else self.filter


@dataclass(frozen=True, eq=False)
class UnitaryStage:
    matrix: np.ndarray
    label: str = "U"


@dataclass(frozen=True)
class FilterSlot:
    name: str = "F"


Stage = Union[ChannelStage, FilterStage, UnitaryStage, FilterSlot]


class Configuration(str, Enum):
    ASYMMETRIC = "asymmetric"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class PipelineSpec:
    """Declarative description of a filtered channel sequence.

    ``input_p`` mixes the input Bell state with white noise (``1`` = pure),
    which stands in for a depolarising preparation stage.
    """

    configuration: Configuration
    stages_a: tuple = ()
    stages_b: tuple = ()
    input_kind: BellKind = BellKind.PSI_MINUS
    input_p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "configuration", Configuration(self.configuration))
        object.__setattr__(self, "input_kind", BellKind.parse(self.input_kind))
        object.__setattr__(self, "stages_a", tuple(self.stages_a))
        object.__setattr__(self, "stages_b", tuple(self.stages_b))
        check_probability("input_p", self.input_p)
        if self.configuration is Configuration.ASYMMETRIC:
            if any(isinstance(s, ChannelStage) for s in self.stages_a):
                raise DomainError("asymmetric pipelines carry noise on qubit B only")
        else:
            kinds_a = [type(s) for s in self.stages_a]
            kinds_b = [type(s) for s in self.stages_b]
            if kinds_a != kinds_b:
                raise DomainError("symmetric pipelines need mirrored stage lists on A and B")

    @property
    def slots(self) -> list:
        names = []
        for s in self.stages_a + self.stages_b:
            if isinstance(s, FilterSlot) and s.name not in names:
                names.append(s.name)
        return names

    def input_state(self) -> TwoQubitState:
        if self.input_p == 1.0:
            return bell(self.input_kind)
        return werner(self.input_kind, self.input_p)

    def to_dict(self) -> dict:
        return {
            "configuration": self.configuration.value,
            "input": {"kind": self.input_kind.value, "p": self.input_p},
            "stages": {"A": [stage_to_dict(s) for s in self.stages_a],
                       "B": [stage_to_dict(s) for s in self.stages_b]},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineSpec":
        unknown = set(data) - {"configuration", "input", "stages"}
        if unknown:
            raise DomainError(f"unknown pipeline keys: {sorted(unknown)}")
        inp = data.get("input", {})
        stages = data.get("stages", {})
        return cls(
            Configuration(data["configuration"]),
            tuple(stage_from_dict(s) for s in stages.get("A", [])),
            tuple(stage_from_dict(s) for s in stages.get("B", [])),
            BellKind.parse(inp.get("kind", "PsiMinus")),
            float(inp.get("p", 1.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PipelineSpec":
        return cls.from_dict(json.loads(text))


def stage_to_dict(stage: Stage) -> dict:
    if isinstance(stage, ChannelStage):
        return {"type": "channel", "channel": stage.channel.to_dict()}
    if isinstance(stage, FilterStage):
        if isinstance(stage.filter, LocalFilter):
            return {"type": "filter", **stage.filter.to_dict()}
        return {"type": "filter", "matrix": [[float(z.real), float(z.imag)] for z in stage.filter.ravel()]}
    if isinstance(stage, UnitaryStage):
        flat = [[float(z.real), float(z.imag)] for z in stage.matrix.ravel()]
        return {"type": "unitary", "label": stage.label, "matrix": flat}
    return {"type": "slot", "name": stage.name}


def stage_from_dict(data: dict) -> Stage:
    kind = data.get("type")
    if kind == "channel":
        # either nested under "channel" or a family descriptor given inline
        body = data["channel"] if "channel" in data else {k: v for k, v in data.items() if k != "type"}
        return ChannelStage(ch.channel_from_dict(body))
    if kind == "filter":
        if "matrix" in data:
            return FilterStage(np.array([complex(re, im) for re, im in data["matrix"]]).reshape(2, 2))
        return FilterStage(LocalFilter.from_dict(data))
    if kind == "unitary":
        if "gate" in data:
            return UnitaryStage(GATES[data["gate"]], data["gate"])
        if "angles" in data:
            return UnitaryStage(euler_unitary(data["angles"]), "euler")
        m = np.array([complex(re, im) for re, im in data["matrix"]]).reshape(2, 2)
        if np.max(np.abs(dagger(m) @ m - I2)) > 1e-10:
            raise DomainError("unitary stage matrix is not unitary")
        return UnitaryStage(m, data.get("label", "U"))
    if kind == "slot":
        return FilterSlot(data.get("name", "F"))
    raise DomainError(f"unknown stage type {kind!r}")


def _stage_operator(stage, slot_values: dict):
    if isinstance(stage, FilterStage):
        return stage.matrix
    if isinstance(stage, UnitaryStage):
        return stage.matrix
    try:
        return slot_values[stage.name]
    except KeyError:
        raise DomainError(f"filter slot {stage.name!r} has no value") from None


def evolve(spec: PipelineSpec, slot_values: dict | None = None, normalise_each: bool = True):
    """Run the pipeline on raw arrays.

    ``slot_values`` maps slot names to 2x2 matrices or stacks ``(n, 2, 2)``;
    stacks evaluate ``n`` pipelines at once.  Returns ``(rho, S)`` where
    ``rho`` is the normalised output and ``S`` the cumulative success rate,
    computed as the product of the per-filter traces.  Entries of ``S`` below
    ``1e-12`` mark annihilated outcomes; the matching ``rho`` is left
    unnormalised.
    """
    slot_values = slot_values or {}
    batch = ()
    for v in slot_values.values():
        v = np.asarray(v)
        if v.ndim == 3:
            batch = (v.shape[0],)
    rho = np.broadcast_to(spec.input_state().rho, batch + (4, 4)).astype(complex)
    s_total = np.ones(batch)
    for side, stages in ((Side.A, spec.stages_a), (Side.B, spec.stages_b)):
        for stage in stages:
            if isinstance(stage, ChannelStage):
                rho = ch.apply_matrix(stage.channel, rho, side)
                continue
            op = _stage_operator(stage, slot_values)
            rho = conjugate(embed(op, side), rho)
            if normalise_each:
                s = trace(rho).real
                safe = np.where(s < ZERO_SUCCESS, 1.0, s)
                rho = rho / np.asarray(safe)[..., None, None]
                s_total = s_total * s
    if not normalise_each:
        s_total = trace(rho).real
        safe = np.where(s_total < ZERO_SUCCESS, 1.0, s_total)
        rho = rho / np.asarray(safe)[..., None, None]
    return rho, s_total


def run_pipeline(spec: PipelineSpec, slot_values: dict | None = None,
                 tol: float = 1e-10) -> tuple[FilterOutcome, EntanglementReport]:
    """Execute a pipeline and analyse the output state.

    ``slot_values`` may hold :class:`LocalFilter` objects or 2x2 matrices.

    Raises :class:`ZeroSuccess` if the cumulative success rate is below 1e-12.
    """
    values = {k: (v.matrix if isinstance(v, LocalFilter) else v) for k, v in (slot_values or {}).items()}
    rho, s = evolve(spec, values)
    s = float(s)
    if s < ZERO_SUCCESS:
        raise ZeroSuccess(f"pipeline success rate {s:.3e} is numerically zero")
    state = TwoQubitState(rho)
    return FilterOutcome(state, s), is_entangled(state, tol)


# ---------------------------------------------------------------------------
# the two noise scenarios


def loss_spec(p1: float, p2: float, adapter: LocalFilter | np.ndarray | None = None,
              after_a: tuple = (), after_b: tuple = ()) -> PipelineSpec:
    """Qubit B of a singlet passes two lossy channels that refill with ``|0>`` then ``|1>``.

    ``adapter`` sits between the two channels; ``after_a``/``after_b`` are
    extra stages applied once the composite channel is done.
    """
    stages_b = [ChannelStage(ch.replace_channel(p1, KET0))]
    if adapter is not None:
        if isinstance(adapter, LocalFilter):
            stages_b.append(FilterStage(adapter))
        else:
            stages_b.append(UnitaryStage(np.asarray(adapter, dtype=complex), "adapter"))
    stages_b.append(ChannelStage(ch.replace_channel(p2, KET1)))
    return PipelineSpec(Configuration.ASYMMETRIC, tuple(after_a), tuple(stages_b) + tuple(after_b),
                        BellKind.PSI_MINUS)


def damping_spec(p: float, gamma: float, kind: BellKind | str = BellKind.PHI_MINUS,
                 filt: LocalFilter | str | None = "F") -> PipelineSpec:
    """Werner input, then the same filter on each qubit, then amplitude damping on each.

    ``filt`` may be a concrete filter, a slot name (default ``"F"``, shared by
    both qubits), or ``None`` for no filter at all.
    """
    damp = ChannelStage(ch.amplitude_damping(gamma))
    if filt is None:
        stages = (damp,)
    elif isinstance(filt, str):
        stages = (FilterSlot(filt), damp)
    else:
        stages = (FilterStage(filt), damp)
    return PipelineSpec(Configuration.SYMMETRIC, stages, stages, BellKind.parse(kind), p)


def loss_pipeline_state(p1: float, p2: float) -> TwoQubitState:
    """Closed form of the singlet after the two refilling loss channels on qubit B."""
    p1 = check_probability("p1", p1)
    p2 = check_probability("p2", p2)
    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    rho = (p1 * p2 * bell(BellKind.PSI_MINUS).rho
           + p2 * (1 - p1) / 2 * np.kron(I2, zero)
           + (1 - p2) / 2 * np.kron(I2, one))
    return TwoQubitState(rho)


def swapped_loss_state(p1: float, p2: float) -> TwoQubitState:
    """Closed form of the same pipeline with a bit flip inserted between the channels."""
    p1 = check_probability("p1", p1)
    p2 = check_probability("p2", p2)
    one = np.diag([0.0, 1.0])
    q = p1 * p2
    return TwoQubitState(q * bell(BellKind.PHI_MINUS).rho + (1 - q) / 2 * np.kron(I2, one))


def loss_concurrence(p1: float, p2: float) -> float:
    """Unclipped closed-form concurrence ``p1 p2 - sqrt((1-p1)(1-p2) p2)``."""
    return p1 * p2 - np.sqrt((1 - p1) * (1 - p2) * p2)


def loss_separability_threshold(p1: float) -> float:
    """Value of ``p2`` above which the unadapted loss pipeline stays entangled."""
    return (1 - p1) / (1 - p1 + p1 * p1)


def filter_bound(p: float, gamma: float) -> float:
    """Filter-strength bound ``(2 sqrt(p(1+p)) - (1+p)) / (gamma (1-p))``.

    Positive exactly when ``p > 1/3``.  For the ``PsiMinus`` Werner input and
    the filter ``diag(1, sqrt(r))`` on both qubits, the damped output is
    entangled if and only if ``r`` is below this value.
    """
    p = float(p)
    gamma = float(gamma)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    return (2 * np.sqrt(p * (1 + p)) - (1 + p)) / (gamma * (1 - p))


def filtered_werner_success(p: float, r: float, kind: BellKind | str = BellKind.PHI_MINUS) -> float:
    """Success rate of ``diag(1, sqrt(r))`` on both qubits of a Werner state."""
    sign = 1.0 if BellKind.parse(kind) is BellKind.PHI_MINUS else -1.0
    return ((1 + r) ** 2 + sign * p * (1 - r) ** 2) / 4


def limit_filters(p1: float, p2: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Local diagonal filters realising ``|11> -> sqrt(p1 p2)|11>``, ``|01> -> eps|01>``.

    The product ``F_A ⊗ F_B`` is proportional to
    ``diag(1, eps, sqrt(p1 p2)/eps, sqrt(p1 p2))``; the ``|10>`` entry is
    irrelevant because that component is empty after the swapped pipeline.
    """
    q = np.sqrt(p1 * p2)
    fa = np.diag([1.0, q / eps]).astype(complex)
    fa /= max(1.0, q / eps)
    fb = np.diag([1.0, eps]).astype(complex)
    return fa, fb


def post_channel_filter_limit(p1: float, p2: float, eps: float) -> tuple[float, float]:
    """Concurrence after the bit-flip-adapted loss pipeline plus the limiting filters.

    Returns ``(concurrence, success_rate)``.  The concurrence tends to
    ``sqrt(p1 p2)`` as ``eps -> 0`` while the success rate vanishes like
    ``eps**2``.
    """
    p1 = check_probability("p1", p1)
    p2 = check_probability("p2", p2)
    if p1 * p2 <= 0:
        raise DomainError("need p1 * p2 > 0")
    if not 0 < eps <= 0.1:
        raise DomainError(f"eps must lie in (0, 0.1], got {eps}")
    fa, fb = limit_filters(p1, p2, eps)
    spec = loss_spec(p1, p2, SIGMA_X, after_a=(FilterStage(fa),), after_b=(FilterStage(fb),))
    rho, s = evolve(spec)
    s = float(s)
    if s < ZERO_SUCCESS:
        raise ZeroSuccess(f"limit filter success rate {s:.3e} is numerically zero")
    return concurrence_matrix(rho), s
