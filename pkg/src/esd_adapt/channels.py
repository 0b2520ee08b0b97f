"""Single-qubit Kraus channels and their action on two-qubit states."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidChannel
from .linalg import I2, PAULIS, dagger
from .states import Side, TwoQubitState, check_probability, conjugate, embed

COMPLETENESS_TOL = 1e-10
APPLY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Ordered Kraus operators ``A_k`` acting as ``rho -> sum_k A_k rho A_k†``."""

    kraus: tuple
    label: str = "channel"

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise InvalidChannel("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (2, 2):
                raise InvalidChannel(f"Kraus operators must be 2x2, got {k.shape}")
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    def __len__(self):
        return len(self.kraus)

    def completeness_defect(self) -> float:
        total = sum(dagger(k) @ k for k in self.kraus)
        return float(np.max(np.abs(total - I2)))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kraus": [[[float(z.real), float(z.imag)] for z in k.ravel()] for k in self.kraus],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausChannel":
        ops = []
        for flat in data["kraus"]:
            if len(flat) != 4:
                raise InvalidChannel("each Kraus operator needs 4 [re, im] entries (row-major)")
            ops.append(np.array([complex(re, im) for re, im in flat]).reshape(2, 2))
        return cls(tuple(ops), str(data.get("label", "channel")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "KrausChannel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    deviation: float


def validate(ch: KrausChannel, tol: float = COMPLETENESS_TOL) -> ValidationReport:
    """Check the completeness relation ``sum_k A_k† A_k = I``."""
    dev = ch.completeness_defect()
    return ValidationReport(dev < tol, dev)


def _require_valid(ch: KrausChannel, tol: float = APPLY_TOL):
    dev = ch.completeness_defect()
    if dev > tol:
        raise InvalidChannel(f"channel {ch.label!r} violates completeness by {dev:.3e}")


def apply_matrix(ch: KrausChannel, rho: np.ndarray, side: Side | str) -> np.ndarray:
    """Apply ``ch`` to one qubit of a (possibly batched, possibly unnormalised) 4x4 matrix."""
    out = np.zeros_like(rho, dtype=complex)
    for k in ch.kraus:
        out = out + conjugate(embed(k, side), rho)
    return out


def apply(ch: KrausChannel, state: TwoQubitState, side: Side | str) -> TwoQubitState:
    _require_valid(ch)
    return TwoQubitState(apply_matrix(ch, state.rho, side))


def apply_single(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Apply ``ch`` to a single-qubit 2x2 density matrix."""
    return sum(k @ rho @ dagger(k) for k in ch.kraus)


def identity() -> KrausChannel:
    return KrausChannel((I2,), "identity")


def depolarizing(p: float) -> KrausChannel:
    """Isotropic noise: keeps the state with weight ``p``, else replaces it by ``I/2``.

    Kraus set: ``sqrt((1+3p)/4) I`` followed by ``sqrt((1-p)/4) sigma_i``.
    """
    p = check_probability("p", p)
    ops = [np.sqrt((1 + 3 * p) / 4) * I2] + [np.sqrt((1 - p) / 4) * s for s in PAULIS]
    return KrausChannel(tuple(ops), f"depolarizing(p={p:g})")


def amplitude_damping(gamma: float) -> KrausChannel:
    gamma = check_probability("gamma", gamma)
    a1 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    a2 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel((a1, a2), f"amplitude_damping(gamma={gamma:g})")


def replace_channel(p: float, replacement) -> KrausChannel:
    """Transmit the qubit with probability ``p``, otherwise swap in ``|s>``.

    Acts as ``rho -> p rho + (1-p) |s><s|``.
    """
    p = check_probability("p", p)
    s = np.asarray(replacement, dtype=complex).reshape(2)
    if abs(np.linalg.norm(s) - 1) > 1e-12:
        raise DomainError("replacement state must be normalised")
    q = np.sqrt(1 - p)
    ops = (
        np.sqrt(p) * I2,
        q * np.outer(s, [1, 0]),
        q * np.outer(s, [0, 1]),
    )
    return KrausChannel(ops, f"replace(p={p:g})")


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """Channel that applies ``first`` then ``second``; Kraus set ``{B_j A_i}``.

    No elements are dropped, so the result has ``len(first) * len(second)``
    operators.  Use :func:`prune` to discard vanishing ones.
    """
    _require_valid(first)
    _require_valid(second)
    ops = tuple(b @ a for a in first.kraus for b in second.kraus)
    return KrausChannel(ops, f"{second.label}∘{first.label}")


def prune(ch: KrausChannel, eps: float = 1e-14) -> KrausChannel:
    keep = tuple(k for k in ch.kraus if np.linalg.norm(k) >= eps)
    return KrausChannel(keep or (ch.kraus[0],), ch.label)


def random_channel(rng: np.random.Generator, n_kraus: int = 3) -> KrausChannel:
    """Random channel from a Haar-ish isometry ``C^2 -> C^{2n}``."""
    g = rng.normal(size=(2 * n_kraus, 2)) + 1j * rng.normal(size=(2 * n_kraus, 2))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[2 * i:2 * i + 2, :] for i in range(n_kraus)), "random")


def channel_from_dict(data: dict) -> KrausChannel:
    """Build a channel from a JSON descriptor.

    Accepts either a named family (``{"family": "depolarizing", "p": 0.5}``)
    or an explicit serialized Kraus list (``{"label": ..., "kraus": [...]}``).
    """
    if "kraus" in data:
        return KrausChannel.from_dict(data)
    family = data.get("family")
    if family == "depolarizing":
        return depolarizing(data["p"])
    if family == "amplitude_damping":
        return amplitude_damping(data["gamma"])
    if family == "replace":
        state = data.get("state", [[1, 0], [0, 0]])
        return replace_channel(data["p"], [complex(re, im) for re, im in state])
    if family == "identity":
        return identity()
    raise DomainError(f"unknown channel family {family!r}")
