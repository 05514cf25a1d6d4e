"""Gate-list circuits: the RY/CZ hardware-efficient ansatz and measurement rotations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliString, qubitwise_commutes

__all__ = [
    "Gate",
    "Circuit",
    "hardware_efficient_ansatz",
    "vqe_ansatz",
    "basis_rotation_circuit",
    "default_layers",
    "random_parameters",
]

ONE_QUBIT = {"RY", "RZ", "H", "Sdg", "X", "Y", "Z"}
TWO_QUBIT = {"CZ", "CX"}
PARAMETERIZED = {"RY", "RZ"}


@dataclass(frozen=True, slots=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    parameter_index: int | None = None

    def __post_init__(self):
        if self.kind in ONE_QUBIT:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.kind} acts on one qubit, got {self.qubits}")
        elif self.kind in TWO_QUBIT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.kind} needs two distinct qubits, got {self.qubits}")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind in PARAMETERIZED) != (self.parameter_index is not None):
            raise ValueError(f"{self.kind} parameter index mismatch")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.parameter_index is not None:
            d["param"] = self.parameter_index
        return d


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_parameters: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} outside {self.n_qubits} qubits")
            if g.parameter_index is not None and not 0 <= g.parameter_index < self.n_parameters:
                raise ValueError(f"gate {g} references parameter beyond {self.n_parameters}")

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def compose(self, other: Circuit) -> Circuit:
        """Append ``other``; its parameter indices are shifted past ours."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        shift = self.n_parameters
        moved = [
            g if g.parameter_index is None else Gate(g.kind, g.qubits, g.parameter_index + shift)
            for g in other.gates
        ]
        return Circuit(self.n_qubits, self.gates + tuple(moved), shift + other.n_parameters, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "n_parameters": self.n_parameters,
            "gates": [g.to_dict() for g in self.gates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> Circuit:
        gates = [Gate(g["kind"], tuple(g["qubits"]), g.get("param")) for g in d["gates"]]
        return cls(d["n_qubits"], tuple(gates), d["n_parameters"], d.get("name", ""))


def hardware_efficient_ansatz(n_qubits: int, layers: int = 2, entangler: str = "CZ") -> Circuit:
    """RY on every qubit, then ``layers`` x (entangler ladder, RY on every qubit).

    The ladder couples ``(q, q + 1)`` for ``q = 0 .. n - 2``. With ``"CZ"``
    the entanglers are diagonal, and alternating them with RY layers only
    explores a small subgroup of real rotations (a 20-dimensional Lie
    algebra at 4 qubits), which misses the H2 ground state. ``"CX"`` keeps the
    same gate and parameter counts without that restriction; ``vqe_ansatz``
    uses it.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if entangler not in TWO_QUBIT:
        raise ValueError(f"entangler must be one of {sorted(TWO_QUBIT)}")
    gates: list[Gate] = []
    p = 0
    for q in range(n_qubits):
        gates.append(Gate("RY", (q,), p))
        p += 1
    for _ in range(layers):
        for q in range(n_qubits - 1):
            gates.append(Gate(entangler, (q, q + 1)))
        for q in range(n_qubits):
            gates.append(Gate("RY", (q,), p))
            p += 1
    return Circuit(n_qubits, tuple(gates), p, f"ry-{entangler.lower()}-{n_qubits}q-{layers}l")


def vqe_ansatz(n_qubits: int, layers: int | None = None) -> Circuit:
    """Default circuit for VQE runs: RY + CX ladder, layer count by system size."""
    return hardware_efficient_ansatz(n_qubits, layers or default_layers(n_qubits), entangler="CX")


def default_layers(n_qubits: int) -> int:
    if n_qubits <= 4:
        return 2
    if n_qubits <= 8:
        return 3
    return 4


def random_parameters(circuit: Circuit, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=circuit.n_parameters)


def basis_rotation_circuit(group: Sequence[PauliString]) -> Circuit:
    """Rotate so that a Z-basis readout measures every string in ``group``.

    X components get ``H``; Y components get ``Sdg`` followed by ``H``.
    """
    if not group:
        raise ValueError("empty group")
    n = group[0].n_qubits
    for i, a in enumerate(group):
        for b in group[i + 1 :]:
            if not qubitwise_commutes(a, b):
                raise ValueError(f"{a.label} and {b.label} are not qubit-wise commuting")
    gates: list[Gate] = []
    for q in range(n):
        basis = next((s.pauli_at(q) for s in group if s.pauli_at(q) in "XY"), None)
        if basis == "X":
            gates.append(Gate("H", (q,)))
        elif basis == "Y":
            gates.append(Gate("Sdg", (q,)))
            gates.append(Gate("H", (q,)))
    return Circuit(n, tuple(gates), 0, "basis-rotation")
