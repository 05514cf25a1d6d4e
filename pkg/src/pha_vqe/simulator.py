"""Dense statevector simulation, exact and shot-sampled energies, Pauli-trajectory noise.

Amplitude index ``b`` is little-endian: bit ``q`` of ``b`` is the state of
qubit ``q``. Arrays of shape ``(batch, 2**n)`` are simulated together, which
is how parameter-shift gradients and noise trajectories are evaluated.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ansatz import Circuit, Gate, basis_rotation_circuit
from .hamiltonian import QubitHamiltonian
from .pauli import PauliString, group_terms

__all__ = [
    "Statevector",
    "NoiseModel",
    "NOISE_PRESETS",
    "MeasurementPlan",
    "run_circuit",
    "run_circuit_batch",
    "apply_pauli",
    "pauli_expectation",
    "expectation_exact",
    "expectation_exact_batch",
    "expectation_sampled",
    "apply_noise_trajectory",
]

NORM_TOL = 1e-10
CHECK_NORM = bool(os.environ.get("PHA_VQE_DEBUG"))

_SQRT_HALF = 1 / np.sqrt(2)
_PAULI_NAMES = ("I", "X", "Y", "Z")


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}")
        if abs(np.vdot(amps, amps).real - 1) > NORM_TOL:
            raise ValueError("statevector is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> Statevector:
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, label: str) -> Statevector:
        """Computational basis state from a bit label, leftmost bit = top qubit."""
        n = len(label)
        amps = np.zeros(2**n, dtype=complex)
        amps[int(label, 2)] = 1
        return cls(n, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing after 1- and 2-qubit gates plus independent readout bit flips."""

    p1: float = 0.0
    p2: float = 0.0
    p_readout: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @classmethod
    def preset(cls, name: str) -> NoiseModel:
        try:
            return NOISE_PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown noise preset {name!r}; choose from {sorted(NOISE_PRESETS)}") from None

    @property
    def is_trivial(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.p_readout == 0

    @property
    def has_gate_noise(self) -> bool:
        return self.p1 > 0 or self.p2 > 0


NOISE_PRESETS = {
    "ideal": NoiseModel(0.0, 0.0, 0.0),
    "noisy": NoiseModel(0.001, 0.01, 0.02),
    "realistic": NoiseModel(0.003, 0.025, 0.03),
}


@dataclass(frozen=True)
class MeasurementPlan:
    groups: tuple[tuple[int, ...], ...]
    shots_per_group: int = 8192

    def __post_init__(self):
        if self.shots_per_group < 1:
            raise ValueError("shots_per_group must be >= 1")
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))

    @classmethod
    def grouped(cls, h: QubitHamiltonian, shots_per_group: int = 8192) -> MeasurementPlan:
        return cls(tuple(tuple(g) for g in group_terms(h.sum)), shots_per_group)

    @classmethod
    def per_term(cls, h: QubitHamiltonian, shots_per_group: int = 8192) -> MeasurementPlan:
        return cls(tuple((i,) for i in range(len(h))), shots_per_group)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def measured_groups(self, h: QubitHamiltonian) -> int:
        """Groups that need a circuit, i.e. contain a non-identity string."""
        return sum(any(not h.terms[i].string.is_identity for i in g) for g in self.groups)

    def total_shots(self, h: QubitHamiltonian) -> int:
        return self.measured_groups(h) * self.shots_per_group

    def check(self, h: QubitHamiltonian) -> None:
        flat = sorted(i for g in self.groups for i in g)
        if flat != list(range(len(h))):
            raise ValueError("measurement plan does not partition the Hamiltonian terms")


# --- gate kernels ---------------------------------------------------------


def _split(states: np.ndarray, n: int, q: int):
    v = states.reshape(states.shape[0], 2 ** (n - 1 - q), 2, 2**q)
    return v[:, :, 0, :], v[:, :, 1, :]


def _one_qubit(states: np.ndarray, n: int, q: int, m) -> np.ndarray:
    """Apply 2x2 matrix ``m``; entries may be per-row arrays of shape (B,)."""
    a0, a1 = _split(states, n, q)
    m00, m01, m10, m11 = (np.asarray(e).reshape(-1, 1, 1) for e in m)
    out = np.empty_like(states)
    o0, o1 = _split(out, n, q)
    o0[...] = m00 * a0 + m01 * a1
    o1[...] = m10 * a0 + m11 * a1
    return out


def _flip(states: np.ndarray, n: int, q: int) -> np.ndarray:
    v = states.reshape(states.shape[0], 2 ** (n - 1 - q), 2, 2**q)
    return v[:, :, ::-1, :].reshape(states.shape).copy()


def _bit(n: int, q: int) -> np.ndarray:
    return (np.arange(2**n) >> q) & 1


def _apply_gate(states: np.ndarray, n: int, gate: Gate, theta=None) -> np.ndarray:
    k = gate.kind
    if k == "RY":
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        return _one_qubit(states, n, gate.qubits[0], (c, -s, s, c))
    if k == "RZ":
        e = np.exp(-0.5j * np.asarray(theta))
        return _one_qubit(states, n, gate.qubits[0], (e, 0, 0, np.conj(e)))
    if k == "H":
        h = _SQRT_HALF
        return _one_qubit(states, n, gate.qubits[0], (h, h, h, -h))
    if k == "Sdg":
        return _one_qubit(states, n, gate.qubits[0], (1, 0, 0, -1j))
    if k == "X":
        return _flip(states, n, gate.qubits[0])
    if k == "Y":
        z = _one_qubit(states, n, gate.qubits[0], (1, 0, 0, -1))
        return 1j * _flip(z, n, gate.qubits[0])
    if k == "Z":
        return _one_qubit(states, n, gate.qubits[0], (1, 0, 0, -1))
    if k == "CZ":
        a, b = gate.qubits
        sign = 1 - 2 * (_bit(n, a) & _bit(n, b))
        return states * sign
    if k == "CX":
        c, t = gate.qubits
        idx = np.arange(2**n)
        perm = np.where(_bit(n, c) == 1, idx ^ (1 << t), idx)
        return states[:, perm]
    raise ValueError(f"unsupported gate {k}")


def _check_norm(states: np.ndarray) -> None:
    norms = np.einsum("bi,bi->b", states.conj(), states).real
    if np.any(np.abs(norms - 1) > NORM_TOL):
        raise FloatingPointError("norm not preserved")


def _zero_states(batch: int, n: int) -> np.ndarray:
    states = np.zeros((batch, 2**n), dtype=complex)
    states[:, 0] = 1
    return states


def run_circuit_batch(circuit: Circuit, params: np.ndarray) -> np.ndarray:
    """Simulate ``circuit`` for each row of ``params``; returns ``(B, 2**n)`` amplitudes."""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if params.shape[1] != circuit.n_parameters:
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {params.shape[1]}")
    n = circuit.n_qubits
    states = _zero_states(params.shape[0], n)
    for gate in circuit.gates:
        theta = None if gate.parameter_index is None else params[:, gate.parameter_index]
        states = _apply_gate(states, n, gate, theta)
        if CHECK_NORM:
            _check_norm(states)
    return states


def run_circuit(circuit: Circuit, params: Sequence[float] = ()) -> Statevector:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.n_parameters:
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {params.size}")
    return Statevector(circuit.n_qubits, run_circuit_batch(circuit, params[None, :])[0])


# --- Pauli action and exact expectation -----------------------------------


def _parity(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v = v >> 1
    return out


def _pauli_action(string: PauliString):
    """``(perm, w)`` such that ``(P psi)[c] = w[c] * psi[perm[c]]``."""
    idx = np.arange(2**string.n_qubits)
    perm = idx ^ string.x_mask
    w = (1j**string.n_y) * (1 - 2 * _parity(perm & string.z_mask))
    return perm, w


def apply_pauli(psi: Statevector | np.ndarray, string: PauliString) -> np.ndarray:
    """``P |psi>`` on a scratch copy."""
    amps = psi.amplitudes if isinstance(psi, Statevector) else np.asarray(psi)
    perm, w = _pauli_action(string)
    return w * amps[perm]


def pauli_expectation(psi: Statevector | np.ndarray, string: PauliString) -> float:
    amps = psi.amplitudes if isinstance(psi, Statevector) else np.asarray(psi)
    return float(np.vdot(amps, apply_pauli(amps, string)).real)


class _Compiled:
    """Per-Hamiltonian tables: terms sharing an X mask are folded into one weight vector."""

    def __init__(self, h: QubitHamiltonian):
        n = h.n_qubits
        self.offset = h.identity_offset
        blocks: dict[int, np.ndarray] = {}
        for t in h.terms:
            if t.string.is_identity:
                continue
            perm, w = _pauli_action(t.string)
            blocks.setdefault(t.string.x_mask, np.zeros(2**n, dtype=complex))
            blocks[t.string.x_mask] += float(t.coefficient) * w
        idx = np.arange(2**n)
        self.blocks = [(idx ^ x, w) for x, w in blocks.items()]

    def energies(self, states: np.ndarray) -> np.ndarray:
        total = np.full(states.shape[0], self.offset, dtype=float)
        conj = states.conj()
        for perm, w in self.blocks:
            total += np.einsum("bi,bi->b", conj, w * states[:, perm]).real
        return total


def _compiled(h: QubitHamiltonian) -> _Compiled:
    c = h.__dict__.get("_compiled")
    if c is None:
        c = _Compiled(h)
        object.__setattr__(h, "_compiled", c)
    return c


def expectation_exact_batch(states: np.ndarray, h: QubitHamiltonian) -> np.ndarray:
    states = np.atleast_2d(states)
    if states.shape[1] != 2**h.n_qubits:
        raise ValueError(f"state dimension {states.shape[1]} does not match {h.n_qubits} qubits")
    return _compiled(h).energies(states)


def expectation_exact(psi: Statevector | np.ndarray, h: QubitHamiltonian) -> float:
    """``sum_j c_j <psi|P_j|psi>``; the identity term contributes ``identity_offset`` exactly."""
    amps = psi.amplitudes if isinstance(psi, Statevector) else np.asarray(psi)
    if isinstance(psi, Statevector) and psi.n_qubits != h.n_qubits:
        raise ValueError(f"state has {psi.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    return float(expectation_exact_batch(amps[None, :], h)[0])


# --- noise ---------------------------------------------------------------


def apply_noise_trajectory(circuit: Circuit, noise: NoiseModel, rng: np.random.Generator) -> Circuit:
    """One stochastic realization of the depolarizing channel as inserted Pauli gates."""
    gates: list[Gate] = []
    for gate in circuit.gates:
        gates.append(gate)
        p = noise.p1 if len(gate.qubits) == 1 else noise.p2
        if p > 0 and rng.random() < p:
            if len(gate.qubits) == 1:
                codes = [int(rng.integers(1, 4))]
            else:
                k = int(rng.integers(1, 16))
                codes = [k & 3, k >> 2]
            for q, code in zip(gate.qubits, codes):
                if code:
                    gates.append(Gate(_PAULI_NAMES[code], (q,)))
    return Circuit(circuit.n_qubits, tuple(gates), circuit.n_parameters, circuit.name)


def _apply_pauli_rows(states, n, q, codes, rows):
    """Apply Pauli ``codes[i]`` (1=X, 2=Y, 3=Z) on qubit ``q`` to ``states[rows[i]]``."""
    for code in (1, 2, 3):
        sel = rows[codes == code]
        if sel.size:
            states[sel] = _apply_gate(states[sel], n, Gate(_PAULI_NAMES[code], (q,)))


def _run_trajectories(circuit: Circuit, params: np.ndarray, noise: NoiseModel, rng, n_traj: int) -> np.ndarray:
    n = circuit.n_qubits
    states = _zero_states(n_traj, n)
    theta_row = np.asarray(params, dtype=float)
    for gate in circuit.gates:
        theta = None if gate.parameter_index is None else np.full(n_traj, theta_row[gate.parameter_index])
        states = _apply_gate(states, n, gate, theta)
        p = noise.p1 if len(gate.qubits) == 1 else noise.p2
        if p <= 0:
            continue
        rows = np.flatnonzero(rng.random(n_traj) < p)
        if rows.size == 0:
            continue
        if len(gate.qubits) == 1:
            _apply_pauli_rows(states, n, gate.qubits[0], rng.integers(1, 4, size=rows.size), rows)
        else:
            k = rng.integers(1, 16, size=rows.size)
            _apply_pauli_rows(states, n, gate.qubits[0], k & 3, rows)
            _apply_pauli_rows(states, n, gate.qubits[1], k >> 2, rows)
    return states


def _readout(probs: np.ndarray, n: int, r: float) -> np.ndarray:
    if r == 0:
        return probs
    out = probs.copy()
    for q in range(n):
        v = out.reshape(out.shape[0], 2 ** (n - 1 - q), 2, 2**q)
        p0, p1 = v[:, :, 0, :].copy(), v[:, :, 1, :].copy()
        v[:, :, 0, :] = (1 - r) * p0 + r * p1
        v[:, :, 1, :] = r * p0 + (1 - r) * p1
    return out


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def expectation_sampled(
    circuit: Circuit,
    params: Sequence[float],
    h: QubitHamiltonian,
    plan: MeasurementPlan | None = None,
    noise: NoiseModel | None = None,
    seed=None,
    n_trajectories: int = 128,
) -> tuple[float, float]:
    """Shot-based energy estimate and its standard error.

    Each group is measured after its basis rotation with
    ``plan.shots_per_group`` shots. Per shot the group contributes
    ``sum_j c_j * (+-1)``; its sample variance gives the group's error and
    the groups are independent. With gate noise, shots are spread evenly over
    ``min(shots, n_trajectories)`` sampled Pauli trajectories.
    """
    if plan is None:
        plan = MeasurementPlan.grouped(h)
    plan.check(h)
    rng = _as_rng(seed)
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.n_parameters:
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {params.size}")
    if circuit.n_qubits != h.n_qubits:
        raise ValueError("circuit and Hamiltonian qubit counts differ")
    noise = noise or NOISE_PRESETS["ideal"]
    n = h.n_qubits
    shots = plan.shots_per_group
    outcomes = np.arange(2**n)
    energy, variance = h.identity_offset, 0.0
    for group in plan.groups:
        terms = [h.terms[i] for i in group if not h.terms[i].string.is_identity]
        if not terms:
            continue
        full = circuit.compose(basis_rotation_circuit([t.string for t in terms]))
        if noise.has_gate_noise:
            n_traj = min(shots, n_trajectories)
            states = _run_trajectories(full, params, noise, rng, n_traj)
            per_traj = np.full(n_traj, shots // n_traj)
            per_traj[: shots % n_traj] += 1
        else:
            states = run_circuit_batch(full, params[None, :])
            per_traj = np.array([shots])
        probs = _readout(np.abs(states) ** 2, n, noise.p_readout)
        probs /= probs.sum(axis=1, keepdims=True)
        counts = rng.multinomial(per_traj, probs).sum(axis=0)
        e = np.zeros(2**n)
        for t in terms:
            e += float(t.coefficient) * (1 - 2 * _parity(outcomes & t.string.support))
        mean = counts @ e / shots
        var = counts @ (e - mean) ** 2 / (shots - 1) if shots > 1 else 0.0
        energy += mean
        variance += var / shots
    return float(energy), float(np.sqrt(variance))
