"""Second-quantized molecular Hamiltonians and the Jordan-Wigner mapping.

The fermionic Hamiltonian is

    H = constant + sum_pq h_pq a_p^+ a_q + 1/2 sum_pqrs h_pqrs a_p^+ a_q^+ a_s a_r

over spin orbitals. Spin orbitals interleave spins: even index alpha, odd
index beta, with spatial orbital ``p // 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from .hamiltonian import HamiltonianParseError, QubitHamiltonian, _sha256
from .pauli import PauliString, PauliSum, PauliTerm, pauli_multiply

__all__ = [
    "IntegrityError",
    "FermionHamiltonian",
    "LadderOp",
    "jw_ladder",
    "jw_transform",
    "number_operator",
    "spin_orbital_integrals",
    "load_fermion_hamiltonian",
    "save_fermion_hamiltonian",
]

HERMITICITY_TOL = 1e-10


class IntegrityError(ValueError):
    """The mapped operator is not Hermitian."""


@dataclass(frozen=True)
class LadderOp:
    orbital_index: int
    is_creation: bool


@dataclass(frozen=True)
class FermionHamiltonian:
    """Sparse integral tables in the ``a_p^+ a_q^+ a_s a_r`` (physicist) ordering."""

    n_spin_orbitals: int
    constant: float = 0.0
    one_body: Mapping[tuple[int, int], float] = field(default_factory=dict)
    two_body: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)
    source: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.n_spin_orbitals
        if n < 1:
            raise ValueError("n_spin_orbitals must be positive")
        for idx in list(self.one_body) + list(self.two_body):
            if any(not 0 <= i < n for i in idx):
                raise ValueError(f"orbital index {idx} out of range for {n} spin orbitals")

    def check_hermitian(self, tol: float = HERMITICITY_TOL) -> None:
        for (p, q), v in self.one_body.items():
            if abs(v - self.one_body.get((q, p), 0.0)) > tol:
                raise ValueError(f"one-body integrals not symmetric at ({p},{q})")


@lru_cache(maxsize=4096)
def jw_ladder(op: LadderOp, n_qubits: int) -> PauliSum:
    """Jordan-Wigner image ``1/2 (X_i -+ i Y_i) Z_{i-1} ... Z_0``."""
    i = op.orbital_index
    if not 0 <= i < n_qubits:
        raise IndexError(f"orbital {i} out of range for {n_qubits} qubits")
    chain = (1 << i) - 1
    x = PauliString(n_qubits, 1 << i, chain)
    y = PauliString(n_qubits, 1 << i, chain | (1 << i))
    sign = -1 if op.is_creation else 1
    return PauliSum(n_qubits, [(x, 0.5), (y, sign * 0.5j)])


def _create(p: int, n: int) -> PauliSum:
    return jw_ladder(LadderOp(p, True), n)


def _annihilate(p: int, n: int) -> PauliSum:
    return jw_ladder(LadderOp(p, False), n)


def _product(ops: list[PauliSum]) -> dict[PauliString, complex]:
    acc = {PauliString.identity(ops[0].n_qubits): 1.0 + 0j}
    for op in ops:
        nxt: dict[PauliString, complex] = {}
        for s, c in acc.items():
            for t in op.terms:
                prod, phase = pauli_multiply(s, t.string)
                nxt[prod] = nxt.get(prod, 0) + phase * c * t.coefficient
        acc = nxt
    return acc


def jw_transform(h: FermionHamiltonian, source: Mapping | None = None) -> QubitHamiltonian:
    """Map ``h`` to a real-coefficient qubit Hamiltonian.

    Imaginary parts must cancel to within 1e-10; otherwise ``IntegrityError``
    names the worst string.
    """
    n = h.n_spin_orbitals
    acc: dict[PauliString, complex] = {PauliString.identity(n): complex(h.constant)}

    def add(ops, value):
        for s, c in _product(ops).items():
            acc[s] = acc.get(s, 0) + value * c

    for (p, q), v in h.one_body.items():
        if v != 0:
            add([_create(p, n), _annihilate(q, n)], v)
    for (p, q, r, s), v in h.two_body.items():
        if v != 0 and p != q and r != s:
            add([_create(p, n), _create(q, n), _annihilate(s, n), _annihilate(r, n)], 0.5 * v)

    worst = max(acc, key=lambda k: abs(acc[k].imag))
    if abs(acc[worst].imag) > HERMITICITY_TOL:
        raise IntegrityError(
            f"non-Hermitian result: {worst.label} has imaginary coefficient {acc[worst].imag:.3g}"
        )
    terms = [PauliTerm(s, c.real) for s, c in acc.items()]
    ps = PauliSum(n, terms)
    src = {"transform": "jordan-wigner", **dict(h.source), **dict(source or {})}
    return QubitHamiltonian.from_sum(ps, src)


def number_operator(n_spin_orbitals: int) -> FermionHamiltonian:
    return FermionHamiltonian(n_spin_orbitals, one_body={(p, p): 1.0 for p in range(n_spin_orbitals)})


def spin_orbital_integrals(
    h1: np.ndarray, eri: np.ndarray, constant: float = 0.0, tol: float = 1e-14, source: Mapping | None = None
) -> FermionHamiltonian:
    """Expand spatial-orbital integrals into interleaved spin orbitals.

    Parameters
    ----------
    h1 : (m, m) array
        One-electron integrals over spatial orbitals.
    eri : (m, m, m, m) array
        Two-electron integrals in chemist notation ``(pq|rs)``.
    """
    h1 = np.asarray(h1, dtype=float)
    eri = np.asarray(eri, dtype=float)
    m = h1.shape[0]
    n = 2 * m
    one, two = {}, {}
    for p in range(n):
        for q in range(n):
            if p % 2 == q % 2 and abs(h1[p // 2, q // 2]) > tol:
                one[(p, q)] = float(h1[p // 2, q // 2])
    # phys h_pqrs = <pq|rs> = (pr|qs); spin must match along p-r and q-s
    for p in range(n):
        for q in range(n):
            for r in range(n):
                if p % 2 != r % 2:
                    continue
                for s in range(n):
                    if q % 2 != s % 2:
                        continue
                    v = eri[p // 2, r // 2, q // 2, s // 2]
                    if abs(v) > tol:
                        two[(p, q, r, s)] = float(v)
    return FermionHamiltonian(n, float(constant), one, two, dict(source or {}))


def _chem_to_phys(two: dict) -> dict:
    return {(p, r, q, s): v for (p, q, r, s), v in two.items()}


def load_fermion_hamiltonian(path) -> FermionHamiltonian:
    """Read integrals JSON; ``"convention": "chem"`` tables are permuted to ``phys``."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise HamiltonianParseError(exc.msg, exc.lineno) from None
    try:
        n = int(data["n_spin_orbitals"])
        convention = data.get("convention", "phys")
        one = {(int(p), int(q)): float(v) for p, q, v in data.get("one_body", [])}
        two = {(int(p), int(q), int(r), int(s)): float(v) for p, q, r, s, v in data.get("two_body", [])}
        constant = float(data.get("constant", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise HamiltonianParseError(f"malformed integral file: {exc}") from None
    if convention not in ("phys", "chem"):
        raise HamiltonianParseError(f"unknown convention {convention!r}; expected 'phys' or 'chem'")
    if not all(np.isfinite(v) for v in [constant, *one.values(), *two.values()]):
        raise HamiltonianParseError("non-finite integral value")
    if convention == "chem":
        two = _chem_to_phys(two)
    source = {"file": path.name, "sha256": _sha256(raw), "molecule": data.get("molecule", path.stem)}
    try:
        h = FermionHamiltonian(n, constant, one, two, source)
        h.check_hermitian()
    except ValueError as exc:
        raise HamiltonianParseError(str(exc)) from None
    return h


def save_fermion_hamiltonian(h: FermionHamiltonian, path, molecule: str | None = None) -> None:
    """Write the integral JSON (``phys`` convention), one table entry per line."""
    head = {
        "molecule": molecule or h.source.get("molecule", "unknown"),
        "n_spin_orbitals": h.n_spin_orbitals,
        "convention": "phys",
        "constant": h.constant,
    }
    lines = ["{"] + [f"  {json.dumps(k)}: {json.dumps(v)}," for k, v in head.items()]
    one = [json.dumps([p, q, v]) for (p, q), v in sorted(h.one_body.items())]
    two = [json.dumps([*k, v]) for k, v in sorted(h.two_body.items())]
    lines.append('  "one_body": [\n    ' + ",\n    ".join(one) + "\n  ],")
    lines.append('  "two_body": [\n    ' + ",\n    ".join(two) + "\n  ]")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
