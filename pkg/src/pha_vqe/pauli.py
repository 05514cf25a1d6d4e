"""Pauli strings in symplectic bitmask form, weighted Pauli sums and grouping.

A string on ``n`` qubits is stored as two integers ``(x_mask, z_mask)``.
Bit ``q`` of each mask describes qubit ``q``::

    x=0, z=0 -> I     x=1, z=0 -> X
    x=0, z=1 -> Z     x=1, z=1 -> Y

Labels are written with the highest qubit on the left, so ``"IIIZ"`` is a
``Z`` on qubit 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "DimensionError",
    "PauliString",
    "PauliTerm",
    "PauliSum",
    "pauli_multiply",
    "commutes",
    "qubitwise_commutes",
    "group_terms",
]

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {bits: char for char, bits in _CHAR_TO_BITS.items()}
_PHASES = (1, 1j, -1, -1j)

DEFAULT_PRUNE = 1e-12


class DimensionError(ValueError):
    """Raised when operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full or self.x_mask < 0 or self.z_mask < 0:
            raise ValueError("mask bits beyond n_qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a label such as ``"IXZY"`` (leftmost character is the top qubit)."""
        if not label:
            raise ValueError("empty Pauli label")
        n = len(label)
        x = z = 0
        for pos, char in enumerate(label):
            try:
                xb, zb = _CHAR_TO_BITS[char]
            except KeyError:
                raise ValueError(
                    f"invalid Pauli character {char!r} at position {pos} in {label!r}"
                ) from None
            q = n - 1 - pos
            x |= xb << q
            z |= zb << q
        return cls(n, x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, pauli: str) -> PauliString:
        xb, zb = _CHAR_TO_BITS[pauli]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_TO_CHAR[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)]
            for q in reversed(range(self.n_qubits))
        )

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    def pauli_at(self, qubit: int) -> str:
        return _BITS_TO_CHAR[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    @property
    def support(self) -> int:
        """Mask of qubits carrying a non-identity Pauli."""
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return _popcount(self.support)

    @property
    def is_identity(self) -> bool:
        return self.support == 0

    @property
    def is_diagonal(self) -> bool:
        """True for strings built only from I and Z."""
        return self.x_mask == 0

    @property
    def n_y(self) -> int:
        return _popcount(self.x_mask & self.z_mask)


def _check_dims(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit count mismatch: {a.n_qubits} != {b.n_qubits}")


def pauli_multiply(a: PauliString, b: PauliString) -> tuple[PauliString, complex]:
    """Operator product ``a @ b`` as ``(string, phase)`` with phase in {1, -1, 1j, -1j}.

    Uses ``sigma(x, z) = i**(x*z) X**x Z**z`` per qubit; moving ``Z**z1`` past
    ``X**x2`` costs a sign ``(-1)**(z1*x2)``.
    """
    _check_dims(a, b)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    k = (
        _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x & z)
    )
    return PauliString(a.n_qubits, x, z), _PHASES[k % 4]


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_dims(a, b)
    return _popcount((a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)) % 2 == 0


def qubitwise_commutes(a: PauliString, b: PauliString) -> bool:
    """True when, qubit by qubit, the Paulis agree or one of them is I."""
    _check_dims(a, b)
    both = a.support & b.support
    return ((a.x_mask ^ b.x_mask) & both) == 0 and ((a.z_mask ^ b.z_mask) & both) == 0


@dataclass(frozen=True, slots=True)
class PauliTerm:
    string: PauliString
    coefficient: complex | float

    @property
    def label(self) -> str:
        return self.string.label

    def __repr__(self) -> str:
        return f"PauliTerm({self.coefficient!r}, {self.label!r})"


class PauliSum:
    """Ordered, duplicate-free weighted sum of Pauli strings.

    Duplicate strings are merged by adding coefficients (first occurrence keeps
    its position) and terms with ``|coeff| < prune`` are dropped.
    """

    __slots__ = ("_n", "_terms", "_index")

    def __init__(
        self,
        n_qubits: int,
        terms: Iterable[PauliTerm | tuple[PauliString | str, complex]] = (),
        prune: float = DEFAULT_PRUNE,
    ):
        if n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        acc: dict[PauliString, complex] = {}
        for term in terms:
            if isinstance(term, PauliTerm):
                string, coeff = term.string, term.coefficient
            else:
                string, coeff = term
                if isinstance(string, str):
                    string = PauliString.from_label(string)
            if string.n_qubits != n_qubits:
                raise DimensionError(
                    f"term {string.label} has {string.n_qubits} qubits, sum has {n_qubits}"
                )
            acc[string] = acc.get(string, 0) + coeff
        self._n = n_qubits
        self._terms = tuple(
            PauliTerm(s, _simplify(c)) for s, c in acc.items() if not abs(c) < prune  # keeps NaN visible
        )
        self._index = {t.string: i for i, t in enumerate(self._terms)}

    @classmethod
    def from_dict(cls, n_qubits: int, mapping: Mapping[str, complex], prune: float = DEFAULT_PRUNE) -> PauliSum:
        return cls(n_qubits, mapping.items(), prune=prune)

    @classmethod
    def from_list(cls, pairs: Sequence[tuple[str, complex]], prune: float = DEFAULT_PRUNE) -> PauliSum:
        if not pairs:
            raise ValueError("cannot infer n_qubits from an empty term list")
        return cls(len(pairs[0][0]), pairs, prune=prune)

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    @property
    def strings(self) -> list[PauliString]:
        return [t.string for t in self._terms]

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self._terms]

    @property
    def coefficients(self) -> list[complex | float]:
        return [t.coefficient for t in self._terms]

    def coefficient(self, string: PauliString | str) -> complex | float:
        if isinstance(string, str):
            string = PauliString.from_label(string)
        i = self._index.get(string)
        return 0.0 if i is None else self._terms[i].coefficient

    def __contains__(self, string) -> bool:
        if isinstance(string, str):
            string = PauliString.from_label(string)
        return string in self._index

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and dict(self._pairs()) == dict(other._pairs())

    def __hash__(self):
        return hash((self._n, frozenset(self._pairs())))

    def _pairs(self):
        return ((t.string, t.coefficient) for t in self._terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({t.coefficient:.6g})*{t.label}" for t in self._terms[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"PauliSum({body}{more})"

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other._n != self._n:
            raise DimensionError(f"qubit count mismatch: {self._n} != {other._n}")
        return PauliSum(self._n, self._terms + other._terms)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return self.compose(other)
        return PauliSum(self._n, ((t.string, t.coefficient * other) for t in self._terms))

    __rmul__ = __mul__

    def __matmul__(self, other: PauliSum) -> PauliSum:
        return self.compose(other)

    def compose(self, other: PauliSum, prune: float = DEFAULT_PRUNE) -> PauliSum:
        """Operator product ``self @ other``."""
        if other._n != self._n:
            raise DimensionError(f"qubit count mismatch: {self._n} != {other._n}")
        out = []
        for ta in self._terms:
            for tb in other._terms:
                s, phase = pauli_multiply(ta.string, tb.string)
                out.append((s, phase * ta.coefficient * tb.coefficient))
        return PauliSum(self._n, out, prune=prune)

    def adjoint(self) -> PauliSum:
        return PauliSum(self._n, ((t.string, complex(t.coefficient).conjugate()) for t in self._terms))

    def canonical(self, prune: float = DEFAULT_PRUNE) -> PauliSum:
        return PauliSum(self._n, self._terms, prune=prune)

    def max_imag(self) -> float:
        return max((abs(complex(t.coefficient).imag) for t in self._terms), default=0.0)

    def real(self, tol: float = 1e-12) -> PauliSum:
        """Drop imaginary parts after checking they are below ``tol``."""
        worst = self.max_imag()
        if worst > tol:
            raise ValueError(f"imaginary coefficient {worst:.3g} exceeds {tol:g}")
        return PauliSum(self._n, ((t.string, complex(t.coefficient).real) for t in self._terms))

    def sorted_by_magnitude(self) -> PauliSum:
        """Descending ``|coefficient|``, ties broken by label."""
        order = sorted(self._terms, key=lambda t: (-abs(t.coefficient), t.label))
        out = PauliSum.__new__(PauliSum)
        out._n = self._n
        out._terms = tuple(order)
        out._index = {t.string: i for i, t in enumerate(out._terms)}
        return out

    def to_dict(self) -> dict:
        return {
            "n_qubits": self._n,
            "terms": [{"pauli": t.label, "coeff": _jsonable(t.coefficient)} for t in self._terms],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, payload: str | Mapping) -> PauliSum:
        data = json.loads(payload) if isinstance(payload, str) else payload
        return cls(
            int(data["n_qubits"]),
            ((t["pauli"], _from_jsonable(t["coeff"])) for t in data["terms"]),
        )


def _simplify(c: complex) -> complex | float:
    if isinstance(c, complex) and c.imag == 0:
        return c.real
    return c


def _jsonable(c):
    if isinstance(c, complex):
        return [c.real, c.imag]
    return float(c)


def _from_jsonable(c):
    if isinstance(c, (list, tuple)):
        return complex(c[0], c[1])
    return float(c)


def group_terms(h: PauliSum | Sequence[PauliTerm]) -> list[list[int]]:
    """Partition term indices into qubit-wise commuting groups.

    Greedy sequential colouring: terms are visited by descending
    ``|coefficient|`` (stable for ties) and each joins the first group whose
    members it qubit-wise commutes with.
    """
    terms = list(h.terms if isinstance(h, PauliSum) else h)
    if not terms:
        raise ValueError("cannot group an empty sum")
    order = sorted(range(len(terms)), key=lambda i: -abs(terms[i].coefficient))
    groups: list[list[int]] = []
    for i in order:
        s = terms[i].string
        for group in groups:
            if all(qubitwise_commutes(s, terms[j].string) for j in group):
                group.append(i)
                break
        else:
            groups.append([i])
    return groups
