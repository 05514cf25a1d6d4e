"""Qubit Hamiltonians: file I/O, the bundled H2 fixture and partial Hamiltonians."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import cmath
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .pauli import PauliString, PauliSum, PauliTerm

__all__ = [
    "HamiltonianParseError",
    "QubitHamiltonian",
    "PartialSpec",
    "load_hamiltonian",
    "save_hamiltonian",
    "parse_text",
    "make_partial",
    "term_count_report",
    "write_term_counts",
    "bundled_path",
    "load_h2",
]


class HamiltonianParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class QubitHamiltonian:
    """Real-coefficient Pauli sum with the all-identity term always present.

    ``identity_offset`` duplicates the coefficient of the identity term.
    ``source`` is free-form provenance (molecule label, file hash, transform).
    """

    sum: PauliSum
    identity_offset: float
    source: Mapping = field(default_factory=dict, compare=False)

    @classmethod
    def from_sum(cls, ps: PauliSum, source: Mapping | None = None, tol: float = 1e-12) -> QubitHamiltonian:
        if not all(cmath.isfinite(complex(t.coefficient)) for t in ps.terms):
            raise ValueError("Hamiltonian coefficients must be finite")
        worst = ps.max_imag()
        if worst > tol:
            raise ValueError(f"Hamiltonian coefficient has imaginary part {worst:.3g}")
        ident = PauliString.identity(ps.n_qubits)
        terms = [PauliTerm(t.string, float(complex(t.coefficient).real)) for t in ps.terms]
        if ident not in ps:
            terms.insert(0, PauliTerm(ident, 0.0))
        real = PauliSum(ps.n_qubits, terms, prune=0.0)
        offset = float(real.coefficient(ident))
        return cls(real, offset, dict(source or {}))

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[str, float]], source: Mapping | None = None) -> QubitHamiltonian:
        return cls.from_sum(PauliSum.from_list(list(pairs)), source)

    @property
    def n_qubits(self) -> int:
        return self.sum.n_qubits

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self.sum.terms

    @property
    def labels(self) -> list[str]:
        return self.sum.labels

    @property
    def coefficients(self) -> list[float]:
        return [float(c) for c in self.sum.coefficients]

    @property
    def label(self) -> str:
        return str(self.source.get("molecule", "unknown"))

    def __len__(self) -> int:
        return len(self.sum)

    def __add__(self, other: QubitHamiltonian) -> QubitHamiltonian:
        return QubitHamiltonian.from_sum(self.sum + other.sum, self.source)

    def is_diagonal(self) -> bool:
        return all(t.string.is_diagonal for t in self.terms)

    def to_dict(self) -> dict:
        d = self.sum.to_dict()
        if self.source:
            d["source"] = dict(self.source)
        return d


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _format_coeff(c: float) -> str:
    return format(c, ".17g")


def save_hamiltonian(h: QubitHamiltonian, path) -> None:
    """Write JSON with one term per line; coefficients use 17 significant digits."""
    lines = ["{", f'  "n_qubits": {h.n_qubits},']
    if h.source:
        lines.append(f'  "source": {json.dumps(dict(h.source), sort_keys=True)},')
    lines.append('  "terms": [')
    body = [
        f'    {{"pauli": "{t.label}", "coeff": {_format_coeff(float(t.coefficient))}}}'
        for t in h.terms
    ]
    lines.append(",\n".join(body))
    lines.append("  ]")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _line_of(text: str, needle: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _validate_terms(raw_terms, n_qubits, locate) -> list[tuple[PauliString, float]]:
    if not raw_terms:
        raise HamiltonianParseError("empty term list")
    out = []
    for i, (label, coeff) in enumerate(raw_terms):
        line = locate(i, label)
        if not isinstance(label, str) or not label:
            raise HamiltonianParseError(f"term {i}: missing Pauli string", line)
        bad = re.search(r"[^IXYZ]", label)
        if bad:
            raise HamiltonianParseError(
                f"term {i}: invalid character {bad.group()!r} in Pauli string {label!r}", line
            )
        if n_qubits is not None and len(label) != n_qubits:
            raise HamiltonianParseError(
                f"term {i}: string {label!r} has {len(label)} qubits, expected {n_qubits}", line
            )
        try:
            value = float(coeff)
        except (TypeError, ValueError):
            raise HamiltonianParseError(f"term {i}: coefficient {coeff!r} is not a number", line) from None
        if not math.isfinite(value):
            raise HamiltonianParseError(f"term {i}: non-finite coefficient {coeff!r}", line)
        out.append((PauliString.from_label(label), value))
    return out


def parse_text(text: str, source: Mapping | None = None) -> QubitHamiltonian:
    """Parse the plain-text form: ``<coeff> <string>`` per line, ``#`` comments.

    A space between the sign and the number (``- 0.04523 IXZX``) is accepted.
    """
    raw, lines = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 3 and parts[0] in "+-":
            parts = [parts[0] + parts[1], parts[2]]
        if len(parts) != 2:
            raise HamiltonianParseError(f"expected '<coeff> <pauli>', got {line!r}", lineno)
        raw.append((parts[1], parts[0]))
        lines.append(lineno)
    n = len(raw[0][0]) if raw else None
    terms = _validate_terms(raw, n, lambda i, _: lines[i])
    src = {"format": "text", **(source or {})}
    return QubitHamiltonian.from_sum(PauliSum(n, terms, prune=0.0), src)


def load_hamiltonian(path, molecule: str | None = None) -> QubitHamiltonian:
    """Load a qubit Hamiltonian from JSON (default) or the plain-text form (``.txt``)."""
    path = Path(path)
    data = path.read_bytes()
    text = data.decode("utf-8")
    source = {"file": path.name, "sha256": _sha256(data)}
    if path.suffix.lower() in (".txt", ".dat"):
        source["molecule"] = molecule or path.stem
        return parse_text(text, source)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HamiltonianParseError(exc.msg, exc.lineno) from None
    if not isinstance(payload, dict) or "terms" not in payload:
        raise HamiltonianParseError("expected an object with 'n_qubits' and 'terms'")
    n = payload.get("n_qubits")
    if not isinstance(n, int) or n < 1:
        raise HamiltonianParseError(f"invalid n_qubits {n!r}", _line_of(text, '"n_qubits"'))
    raw = []
    for t in payload["terms"]:
        if not isinstance(t, dict):
            raise HamiltonianParseError(f"term entry {t!r} is not an object")
        raw.append((t.get("pauli"), t.get("coeff")))
    locate = lambda i, label: _line_of(text, f'"{label}"') if isinstance(label, str) else None
    terms = _validate_terms(raw, n, locate)
    stored = dict(payload.get("source", {}))
    stored.update(source)
    stored.setdefault("molecule", molecule or path.stem)
    if molecule:
        stored["molecule"] = molecule
    return QubitHamiltonian.from_sum(PauliSum(n, terms, prune=0.0), stored)


def bundled_path(name: str = "h2_table1.json") -> Path:
    return Path(str(resources.files("pha_vqe") / "data" / name))


def load_h2() -> QubitHamiltonian:
    """The 15-term, 4-qubit H2 Hamiltonian shipped with the package."""
    return load_hamiltonian(bundled_path("h2_table1.json"), molecule="H2")


@dataclass(frozen=True)
class PartialSpec:
    """Keep the identity and every I/Z-only term, plus ``extra_terms`` more."""

    extra_terms: int = 0
    base_rule: str = "I/Z-only"

    def __post_init__(self):
        if self.extra_terms < 0:
            raise ValueError("extra_terms must be non-negative")
        if self.base_rule != "I/Z-only":
            raise ValueError(f"unsupported base rule {self.base_rule!r}")


def make_partial(h: QubitHamiltonian, spec: PartialSpec | int = 0) -> QubitHamiltonian:
    """Truncate ``h`` to its identity and I/Z-only strings.

    The ``spec.extra_terms`` largest-magnitude X/Y-bearing terms are added back
    (ties by label). Coefficients are untouched and the result is ordered by
    descending magnitude.
    """
    if isinstance(spec, int):
        spec = PartialSpec(spec)
    if len(h) == 0:
        raise ValueError("empty Hamiltonian")
    kept = [t for t in h.terms if t.string.is_diagonal]
    excluded = sorted(
        (t for t in h.terms if not t.string.is_diagonal),
        key=lambda t: (-abs(t.coefficient), t.label),
    )
    k = spec.extra_terms
    if k > len(excluded):
        raise IndexError(f"extra_terms={k} exceeds the {len(excluded)} excluded terms")
    chosen = PauliSum(h.n_qubits, kept + excluded[:k], prune=0.0).sorted_by_magnitude()
    source = dict(h.source)
    source["partial"] = {"rule": spec.base_rule, "extra_terms": k}
    return QubitHamiltonian(chosen, h.identity_offset, source)


def term_count_report(molecules: Mapping[str, QubitHamiltonian | str | Path] | Iterable) -> list[tuple[str, int, int]]:
    """Rows of ``(molecule, full term count, partial term count)``."""
    if not isinstance(molecules, Mapping):
        molecules = {Path(p).stem if not isinstance(p, QubitHamiltonian) else p.label: p for p in molecules}
    rows = []
    for name, h in molecules.items():
        if not isinstance(h, QubitHamiltonian):
            h = load_hamiltonian(h, molecule=name)
        rows.append((name, len(h), len(make_partial(h))))
    return rows


def write_term_counts(rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["molecule", "full_terms", "partial_terms"])
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
