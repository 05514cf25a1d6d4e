import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pha_vqe import HamiltonianParseError, PartialSpec, QubitHamiltonian, load_hamiltonian, make_partial, save_hamiltonian
from pha_vqe.hamiltonian import bundled_path, parse_text, term_count_report, write_term_counts
from pha_vqe.pauli import qubitwise_commutes

# the reference H2 Hamiltonian as commonly printed (coefficient, string)
PRINTED_H2 = [
    (-0.81054, "IIII"), (0.17218, "IIIZ"), (-0.22575, "IIZZ"), (0.17218, "IZZI"),
    (-0.22575, "ZZII"), (0.12091, "IIZI"), (0.16892, "IZZZ"), (0.04523, "ZXIX"),
    (-0.04523, "IXZX"), (-0.04523, "ZXZX"), (0.04523, "IXIX"), (0.16614, "ZZIZ"),
    (0.16614, "IZIZ"), (0.17464, "ZZZZ"), (0.12091, "ZIZI"),
]  # fmt: skip
X_TERMS = {"ZXIX", "IXZX", "ZXZX", "IXIX"}


def test_bundled_fixture_matches_table(h2):
    assert h2.n_qubits == 4 and len(h2) == 15
    assert h2.identity_offset == -0.81054
    assert dict(zip(h2.labels, h2.coefficients)) == {s: c for c, s in PRINTED_H2}
    assert h2.label == "H2"


def test_identity_term_always_present():
    h = QubitHamiltonian.from_labels([("XZ", 0.5)])
    assert h.labels[0] == "II" and h.identity_offset == 0.0


def test_complex_coefficient_rejected():
    from pha_vqe import PauliSum

    with pytest.raises(ValueError):
        QubitHamiltonian.from_sum(PauliSum.from_list([("X", 1 + 1e-6j)]))


class TestIO:
    def test_round_trip_exact(self, h2, tmp_path):
        save_hamiltonian(h2, tmp_path / "h.json")
        again = load_hamiltonian(tmp_path / "h.json")
        assert again.labels == h2.labels and again.coefficients == h2.coefficients
        assert again.source["molecule"] == "H2"

    @given(st.lists(st.floats(-10, 10, allow_nan=False).filter(lambda x: x != 0), min_size=1, max_size=8))
    def test_round_trip_bit_exact(self, coeffs):
        import tempfile
        from pathlib import Path

        labels = [format(i, "03b").replace("0", "I").replace("1", "Z") for i in range(len(coeffs))]
        h = QubitHamiltonian.from_labels(zip(labels, coeffs))
        with tempfile.TemporaryDirectory() as d:
            save_hamiltonian(h, Path(d) / "h.json")
            assert load_hamiltonian(Path(d) / "h.json").coefficients == h.coefficients

    def test_text_form(self, tmp_path):
        text = "\n".join(f"{c:+.5f} {s}" for c, s in PRINTED_H2).replace("-0.04523 IXZX", "- 0.04523 IXZX")
        path = tmp_path / "h2.txt"
        path.write_text("# H2, hartree\n" + text + "\n")
        h = load_hamiltonian(path)
        assert dict(zip(h.labels, h.coefficients)) == {s: c for c, s in PRINTED_H2}

    def test_provenance(self, h2):
        assert len(h2.source["sha256"]) == 64 and h2.source["file"] == "h2_table1.json"

    def test_empty_term_list(self, tmp_path):
        path = tmp_path / "e.json"
        path.write_text(json.dumps({"n_qubits": 2, "terms": []}))
        with pytest.raises(HamiltonianParseError, match="empty"):
            load_hamiltonian(path)

    def test_bad_character_named_with_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n "n_qubits": 4,\n "terms": [\n  {"pauli": "IIII", "coeff": 1.0},\n  {"pauli": "IXQX", "coeff": 0.5}\n ]\n}\n')
        with pytest.raises(HamiltonianParseError, match="'Q'") as info:
            load_hamiltonian(path)
        assert info.value.line == 5
        assert "line 5" in str(info.value)

    @pytest.mark.parametrize(
        "payload, match",
        [
            ({"n_qubits": 2, "terms": [{"pauli": "XXX", "coeff": 1}]}, "expected 2"),
            ({"n_qubits": 0, "terms": [{"pauli": "X", "coeff": 1}]}, "n_qubits"),
            ({"n_qubits": 1, "terms": [{"pauli": "X", "coeff": "abc"}]}, "not a number"),
            ({"n_qubits": 1, "terms": [{"pauli": "X", "coeff": float("inf")}]}, "non-finite"),
            ({"terms": [{"pauli": "X", "coeff": 1}]}, "n_qubits"),
            ([1, 2], "expected an object"),
        ],
    )
    def test_json_errors(self, tmp_path, payload, match):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(HamiltonianParseError, match=match):
            load_hamiltonian(path)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n "n_qubits": 1,\n "terms": [\n}')
        with pytest.raises(HamiltonianParseError) as info:
            load_hamiltonian(path)
        assert info.value.line == 4

    def test_text_errors(self):
        with pytest.raises(HamiltonianParseError, match="line 2"):
            parse_text("0.5 XZ\n0.5 X Z Z\n")
        with pytest.raises(HamiltonianParseError, match="line 2"):
            parse_text("0.5 XZ\n0.5 XQ\n")


class TestPartial:
    def test_k0_drops_x_terms(self, h2):
        hp = make_partial(h2)
        assert len(hp) == 11
        assert set(h2.labels) - set(hp.labels) == X_TERMS
        assert hp.identity_offset == h2.identity_offset

    def test_k1_adds_smallest_label_of_tie(self, h2):
        hp = make_partial(h2, 1)
        assert len(hp) == 12
        added = set(hp.labels) - set(make_partial(h2).labels)
        assert added == {min(X_TERMS)} == {"IXIX"}
        assert abs(hp.sum.coefficient("IXIX")) == 0.04523

    def test_sweep_to_full(self, h2):
        assert set(make_partial(h2, PartialSpec(4)).labels) == set(h2.labels)
        with pytest.raises(IndexError):
            make_partial(h2, 5)

    def test_fixed_point_for_diagonal_input(self, h2):
        hp = make_partial(h2)
        again = make_partial(hp)
        assert again.labels == hp.labels and again.coefficients == hp.coefficients

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            PartialSpec(-1)
        with pytest.raises(ValueError):
            PartialSpec(0, "largest-only")

    @given(st.integers(1, 4).flatmap(lambda n: st.lists(st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.floats(-1, 1).filter(lambda x: abs(x) > 1e-6)), min_size=1, max_size=10)))
    def test_properties(self, pairs):
        h = QubitHamiltonian.from_labels(pairs)
        hp = make_partial(h)
        full = dict(zip(h.labels, h.coefficients))
        assert all(full[lab] == c for lab, c in zip(hp.labels, hp.coefficients))
        assert len(hp) <= len(h)
        assert (len(hp) == len(h)) == h.is_diagonal()
        assert make_partial(hp).labels == hp.labels
        strings = [t.string for t in hp.terms]
        assert all(qubitwise_commutes(a, b) for a in strings for b in strings)


class TestTermCounts:
    def test_h2(self, h2):
        rows = term_count_report({"H2": h2})
        assert rows == [("H2", 15, 11)]
        assert write_term_counts(rows) == "molecule,full_terms,partial_terms\nH2,15,11\n"

    def test_from_paths(self):
        assert term_count_report([bundled_path()]) == [("h2_table1", 15, 11)]

    def test_empty(self):
        assert term_count_report({}) == []
        assert write_term_counts([]) == "molecule,full_terms,partial_terms\n"
