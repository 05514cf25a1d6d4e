"""Partial qubit Hamiltonians for variational quantum eigensolvers.

Pauli-string algebra, Jordan-Wigner mapping of second-quantized
Hamiltonians, the I/Z-only truncation, a batched statevector simulator with
shot sampling and depolarizing noise, an in-repo exact eigensolver, CG and
SPSA optimizers, and a seeded experiment harness.
"""

from .ansatz import Circuit, Gate, basis_rotation_circuit, hardware_efficient_ansatz, vqe_ansatz
from .exact import ground_energy, ground_state, jacobi_eigh, to_dense
from .fermion import FermionHamiltonian, IntegrityError, jw_transform, load_fermion_hamiltonian, number_operator
from .hamiltonian import (
    HamiltonianParseError,
    PartialSpec,
    QubitHamiltonian,
    load_h2,
    load_hamiltonian,
    make_partial,
    save_hamiltonian,
)
from .harness import BoxStats, ExperimentSpec, compute_box_stats, report, run_experiment
from .pauli import DimensionError, PauliString, PauliSum, PauliTerm, commutes, group_terms, qubitwise_commutes
from .simulator import MeasurementPlan, NoiseModel, Statevector, expectation_exact, expectation_sampled, run_circuit
from .vqe import VqeConfig, VqeError, VqeRunRecord, cross_evaluate, pha_initialized_vqe, vqe_minimize

__version__ = "0.1.0"
