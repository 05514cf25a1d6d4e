import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pha_vqe import (
    Circuit,
    Gate,
    QubitHamiltonian,
    VqeConfig,
    VqeError,
    VqeRunRecord,
    cross_evaluate,
    expectation_exact,
    ground_energy,
    pha_initialized_vqe,
    run_circuit,
    vqe_ansatz,
    vqe_minimize,
)
from pha_vqe.vqe import EnergyObjective, finite_difference_gradient, parameter_shift_gradient

RY1 = Circuit(1, (Gate("RY", (0,), 0),), 1)


class TestConfig:
    def test_defaults(self):
        assert VqeConfig().max_iterations == 500 and VqeConfig().convergence_tol == 1e-6
        noisy = VqeConfig.noisy()
        assert noisy.optimizer == "SPSA" and noisy.max_iterations == 1000 and noisy.convergence_tol == 1e-3
        assert noisy.spsa.alpha == 0.602 and noisy.spsa.gamma == 0.101 and noisy.spsa.c == 0.1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"optimizer": "BFGS"},
            {"gradient_method": "adjoint"},
            {"evaluation_mode": "analytic"},
            {"max_iterations": 0},
            {"convergence_tol": 0},
            {"shots": 0},
            {"noise": "noisy"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises((ValueError, KeyError)):
            VqeConfig(**kwargs)

    def test_round_trip(self):
        cfg = VqeConfig.noisy("realistic", seed=3)
        assert VqeConfig.from_dict(cfg.to_dict()) == VqeConfig.from_dict(VqeConfig.from_dict(cfg.to_dict()).to_dict())
        assert VqeConfig.from_dict(cfg.to_dict()).noise_model_resolved == cfg.noise_model_resolved


class TestMinimize:
    def test_identity_only(self):
        h = QubitHamiltonian.from_labels([("IIII", -0.81054)])
        for seed in range(3):
            rec = vqe_minimize(h, vqe_ansatz(4), VqeConfig.ideal(seed=seed))
            assert rec.n_iterations == 1 and rec.status == "converged"
            assert rec.energy == -0.81054

    def test_minus_z(self):
        h = QubitHamiltonian.from_labels([("Z", -1.0)])
        rec = vqe_minimize(h, RY1, VqeConfig.ideal(seed=1))
        assert rec.energy == pytest.approx(-1, abs=1e-6)
        amps = run_circuit(RY1, rec.final_params).amplitudes
        assert abs(amps[0]) ** 2 > 1 - 1e-6

    def test_minus_z_spsa_sampled(self):
        h = QubitHamiltonian.from_labels([("Z", -1.0)])
        rec = vqe_minimize(h, RY1, VqeConfig(optimizer="SPSA", evaluation_mode="sampled", seed=2))
        assert abs(expectation_exact(run_circuit(RY1, rec.final_params), h) + 1) < 1e-2

    def test_central_difference_option(self, h2):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=4, gradient_method="central-difference"))
        assert rec.energy >= ground_energy(h2) - 1e-9
        assert rec.status == "converged"

    def test_non_finite_coefficient_rejected(self):
        with pytest.raises(ValueError):
            QubitHamiltonian.from_labels([("Z", float("nan"))])

    def test_non_finite_energy(self, monkeypatch):
        import pha_vqe.vqe as vqe_module

        monkeypatch.setattr(vqe_module, "expectation_exact_batch", lambda states, h: np.full(len(states), np.nan))
        with pytest.raises(VqeError):
            vqe_minimize(QubitHamiltonian.from_labels([("Z", -1.0)]), RY1, VqeConfig.ideal())

    def test_qubit_mismatch(self, h2):
        with pytest.raises(ValueError):
            vqe_minimize(h2, vqe_ansatz(3), VqeConfig.ideal())
        with pytest.raises(ValueError):
            vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(), initial_params=np.zeros(3))

    def test_best_so_far_monotone_cg(self, h2):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=5))
        assert np.all(np.diff(rec.trace) <= 0)
        assert np.array_equal(rec.best_trace, rec.trace)


@settings(max_examples=15)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_parameter_shift_matches_finite_difference(n, seed):
    rng = np.random.default_rng(seed)
    labels = ["".join(rng.choice(list("IXYZ"), n)) for _ in range(2 * n)]
    h = QubitHamiltonian.from_labels(zip(labels, rng.normal(size=2 * n)))
    circuit = vqe_ansatz(n)
    f = EnergyObjective(h, circuit, VqeConfig.ideal())
    theta = rng.uniform(-np.pi, np.pi, circuit.n_parameters)
    ps = parameter_shift_gradient(f, theta)
    fd = finite_difference_gradient(f, theta, 1e-5)
    assert np.max(np.abs(ps - fd)) <= 1e-6


def test_variational_bound(h2):
    e0 = ground_energy(h2)
    for seed in range(5):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=seed))
        assert min(rec.trace) >= e0 - 1e-9


class TestDeterminism:
    def test_ideal_bit_identical(self, h2):
        a = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=8))
        b = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=8))
        assert a.trace == b.trace and a.final_params == b.final_params

    def test_noisy_bit_identical(self, h2):
        cfg = VqeConfig.noisy(seed=8, max_iterations=30, shots=512)
        a = vqe_minimize(h2, vqe_ansatz(4), cfg)
        b = vqe_minimize(h2, vqe_ansatz(4), cfg)
        assert a.trace == b.trace and a.final_params == b.final_params
        assert a.n_iterations == 30

    def test_seed_shared_across_hamiltonians(self, h2, h2_partial):
        a = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=3, max_iterations=1))
        b = vqe_minimize(h2_partial, vqe_ansatz(4), VqeConfig.ideal(seed=3, max_iterations=1))
        c = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=4, max_iterations=1))
        assert a.initial_params == b.initial_params != c.initial_params

    def test_record_round_trip(self, h2):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=2))
        again = VqeRunRecord.from_json(rec.to_json())
        assert again == rec
        assert again.vqe_config.to_dict() == VqeConfig.ideal(seed=2).to_dict()


class TestCrossEvaluation:
    def test_self_consistency(self, h2):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.ideal(seed=1))
        assert cross_evaluate(rec, h2) == pytest.approx(rec.energy, abs=1e-12)

    def test_self_consistency_sampled(self, h2):
        rec = vqe_minimize(h2, vqe_ansatz(4), VqeConfig.noisy(seed=1, max_iterations=20))
        assert abs(cross_evaluate(rec, h2) - rec.energy) < 0.15

    def test_basis_state_x_terms_vanish(self, h2, h2_partial):
        rec = vqe_minimize(h2_partial, vqe_ansatz(4), VqeConfig.ideal(max_iterations=1), initial_params=np.zeros(12))
        cross = cross_evaluate(rec, h2)
        assert cross == pytest.approx(rec.energy, abs=1e-12)
        assert cross == pytest.approx(sum(c for lab, c in zip(h2.labels, h2.coefficients) if "X" not in lab), abs=1e-12)

    def test_qubit_mismatch(self, h2):
        rec = vqe_minimize(QubitHamiltonian.from_labels([("Z", 1.0)]), RY1, VqeConfig.ideal())
        with pytest.raises(ValueError):
            cross_evaluate(rec, h2)


class TestPhaInitialization:
    def test_stage_bookkeeping(self, h2, h2_partial):
        s1, s2 = pha_initialized_vqe(h2, h2_partial, vqe_ansatz(4), VqeConfig.ideal(seed=6))
        assert s1.e_cross is not None
        assert s2.initial_params == s1.final_params
        assert s2.prior_iterations == s1.n_iterations
        assert s2.total_iterations == s1.n_iterations + s2.n_iterations
        assert s2.energy <= s1.e_cross + 1e-12

    def test_identical_hamiltonians_converge_immediately(self, h2):
        for seed in range(3):
            s1, s2 = pha_initialized_vqe(h2, h2, vqe_ansatz(4), VqeConfig.ideal(seed=seed))
            assert s2.n_iterations <= 10 and s2.status == "converged"
            assert abs(s2.energy - s1.energy) <= 1e-6

    def test_noisy_stage_two_reuses_gain(self, h2, h2_partial):
        cfg = VqeConfig.noisy(seed=1, max_iterations=40, shots=1024)
        s1, s2 = pha_initialized_vqe(h2, h2_partial, vqe_ansatz(4), cfg)
        assert s2.spsa_gain == s1.spsa_gain
        assert s2.vqe_config.spsa.a == s1.spsa_gain

    def test_qubit_mismatch(self, h2):
        with pytest.raises(ValueError):
            pha_initialized_vqe(h2, QubitHamiltonian.from_labels([("Z", 1.0)]), vqe_ansatz(4), VqeConfig.ideal())
