# %% [markdown]
# # Three ways to run VQE on H2
#
# * full: optimize the full Hamiltonian;
# * partial: optimize the I/Z-only Hamiltonian, then evaluate the final state
#   on the full one;
# * PHA-initialized: the partial optimum seeds a second, full optimization.

# %%
from pha_vqe import VqeConfig, cross_evaluate, ground_energy, load_h2, make_partial, pha_initialized_vqe, vqe_ansatz, vqe_minimize

h = load_h2()
hp = make_partial(h)
circuit = vqe_ansatz(h.n_qubits)
e0 = ground_energy(h)
print(f"{circuit.n_parameters} parameters, exact energy {e0:.6f}")

# %%
for seed in range(3):
    cfg = VqeConfig.ideal(seed=seed)
    full = vqe_minimize(h, circuit, cfg)
    part = vqe_minimize(hp, circuit, cfg)
    s1, s2 = pha_initialized_vqe(h, hp, circuit, cfg)
    print(
        f"seed {seed}: full {full.energy:.6f} ({full.n_iterations} it)  "
        f"partial E_cross {cross_evaluate(part, h):.6f}  "
        f"PHA-init {s2.energy:.6f} ({s1.n_iterations}+{s2.n_iterations} it)"
    )

# %% [markdown]
# Under shot noise the optimizer switches to SPSA. Each energy is an 8192-shot
# estimate per measurement group, so the partial Hamiltonian needs one circuit
# per evaluation where the full one needs two.

# %%
cfg = VqeConfig.noisy("noisy", seed=0)
full = vqe_minimize(h, circuit, cfg)
part = vqe_minimize(hp, circuit, cfg)
print(f"noisy: full {full.energy:.4f}  partial E_cross {cross_evaluate(part, h):.4f}")
