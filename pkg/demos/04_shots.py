# %% [markdown]
# # Shot budgets
#
# The standard error of a sampled energy falls as one over the square root of
# the shot count. Grouping commuting terms lets one set of shots serve many
# terms at once.

# %%
import numpy as np

from pha_vqe import MeasurementPlan, expectation_exact, expectation_sampled, load_h2, make_partial, run_circuit, vqe_ansatz

h = make_partial(load_h2())
circuit = vqe_ansatz(h.n_qubits)
rng = np.random.default_rng(1)
theta = rng.uniform(-np.pi, np.pi, circuit.n_parameters)
print("exact", expectation_exact(run_circuit(circuit, theta), h))

# %%
shots = np.array([100, 1000, 10000, 100000])
errs = []
for s in shots:
    e, err = expectation_sampled(circuit, theta, h, MeasurementPlan.grouped(h, int(s)), seed=int(s))
    errs.append(err)
    print(f"{s:>7d} shots  {e:.5f} +- {err:.5f}")
print("log-log slope", np.polyfit(np.log(shots), np.log(errs), 1)[0])

# %% [markdown]
# One group of S shots against one circuit per term, S shots each.

# %%
grouped = MeasurementPlan.grouped(h, 8192)
per_term = MeasurementPlan.per_term(h, 8192)
_, g = expectation_sampled(circuit, theta, h, grouped, seed=0)
_, t = expectation_sampled(circuit, theta, h, per_term, seed=0)
print(f"grouped: {grouped.total_shots(h)} shots, stderr {g:.5f}")
print(f"per term: {per_term.total_shots(h)} shots, stderr {t:.5f}")
