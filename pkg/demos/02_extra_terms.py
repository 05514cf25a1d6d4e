# %% [markdown]
# # Adding terms back
#
# A diagonal partial Hamiltonian has a computational basis state as ground
# state. Evaluating that state on the full Hamiltonian (the cross energy) shows
# how much the dropped terms matter. Putting the largest dropped terms back one
# at a time closes the gap.

# %%
import argparse

from pha_vqe import expectation_exact, ground_state, group_terms, load_h2, load_hamiltonian, make_partial
from pha_vqe.hamiltonian import PartialSpec

parser = argparse.ArgumentParser()
parser.add_argument("hamiltonian", nargs="?", help="qubit Hamiltonian JSON (default: bundled H2)")
parser.add_argument("--max-k", type=int, default=4)
args = parser.parse_args()

h = load_hamiltonian(args.hamiltonian) if args.hamiltonian else load_h2()
e0, _ = ground_state(h)

# %%
print(f"exact ground energy {e0:.6f}")
print(" k  terms  groups  E_partial    E_cross    E_cross-E0")
for k in range(args.max_k + 1):
    hp = make_partial(h, PartialSpec(k))
    e, psi = ground_state(hp)
    cross = expectation_exact(psi, h)
    print(f"{k:2d}  {len(hp):5d}  {len(group_terms(hp.sum)):6d}  {e:9.6f}  {cross:9.6f}  {cross - e0:9.2e}")
