"""
A finite non-contextual sub-model and its precision limit.

The model holds slightly perturbed copies of the measurements we intend to
make. An intended measurement is answered by the first stored copy within
``epsilon_r`` of it, and the answer is whatever the hidden state has
pre-assigned to that copy. Born statistics come out right up to the
perturbation, and two different intended measurements that land on the same
copy can never disagree. Past the precision, a carefully aimed target and
state expose the model.

Run with ``python demos/finite_submodel.py``.
"""
import numpy as np

from ncsim import ck, experiments
from ncsim.quantum import ProjectiveDecomposition, QuantumState, born_probabilities

state = experiments.PhiPlusScenario().state
contexts = experiments.build_contexts()
model = ck.build_submodel(contexts, epsilon_r=1e-3, seed=1)
print(f"sub-model: {len(model)} decompositions in dim {model.dim}, eps={model.epsilon_r}")

for c, target in enumerate(contexts):
    out, match = ck.simulate_outcomes(model, state, target, 50_000, seed=2)
    freq = np.bincount(out, minlength=4) / len(out)
    print(f"  {experiments.CONTEXTS[c]}: matched d{match.index} at distance "
          f"{match.distance:.1e}; freq {np.round(freq, 3)} vs Born "
          f"{np.round(born_probabilities(state, target), 3)}")

hidden = ck.sample_hidden_state(model, state, seed=3)
print(f"\none hidden state: {hidden.outcome_of}")
rec = ck.measure(model, hidden, contexts[4])
print(f"measuring (Z1X2, X1Z2) reveals {rec.outcome_label}; asking again gives "
      f"{ck.measure(model, hidden, contexts[4]).outcome_label}")

pairs = ck.target_pair_consistency(model, state, 200, seed=4)
print(f"distinct targets on the same copy agreed in {pairs.consistent}/{pairs.pairs} pairs")

# Sequential measurement: collapse happens on the matched copy.
seq = ck.measure_sequence(model, state, [contexts[0], contexts[3], contexts[0]], seed=5)
print("sequence (Z1,Z2), (X1,X2), (Z1,Z2):", [r.outcome_label for r in seq])

# Calibration: a perfectly prepared eigenstate misses with probability delta^2 / 2.
qubit = ProjectiveDecomposition.from_basis(np.eye(2))
up = QuantumState.pure([1, 0])
for eps in (0.4, 0.1, 0.01):
    m = ck.build_submodel([qubit], eps, seed=6)
    d = ck.distance(m[0], qubit)
    gap = ck.calibrate_precision(m, [(up, qubit, 0)], 200_000, seed=7)[0]
    print(f"eps={eps}: copy displaced by {d:.4f}, gap {gap:.5f} (d^2/2 = {d * d / 2:.5f})")

coarse = ck.build_submodel([qubit], 0.5, seed=0)
w = ck.demonstrate_breakdown(coarse, shots=100_000, seed=8)
print(f"\nbreakdown at eps=0.5: target predicts {np.round(w.born_target, 4)}, model gives "
      f"{np.round(w.born_model, 4)}; TV {w.tv_predicted:.4f} predicted, "
      f"{w.tv_empirical:.4f} observed, bound {w.tv_bound:.4f}")
