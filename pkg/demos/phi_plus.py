"""
Perfect correlations of the two-qubit state phi+ and why no table of
values can explain them, yet a finite sub-model reproduces them.

In phi+ the products Z1Z2 and X1X2 are always +1, and Z1X2 and X1Z2 always
come out opposite. Pre-assigned values V(Z1), V(X1), V(Z2), V(X2) would make
V(Z1X2) V(X1Z2) = V(Z1Z2) V(X1X2) = +1, contradicting the last fact. The
enumeration below checks all 16 assignments. The sub-model still produces
all three correlations, because each context is answered by its own
decomposition and no hidden state is ever a single global table.

Run with ``python demos/phi_plus.py``.
"""
from ncsim import experiments

print("global valuations consistent with the ideal table:",
      experiments.consistent_valuations(experiments.IDEAL_CERTAINTIES))

for engine, jitter in (("oracle", 0.0), ("ck", 0.0), ("ck", 1e-5)):
    s = experiments.PhiPlusScenario(shots=20_000, engine=engine, jitter_sigma=jitter, seed=11)
    r = experiments.run_scenario(s)
    print(f"\n{engine} engine, jitter {jitter}:")
    for key, value in r.headline.items():
        print(f"  {key} = {value}")
    print(f"  correlators {r.correlators}")
    if r.extendable_shots is not None:
        print(f"  hidden states extending to one global valuation: {r.extendable_shots}"
              f" of {s.shots}")

reduced = experiments.run_scenario(experiments.PhiPlusScenario(shots=5000, hlzpg_reduced=True))
print("\nreduced protocol (Z correlation assumed):", reduced.headline)
print(reduced.frequency_csv().splitlines()[0])
