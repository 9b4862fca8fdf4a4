import numpy as np
import pytest

from ncsim import experiments as ex
from ncsim.quantum import QuantumState, commutes, total_variation


def test_contexts_structure(contexts):
    assert len(contexts) == 5
    for c, d in enumerate(contexts):
        assert len(d) == 4
        assert sorted(d.labels) == sorted(ex.LABELS)
    assert all(np.isclose(np.trace(p).real, 1) for p in contexts[0].projectors)


def test_fifth_context_commutes():
    assert commutes(ex.OBSERVABLES["Z1X2"], ex.OBSERVABLES["X1Z2"])
    assert not commutes(ex.OBSERVABLES["Z1"], ex.OBSERVABLES["X1"])


@pytest.mark.parametrize("c", range(5))
def test_labels_are_eigenvalues(contexts, c):
    x, y = ex.CONTEXTS[c]
    for p, (va, vb) in zip(contexts[c].projectors, contexts[c].labels):
        assert ex.eigenvalue_on(p, ex.OBSERVABLES[x]) == pytest.approx(va)
        assert ex.eigenvalue_on(p, ex.OBSERVABLES[y]) == pytest.approx(vb)
        name = ex.product_name(ex.CONTEXTS[c])
        if name:
            assert ex.eigenvalue_on(p, ex.OBSERVABLES[name]) == pytest.approx(va * vb)


def test_no_global_valuation():
    assert ex.consistent_valuations(ex.IDEAL_CERTAINTIES) == []


@pytest.mark.parametrize("drop", sorted(ex.IDEAL_CERTAINTIES))
def test_any_two_certainties_are_satisfiable(drop):
    partial = {k: v for k, v in ex.IDEAL_CERTAINTIES.items() if k != drop}
    assert len(ex.consistent_valuations(partial)) == 4


def test_scenario_rejects_other_states():
    with pytest.raises(ValueError):
        ex.PhiPlusScenario(state=QuantumState.maximally_mixed(4))
    with pytest.raises(ValueError):
        ex.PhiPlusScenario(engine="magic")


def test_oracle_headlines_exact():
    r = ex.run_scenario(ex.PhiPlusScenario(shots=5000, seed=1))
    assert all(r.headline[k] == 1.0 for k in ("P(Z1=Z2)", "P(X1=X2)", "P(Z1X2=-X1Z2)"))
    assert r.correlators["<Z1Z2>"] == 1.0 and r.correlators["<X1X2>"] == 1.0
    assert abs(r.correlators["<Z1X2>"]) < 0.1
    assert r.consistent_global_valuations == 0
    assert all(v == 0 for v in r.product_rule_violations.values())


def test_values_are_frequency_tables():
    r = ex.run_scenario(ex.PhiPlusScenario(shots=2000, seed=4))
    for table in r.values.values():
        for freq in table.values():
            assert freq["+1"] + freq["-1"] == pytest.approx(1.0)
    assert all(sum(c) == 2000 for c in r.counts.values())


def test_ck_engine_no_hidden_state_extends():
    r = ex.run_scenario(ex.PhiPlusScenario(shots=20_000, engine="ck", seed=7))
    assert r.extendable_shots == 0
    assert min(r.headline[k] for k in ("P(Z1=Z2)", "P(X1=X2)", "P(Z1X2=-X1Z2)")) >= 0.995


def test_ck_with_small_jitter_matches_oracle():
    shots = 20_000
    oracle = ex.run_scenario(ex.PhiPlusScenario(shots=shots, seed=2))
    ck_run = ex.run_scenario(ex.PhiPlusScenario(shots=shots, engine="ck", jitter_sigma=1e-5,
                                                seed=2, epsilon_r=1e-3))
    for key in ("P(Z1=Z2)", "P(X1=X2)", "P(Z1X2=-X1Z2)"):
        p = oracle.headline[key]
        sigma = np.sqrt(max(p * (1 - p), 1 / shots) / shots)
        assert abs(ck_run.headline[key] - p) <= 4 * sigma


def test_jitter_beyond_precision_fails_lookup():
    from ncsim.ck import NoMatch
    with pytest.raises(NoMatch):
        ex.run_scenario(ex.PhiPlusScenario(shots=200, engine="ck", jitter_sigma=0.05,
                                           epsilon_r=1e-3))


def test_reports_converge_as_epsilon_shrinks(contexts, phi_plus):
    # exact (shot-noise-free) distance between matched-model and ideal Born statistics
    from ncsim import ck
    from ncsim.quantum import born_probabilities
    worst = []
    for eps in (0.1, 0.01, 0.001):
        m = ck.build_submodel(contexts, eps, 5)
        worst.append(max(total_variation(born_probabilities(phi_plus, t),
                                         ck.aligned_probabilities(phi_plus, m, ck.lookup(m, t)))
                         for t in contexts))
    assert worst[0] > worst[1] > worst[2]


def test_hlzpg_reduced_mode():
    r = ex.run_scenario(ex.PhiPlusScenario(shots=1000, hlzpg_reduced=True))
    assert set(r.counts) == set(ex.REDUCED_CONTEXTS)
    assert r.headline["assumed"] == ["P(Z1=Z2)"]
    assert r.consistent_global_valuations == 0


def test_csv_export():
    r = ex.run_scenario(ex.PhiPlusScenario(shots=100))
    lines = r.frequency_csv().strip().splitlines()
    assert lines[0].startswith("context,observable_a")
    assert len(lines) == 1 + 5 * 4


def test_seeded_reports_identical():
    a = ex.run_scenario(ex.PhiPlusScenario(shots=3000, engine="ck", seed=3)).to_dict()
    b = ex.run_scenario(ex.PhiPlusScenario(shots=3000, engine="ck", seed=3)).to_dict()
    assert a == b
