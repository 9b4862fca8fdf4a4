"""
The two-qubit phi+ scenario: five joint measurements of Pauli observables
on ``(|00> + |11>)/sqrt(2)``, simulated with the Born rule directly or
through a finite sub-model, optionally with per-shot apparatus jitter.

The state has ``Z1 Z2 = X1 X2 = +1`` with certainty and
``Z1 X2 = -X1 Z2`` with certainty. A single valuation of ``Z1, X1, Z2,
X2`` that also values the products as products of factors cannot satisfy
all three; :func:`consistent_valuations` checks this by enumerating the 16
candidates.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from . import ck, seeding
from .quantum import (
    I2,
    SIGMA_X,
    SIGMA_Z,
    ProjectiveDecomposition,
    QuantumState,
    bell_phi_plus,
    born_probabilities,
    tensor,
    total_variation,
)

OBSERVABLES = {
    "Z1": tensor(SIGMA_Z, I2),
    "X1": tensor(SIGMA_X, I2),
    "Z2": tensor(I2, SIGMA_Z),
    "X2": tensor(I2, SIGMA_X),
}
OBSERVABLES.update({
    "Z1Z2": OBSERVABLES["Z1"] @ OBSERVABLES["Z2"],
    "Z1X2": OBSERVABLES["Z1"] @ OBSERVABLES["X2"],
    "X1Z2": OBSERVABLES["X1"] @ OBSERVABLES["Z2"],
    "X1X2": OBSERVABLES["X1"] @ OBSERVABLES["X2"],
})

#: The commuting pair measured in each context, in protocol order.
CONTEXTS = (("Z1", "Z2"), ("Z1", "X2"), ("X1", "Z2"), ("X1", "X2"), ("Z1X2", "X1Z2"))
REDUCED_CONTEXTS = (3, 4)

LABELS = tuple(product((1, -1), repeat=2))


def joint_decomposition(a: np.ndarray, b: np.ndarray) -> ProjectiveDecomposition:
    """Joint eigenspaces of two commuting ``+-1``-valued observables, labelled ``(a, b)``."""
    eye = np.eye(a.shape[0])
    projs, labels = [], []
    for va, vb in LABELS:
        p = (eye + va * a) @ (eye + vb * b) / 4
        if np.trace(p).real > 0.5:
            projs.append(p)
            labels.append((va, vb))
    return ProjectiveDecomposition(tuple(projs), tuple(labels))


def build_contexts() -> list[ProjectiveDecomposition]:
    return [joint_decomposition(OBSERVABLES[x], OBSERVABLES[y]) for x, y in CONTEXTS]


def product_name(ctx: tuple[str, str]) -> str | None:
    """Name of the product observable certified inside a factor context."""
    x, y = ctx
    name = x + y
    return name if name in OBSERVABLES else None


def eigenvalue_on(p: np.ndarray, op: np.ndarray) -> float:
    """Value of ``op`` on the range of projector ``p`` (``p`` must lie in one eigenspace)."""
    return float(np.real(np.trace(p @ op) / np.trace(p)))


def consistent_valuations(certain: Mapping[str, int]) -> list[dict[str, int]]:
    """Global valuations compatible with a table of certain product values.

    Candidates assign ``+-1`` to ``Z1, X1, Z2, X2``; every product
    observable is then valued as the product of its factors. ``certain``
    maps ``"Z1Z2"``, ``"X1X2"`` etc. or the pair product ``"Z1X2*X1Z2"``
    to the value observed with certainty. Returns the survivors.
    """
    out = []
    for z1, x1, z2, x2 in product((1, -1), repeat=4):
        v = {"Z1": z1, "X1": x1, "Z2": z2, "X2": x2}
        v.update(Z1Z2=z1 * z2, Z1X2=z1 * x2, X1Z2=x1 * z2, X1X2=x1 * x2)
        ok = True
        for key, want in certain.items():
            got = 1
            for name in key.split("*"):
                got *= v[name]
            if got != want:
                ok = False
                break
        if ok:
            out.append(v)
    return out


IDEAL_CERTAINTIES = {"Z1Z2": 1, "X1X2": 1, "Z1X2*X1Z2": -1}


@dataclass(frozen=True)
class PhiPlusScenario:
    shots: int = 100_000
    jitter_sigma: float = 0.0
    engine: str = "oracle"
    seed: int = 0
    epsilon_r: float = 1e-3
    hlzpg_reduced: bool = False
    state: QuantumState = field(default_factory=bell_phi_plus, repr=False)

    def __post_init__(self) -> None:
        if self.engine not in ("oracle", "ck"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        psi_x = (np.kron(plus, plus) + np.kron(minus, minus)) / np.sqrt(2)
        for ref in (psi, psi_x):
            if abs(abs(np.vdot(ref, self.state.rho @ ref)) - 1) > 1e-9:
                raise ValueError("scenario state must be phi+")

    @property
    def measured(self) -> tuple[int, ...]:
        return REDUCED_CONTEXTS if self.hlzpg_reduced else tuple(range(len(CONTEXTS)))


@dataclass
class CorrelationReport:
    scenario: PhiPlusScenario
    counts: dict  # context index -> counts per label (LABELS order)
    values: dict  # observable name -> {"+1": freq, "-1": freq}, per context
    headline: dict
    correlators: dict
    product_rule_violations: dict
    tv_to_born: dict
    extendable_shots: int | None = None
    consistent_global_valuations: int = 0
    matched: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        s = self.scenario
        return {
            "scenario": {"shots": s.shots, "jitter_sigma": s.jitter_sigma, "engine": s.engine,
                         "seed": s.seed, "epsilon_r": s.epsilon_r,
                         "hlzpg_reduced": s.hlzpg_reduced},
            "contexts": {str(c): {"observables": list(CONTEXTS[c]),
                                  "labels": [list(x) for x in LABELS],
                                  "counts": self.counts[c]} for c in self.counts},
            "values": self.values,
            "headline": self.headline,
            "correlators": self.correlators,
            "product_rule_violations": {str(k): v for k, v in self.product_rule_violations.items()},
            "tv_to_born": {str(k): v for k, v in self.tv_to_born.items()},
            "extendable_shots": self.extendable_shots,
            "consistent_global_valuations": self.consistent_global_valuations,
            "matched": {str(k): v for k, v in self.matched.items()},
        }

    def frequency_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["context", "observable_a", "observable_b", "value_a", "value_b",
                    "count", "frequency"])
        for c, counts in self.counts.items():
            total = sum(counts)
            for (va, vb), n in zip(LABELS, counts):
                w.writerow([c, *CONTEXTS[c], va, vb, n, f"{n / total:.6f}"])
        return buf.getvalue()


def _sample_rows(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs, axis=-1)
    cdf[..., -1] = 1.0
    return np.minimum((u[:, None] >= cdf).sum(axis=-1), probs.shape[-1] - 1)


def _oracle_outcomes(state: QuantumState, target: ProjectiveDecomposition, shots: int,
                     sigma: float, seed: int, stream: str) -> np.ndarray:
    u = seeding.uniforms(seed, stream, 0, shots, 1)[:, 0]
    if sigma == 0:
        p = born_probabilities(state, target)
        return _sample_rows(np.broadcast_to(p, (shots, len(p))), u)
    stack = ck.jittered(target, sigma, shots, seed, stream=f"{stream}/jitter")
    p = np.clip(np.real(np.einsum("ij,snji->sn", state.rho, stack)), 0, None)
    return _sample_rows(p / p.sum(axis=1, keepdims=True), u)


def _labels_to_values(ctx: int, outcomes: np.ndarray) -> dict[str, np.ndarray]:
    lab = np.array(LABELS)[outcomes]
    x, y = CONTEXTS[ctx]
    vals = {x: lab[:, 0], y: lab[:, 1]}
    prod = product_name(CONTEXTS[ctx])
    if prod:
        vals[prod] = lab[:, 0] * lab[:, 1]
    return vals


def build_model(s: PhiPlusScenario) -> ck.FiniteSubModel:
    return ck.build_submodel(build_contexts(), s.epsilon_r, s.seed)


def run_scenario(s: PhiPlusScenario, model: ck.FiniteSubModel | None = None) -> CorrelationReport:
    """Simulate every measured context for ``s.shots`` shots and tabulate."""
    contexts = build_contexts()
    if s.engine == "ck" and model is None:
        model = build_model(s)
    counts, values, violations, tv, matched = {}, {}, {}, {}, {}
    per_ctx_vals = {}
    for c in s.measured:
        target = contexts[c]
        stream = f"context/{c}"
        if s.engine == "oracle":
            out = _oracle_outcomes(s.state, target, s.shots, s.jitter_sigma, s.seed, stream)
        elif s.jitter_sigma == 0:
            out, m = ck.simulate_outcomes(model, s.state, target, s.shots, s.seed, stream=stream)
            matched[c] = [m.index]
        else:
            out, idx = ck.simulate_jittered(model, s.state, target, s.shots, s.jitter_sigma,
                                            s.seed, stream=stream)
            matched[c] = sorted(set(int(i) for i in np.unique(idx)))
        cnt = np.bincount(out, minlength=len(LABELS))
        counts[c] = [int(x) for x in cnt]
        tv[c] = total_variation(cnt / s.shots, born_probabilities(s.state, target))
        vals = _labels_to_values(c, out)
        per_ctx_vals[c] = vals
        values[str(c)] = {name: {"+1": float(np.mean(v == 1)), "-1": float(np.mean(v == -1))}
                          for name, v in vals.items()}
        violations[c] = _product_rule_violations(c, target, out)

    def agree(c: int, sign: int) -> float | None:
        if c not in per_ctx_vals:
            return None
        x, y = CONTEXTS[c]
        v = per_ctx_vals[c]
        return float(np.mean(v[x] == sign * v[y]))

    headline = {
        "P(Z1=Z2)": agree(0, 1),
        "P(X1=X2)": agree(3, 1),
        "P(Z1X2=-X1Z2)": agree(4, -1),
    }
    if s.hlzpg_reduced:
        headline["P(Z1=Z2)"] = 1.0
        headline["assumed"] = ["P(Z1=Z2)"]
    correlators = {}
    for c in (0, 1, 2, 3):
        if c in per_ctx_vals:
            name = product_name(CONTEXTS[c])
            correlators[f"<{name}>"] = float(np.mean(per_ctx_vals[c][name]))

    certain = observed_certainties(headline)
    report = CorrelationReport(s, counts, values, headline, correlators, violations, tv,
                               consistent_global_valuations=len(consistent_valuations(certain)),
                               matched=matched)
    if s.engine == "ck" and not s.hlzpg_reduced:
        report.extendable_shots = extendable_hidden_states(model, s.state, s.shots, s.seed)
    return report


def observed_certainties(headline: Mapping[str, object]) -> dict[str, int]:
    """Product values that held in every shot of a report."""
    certain = {}
    for key, name, sign in (("P(Z1=Z2)", "Z1Z2", 1), ("P(X1=X2)", "X1X2", 1),
                            ("P(Z1X2=-X1Z2)", "Z1X2*X1Z2", -1)):
        p = headline.get(key)
        if p == 1.0:
            certain[name] = sign
        elif p == 0.0:
            certain[name] = -sign
    return certain


def _product_rule_violations(c: int, target: ProjectiveDecomposition,
                             outcomes: np.ndarray) -> int:
    # Labels must agree with the eigenvalues the joint eigenspaces actually carry.
    x, y = CONTEXTS[c]
    names = [x, y] + ([product_name(CONTEXTS[c])] if product_name(CONTEXTS[c]) else [])
    bad = []
    for j, p in enumerate(target.projectors):
        va, vb = target.labels[j]
        expect = {x: va, y: vb}
        if len(names) == 3:
            expect[names[2]] = va * vb
        bad.append(any(round(eigenvalue_on(p, OBSERVABLES[n])) != expect[n] for n in names))
    return int(np.sum(np.array(bad)[outcomes]))


def extendable_hidden_states(model: ck.FiniteSubModel, state: QuantumState, shots: int,
                             seed: int) -> int:
    """Count hidden states whose revealed values on all five contexts fit one valuation.

    Each shot draws a full hidden state, reads the labels it reveals for
    every ideal context, and tests all 16 global valuations against them.
    """
    contexts = build_contexts()
    hidden = ck.sample_hidden_states(model, state, shots, seed, stream="extension")
    revealed = []
    for c, target in enumerate(contexts):
        m = ck.lookup(model, target)
        inverse = np.argsort(m.permutation)
        lab = np.array(LABELS)[inverse[hidden[:, m.index]]]
        revealed.append(lab)
    r = np.concatenate(revealed, axis=1)  # (shots, 10)
    preds = []
    for z1, x1, z2, x2 in product((1, -1), repeat=4):
        preds.append([z1, z2, z1, x2, x1, z2, x1, x2, z1 * x2, x1 * z2])
    preds = np.array(preds)
    fits = (r[:, None, :] == preds[None]).all(axis=-1).any(axis=1)
    return int(fits.sum())
