"""
Finite sub-models of non-contextual hidden-variable models with a
first-match lookup rule.

A :class:`FiniteSubModel` is an ordered list of measurement decompositions
and a precision ``epsilon_r``. No operator is shared between two of its
decompositions, so a hidden state can fix one outcome per decomposition
independently. An intended measurement is mapped to the first decomposition
whose operators all lie within ``epsilon_r`` (Frobenius norm, best outcome
alignment) of the intended ones, and the pre-assigned outcome of that
decomposition is reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

import numpy as np

from . import seeding
from .quantum import (
    TOL,
    Decomposition,
    DimensionMismatch,
    PovmDecomposition,
    ProjectiveDecomposition,
    QuantumState,
    born_probabilities,
    collapse,
    dagger,
    frobenius,
    random_hermitian,
    total_variation,
    unitary_from_hermitian,
)

#: Operators closer than this are treated as the same operator.
DISJOINT_TOL = 1e-9

#: Above this many outcomes, alignment switches from exhaustive to greedy.
MAX_EXHAUSTIVE_OUTCOMES = 6

MAX_BUILD_RETRIES = 50


class NoMatch(LookupError):
    """No decomposition of the model is within ``epsilon_r`` of the target."""


class DisjointnessError(RuntimeError):
    """The builder could not keep decompositions operator-disjoint."""


@dataclass(frozen=True, eq=False)
class FiniteSubModel:
    """Ordered operator-disjoint decompositions with a matching precision."""

    decompositions: tuple
    epsilon_r: float
    build_seed: int = 0
    _stacks: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        decs = tuple(self.decompositions)
        if not decs:
            raise ValueError("a sub-model needs at least one decomposition")
        if not self.epsilon_r > 0:
            raise ValueError("epsilon_r must be positive")
        kinds = {d.kind for d in decs}
        dims = {d.dim for d in decs}
        if len(kinds) != 1 or len(dims) != 1:
            raise ValueError("decompositions must share one kind and one dimension")
        object.__setattr__(self, "decompositions", decs)
        object.__setattr__(self, "_stacks", tuple(d.stacked() for d in decs))
        clash = _first_shared_operator(self._stacks)
        if clash is not None:
            raise DisjointnessError(f"decompositions {clash[0]} and {clash[1]} share an operator")

    @property
    def dim(self) -> int:
        return self.decompositions[0].dim

    @property
    def kind(self) -> str:
        return self.decompositions[0].kind

    def __len__(self) -> int:
        return len(self.decompositions)

    def __getitem__(self, i: int) -> Decomposition:
        return self.decompositions[i]


def _first_shared_operator(stacks: Sequence[np.ndarray]) -> tuple[int, int] | None:
    for i in range(len(stacks)):
        for j in range(i + 1, len(stacks)):
            d = stacks[i][:, None] - stacks[j][None, :]
            if np.min(np.linalg.norm(d, axis=(-2, -1))) < DISJOINT_TOL:
                return i, j
    return None


def _shares_operator(stack: np.ndarray, others: Sequence[np.ndarray]) -> bool:
    for o in others:
        if o.shape[1:] == stack.shape[1:]:
            d = stack[:, None] - o[None, :]
            if np.min(np.linalg.norm(d, axis=(-2, -1))) < DISJOINT_TOL:
                return True
    return False


def distance(a: Decomposition, b: Decomposition, perm: Sequence[int] | None = None) -> float:
    """``max_j ||A_j - B_perm(j)||_F`` (identity alignment by default)."""
    perm = range(len(a)) if perm is None else perm
    return max(frobenius(x, b.operators[p]) for x, p in zip(a.operators, perm))


def perturb(target: Decomposition, size: float, rng: np.random.Generator) -> Decomposition:
    """Conjugate ``target`` by a random unitary moving it by ``size``.

    ``size`` is the distance to ``target`` in the model norm, reached to
    within a few percent and never exceeded by more than round-off.
    """
    if size <= 0:
        return target
    h = random_hermitian(target.dim, rng)

    def moved(t: float) -> float:
        return distance(target.conjugated(unitary_from_hermitian(h, t)), target)

    # Distance is ~linear in t near 0; refine by secant steps, then
    # shrink until strictly inside the requested size.
    t, probe = size, 1e-3
    d_probe = moved(probe)
    if d_probe > 0:
        t = size * probe / d_probe
    for _ in range(8):
        d = moved(t)
        if d == 0 or abs(d - size) <= 1e-3 * size:
            break
        t *= size / d
    while moved(t) > size:
        t *= 0.99
    return target.conjugated(unitary_from_hermitian(h, t))


def build_submodel(targets: Sequence[Decomposition], epsilon_r: float, seed: int,
                   copies: int = 1, tol: float = TOL) -> FiniteSubModel:
    """Perturbed copies of ``targets``, in target order.

    Each copy is displaced from its target by a seeded random unitary, with
    displacement drawn uniformly below ``epsilon_r / 2``. A copy that would
    share an operator with an earlier decomposition is re-drawn.
    """
    if not targets:
        raise ValueError("no targets")
    if epsilon_r <= 10 * tol:
        raise ValueError(f"epsilon_r={epsilon_r} is not above 10x the numeric tolerance")
    out: list[Decomposition] = []
    stacks: list[np.ndarray] = []
    for ti, target in enumerate(targets):
        for c in range(copies):
            for attempt in range(MAX_BUILD_RETRIES):
                rng = seeding.generator(seed, "build", ti, c, attempt)
                size = 0.5 * epsilon_r * rng.uniform(0.05, 0.95)
                cand = perturb(target, size, rng)
                st = cand.stacked()
                if not _shares_operator(st, stacks):
                    break
            else:
                raise DisjointnessError(f"target {ti}: no disjoint perturbation after "
                                        f"{MAX_BUILD_RETRIES} attempts")
            out.append(cand)
            stacks.append(st)
    return FiniteSubModel(tuple(out), float(epsilon_r), int(seed))


def _perm_table(n: int) -> np.ndarray:
    return np.array(list(permutations(range(n))), dtype=np.intp)


def _best_alignment(dist: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Minimize the max over ``j`` of ``dist[j, perm[j]]``."""
    n = dist.shape[0]
    if n <= MAX_EXHAUSTIVE_OUTCOMES:
        perms = _perm_table(n)
        cost = dist[np.arange(n), perms].max(axis=1)
        k = int(np.argmin(cost))
        return tuple(int(x) for x in perms[k]), float(cost[k])
    # Greedy: repeatedly fix the globally closest remaining pair.
    perm = [-1] * n
    d = dist.copy()
    for _ in range(n):
        j, k = np.unravel_index(np.argmin(d), d.shape)
        perm[j] = int(k)
        d[j, :] = np.inf
        d[:, k] = np.inf
    return tuple(perm), float(max(dist[j, perm[j]] for j in range(n)))


@dataclass(frozen=True)
class Match:
    index: int
    permutation: tuple
    distance: float


def _pair_distances(t: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.linalg.norm(t[:, None] - m[None, :], axis=(-2, -1))


def lookup(model: FiniteSubModel, target: Decomposition) -> Match:
    """First decomposition within ``epsilon_r`` of ``target`` under the best alignment.

    ``permutation[j]`` is the model operator aligned with target operator ``j``.
    """
    if target.dim != model.dim:
        raise DimensionMismatch(f"target dim {target.dim} vs model dim {model.dim}")
    if target.kind != model.kind:
        raise ValueError(f"{target.kind} target for a {model.kind} model")
    ts = target.stacked()
    for i, ms in enumerate(model._stacks):
        if ms.shape != ts.shape:
            continue
        perm, d = _best_alignment(_pair_distances(ts, ms))
        if d < model.epsilon_r:
            return Match(i, perm, d)
    raise NoMatch(f"no decomposition within {model.epsilon_r} of the target")


def lookup_batch(model: FiniteSubModel, targets: np.ndarray,
                 chunk: int = 4096) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`lookup` over stacked targets of shape ``(S, n, d, d)``.

    Returns ``(index, permutation, distance)`` arrays; ``index`` is ``-1``
    where nothing matches. Uses exhaustive alignment only.
    """
    s, n = targets.shape[:2]
    if n > MAX_EXHAUSTIVE_OUTCOMES:
        raise ValueError("batch lookup supports at most "
                         f"{MAX_EXHAUSTIVE_OUTCOMES} outcomes")
    perms = _perm_table(n)
    index = np.full(s, -1, dtype=np.intp)
    best_perm = np.zeros((s, n), dtype=np.intp)
    best_d = np.full(s, np.inf)
    rows = np.arange(n)
    for lo in range(0, s, chunk):
        t = targets[lo:lo + chunk]
        t_sq = np.einsum("snij,snij->sn", t.conj(), t).real
        for i, ms in enumerate(model._stacks):
            if ms.shape[0] != n:
                continue
            pending = index[lo:lo + chunk] < 0
            if not pending.any():
                break
            # ||A - B||^2 = ||A||^2 + ||B||^2 - 2 Re <A, B>; error ~1e-8 in the distance.
            m_sq = np.einsum("nij,nij->n", ms.conj(), ms).real
            cross = np.einsum("sjab,kab->sjk", t.conj(), ms).real
            dist = np.sqrt(np.clip(t_sq[:, :, None] + m_sq[None, None] - 2 * cross, 0, None))
            cost = dist[:, rows, perms].max(axis=-1)
            k = np.argmin(cost, axis=1)
            c = cost[np.arange(len(t)), k]
            hit = pending & (c < model.epsilon_r)
            sl = np.flatnonzero(hit) + lo
            index[sl] = i
            best_perm[sl] = perms[k[hit]]
            best_d[sl] = c[hit]
    return index, best_perm, best_d


@dataclass(frozen=True)
class HiddenState:
    """One pre-assigned outcome index per decomposition of a sub-model."""

    outcome_of: tuple
    sample_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcome_of", tuple(int(x) for x in self.outcome_of))


def model_probabilities(model: FiniteSubModel, state: QuantumState) -> list[np.ndarray]:
    if state.dim != model.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs model dim {model.dim}")
    return [born_probabilities(state, d) for d in model.decompositions]


def _draw(probs: Sequence[np.ndarray], u: np.ndarray) -> np.ndarray:
    out = np.empty(u.shape, dtype=np.intp)
    for i, p in enumerate(probs):
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        out[:, i] = np.searchsorted(cdf, u[:, i], side="right")
    return np.minimum(out, [len(p) - 1 for p in probs])


def sample_hidden_states(model: FiniteSubModel, state: QuantumState, shots: int,
                         seed: int, start: int = 0, stream: str = "hidden") -> np.ndarray:
    """Hidden states for shots ``start .. start+shots-1`` as a ``(shots, r)`` array.

    Each decomposition's outcome is drawn independently with its Born
    probabilities; shot ``s`` always reads row ``s`` of the stream.
    """
    probs = model_probabilities(model, state)
    u = seeding.uniforms(seed, stream, start, shots, len(model))
    return _draw(probs, u)


def sample_hidden_state(model: FiniteSubModel, state: QuantumState, seed: int) -> HiddenState:
    return HiddenState(tuple(sample_hidden_states(model, state, 1, seed)[0]), seed)


@dataclass(frozen=True)
class MeasurementRecord:
    target: Decomposition = field(repr=False)
    matched_index: int
    permutation: tuple
    outcome_index: int
    outcome_label: object
    distance: float

    def to_dict(self) -> dict:
        label = self.outcome_label
        return {
            "matched_index": self.matched_index,
            "permutation": list(self.permutation),
            "outcome_index": self.outcome_index,
            "outcome_label": list(label) if isinstance(label, tuple) else label,
            "distance": self.distance,
        }


def _to_target_index(perm: Sequence[int], model_outcome: int) -> int:
    return list(perm).index(model_outcome)


def measure(model: FiniteSubModel, hidden: HiddenState, target: Decomposition,
            match: Match | None = None) -> MeasurementRecord:
    """Reveal the pre-assigned outcome of the decomposition matching ``target``."""
    match = match or lookup(model, target)
    j = _to_target_index(match.permutation, hidden.outcome_of[match.index])
    return MeasurementRecord(target, match.index, match.permutation, j,
                             target.labels[j], match.distance)


def measure_sequence(model: FiniteSubModel, state: QuantumState,
                     targets: Sequence[Decomposition], seed: int,
                     shot: int = 0) -> list[MeasurementRecord]:
    """Sequential measurements with collapse and hidden-state resampling.

    Before step ``k`` a hidden state is drawn from the current quantum state
    (row ``k`` of the ``"sequence"`` stream for this ``shot``); after it, the quantum state
    collapses onto the outcome of the matched (not the intended)
    decomposition.
    """
    records = []
    for k, target in enumerate(targets):
        match = lookup(model, target)
        probs = model_probabilities(model, state)
        u = seeding.uniforms(seed, "sequence", k, 1, len(model), shot)
        hidden = HiddenState(_draw(probs, u)[0], seed)
        rec = measure(model, hidden, target, match)
        records.append(rec)
        state = collapse(state, model[match.index], hidden.outcome_of[match.index])
    return records


def simulate_outcomes(model: FiniteSubModel, state: QuantumState, target: Decomposition,
                      shots: int, seed: int, stream: str = "hidden") -> tuple[np.ndarray, Match]:
    """Outcome indices (target labelling) over ``shots`` fresh hidden states."""
    match = lookup(model, target)
    hidden = sample_hidden_states(model, state, shots, seed, stream=stream)
    inverse = np.argsort(match.permutation)
    return inverse[hidden[:, match.index]], match


def outcome_frequencies(outcomes: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(outcomes, minlength=n) / len(outcomes)


def aligned_probabilities(state: QuantumState, model: FiniteSubModel, match: Match) -> np.ndarray:
    """Born probabilities of the matched decomposition, in target labelling."""
    p = born_probabilities(state, model[match.index])
    return p[list(match.permutation)]


def calibrate_precision(model: FiniteSubModel,
                        preparation_targets: Sequence[tuple[QuantumState, Decomposition, int]],
                        runs: int, seed: int) -> list[float]:
    """``1 - P(expected outcome)`` estimated over ``runs`` fresh hidden states.

    Each entry is a prepared state, the measurement meant to certify it and
    the outcome index (target labelling) that a perfect device would always
    return.
    """
    gaps = []
    for k, (state, target, expected) in enumerate(preparation_targets):
        outcomes, _ = simulate_outcomes(model, state, target, runs, seed,
                                        stream=f"calibrate/{k}")
        gaps.append(1.0 - float(np.mean(outcomes == expected)))
    return gaps


@dataclass(frozen=True)
class BreakdownWitness:
    """A target inside the model's reach whose statistics the model gets wrong."""

    target: Decomposition = field(repr=False)
    state: QuantumState = field(repr=False)
    matched_index: int
    distance: float
    born_target: tuple
    born_model: tuple
    tv_predicted: float
    tv_bound: float
    tv_empirical: float | None = None
    shots: int = 0

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k not in ("target", "state")}


def demonstrate_breakdown(model: FiniteSubModel, shots: int = 0, seed: int = 0,
                          margin: float = 1e-3, which: int = 0) -> BreakdownWitness:
    """Rotate decomposition ``which`` to just inside ``epsilon_r`` and measure the damage.

    The rotation mixes the top eigenvectors ``u`` and ``w`` of its first
    two operators. The prepared state is the rotated ``u``, which the target
    certifies with probability 1 while the matched model decomposition does
    not. With ``shots > 0`` the model is also simulated.

    The reported bound is ``n/2`` times the matched distance, since each
    outcome probability moves by at most the operator norm of the
    difference, which the Frobenius norm dominates.
    """
    base = model[which]
    if len(base) < 2:
        raise ValueError("need at least two outcomes to rotate between")
    u = np.linalg.eigh(base.operators[0])[1][:, -1]
    w = np.linalg.eigh(base.operators[1])[1][:, -1]
    w = w - u * np.vdot(u, w)
    w = w / np.linalg.norm(w)
    gen = np.outer(w, u.conj()) - np.outer(u, w.conj())
    h = 1j * gen  # exp(theta * gen) = exp(-i theta h)

    def rotated(theta: float) -> Decomposition:
        return base.conjugated(unitary_from_hermitian(h, -theta))

    goal = model.epsilon_r * (1.0 - margin)
    lo, hi = 0.0, np.pi / 4
    if distance(rotated(hi), base) <= goal:
        lo = hi
    else:
        for _ in range(80):
            mid = (lo + hi) / 2
            if distance(rotated(mid), base) <= goal:
                lo = mid
            else:
                hi = mid
    target = rotated(lo)
    state = QuantumState.pure(unitary_from_hermitian(h, -lo) @ u, tol=1e-6)
    match = lookup(model, target)
    p_target = born_probabilities(state, target)
    p_model = aligned_probabilities(state, model, match)
    tv = total_variation(p_target, p_model)
    bound = min(1.0, 0.5 * len(target) * match.distance)
    tv_emp = None
    if shots:
        outcomes, _ = simulate_outcomes(model, state, target, shots, seed, stream="breakdown")
        tv_emp = total_variation(p_target, outcome_frequencies(outcomes, len(target)))
    return BreakdownWitness(target, state, match.index, match.distance,
                            tuple(p_target), tuple(p_model), tv, bound, tv_emp, shots)


def jittered(target: Decomposition, sigma: float, shots: int, seed: int,
             stream: str = "jitter", start: int = 0) -> np.ndarray:
    """Per-shot copies of ``target`` conjugated by ``exp(i sigma H)``.

    ``H`` is a GUE-like Hermitian matrix with unit-variance entries, built
    from addressable normal draws. Returns a ``(shots, n, d, d)`` stack.
    """
    ops = target.stacked()
    d = target.dim
    if sigma == 0:
        return np.broadcast_to(ops, (shots,) + ops.shape).copy()
    g = seeding.normals(seed, stream, start, shots, 2 * d * d)
    a = (g[:, : d * d] + 1j * g[:, d * d:]).reshape(shots, d, d)
    h = (a + dagger(a)) / 2
    u = unitary_from_hermitian(h, sigma)
    return u[:, None] @ ops[None] @ dagger(u)[:, None]


def simulate_jittered(model: FiniteSubModel, state: QuantumState, target: Decomposition,
                      shots: int, sigma: float, seed: int,
                      stream: str = "hidden") -> tuple[np.ndarray, np.ndarray]:
    """Outcome indices (target labelling) when every shot's apparatus is jittered.

    Returns ``(outcomes, matched_index)``; raises :class:`NoMatch` if any
    jittered target falls outside the model's reach.
    """
    stack = jittered(target, sigma, shots, seed, stream=f"{stream}/jitter")
    idx, perm, _ = lookup_batch(model, stack)
    if np.any(idx < 0):
        raise NoMatch(f"{int(np.sum(idx < 0))} jittered targets outside epsilon_r="
                      f"{model.epsilon_r}")
    hidden = sample_hidden_states(model, state, shots, seed, stream=stream)
    model_outcome = hidden[np.arange(shots), idx]
    outcomes = np.argmax(perm == model_outcome[:, None], axis=1)
    return outcomes, idx


@dataclass(frozen=True)
class ConsistencyReport:
    pairs: int
    consistent: int
    resampled: int

    @property
    def rate(self) -> float:
        return self.consistent / self.pairs if self.pairs else 1.0


def _shuffled(d: Decomposition, order: Sequence[int]) -> Decomposition:
    ops = tuple(d.operators[k] for k in order)
    labels = tuple(d.labels[k] for k in order)
    return type(d)(ops, labels, d.tol)


def target_pair_consistency(model: FiniteSubModel, state: QuantumState, pairs: int,
                            seed: int) -> ConsistencyReport:
    """Measure pairs of distinct targets that match the same decomposition.

    For each pair a decomposition is picked at random, two independent
    perturbations of it (with shuffled outcome order) are taken as targets,
    and both are measured on one hidden state. The pair is consistent when
    both reports translate back to the same model outcome, the one the
    hidden state assigns to that decomposition. Pairs whose targets match a
    different decomposition are redrawn and counted in ``resampled``.
    """
    rng = seeding.generator(seed, "pairs")
    consistent = resampled = done = 0
    while done < pairs:
        i = int(rng.integers(len(model)))
        base = model[i]
        a, b = (_shuffled(perturb(base, rng.uniform(0.05, 0.45) * model.epsilon_r, rng),
                          rng.permutation(len(base))) for _ in range(2))
        ma, mb = lookup(model, a), lookup(model, b)
        if ma.index != i or mb.index != i:
            resampled += 1
            continue
        hidden = HiddenState(sample_hidden_states(model, state, 1, seed, start=done,
                                                  stream="pairs/hidden")[0], seed)
        ra, rb = measure(model, hidden, a, ma), measure(model, hidden, b, mb)
        va = ma.permutation[ra.outcome_index]
        vb = mb.permutation[rb.outcome_index]
        consistent += int(va == vb == hidden.outcome_of[i])
        done += 1
    return ConsistencyReport(pairs, consistent, resampled)
