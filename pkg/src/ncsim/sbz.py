"""
Black-box contextuality test with one knob per direction of an orthogonal
basis.

Each round the analyzer picks a basis from a catalogued KS-uncolourable
vector set and sets the knobs to its directions. The box returns one bit
per knob. A round is standard when exactly one bit is 1. If the fraction
``eps`` of non-standard rounds is below ``1/N`` (``N`` the number of bases
in the family), no model in which each knob's bit depends only on that
knob's setting can reproduce the statistics.

The box interior perturbs the requested directions by isotropic Gaussian
jitter, restores orthogonality by symmetric (Löwdin) orthonormalization,
and then measures the resulting rank-1 basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import beta

from . import ck, seeding
from .ks import OrthogonalityStructure, VectorSet, bases_as_decompositions, build_orthogonality, \
    search_colouring
from .quantum import QuantumState

INTERIORS = ("ck", "oracle", "toy")
SBZ_CONTEXTUAL = "sbz-contextual"
INCONCLUSIVE = "inconclusive"


class DegenerateSetting(ValueError):
    """Requested directions cannot be turned into an orthogonal basis."""


class VacuousVerdict(ValueError):
    """The family of bases admits a KS-colouring, so the bound says nothing."""


@dataclass(frozen=True)
class KnobSetting:
    indices: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


@dataclass(frozen=True, eq=False)
class BlackBox:
    """A box measuring ``catalogue.dim`` directions at a time.

    ``interior`` selects what happens inside: ``"ck"`` reveals outcomes of
    a finite sub-model built on the catalogue's bases, ``"oracle"`` samples
    the Born rule on the jittered basis, ``"toy"`` flips an independent fair
    coin per knob. ``crosstalk`` (radians) tilts each knob's direction by an
    amount depending on the other knobs' settings.
    """

    interior: str
    catalogue: VectorSet
    jitter_sigma: float = 0.0
    seed: int = 0
    state: QuantumState | None = None
    epsilon_r: float = 1e-2
    crosstalk: float = 0.0
    model: ck.FiniteSubModel | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.interior not in INTERIORS:
            raise ValueError(f"interior must be one of {INTERIORS}")
        if self.state is None:
            object.__setattr__(self, "state", QuantumState.maximally_mixed(self.catalogue.dim))
        if self.interior == "ck" and self.model is None:
            s = build_orthogonality(self.catalogue)
            object.__setattr__(self, "model", ck.build_submodel(
                bases_as_decompositions(s), self.epsilon_r, self.seed))


@dataclass
class BlackBoxTranscript:
    catalogue: VectorSet
    triad_list: tuple
    settings: np.ndarray  # (rounds, dim) knob indices
    bits: np.ndarray  # (rounds, dim) 0/1
    corrections: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        allowed = set(map(tuple, self.triad_list))
        for row in map(tuple, self.settings.tolist()):
            if row not in allowed:
                raise ValueError(f"setting {row} is not in the transcript's basis list")

    @property
    def rounds(self) -> int:
        return len(self.bits)

    def records(self):
        for r in range(self.rounds):
            rec = {"round": r, "setting": [int(x) for x in self.settings[r]],
                   "bits": [int(x) for x in self.bits[r]]}
            if len(self.corrections):
                rec["correction"] = float(self.corrections[r])
            yield rec


def default_schedule(triads: Sequence[Sequence[int]], rounds: int) -> list[KnobSetting]:
    """Cycle through the bases in order."""
    return [KnobSetting(triads[r % len(triads)]) for r in range(rounds)]


def symmetric_orthonormalize(m: np.ndarray) -> np.ndarray:
    """Nearest orthonormal rows ``(M M^T)^(-1/2) M`` for stacked ``(..., n, n)`` input."""
    g = m @ np.swapaxes(m, -1, -2)
    w, v = np.linalg.eigh(g)
    if np.any(w < 1e-12):
        raise DegenerateSetting("directions are linearly dependent")
    inv_sqrt = (v / np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2)
    return inv_sqrt @ m


def _crosstalk_rotation(box: BlackBox, knob: int, setting: tuple) -> np.ndarray:
    others = [s for k, s in enumerate(setting) if k != knob]
    rng = seeding.generator(box.seed, "crosstalk", knob, *others)
    a = rng.normal(size=(box.catalogue.dim,) * 2)
    a = (a - a.T) / 2
    a /= np.linalg.norm(a, 2)
    w, v = np.linalg.eigh(1j * a)
    return np.real((v * np.exp(-1j * box.crosstalk * w)) @ v.conj().T)


def run_box(box: BlackBox, schedule: Sequence[KnobSetting],
            triad_list: Sequence[Sequence[int]] | None = None) -> BlackBoxTranscript:
    """Run every setting of ``schedule`` through the box, one round each."""
    if not schedule:
        raise ValueError("schedule is empty")
    cat = box.catalogue
    d = cat.dim
    if triad_list is None:
        triad_list = build_orthogonality(cat).bases
    settings = np.array([s.indices for s in schedule], dtype=np.intp)
    if settings.shape[1] != d:
        raise ValueError(f"each setting needs {d} knobs")
    for row in settings:
        if len(set(row.tolist())) != d:
            raise DegenerateSetting(f"setting {tuple(row)} repeats a direction")
    rounds = len(settings)
    units = cat.unit_vectors
    m = units[settings]  # (rounds, d, d), row k = knob k direction
    if box.crosstalk:
        cache: dict = {}
        for r, row in enumerate(map(tuple, settings.tolist())):
            for k in range(d):
                key = (k, row)
                if key not in cache:
                    cache[key] = _crosstalk_rotation(box, k, row)
                m[r, k] = cache[key] @ m[r, k]
    if box.jitter_sigma:
        m = m + box.jitter_sigma * seeding.normals(box.seed, "box/jitter", 0, rounds,
                                                   d * d).reshape(rounds, d, d)
        m /= np.linalg.norm(m, axis=-1, keepdims=True)
    q = symmetric_orthonormalize(m)
    correction = np.max(np.linalg.norm(q - units[settings], axis=-1), axis=-1)

    if box.interior == "toy":
        bits = (seeding.uniforms(box.seed, "box/toy", 0, rounds, d) < 0.5).astype(np.int8)
        return BlackBoxTranscript(cat, tuple(map(tuple, triad_list)), settings, bits, correction)

    projs = q[..., :, None] * q[..., None, :]  # (rounds, d, d, d): knob k -> |q_k><q_k|
    rho = box.state.rho
    if box.interior == "oracle":
        p = np.clip(np.real(np.einsum("ij,rkji->rk", rho, projs)), 0, None)
        p /= p.sum(axis=1, keepdims=True)
        u = seeding.uniforms(box.seed, "box/oracle", 0, rounds, 1)
        cdf = np.cumsum(p, axis=1)
        cdf[:, -1] = 1.0
        outcome = np.minimum((u >= cdf).sum(axis=1), d - 1)
    else:
        idx, perm, _ = ck.lookup_batch(box.model, projs.astype(complex))
        if np.any(idx < 0):
            raise ck.NoMatch(f"{int(np.sum(idx < 0))} rounds fell outside the model's reach")
        hidden = ck.sample_hidden_states(box.model, box.state, rounds, box.seed,
                                         stream="box/hidden")
        model_outcome = hidden[np.arange(rounds), idx]
        outcome = np.argmax(perm == model_outcome[:, None], axis=1)
    bits = np.zeros((rounds, d), dtype=np.int8)
    bits[np.arange(rounds), outcome] = 1
    return BlackBoxTranscript(cat, tuple(map(tuple, triad_list)), settings, bits, correction)


def nonstandard_count(transcript: BlackBoxTranscript) -> int:
    return int(np.sum(transcript.bits.sum(axis=1) != 1))


def compute_epsilon(transcript: BlackBoxTranscript) -> Fraction:
    """Fraction of rounds without exactly one 1, as an exact rational."""
    if transcript.rounds == 0:
        raise ValueError("empty transcript")
    return Fraction(nonstandard_count(transcript), transcript.rounds)


@dataclass(frozen=True)
class SbzVerdict:
    epsilon_hat: float
    nonstandard: int
    rounds: int
    n_triads: int
    threshold: float
    confidence_level: float
    interval: tuple
    verdict: str

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["interval"] = list(self.interval)
        return d


def clopper_pearson(k: int, n: int, confidence: float) -> tuple[float, float]:
    """One-sided exact binomial bounds, each at level ``confidence``."""
    lower = 0.0 if k == 0 else float(beta.ppf(1 - confidence, k, n - k + 1))
    upper = 1.0 if k == n else float(beta.ppf(confidence, k + 1, n - k))
    return lower, upper


def decide(k: int, n: int, n_triads: int, confidence: float) -> SbzVerdict:
    lower, upper = clopper_pearson(k, n, confidence)
    threshold = 1.0 / n_triads
    verdict = SBZ_CONTEXTUAL if upper < threshold else INCONCLUSIVE
    return SbzVerdict(k / n, k, n, n_triads, threshold, confidence, (lower, upper), verdict)


def sbz_verdict(transcript: BlackBoxTranscript, confidence_level: float = 0.999) -> SbzVerdict:
    """Apply the ``eps < 1/N`` criterion to the upper confidence bound of ``eps``.

    Raises :class:`VacuousVerdict` unless the transcript's basis family is
    KS-uncolourable.
    """
    structure = OrthogonalityStructure(transcript.catalogue, tuple(transcript.triad_list))
    if search_colouring(structure).found:
        raise VacuousVerdict("the basis family admits a KS-colouring")
    return decide(nonstandard_count(transcript), transcript.rounds,
                  len(transcript.triad_list), confidence_level)
