"""
Dense finite-dimensional quantum mechanics: states, measurement
decompositions and the exact Born-rule oracle.

Matrices are plain complex ``numpy`` arrays. States and decompositions are
immutable: their arrays are copied on construction and marked read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

#: Default absolute tolerance for operator identities (not a physical precision).
TOL = 1e-9

MAX_DIM = 16

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class DimensionMismatch(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


class InvalidDecomposition(ValueError):
    """A decomposition of the identity violates its invariants."""


class InvalidState(ValueError):
    """A vector or density matrix is not a normalized quantum state."""


class ZeroProbabilityOutcome(ValueError):
    """Collapse was requested on an outcome the state cannot produce."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a: Any) -> np.ndarray:
    """Coerce ``a`` to a square complex matrix, raising on bad shape."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def is_hermitian(a: np.ndarray, tol: float = TOL) -> bool:
    return max_abs(a - dagger(a)) <= tol


def allclose(a: np.ndarray, b: np.ndarray, tol: float = TOL) -> bool:
    """Entrywise equality up to an absolute tolerance."""
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and max_abs(a - b) <= tol


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def commutes(a: np.ndarray, b: np.ndarray, tol: float = TOL) -> bool:
    """True iff the largest entry of ``ab - ba`` has magnitude at most ``tol``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return max_abs(a @ b - b @ a) <= tol


def projector(v: Sequence[complex]) -> np.ndarray:
    """Rank-1 projector onto the span of ``v`` (need not be normalized)."""
    v = np.asarray(v, dtype=complex).ravel()
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot project onto the zero vector")
    v = v / n
    return np.outer(v, v.conj())


def frobenius(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure or mixed state of a ``dim``-level system.

    Construct with :meth:`pure` or :meth:`mixed`. ``rho`` is always
    populated; ``vector`` is set only for pure states.
    """

    rho: np.ndarray
    vector: np.ndarray | None = None

    @classmethod
    def pure(cls, amplitudes: Sequence[complex], tol: float = TOL) -> "QuantumState":
        psi = np.asarray(amplitudes, dtype=complex).ravel()
        if psi.size == 0 or psi.size > MAX_DIM:
            raise InvalidState(f"unsupported dimension {psi.size}")
        norm2 = float(np.vdot(psi, psi).real)
        if abs(norm2 - 1.0) > tol:
            raise InvalidState(f"amplitudes have squared norm {norm2}, expected 1")
        return cls(rho=_frozen(np.outer(psi, psi.conj())), vector=_frozen(psi))

    @classmethod
    def mixed(cls, rho: np.ndarray, tol: float = TOL) -> "QuantumState":
        try:
            rho = as_matrix(rho)
        except ValueError as exc:
            raise InvalidState(str(exc)) from None
        if rho.shape[0] > MAX_DIM:
            raise InvalidState(f"unsupported dimension {rho.shape[0]}")
        if not is_hermitian(rho, tol):
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise InvalidState(f"density matrix has trace {np.trace(rho).real}")
        if np.linalg.eigvalsh(rho)[0] < -tol:
            raise InvalidState("density matrix is not positive semidefinite")
        return cls(rho=_frozen(rho))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "QuantumState":
        return cls.mixed(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def __repr__(self) -> str:
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState({kind}, dim={self.dim})"


def _check_labels(labels: Sequence[Any] | None, n: int) -> tuple:
    if labels is None:
        return tuple(range(n))
    labels = tuple(tuple(x) if isinstance(x, list) else x for x in labels)
    if len(labels) != n:
        raise InvalidDecomposition(f"{len(labels)} labels for {n} operators")
    return labels


@dataclass(frozen=True, eq=False)
class ProjectiveDecomposition:
    """An ordered projective resolution of the identity with outcome labels.

    Labels are carried explicitly rather than derived from eigenvalues, so a
    joint eigenspace of two commuting observables can be labelled with the
    pair of values it certifies.
    """

    projectors: tuple
    labels: tuple = None  # type: ignore[assignment]
    tol: float = field(default=TOL, compare=False)

    kind = "projective"

    def __post_init__(self) -> None:
        ops = tuple(_frozen(as_matrix(p)) for p in self.projectors)
        if not ops:
            raise InvalidDecomposition("decomposition has no operators")
        object.__setattr__(self, "projectors", ops)
        object.__setattr__(self, "labels", _check_labels(self.labels, len(ops)))
        self._validate()

    def _validate(self) -> None:
        tol, ops = self.tol, self.projectors
        d = ops[0].shape[0]
        if any(p.shape != (d, d) for p in ops):
            raise InvalidDecomposition("operators have inconsistent dimensions")
        for j, p in enumerate(ops):
            if not is_hermitian(p, tol):
                raise InvalidDecomposition(f"projector {j} is not Hermitian")
            if not allclose(p @ p, p, tol):
                raise InvalidDecomposition(f"projector {j} is not idempotent")
        for j in range(len(ops)):
            for k in range(j + 1, len(ops)):
                if max_abs(ops[j] @ ops[k]) > tol:
                    raise InvalidDecomposition(f"projectors {j} and {k} are not orthogonal")
        if not allclose(sum(ops), np.eye(d), tol):
            raise InvalidDecomposition("projectors do not sum to the identity")

    @property
    def operators(self) -> tuple:
        return self.projectors

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self) -> int:
        return len(self.projectors)

    def stacked(self) -> np.ndarray:
        """Operators as one ``(n, dim, dim)`` array."""
        return np.stack(self.projectors)

    def conjugated(self, u: np.ndarray) -> "ProjectiveDecomposition":
        """The decomposition ``{U P U^dagger}`` with the same labels."""
        return type(self)(tuple(u @ p @ dagger(u) for p in self.projectors),
                          self.labels, self.tol)

    @classmethod
    def from_basis(cls, vectors: Sequence[Sequence[complex]], labels=None,
                   tol: float = TOL) -> "ProjectiveDecomposition":
        """Rank-1 decomposition from an orthogonal basis (vectors need not be unit)."""
        return cls(tuple(projector(v) for v in vectors), labels, tol)

    @classmethod
    def from_observable(cls, op: np.ndarray, tol: float = 1e-7) -> "ProjectiveDecomposition":
        """Spectral decomposition of a Hermitian matrix, labelled by eigenvalue."""
        op = as_matrix(op)
        if not is_hermitian(op, tol):
            raise InvalidDecomposition("observable is not Hermitian")
        w, v = np.linalg.eigh(op)
        groups: list[list[int]] = []
        for i, x in enumerate(w):
            if groups and abs(x - w[groups[-1][0]]) <= tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        projs = tuple(v[:, g] @ dagger(v[:, g]) for g in groups)
        labels = tuple(float(np.round(np.mean(w[g]), 12)) for g in groups)
        return cls(projs, labels)

    def __repr__(self) -> str:
        return f"ProjectiveDecomposition(dim={self.dim}, n={len(self)}, labels={self.labels})"


@dataclass(frozen=True, eq=False)
class PovmDecomposition:
    """An ordered positive-operator resolution of the identity."""

    effects: tuple
    labels: tuple = None  # type: ignore[assignment]
    tol: float = field(default=TOL, compare=False)

    kind = "povm"

    def __post_init__(self) -> None:
        ops = tuple(_frozen(as_matrix(e)) for e in self.effects)
        if not ops:
            raise InvalidDecomposition("decomposition has no operators")
        object.__setattr__(self, "effects", ops)
        object.__setattr__(self, "labels", _check_labels(self.labels, len(ops)))
        d = ops[0].shape[0]
        if any(e.shape != (d, d) for e in ops):
            raise InvalidDecomposition("operators have inconsistent dimensions")
        for j, e in enumerate(ops):
            if not is_hermitian(e, self.tol):
                raise InvalidDecomposition(f"effect {j} is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -self.tol:
                raise InvalidDecomposition(f"effect {j} is not positive semidefinite")
        if not allclose(sum(ops), np.eye(d), self.tol):
            raise InvalidDecomposition("effects do not sum to the identity")

    @property
    def operators(self) -> tuple:
        return self.effects

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def stacked(self) -> np.ndarray:
        return np.stack(self.effects)

    def conjugated(self, u: np.ndarray) -> "PovmDecomposition":
        return type(self)(tuple(u @ e @ dagger(u) for e in self.effects),
                          self.labels, self.tol)

    def __repr__(self) -> str:
        return f"PovmDecomposition(dim={self.dim}, n={len(self)}, labels={self.labels})"


Decomposition = Union[ProjectiveDecomposition, PovmDecomposition]


def born_probabilities(state: QuantumState, decomposition: Decomposition) -> np.ndarray:
    """Outcome probabilities ``Tr(rho P_j)`` for each operator of ``decomposition``.

    Tiny negative values from round-off are clipped and the vector is
    renormalized, so the result is always a probability distribution.
    """
    if state.dim != decomposition.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs decomposition dim {decomposition.dim}")
    ops = decomposition.stacked()
    p = np.real(np.einsum("ij,kji->k", state.rho, ops))
    if np.any(p < -decomposition.tol) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDecomposition("operators do not give a probability distribution")
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum()


def collapse(state: QuantumState, decomposition: Decomposition,
             outcome_index: int) -> QuantumState:
    """Post-measurement state for the given outcome.

    Projective decompositions use ``P rho P / Tr(rho P)``; for a POVM the
    Lüders instrument ``sqrt(E) rho sqrt(E)`` is applied.
    """
    if state.dim != decomposition.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs decomposition dim {decomposition.dim}")
    op = decomposition.operators[outcome_index]
    if decomposition.kind == "povm":
        op = psd_sqrt(op)
    if state.is_pure:
        phi = op @ state.vector
        p = float(np.vdot(phi, phi).real)
        if p <= decomposition.tol:
            raise ZeroProbabilityOutcome(f"outcome {outcome_index} has probability {p:.3g}")
        return QuantumState.pure(phi / np.sqrt(p), tol=1e-6)
    rho = op @ state.rho @ dagger(op)
    p = float(np.trace(rho).real)
    if p <= decomposition.tol:
        raise ZeroProbabilityOutcome(f"outcome {outcome_index} has probability {p:.3g}")
    rho = rho / p
    return QuantumState.mixed((rho + dagger(rho)) / 2, tol=1e-6)


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    """Half the L1 distance between two distributions on the same outcomes."""
    return 0.5 * float(np.sum(np.abs(np.asarray(p, float) - np.asarray(q, float))))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """A Gaussian Hermitian matrix normalized to unit operator norm."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + dagger(a)) / 2
    return h / np.linalg.norm(h, 2)


def unitary_from_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(i t H)`` for Hermitian ``H`` (stacked inputs allowed)."""
    w, v = np.linalg.eigh(h)
    phase = np.exp(1j * t * w)
    return (v * phase[..., None, :]) @ dagger(v)


def bell_phi_plus() -> QuantumState:
    """``(|00> + |11>)/sqrt(2)`` in the computational (z) basis."""
    return QuantumState.pure(np.array([1, 0, 0, 1]) / np.sqrt(2))
