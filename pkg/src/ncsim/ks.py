"""
Vector sets, orthogonal bases, KS-colourings and uncolourability search.

A colouring assigns 0 or 1 to each vector of a set; it is a KS-colouring
when every orthogonal basis drawn from the set contains exactly one vector
coloured 1. Vectors stand for the rank-1 projectors onto them, so a vector
and its negative are the same object and are rejected as duplicates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .io import read_json, validate_document
from .quantum import TOL, as_matrix, is_hermitian, max_abs

CATALOGUE_DIR = Path(__file__).parent / "catalogue"

#: Sets up to this size are also checked by enumerating every colouring.
EXHAUSTIVE_LIMIT = 20


class InvalidCatalogue(ValueError):
    pass


class PartialColouring(ValueError):
    pass


def _is_integral(x) -> bool:
    return isinstance(x, (int, Fraction)) and Fraction(x).denominator == 1


@dataclass(frozen=True)
class VectorSet:
    """A named set of real directions in ``dim`` dimensions.

    ``components`` keeps the vectors as given (integers or floats); when
    every component is an integer, orthogonality is decided exactly.
    ``denominator`` is the common denominator for rational unit vectors, or
    ``None`` when the stored components are unnormalized directions.
    """

    name: str
    dim: int
    components: tuple
    denominator: int | None = None
    tol: float = TOL

    def __post_init__(self) -> None:
        comps = tuple(tuple(v) for v in self.components)
        object.__setattr__(self, "components", comps)
        if self.dim < 1:
            raise InvalidCatalogue("dim must be positive")
        for i, v in enumerate(comps):
            if len(v) != self.dim:
                raise InvalidCatalogue(f"vector {i} has {len(v)} components, expected {self.dim}")
            if all(x == 0 for x in v):
                raise InvalidCatalogue(f"vector {i} is zero")
        if self.denominator is not None:
            if not self.exact:
                raise InvalidCatalogue("a denominator requires integer components")
            for i, v in enumerate(comps):
                if sum(int(x) ** 2 for x in v) != self.denominator ** 2:
                    raise InvalidCatalogue(f"vector {i} is not a unit vector over {self.denominator}")
        units = self.unit_vectors
        gram = np.abs(units @ units.T)
        np.fill_diagonal(gram, 0.0)
        dup = np.argwhere(gram > 1.0 - self.tol)
        if dup.size:
            i, j = dup[0]
            raise InvalidCatalogue(f"vectors {i} and {j} are equal up to sign")

    @property
    def exact(self) -> bool:
        return all(_is_integral(x) for v in self.components for x in v)

    @property
    def unit_vectors(self) -> np.ndarray:
        a = np.array([[float(x) for x in v] for v in self.components], dtype=float)
        return a / np.linalg.norm(a, axis=1, keepdims=True)

    def __len__(self) -> int:
        return len(self.components)

    def orthogonal(self, i: int, j: int) -> bool:
        u, v = self.components[i], self.components[j]
        if self.exact:
            return sum(int(a) * int(b) for a, b in zip(u, v)) == 0
        units = self.unit_vectors
        return abs(float(units[i] @ units[j])) <= self.tol

    def subset(self, indices: Iterable[int], name: str | None = None) -> "VectorSet":
        idx = list(indices)
        return VectorSet(name or f"{self.name}[{len(idx)}]", self.dim,
                         tuple(self.components[i] for i in idx), self.denominator, self.tol)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "denominator": self.denominator,
            "vectors": [[int(x) if _is_integral(x) else float(x) for x in v]
                        for v in self.components],
        }

    @classmethod
    def from_dict(cls, data: Mapping, tol: float = TOL) -> "VectorSet":
        try:
            vectors = [[int(x) if isinstance(x, int) else float(x) for x in v]
                       for v in data["vectors"]]
            return cls(str(data["name"]), int(data["dim"]), tuple(map(tuple, vectors)),
                       data.get("denominator"), tol)
        except (KeyError, TypeError) as exc:
            raise InvalidCatalogue(f"malformed catalogue entry: {exc!r}") from None


def load_catalogue(path: str | Path, tol: float = TOL) -> VectorSet:
    """Read a catalogue file; bare names resolve against the shipped catalogue."""
    path = Path(path)
    if not path.exists() and (CATALOGUE_DIR / path).exists():
        path = CATALOGUE_DIR / path
    data = read_json(path)
    validate_document(data, "catalogue")
    return VectorSet.from_dict(data, tol)


def shipped_catalogue() -> dict[str, Path]:
    return {p.stem: p for p in sorted(CATALOGUE_DIR.glob("*.json"))}


@dataclass(frozen=True)
class OrthogonalityStructure:
    """A vector set together with every orthogonal basis it contains."""

    base: VectorSet
    bases: tuple

    @property
    def dim(self) -> int:
        return self.base.dim

    def membership(self) -> list[int]:
        counts = [0] * len(self.base)
        for b in self.bases:
            for i in b:
                counts[i] += 1
        return counts


def build_orthogonality(vset: VectorSet, tol: float | None = None) -> OrthogonalityStructure:
    """Enumerate every set of ``dim`` mutually orthogonal vectors.

    Bases are index tuples in increasing order, listed lexicographically.
    """
    if len(vset) == 0:
        raise ValueError("vector set is empty")
    if tol is not None and tol != vset.tol:
        vset = VectorSet(vset.name, vset.dim, vset.components, vset.denominator, tol)
    n, dim = len(vset), vset.dim
    if vset.exact:
        ints = np.array(vset.components, dtype=object)
        ortho = (ints @ ints.T) == 0
        ortho = np.asarray(ortho, dtype=bool)
    else:
        u = vset.unit_vectors
        ortho = np.abs(u @ u.T) <= vset.tol
    np.fill_diagonal(ortho, False)
    nbrs = [set(np.flatnonzero(ortho[i]).tolist()) for i in range(n)]

    bases: list[tuple[int, ...]] = []

    def extend(clique: list[int], cands: list[int]) -> None:
        if len(clique) == dim:
            bases.append(tuple(clique))
            return
        for k, c in enumerate(cands):
            extend(clique + [c], [x for x in cands[k + 1:] if x in nbrs[c]])

    extend([], list(range(n)))
    return OrthogonalityStructure(vset, tuple(bases))


class Colouring(dict):
    """A 0/1 assignment keyed by vector index (or operator identifier)."""

    def __init__(self, assignment: Mapping | Sequence[int] = ()):
        if not isinstance(assignment, Mapping):
            assignment = dict(enumerate(assignment))
        super().__init__({k: int(v) for k, v in assignment.items()})
        if any(v not in (0, 1) for v in self.values()):
            raise ValueError("colour values must be 0 or 1")

    def as_list(self, n: int) -> list[int]:
        return [self[i] for i in range(n)]


@dataclass(frozen=True)
class KsVerdict:
    valid: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.valid


def validate_ks_colouring(structure: OrthogonalityStructure, colouring: Mapping) -> KsVerdict:
    """Check that every basis has exactly one vector coloured 1."""
    missing = [i for i in range(len(structure.base)) if i not in colouring]
    if missing:
        raise PartialColouring(f"colouring undefined on vectors {missing[:10]}")
    bad = tuple(b for b in structure.bases if sum(colouring[i] for i in b) != 1)
    return KsVerdict(not bad, bad)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of :func:`search_colouring`.

    ``colouring`` is a valid KS-colouring when ``found``; otherwise the
    result is an uncolourability certificate and ``nodes`` counts the
    search-tree nodes visited before exhaustion.
    """

    found: bool
    colouring: Colouring | None
    nodes: int
    order: tuple = ()

    @property
    def uncolourable(self) -> bool:
        return not self.found


def search_colouring(structure: OrthogonalityStructure) -> SearchResult:
    """Backtracking search for a KS-colouring with unit propagation.

    Vectors are branched on in order of descending basis membership, ties
    broken by index; colour 1 is tried before 0.
    """
    n = len(structure.base)
    bases = [tuple(b) for b in structure.bases]
    member = [[] for _ in range(n)]
    for k, b in enumerate(bases):
        for i in b:
            member[i].append(k)
    counts = [len(m) for m in member]
    order = tuple(sorted(range(n), key=lambda i: (-counts[i], i)))
    colour = [-1] * n
    nodes = 0

    def assign(i: int, c: int, trail: list[int]) -> bool:
        # Sets colour[i] = c and propagates; returns False on conflict.
        stack = [(i, c)]
        while stack:
            j, cj = stack.pop()
            if colour[j] != -1:
                if colour[j] != cj:
                    return False
                continue
            colour[j] = cj
            trail.append(j)
            for k in member[j]:
                b = bases[k]
                ones = sum(1 for x in b if colour[x] == 1)
                free = [x for x in b if colour[x] == -1]
                if ones > 1:
                    return False
                if ones == 1:
                    stack.extend((x, 0) for x in free)
                elif not free:
                    return False
                elif len(free) == 1:
                    stack.append((free[0], 1))
        return True

    def undo(trail: list[int]) -> None:
        for j in trail:
            colour[j] = -1

    def solve(pos: int) -> bool:
        nonlocal nodes
        while pos < n and colour[order[pos]] != -1:
            pos += 1
        if pos == n:
            return True
        i = order[pos]
        for c in (1, 0):
            nodes += 1
            trail: list[int] = []
            if assign(i, c, trail) and solve(pos + 1):
                return True
            undo(trail)
        return False

    if solve(0):
        col = Colouring({i: max(c, 0) for i, c in enumerate(colour)})
        if not validate_ks_colouring(structure, col):
            raise AssertionError("search produced an invalid colouring")
        return SearchResult(True, col, nodes, order)
    return SearchResult(False, None, nodes, order)


def count_colourings_exhaustive(structure: OrthogonalityStructure,
                                limit: int = EXHAUSTIVE_LIMIT) -> int:
    """Number of KS-colourings, by checking all ``2**n`` assignments.

    Independent of :func:`search_colouring`; used to certify catalogue
    entries with at most ``limit`` vectors.
    """
    n = len(structure.base)
    if n > limit:
        raise ValueError(f"{n} vectors exceeds the exhaustive limit of {limit}")
    masks = np.arange(1 << n, dtype=np.uint32)
    ok = np.ones(masks.shape, dtype=bool)
    for b in structure.bases:
        ones = np.zeros(masks.shape, dtype=np.uint8)
        for i in b:
            ones += ((masks >> np.uint32(i)) & np.uint32(1)).astype(np.uint8)
        ok &= ones == 1
    return int(np.count_nonzero(ok))


@dataclass(frozen=True)
class Certificate:
    name: str
    vectors: int
    bases: int
    uncolourable: bool
    search_nodes: int
    exhaustive_colourings: int | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def certify(vset: VectorSet) -> Certificate:
    """Run the backtracking search and, for small sets, the exhaustive count.

    Raises ``AssertionError`` if the two disagree.
    """
    s = build_orthogonality(vset)
    res = search_colouring(s)
    exhaustive = None
    if len(vset) <= EXHAUSTIVE_LIMIT:
        exhaustive = count_colourings_exhaustive(s)
        if (exhaustive == 0) != res.uncolourable:
            raise AssertionError(f"{vset.name}: backtracking and enumeration disagree")
    return Certificate(vset.name, len(vset), len(s.bases), res.uncolourable,
                       res.nodes, exhaustive)


@dataclass(frozen=True)
class OperatorVerdict:
    valid: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def validate_operator_colouring(operators: Sequence[np.ndarray], values: Sequence[float],
                                tol: float = TOL) -> OperatorVerdict:
    """Check the sum and product rules on a family of Hermitian operators.

    For each commuting pair ``(A, B)`` (including ``A`` with itself), any
    member of the family equal to ``A + B`` must be valued ``V(A) + V(B)``
    and any member equal to ``AB`` must be valued ``V(A) V(B)``.
    The first violation found is reported.
    """
    ops = [as_matrix(o) for o in operators]
    vals = [float(v) for v in values]
    if len(ops) != len(vals):
        raise ValueError("one value per operator is required")
    for k, (o, v) in enumerate(zip(ops, vals)):
        if not is_hermitian(o, tol):
            raise ValueError(f"operator {k} is not Hermitian")
        if np.min(np.abs(np.linalg.eigvalsh(o) - v)) > tol:
            raise ValueError(f"value {v} is not in the spectrum of operator {k}")

    def find(m: np.ndarray) -> list[int]:
        return [k for k, o in enumerate(ops) if o.shape == m.shape and max_abs(o - m) <= tol]

    for i in range(len(ops)):
        for j in range(i, len(ops)):
            a, b = ops[i], ops[j]
            if a.shape != b.shape or max_abs(a @ b - b @ a) > tol:
                continue
            for k in find(a @ b):
                if abs(vals[k] - vals[i] * vals[j]) > tol:
                    return OperatorVerdict(False, f"product rule: V({k}) != V({i}) V({j})")
            if i != j:
                for k in find(a + b):
                    if abs(vals[k] - (vals[i] + vals[j])) > tol:
                        return OperatorVerdict(False, f"sum rule: V({k}) != V({i}) + V({j})")
    return OperatorVerdict(True)


def bases_as_decompositions(structure: OrthogonalityStructure) -> list:
    """Rank-1 projective decompositions, one per basis, labelled by vector index."""
    from .quantum import ProjectiveDecomposition

    u = structure.base.unit_vectors
    return [ProjectiveDecomposition.from_basis([u[i] for i in b], labels=list(b))
            for b in structure.bases]
