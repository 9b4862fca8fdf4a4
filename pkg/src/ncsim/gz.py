"""
The parity KS-colouring of rational unit vectors in three dimensions.

A rational unit vector has a unique primitive integer form ``(x, y, z)``
with ``x**2 + y**2 + z**2 == n**2`` and ``gcd(x, y, z) == 1``. Exactly one
of ``x, y, z`` is odd (a sum of three squares is never ``2`` or ``3`` mod
``4`` when it is itself a square). Two orthogonal primitive vectors cannot
have their odd component in the same slot, since the dot product would then
be odd. So within every orthogonal triad the odd slots are 0, 1 and 2 in
some order, and colouring a vector 1 exactly when its odd component is in
slot 0 puts exactly one 1 in every triad.

Everything here is exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

#: Slot whose odd component earns colour 1.
COLOURED_POSITION = 0


class NotUnitNormalizable(ValueError):
    pass


@dataclass(frozen=True, order=True)
class RationalUnitVector:
    """``(x, y, z) / n`` in primitive, sign-normalized integer form."""

    x: int
    y: int
    z: int
    n: int

    def __post_init__(self) -> None:
        c = self.components
        if self.n <= 0 or sum(a * a for a in c) != self.n ** 2:
            raise ValueError(f"{c} is not a unit vector over {self.n}")
        if math.gcd(*c) != 1:
            raise ValueError(f"{c} is not primitive")
        if next(a for a in c if a) < 0:
            raise ValueError(f"{c} is not sign-normalized")
        if sum(a % 2 for a in c) != 1:
            raise ValueError(f"{c} does not have exactly one odd component")

    @property
    def components(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)

    @property
    def odd_position(self) -> int:
        return next(i for i, a in enumerate(self.components) if a % 2)

    def dot(self, other: "RationalUnitVector") -> int:
        """Integer dot product of the primitive forms (zero iff orthogonal)."""
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_fractions(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(Fraction(a, self.n) for a in self.components)  # type: ignore[return-value]

    def __str__(self) -> str:
        return f"({self.x}, {self.y}, {self.z})/{self.n}"


def _primitive(ints: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*ints)
    if g == 0:
        raise NotUnitNormalizable("zero vector")
    v = tuple(a // g for a in ints)
    if next(a for a in v if a) < 0:
        v = tuple(-a for a in v)
    return v


def reduce(raw: Iterable) -> RationalUnitVector:
    """Canonical form of a rational direction whose length is rational.

    ``raw`` may hold ints, ``Fraction``s or strings such as ``"3/5"``. Any
    nonzero rescaling or sign flip of the input gives the same result.
    """
    fr = [Fraction(a) for a in raw]
    if len(fr) != 3:
        raise NotUnitNormalizable("expected three components")
    if not any(fr):
        raise NotUnitNormalizable("zero vector")
    lcm = math.lcm(*(f.denominator for f in fr))
    v = _primitive([int(f * lcm) for f in fr])
    n2 = sum(a * a for a in v)
    n = math.isqrt(n2)
    if n * n != n2:
        raise NotUnitNormalizable(f"{tuple(str(f) for f in fr)} has irrational length")
    return RationalUnitVector(*v, n)


def gz_colour(v: RationalUnitVector) -> int:
    """1 if the odd component of ``v`` sits in the designated slot, else 0."""
    return int(v.odd_position == COLOURED_POSITION)


def rational_unit_vectors(max_component: int) -> list[RationalUnitVector]:
    """All primitive rational unit vectors with ``|components| <= max_component``.

    One representative per direction, sorted.
    """
    m = max_component
    r = np.arange(-m, m + 1, dtype=np.int64)
    x, y, z = np.meshgrid(r, r, r, indexing="ij")
    x, y, z = x.ravel(), y.ravel(), z.ravel()
    s = x * x + y * y + z * z
    root = np.round(np.sqrt(s)).astype(np.int64)
    first = np.where(x != 0, x, np.where(y != 0, y, z))
    keep = (s > 0) & (root * root == s) & (first > 0)
    keep &= np.gcd(np.gcd(x, y), z) == 1
    out = [RationalUnitVector(int(a), int(b), int(c), int(n))
           for a, b, c, n in zip(x[keep], y[keep], z[keep], root[keep])]
    return sorted(out)


def enumerate_rational_triads(max_component: int) -> list[tuple[RationalUnitVector, ...]]:
    """Every unordered orthogonal triad of rational unit vectors with bounded components.

    Each triad is sorted internally, and the list is sorted.
    """
    if max_component < 1:
        raise ValueError("max_component must be at least 1")
    vecs = rational_unit_vectors(max_component)
    index = {v.components: i for i, v in enumerate(vecs)}
    arr = np.array([v.components for v in vecs], dtype=np.int64)
    triads = []
    for i, u in enumerate(vecs):
        dots = arr[i + 1:] @ arr[i]
        for off in np.flatnonzero(dots == 0):
            j = i + 1 + int(off)
            w = vecs[j]
            third = _primitive((u.y * w.z - u.z * w.y,
                                u.z * w.x - u.x * w.z,
                                u.x * w.y - u.y * w.x))
            k = index.get(third)
            if k is not None and k > j:
                a, b, c = vecs[i], vecs[j], vecs[k]
                if a.dot(b) or a.dot(c) or b.dot(c):
                    raise AssertionError(f"non-orthogonal triad {a}, {b}, {c}")
                triads.append((a, b, c))
    return sorted(triads)


@dataclass(frozen=True)
class GzReport:
    max_component: int
    vectors: int
    triads: int
    violations: int
    odd_position_clashes: int

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.odd_position_clashes == 0

    def to_dict(self) -> dict:
        return {**self.__dict__, "ok": self.ok}


def verify(max_component: int) -> GzReport:
    """Colour every bounded triad and count those without exactly one 1."""
    triads = enumerate_rational_triads(max_component)
    violations = sum(1 for t in triads if sum(gz_colour(v) for v in t) != 1)
    clashes = sum(1 for t in triads if len({v.odd_position for v in t}) != 3)
    return GzReport(max_component, len(rational_unit_vectors(max_component)),
                    len(triads), violations, clashes)
