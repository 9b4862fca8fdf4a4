"""
Finite-precision non-contextual hidden-variable models and contextuality tests.

Submodules
----------
quantum
    States, projective and POVM decompositions, Born rule, collapse.
ks
    Vector catalogues, orthogonality structures, KS-colouring search.
gz
    Rational unit vectors in three dimensions and the parity colouring.
ck
    Finite sub-models with first-match lookup and hidden-state sampling.
sbz
    Black-box transcripts and the operational contextuality verdict.
experiments
    The two-qubit perfect-correlation scenario.
"""
from .quantum import (
    TOL,
    PovmDecomposition,
    ProjectiveDecomposition,
    QuantumState,
    born_probabilities,
    collapse,
)

__version__ = "0.1.0"

__all__ = [
    "TOL",
    "PovmDecomposition",
    "ProjectiveDecomposition",
    "QuantumState",
    "born_probabilities",
    "collapse",
]
