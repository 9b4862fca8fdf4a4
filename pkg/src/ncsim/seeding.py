"""
Counter-based random streams.

All randomness derives from one integer root seed. A named stream is keyed
by ``SeedSequence(root, spawn_key=(crc32(name), *extra))`` driving a Philox
counter generator. Uniform draws are laid out in rows (one row per shot)
padded to a multiple of four doubles, so row ``s`` of a stream can be
regenerated on its own by advancing the counter ``s * padded_cols / 4``
steps. Results therefore do not depend on how shots are chunked or
scheduled.
"""
from __future__ import annotations

import zlib

import numpy as np
from scipy.special import ndtri

_WORDS_PER_COUNTER = 4


def stream_key(seed: int, stream: str, *extra: int) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(stream.encode()), *map(int, extra)))
    return ss.generate_state(2, dtype=np.uint64)


def generator(seed: int, stream: str, *extra: int) -> np.random.Generator:
    """A fresh generator for a named stream (for non-shot randomness)."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, stream, *extra)))


def uniforms(seed: int, stream: str, start: int, rows: int, cols: int,
             *extra: int) -> np.ndarray:
    """Rows ``start .. start+rows-1`` of a stream's ``(row, cols)`` uniform table."""
    padded = -(-cols // _WORDS_PER_COUNTER) * _WORDS_PER_COUNTER
    bg = np.random.Philox(key=stream_key(seed, stream, *extra))
    if start:
        bg.advance(start * padded // _WORDS_PER_COUNTER)
    u = np.random.Generator(bg).random(rows * padded).reshape(rows, padded)
    return u[:, :cols]


def normals(seed: int, stream: str, start: int, rows: int, cols: int,
            *extra: int) -> np.ndarray:
    """Standard normals by inverse CDF of :func:`uniforms`, so rows stay addressable."""
    u = uniforms(seed, stream, start, rows, cols, *extra)
    return ndtri(np.clip(u, 1e-300, None))
