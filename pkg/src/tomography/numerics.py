"""Dense linear algebra and seeded randomness shared by every other module.

All arrays are float64. Random draws come from :class:`RngStream`, an
immutable ``(master_seed, stream_id)`` pair: asking the same stream for a
generator twice replays the same sequence, so a cell of a sweep can be
recomputed anywhere, in any order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Union

import numpy as np

_MASK64 = (1 << 64) - 1


class DegenerateBasisError(ValueError):
    """Raised when a basis column has zero norm."""


def _hash64(*parts: object) -> int:
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def child(self, *key: object) -> "RngStream":
        """Derive an independent stream from a structured key.

        The key is hashed together with the parent ``stream_id`` so that
        ``RngStream(s).child("exp", d, run)`` does not depend on how many
        other cells were visited first.
        """
        return RngStream(self.master_seed, _hash64(self.stream_id, *key))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            [self.master_seed & 0xFFFFFFFF, self.master_seed >> 32,
             self.stream_id & 0xFFFFFFFF, self.stream_id >> 32]
        )
        return np.random.Generator(np.random.PCG64(seq))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """A fresh generator for a stream, or the generator itself."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def check_finite(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def gaussian_matrix(rng: RngLike, rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"shape must be positive, got ({rows}, {cols})")
    return as_generator(rng).standard_normal((rows, cols))


def normalize_columns(m: np.ndarray) -> np.ndarray:
    """Scale every column to unit Euclidean norm."""
    m = check_finite(m)
    if m.ndim != 2:
        raise ValueError("normalize_columns expects a 2-D array")
    norms = np.linalg.norm(m, axis=0)
    if np.any(norms == 0.0):
        bad = np.flatnonzero(norms == 0.0).tolist()
        raise DegenerateBasisError(f"zero-norm column(s) {bad}")
    out = m / norms
    # second pass makes the operation idempotent to the last bit in practice
    return out / np.linalg.norm(out, axis=0)


def _fix_signs(u: np.ndarray, vt: np.ndarray | None = None):
    # largest-magnitude entry of each left vector made positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    if vt is not None:
        vt = vt * signs[:, None]
    return u, vt


def top_k_svd(m: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-``k`` left singular vectors and singular values of ``m``.

    Singular values come back non-increasing. Vector signs are fixed so that
    the largest-magnitude entry of each column is positive, which makes the
    output a deterministic function of ``m``.
    """
    m = check_finite(m)
    if m.ndim != 2:
        raise ValueError("top_k_svd expects a 2-D array")
    if k < 0 or k > min(m.shape):
        raise ValueError(f"k={k} exceeds min(rows, cols)={min(m.shape)}")
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    u, _ = _fix_signs(u[:, :k])
    return u, s[:k].copy()


def solve_symmetric(s: np.ndarray, b: np.ndarray, rcond: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``s x = b`` for symmetric PSD ``s``.

    Eigen-directions with eigenvalue below ``rcond * max|eig|`` are treated as
    the null space and dropped, i.e. pseudo-inverse semantics.
    """
    s = check_finite(s, "s")
    b = check_finite(b, "b")
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("solve_symmetric expects a square matrix")
    if s.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {s.shape} vs {b.shape}")
    scale = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
    if np.max(np.abs(s - s.T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    n = s.shape[0]
    if n == 0:
        return np.zeros_like(b)
    evals, evecs = np.linalg.eigh(0.5 * (s + s.T))
    if rcond is None:
        rcond = n * np.finfo(np.float64).eps
    cutoff = rcond * max(float(np.max(np.abs(evals))), 0.0)
    keep = evals > cutoff
    inv = np.zeros_like(evals)
    inv[keep] = 1.0 / evals[keep]
    return evecs @ (inv[:, None] * (evecs.T @ b)) if b.ndim == 2 else evecs @ (inv * (evecs.T @ b))
