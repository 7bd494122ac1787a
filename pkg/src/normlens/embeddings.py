"""Embedding-file ingestion and seeded sequence sampling.

Two on-disk formats are supported:

* ``csv``    -- one token per line, exactly D comma-separated decimals,
  ``#``-prefixed comment lines and blank lines ignored;
* ``rawf32`` -- little-endian float32, row-major, no header; the byte
  length must be divisible by ``4 * D``.

Values are widened to float64.  An ingested file becomes a single-sequence
token batch (the "pool"); experiment batches are drawn from the pool with
a seeded generator, without replacement within each sequence.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMATS = ("csv", "rawf32")


@dataclass(frozen=True)
class EmbeddingFile:
    """Location and declared layout of an embedding file."""

    path: str
    format: str
    dim: int
    limit: int | None = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.limit is not None and self.limit < 1:
            raise ValueError(f"limit must be >= 1, got {self.limit}")


def _load_csv(spec: EmbeddingFile) -> np.ndarray:
    rows = []
    with open(spec.path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split(",")
            if len(parts) != spec.dim:
                raise ValueError(
                    f"{spec.path}:{lineno}: expected {spec.dim} fields, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{spec.path}:{lineno}: malformed numeric field") from None
            if spec.limit is not None and len(rows) >= spec.limit:
                break
    if not rows:
        raise ValueError(f"{spec.path}: no token rows found")
    return np.asarray(rows, dtype=np.float64)


def _load_rawf32(spec: EmbeddingFile) -> np.ndarray:
    nbytes = Path(spec.path).stat().st_size
    stride = 4 * spec.dim
    if nbytes == 0 or nbytes % stride != 0:
        raise ValueError(
            f"{spec.path}: byte length {nbytes} is not a positive multiple of 4*dim={stride}"
        )
    raw = np.fromfile(spec.path, dtype="<f4")
    pool = raw.reshape(-1, spec.dim).astype(np.float64)
    if spec.limit is not None:
        pool = pool[: spec.limit]
    return pool


def load_embeddings(spec: EmbeddingFile) -> np.ndarray:
    """Token pool as a ``(pool_size, dim)`` float64 array."""
    pool = _load_csv(spec) if spec.format == "csv" else _load_rawf32(spec)
    if not np.all(np.isfinite(pool)):
        raise ValueError(f"{spec.path}: embedding values must be finite")
    return pool


def ingest(spec: EmbeddingFile) -> np.ndarray:
    """Token pool as a single-sequence batch of shape ``(1, pool_size, dim)``."""
    return load_embeddings(spec)[np.newaxis, :, :]


def sample_sequences(pool: np.ndarray, n: int, l: int, seed) -> np.ndarray:
    """Draw ``n`` sequences of ``l`` pool tokens each, seeded.

    Tokens are drawn without replacement within a sequence (and
    independently across sequences).  Identical ``(pool, n, l, seed)``
    always produce the same batch.
    """
    pool = np.asarray(pool, dtype=np.float64)
    if pool.ndim != 2:
        raise ValueError("pool must have shape (pool_size, dim)")
    if n < 1 or l < 1:
        raise ValueError(f"need n >= 1 and l >= 1, got n={n}, l={l}")
    if l > pool.shape[0]:
        raise ValueError(f"sequence length {l} exceeds pool size {pool.shape[0]}")
    rng = np.random.Generator(np.random.PCG64(seed))
    out = np.empty((n, l, pool.shape[1]), dtype=np.float64)
    for i in range(n):
        idx = rng.choice(pool.shape[0], size=l, replace=False)
        out[i] = pool[idx]
    return out
