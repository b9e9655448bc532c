"""Deterministic reference text embedder and cosine similarity.

Character trigrams are signed-hashed into a fixed number of buckets and
L2-normalized. This is a dependency-free stand-in with graded similarity;
a learned encoder can be plugged in through the same callable signature
(text, metadata) -> EmbeddingVector.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .models import MetadataRecord, normalize_text

DEFAULT_DIM = 256

# Reserved field separator for metadata concatenation; never appears in
# normalized text (normalization collapses it into plain whitespace first).
FIELD_SEP = " \x1f "

EmbedFn = Callable[[str, Optional[MetadataRecord]], "EmbeddingVector"]


class DimensionMismatchError(ValueError):
    """Cosine over vectors of different dimensions; configuration error."""


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    norm: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "EmbeddingVector":
        return cls(values=values, norm=float(np.linalg.norm(values)))


def _bucket_and_sign(gram: str, dim: int) -> tuple[int, int]:
    # Stable across processes, unlike builtin hash().
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "big")
    return h % dim, 1 if (h >> 60) & 1 else -1


def _trigrams(text: str) -> list[str]:
    padded = f" {text} "
    if len(padded) < 3:
        return []
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


class ReferenceEmbedder:
    """Signed trigram-hashing embedder, deterministic by construction."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim

    def __call__(self, text: str, metadata: MetadataRecord | None = None) -> EmbeddingVector:
        return self.embed(text, metadata)

    def embed(self, text: str, metadata: MetadataRecord | None = None) -> EmbeddingVector:
        """Embed normalized text; metadata fields are appended in fixed order."""
        full = text
        if metadata is not None:
            parts = [text]
            parts.append(normalize_text(metadata.description) if metadata.description else "")
            parts.append(normalize_text(" ".join(sorted(metadata.genre))) if metadata.genre else "")
            parts.append(normalize_text(metadata.age_rating) if metadata.age_rating else "")
            full = FIELD_SEP.join(parts)
        values = np.zeros(self.dim, dtype=np.float64)
        if full.strip("\x1f ").strip():
            for gram in _trigrams(full):
                bucket, sign = _bucket_and_sign(gram, self.dim)
                values[bucket] += sign
            n = np.linalg.norm(values)
            if n > 0:
                values /= n
        return EmbeddingVector.from_values(values)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity in [-1, 1]; zero vectors yield 0 by convention."""
    if a.values.shape != b.values.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.values.shape} vs {b.values.shape}"
        )
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    value = float(np.dot(a.values, b.values)) / (a.norm * b.norm)
    return max(-1.0, min(1.0, value))


def get_embedder(name: str = "reference", dim: int = DEFAULT_DIM) -> EmbedFn:
    """Resolve an embedder by configuration key."""
    if name == "reference":
        return ReferenceEmbedder(dim=dim)
    raise ValueError(f"unknown embedder {name!r} (external embedders must be injected)")
