"""Token embedding providers.

Providers map a sequence of units (words, concept labels) to one vector per
unit. Multi-character units are represented by the vector at their first
character position, so a character-level provider and a word-level lookup
expose the same contract.
"""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np


class EmbeddingProvider:
    dim: int

    def embed_chars(self, units: Sequence[str]) -> np.ndarray:
        """One row per character of the concatenated units."""
        raise NotImplementedError

    def embed(self, units: Sequence[str]) -> np.ndarray:
        """One row per unit: the row of the unit's first character."""
        if not units:
            return np.zeros((0, self.dim))
        chars = self.embed_chars(units)
        starts = np.cumsum([0] + [len(u) for u in units[:-1]])
        return chars[starts]

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "dim": self.dim}


def _bucket(feature: str, dim: int):
    h = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    v = int.from_bytes(h, "little")
    return v % dim, (1.0 if (v >> 63) & 1 else -1.0)


class HashEmbedding(EmbeddingProvider):
    """Deterministic feature-hashed character n-gram embeddings.

    A character's features are the character itself plus every n-gram that
    starts at it and stays inside its unit (n <= ``max_n``), the rest of the
    unit from that character, and a first-character marker. The first
    character of a unit therefore summarizes the whole unit.
    """

    def __init__(self, dim: int = 32, max_n: int = 3):
        self.dim = dim
        self.max_n = max_n
        self._cache: Dict[str, np.ndarray] = {}

    def _char_vector(self, unit: str, k: int) -> np.ndarray:
        key = f"{k}\x00{unit}"
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        rest = unit[k:]
        feats = [f"c:{unit[k]}", f"rest:{rest}", f"len:{min(len(rest), 5)}"]
        feats += [f"g{n}:{rest[:n]}" for n in range(2, self.max_n + 1) if len(rest) >= n]
        if k == 0:
            feats += ["first", f"unit:{unit}"]
        v = np.zeros(self.dim)
        for f in feats:
            i, s = _bucket(f, self.dim)
            v[i] += s
        v /= np.linalg.norm(v) or 1.0
        self._cache[key] = v
        return v

    def embed_chars(self, units: Sequence[str]) -> np.ndarray:
        rows = [self._char_vector(u, k) for u in units for k in range(len(u))]
        return np.array(rows) if rows else np.zeros((0, self.dim))

    def describe(self) -> dict:
        return {"kind": "hash", "dim": self.dim, "max_n": self.max_n}


class TableEmbedding(EmbeddingProvider):
    """Pretrained vectors from a text file of ``token v1 v2 ...`` lines.

    A unit missing from the table falls back to its first character's
    vector, then to zeros.
    """

    def __init__(self, table: Dict[str, np.ndarray], dim: int):
        self.table = table
        self.dim = dim

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TableEmbedding":
        table = {}
        dim = None
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue  # word2vec count/dim header
            vec = np.array([float(x) for x in parts[1:]])
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(vec)}")
            table[parts[0]] = vec
        if dim is None:
            raise ValueError(f"{path}: no vectors")
        return cls(table, dim)

    def _lookup(self, unit: str) -> np.ndarray:
        if unit in self.table:
            return self.table[unit]
        if unit and unit[0] in self.table:
            return self.table[unit[0]]
        return np.zeros(self.dim)

    def embed_chars(self, units: Sequence[str]) -> np.ndarray:
        # the whole-unit vector sits on the first character, the rest use their own entries
        rows = []
        for u in units:
            rows.append(self._lookup(u))
            rows.extend(self._lookup(ch) for ch in u[1:])
        return np.array(rows) if rows else np.zeros((0, self.dim))

    def describe(self) -> dict:
        return {"kind": "table", "dim": self.dim}


def make_provider(spec: dict) -> EmbeddingProvider:
    kind = spec.get("kind", "hash")
    if kind == "hash":
        return HashEmbedding(int(spec.get("dim", 32)), int(spec.get("max_n", 3)))
    if kind == "table":
        return TableEmbedding.load(spec["path"])
    raise ValueError(f"unknown embedding kind {kind!r}")
