"""Deterministic seed derivation.

Every random decision in the toolkit flows from one root seed through a named
hierarchy, e.g. ``derive(root, "baseline", "field", stratum_key)`` or
``derive(root, "task", task_name, run_index)``.  Seeds are derived by hashing
the path with SHA-256, so they are stable across platforms and Python
versions, and unrelated paths give statistically independent streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive", "generator"]

_MASK64 = (1 << 64) - 1


def derive(root: int, *path: object) -> int:
    """Derive a 64-bit child seed from ``root`` and a path of labels.

    Path elements may be strings or integers; they are encoded unambiguously
    (length-prefixed) so ``("ab", "c")`` and ``("a", "bc")`` differ.
    """
    h = hashlib.sha256()
    h.update(int(root & _MASK64).to_bytes(8, "little"))
    for part in path:
        if isinstance(part, bool) or not isinstance(part, (int, str)):
            raise TypeError(f"seed path elements must be str or int, got {part!r}")
        data = part.to_bytes(8, "little", signed=True) if isinstance(part, int) else part.encode("utf-8")
        tag = b"i" if isinstance(part, int) else b"s"
        h.update(tag)
        h.update(len(data).to_bytes(4, "little"))
        h.update(data)
    return int.from_bytes(h.digest()[:8], "little")


def generator(root: int, *path: object) -> np.random.Generator:
    """A ``numpy`` Generator seeded from the derived child seed."""
    return np.random.default_rng(derive(root, *path))
