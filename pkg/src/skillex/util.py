"""Small shared helpers: deterministic seeding and canonical JSON output."""

from __future__ import annotations

import hashlib
import json


def derive_seed(seed: int, name: str) -> int:
    """Stable named sub-stream seed; all module RNGs derive from one root seed."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def canonical_json(payload) -> str:
    """Deterministic JSON text (stable key order, UTF-8 friendly)."""
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1)


def write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(payload))
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()
