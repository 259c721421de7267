"""JSON-lines files with a provenance header line."""

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator, List, Mapping, Optional

from . import __version__

HEADER_KEY = "header"


def config_hash(payload) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def make_header(seed: Optional[int], payload) -> dict:
    return {"tool": "sceneqa", "version": __version__, "seed": seed, "config_hash": config_hash(payload)}


def dumps(record) -> str:
    return json.dumps(record, ensure_ascii=False)


def write_jsonl(path, records: Iterable[Mapping], header: Optional[dict] = None) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if header is not None:
            f.write(dumps({HEADER_KEY: header}) + "\n")
        for rec in records:
            f.write(dumps(rec) + "\n")
            n += 1
    return n


def iter_jsonl(path) -> Iterator[dict]:
    """Records of a JSON-lines file, skipping blank lines and the header line."""
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise ValueError(f"{path}:{lineno}: expected an object")
            if HEADER_KEY in rec and len(rec) == 1:
                continue
            yield rec


def read_jsonl(path) -> List[dict]:
    return list(iter_jsonl(path))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_blacklist(path) -> frozenset:
    """Parse ``status,category`` lines; ``#`` starts a comment."""
    pairs = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            status, sep, category = line.partition(",")
            if not sep or not status.strip() or not category.strip():
                raise ValueError(f"{path}:{lineno}: expected 'status,category', got {raw.strip()!r}")
            pairs.add((status.strip(), category.strip()))
    return frozenset(pairs)
