"""Per-sample (d, c, u) sidecar files.

One UTF-8 JSON document per sample, written with fixed key order and
separators so re-encoding the same corpus is byte-identical. The gold
distances are integers; c and u are vocabulary ids. ``token_ranges``
carries each token's byte range in the source file (extractors use it
to align model subwords with grammar tokens); it is null for synthetic
corpora that have no source text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tuples import TupleDCU


@dataclass
class TupleSidecar:
    sample_id: str
    tokens: list[str]
    token_ranges: list[tuple[int, int]] | None
    d: list[int]
    c: list[int]
    u: list[int]

    def gold(self) -> TupleDCU:
        return TupleDCU(
            d=np.asarray(self.d, dtype=np.int64),
            c=np.asarray(self.c, dtype=np.int64),
            u=np.asarray(self.u, dtype=np.int64),
        )


def save_sidecar(path: str | Path, sidecar: TupleSidecar) -> None:
    payload = {
        "sample_id": sidecar.sample_id,
        "tokens": sidecar.tokens,
        "token_ranges": sidecar.token_ranges,
        "d": sidecar.d,
        "c": sidecar.c,
        "u": sidecar.u,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, separators=(",", ":"))


def load_sidecar(path: str | Path) -> TupleSidecar:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    ranges = payload.get("token_ranges")
    return TupleSidecar(
        sample_id=payload["sample_id"],
        tokens=payload["tokens"],
        token_ranges=[tuple(r) for r in ranges] if ranges is not None else None,
        d=payload["d"],
        c=payload["c"],
        u=payload["u"],
    )
