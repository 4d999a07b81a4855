"""Probe checkpoint file: a small versioned binary container.

Layout, all integers little-endian:

    magic   b"ASPB"
    u16     version (currently 1)
    u32     m1, m2, |C|, |U|
    32B     sha256 of the c vocabulary
    32B     sha256 of the u vocabulary
    f32[]   B row-major (m2 x m1), then C (|C| x m2), then U (|U| x m2)
    u64     byte length of the trailing JSON blob
    bytes   training log as UTF-8 JSON

Matrices are stored as 32-bit floats regardless of in-memory dtype.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError
from .probe import ProbeParams
from .vocab import LabelVocab

_MAGIC = b"ASPB"
_VERSION = 1
_HEADER = struct.Struct("<4sHIIII32s32s")


@dataclass
class Checkpoint:
    params: ProbeParams
    c_vocab_digest: bytes
    u_vocab_digest: bytes
    log: dict

    def matches_vocabs(self, cvocab: LabelVocab, uvocab: LabelVocab) -> bool:
        return (
            self.c_vocab_digest == cvocab.digest()
            and self.u_vocab_digest == uvocab.digest()
        )


def save_checkpoint(
    path: str | Path,
    params: ProbeParams,
    cvocab: LabelVocab,
    uvocab: LabelVocab,
    log: dict | None = None,
) -> None:
    blob = json.dumps(log or {}, separators=(",", ":"), sort_keys=True).encode("utf-8")
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        params.m1,
        params.m2,
        params.C.shape[0],
        params.U.shape[0],
        cvocab.digest(),
        uvocab.digest(),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for matrix in (params.B, params.C, params.U):
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, m1, m2, n_c, n_u, c_digest, u_digest = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    matrices = []
    for rows, cols in ((m2, m1), (n_c, m2), (n_u, m2)):
        nbytes = rows * cols * 4
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated matrix block")
        matrices.append(
            np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=offset)
            .reshape(rows, cols)
            .copy()
        )
        offset += nbytes
    if offset + 8 > len(raw):
        raise FormatError(f"{path}: missing log length")
    (blob_len,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    if offset + blob_len > len(raw):
        raise FormatError(f"{path}: truncated log blob")
    log = json.loads(raw[offset : offset + blob_len].decode("utf-8"))
    b, c, u = matrices
    return Checkpoint(
        params=ProbeParams(B=b, C=c, U=u),
        c_vocab_digest=c_digest,
        u_vocab_digest=u_digest,
        log=log,
    )
