"""Embedding container I/O.

One file holds every extracted layer of one sample; the sample id is the
file stem. Layout, all integers little-endian:

    magic   b"ASTP"
    u16     version (currently 1)
    u16     m1 (embedding width)
    u32     layer_count
    per layer:
        u32     layer_id
        u32     n_subwords
        f32[]   subword vectors, row-major (n_subwords x m1)
    u32     n_words
    u32[]   word spans, (first_subword, last_subword) inclusive per word
    u64     checksum of all preceding bytes (zlib CRC-32 in the low
            32 bits, high bits zero)

Reads are strict: bad magic or version, truncation, and checksum
mismatches raise before any data is returned.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ChecksumError, FormatError, SpanError

_MAGIC = b"ASTP"
_VERSION = 1
_HEADER = struct.Struct("<4sHHI")


@dataclass
class EmbeddingRecord:
    """Subword vectors for one (sample, layer) plus word alignment spans."""

    sample_id: str
    layer: int
    subword_vectors: np.ndarray  # (n_subwords, m1) float32
    word_spans: list[tuple[int, int]]

    @property
    def n_words(self) -> int:
        return len(self.word_spans)


@dataclass
class EmbeddingContainer:
    """All extracted layers of one sample, sharing one span table."""

    sample_id: str
    m1: int
    layers: dict[int, np.ndarray]
    word_spans: list[tuple[int, int]]

    @property
    def n_words(self) -> int:
        return len(self.word_spans)

    def record(self, layer: int) -> EmbeddingRecord:
        if layer not in self.layers:
            raise FormatError(
                f"sample {self.sample_id}: layer {layer} not in container "
                f"(has {sorted(self.layers)})"
            )
        return EmbeddingRecord(
            sample_id=self.sample_id,
            layer=layer,
            subword_vectors=self.layers[layer],
            word_spans=self.word_spans,
        )


def write_embeddings(path: str | Path, container: EmbeddingContainer) -> None:
    body = bytearray()
    body += _HEADER.pack(_MAGIC, _VERSION, container.m1, len(container.layers))
    for layer_id in sorted(container.layers):
        matrix = np.ascontiguousarray(container.layers[layer_id], dtype="<f4")
        if matrix.ndim != 2 or matrix.shape[1] != container.m1:
            raise FormatError(
                f"layer {layer_id}: expected (*, {container.m1}), got {matrix.shape}"
            )
        body += struct.pack("<II", layer_id, matrix.shape[0])
        body += matrix.tobytes()
    body += struct.pack("<I", len(container.word_spans))
    for first, last in container.word_spans:
        body += struct.pack("<II", first, last)
    body += struct.pack("<Q", zlib.crc32(bytes(body)))
    Path(path).write_bytes(bytes(body))


def read_embeddings(path: str | Path) -> EmbeddingContainer:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size + 8:
        raise FormatError(f"{path}: file too short")
    stored_crc = struct.unpack_from("<Q", raw, len(raw) - 8)[0]
    body = raw[:-8]
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch")

    magic, version, m1, layer_count = _HEADER.unpack_from(body, 0)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")

    offset = _HEADER.size
    layers: dict[int, np.ndarray] = {}
    for _ in range(layer_count):
        if offset + 8 > len(body):
            raise FormatError(f"{path}: truncated layer header")
        layer_id, n_subwords = struct.unpack_from("<II", body, offset)
        offset += 8
        nbytes = n_subwords * m1 * 4
        if offset + nbytes > len(body):
            raise FormatError(f"{path}: truncated layer {layer_id}")
        layers[layer_id] = (
            np.frombuffer(body, dtype="<f4", count=n_subwords * m1, offset=offset)
            .reshape(n_subwords, m1)
            .copy()
        )
        offset += nbytes

    if offset + 4 > len(body):
        raise FormatError(f"{path}: missing span table")
    (n_words,) = struct.unpack_from("<I", body, offset)
    offset += 4
    if offset + n_words * 8 != len(body):
        raise FormatError(f"{path}: span table size mismatch")
    spans = [
        struct.unpack_from("<II", body, offset + 8 * i) for i in range(n_words)
    ]
    return EmbeddingContainer(
        sample_id=path.stem,
        m1=m1,
        layers=layers,
        word_spans=[(int(a), int(b)) for a, b in spans],
    )


def align_subwords(record: EmbeddingRecord) -> np.ndarray:
    """Word vectors as the arithmetic mean of each word's subword rows.

    Spans must be in order, non-overlapping, and inside the subword
    range; subwords not covered by any span (special tokens) are
    ignored.
    """
    n_subwords = record.subword_vectors.shape[0]
    previous_last = -1
    for i, (first, last) in enumerate(record.word_spans):
        if first > last:
            raise SpanError(f"word {i}: span ({first}, {last}) runs backwards")
        if first <= previous_last:
            raise SpanError(f"word {i}: span ({first}, {last}) overlaps its neighbor")
        if last >= n_subwords:
            raise SpanError(
                f"word {i}: span ({first}, {last}) exceeds {n_subwords} subwords"
            )
        previous_last = last
    out = np.empty((len(record.word_spans), record.subword_vectors.shape[1]),
                   dtype=record.subword_vectors.dtype)
    for i, (first, last) in enumerate(record.word_spans):
        out[i] = record.subword_vectors[first : last + 1].mean(axis=0)
    return out
