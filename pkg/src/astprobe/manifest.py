"""Corpus manifests: deterministic seeded splits over parseable samples.

A manifest is a UTF-8 JSON-lines file. The first line is a header
record; each following line describes one sample (split assignment,
source path, embedding path, AST fingerprint) or one exclusion (sample
id plus the reason it was dropped).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientData, ParseError
from .trees import ast_fingerprint

SPLITS = ("train", "test", "validation")


@dataclass(frozen=True)
class ManifestSample:
    sample_id: str
    split: str
    source_path: str
    embedding_path: str
    ast_fingerprint: str
    n_tokens: int


@dataclass
class CorpusManifest:
    language: str
    split_sizes: dict[str, int]
    seed: int
    samples: list[ManifestSample] = field(default_factory=list)
    excluded: list[dict] = field(default_factory=list)

    def split(self, name: str) -> list[ManifestSample]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return [s for s in self.samples if s.split == name]

    def validate(self) -> None:
        seen: set[str] = set()
        for sample in self.samples:
            if sample.sample_id in seen:
                raise ValueError(f"duplicate sample_id {sample.sample_id!r}")
            seen.add(sample.sample_id)

    def save(self, path: str | Path) -> None:
        self.validate()
        with open(path, "w", encoding="utf-8") as fh:
            header = {
                "record": "header",
                "language": self.language,
                "split_sizes": self.split_sizes,
                "seed": self.seed,
            }
            fh.write(json.dumps(header, separators=(",", ":")) + "\n")
            for sample in self.samples:
                record = {"record": "sample", **sample.__dict__}
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
            for entry in self.excluded:
                fh.write(
                    json.dumps({"record": "excluded", **entry}, separators=(",", ":"))
                    + "\n"
                )


def load_manifest(path: str | Path) -> CorpusManifest:
    manifest: CorpusManifest | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            kind = record.pop("record")
            if kind == "header":
                manifest = CorpusManifest(
                    language=record["language"],
                    split_sizes=record["split_sizes"],
                    seed=record["seed"],
                )
            elif kind == "sample":
                assert manifest is not None, "sample record before header"
                manifest.samples.append(ManifestSample(**record))
            elif kind == "excluded":
                assert manifest is not None, "excluded record before header"
                manifest.excluded.append(record)
            else:
                raise ValueError(f"unknown manifest record kind {kind!r}")
    if manifest is None:
        raise ValueError(f"{path}: no header record")
    manifest.validate()
    return manifest


def make_manifest(
    corpus_dir: str | Path,
    language: str,
    split_sizes: tuple[int, int, int],
    seed: int,
    embeddings_dir: str = "embeddings",
    max_tokens: int = 512,
    extensions: tuple[str, ...] | None = None,
) -> CorpusManifest:
    """Scan a corpus directory, parse every file, and split the survivors.

    Files that fail to parse, have fewer than 2 tokens, or exceed
    ``max_tokens`` are excluded (with reasons kept in the manifest).
    The split assignment is a seeded shuffle, so the same seed over the
    same directory reproduces the manifest exactly.
    """
    from .parsing import parse_source

    corpus_dir = Path(corpus_dir)
    if extensions is None:
        extensions = _default_extensions(language)
    paths = sorted(
        p for p in corpus_dir.rglob("*") if p.is_file() and p.suffix in extensions
    )

    manifest = CorpusManifest(
        language=language,
        split_sizes=dict(zip(SPLITS, split_sizes)),
        seed=seed,
    )
    usable: list[tuple[str, Path, str, int]] = []
    for path in paths:
        sample_id = path.stem
        try:
            ast = parse_source(path.read_text(encoding="utf-8"), language)
        except ParseError as exc:
            manifest.excluded.append({"sample_id": sample_id, "reason": str(exc)})
            continue
        n_tokens = ast.n_leaves
        if n_tokens < 2:
            manifest.excluded.append(
                {"sample_id": sample_id, "reason": f"only {n_tokens} token(s)"}
            )
            continue
        if n_tokens > max_tokens:
            manifest.excluded.append(
                {
                    "sample_id": sample_id,
                    "reason": f"{n_tokens} tokens exceed the limit {max_tokens}",
                }
            )
            continue
        usable.append((sample_id, path, ast_fingerprint(ast), n_tokens))

    total_needed = sum(split_sizes)
    if len(usable) < total_needed:
        raise InsufficientData(
            f"need {total_needed} usable samples, found {len(usable)}"
        )

    order = np.random.default_rng(seed).permutation(len(usable))
    cursor = 0
    for split_name, size in zip(SPLITS, split_sizes):
        for idx in order[cursor : cursor + size]:
            sample_id, path, fingerprint, n_tokens = usable[idx]
            manifest.samples.append(
                ManifestSample(
                    sample_id=sample_id,
                    split=split_name,
                    source_path=str(path),
                    embedding_path=f"{embeddings_dir}/{sample_id}.astp",
                    ast_fingerprint=fingerprint,
                    n_tokens=n_tokens,
                )
            )
        cursor += size
    manifest.validate()
    return manifest


def _default_extensions(language: str) -> tuple[str, ...]:
    return {
        "python": (".py",),
        "go": (".go",),
        "javascript": (".js",),
    }.get(language, (".txt",))
