"""Batch command-line front-end.

Subcommands: encode, train, eval, sweep-layers, sweep-dim, report.

Option precedence, weakest first: built-in defaults, command-line
flags, ASTPROBE_* environment variables, then the --config file
(UTF-8 ``key=value`` lines). The fully resolved configuration is
echoed into the output directory of every run.

Exit codes: 0 success, 1 partial (some samples were skipped), 2 fatal.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .binarize import binarize, unbinarize
from .checkpoint import load_checkpoint, save_checkpoint
from .containers import align_subwords, read_embeddings
from .decode import predict_ast
from .errors import AstProbeError, UnknownLabel
from .evaluation import macro_average, micro_average, score
from .manifest import CorpusManifest, load_manifest, make_manifest
from .parsing import parse_with_token_ranges
from .sidecar import TupleSidecar, load_sidecar, save_sidecar
from .trees import Ast
from .training import Sample, TrainConfig, train
from .tuples import tree_to_tuple, tuple_to_tree
from .vocab import build_vocabs, load_vocabs, save_vocabs

ENV_PREFIX = "ASTPROBE_"


# ---------------------------------------------------------------------------
# option plumbing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file overriding flags")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)


def _add_train_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--layer", type=int, default=0, help="hidden layer to probe")
    parser.add_argument("--subspace-dim", type=int, default=128, dest="subspace_dim")
    parser.add_argument("--lambda", type=float, default=5.0, dest="lam",
                        help="orthogonality regularization weight")
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--batch-size", type=int, default=32, dest="batch_size")
    parser.add_argument("--max-epochs", type=int, default=20, dest="max_epochs")
    parser.add_argument("--patience", type=int, default=5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="astprobe",
        description="Train and evaluate syntactic-subspace probes over code ASTs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="parse a corpus into tuple sidecars + manifest")
    p.add_argument("--corpus", required=True, help="directory of source files")
    p.add_argument("--language", required=True, choices=["python", "go", "javascript"])
    p.add_argument("--splits", default="20000,4000,2000",
                   help="train,test,validation sizes")
    p.add_argument("--max-tokens", type=int, default=512, dest="max_tokens")
    _add_common(p)

    p = sub.add_parser("train", help="train a probe on an encoded corpus")
    p.add_argument("--data", required=True, help="directory produced by encode")
    _add_train_options(p)
    _add_common(p)

    p = sub.add_parser("eval", help="score a checkpoint on one split")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", help="probe checkpoint (omit with --oracle)")
    p.add_argument("--split", default="test",
                   choices=["train", "test", "validation"])
    p.add_argument("--layer", type=int, default=0)
    p.add_argument("--oracle", action="store_true",
                   help="bypass the probe and decode the gold tuples")
    _add_common(p)

    p = sub.add_parser("sweep-layers", help="train/eval once per layer")
    p.add_argument("--data", required=True)
    p.add_argument("--layers", required=True, help="comma-separated layer ids")
    p.add_argument("--jobs", type=int, default=1)
    _add_train_options(p)
    _add_common(p)

    p = sub.add_parser("sweep-dim", help="train/eval once per subspace dimension")
    p.add_argument("--data", required=True)
    p.add_argument("--dims", default="8,16,32,64,128,256,512",
                   help="comma-separated subspace dimensions")
    p.add_argument("--jobs", type=int, default=1)
    _add_train_options(p)
    _add_common(p)

    p = sub.add_parser("report", help="tabulate summaries of previous runs")
    p.add_argument("runs", nargs="+", help="run or sweep output directories")

    return parser


def _apply_env(args: argparse.Namespace) -> None:
    for dest, raw in _env_entries():
        if hasattr(args, dest):
            setattr(args, dest, _convert_like(getattr(args, dest), raw))


def _env_entries():
    for key, raw in os.environ.items():
        if key.startswith(ENV_PREFIX):
            yield key[len(ENV_PREFIX):].lower(), raw


def _apply_config(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        dest = key.strip().replace("-", "_")
        if dest == "lambda":
            dest = "lam"
        if not hasattr(args, dest):
            raise AstProbeError(f"config file sets unknown option {key.strip()!r}")
        setattr(args, dest, _convert_like(getattr(args, dest), value.strip()))


def _convert_like(current, raw: str):
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def _echo_config(args: argparse.Namespace, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    skip = {"command", "config"}
    lines = []
    for dest in sorted(vars(args)):
        if dest in skip:
            continue
        key = "lambda" if dest == "lam" else dest.replace("_", "-")
        lines.append(f"{key}={getattr(args, dest)}")
    (out_dir / "config_resolved.txt").write_text("\n".join(lines) + "\n",
                                                 encoding="utf-8")


# ---------------------------------------------------------------------------
# shared data loading


def _resolve(data_dir: Path, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else data_dir / p


def _load_split(
    data_dir: Path, manifest: CorpusManifest, split: str, layer: int
) -> tuple[list[Sample], list[dict]]:
    """Join sidecars with aligned word vectors; skips are reported, not fatal."""
    samples: list[Sample] = []
    skipped: list[dict] = []
    for entry in manifest.split(split):
        try:
            sidecar = load_sidecar(data_dir / "tuples" / f"{entry.sample_id}.json")
            container = read_embeddings(_resolve(data_dir, entry.embedding_path))
            hidden = align_subwords(container.record(layer))
        except (OSError, AstProbeError) as exc:
            skipped.append({"sample_id": entry.sample_id, "reason": str(exc)})
            continue
        if hidden.shape[0] != len(sidecar.u):
            skipped.append(
                {
                    "sample_id": entry.sample_id,
                    "reason": f"{hidden.shape[0]} word vectors for "
                    f"{len(sidecar.u)} tokens",
                }
            )
            continue
        samples.append(
            Sample(
                sample_id=entry.sample_id,
                hidden=hidden.astype(np.float32),
                gold=sidecar.gold(),
                tokens=tuple(sidecar.tokens),
            )
        )
    return samples, skipped


def _gold_ast(sidecar: TupleSidecar, cvocab, uvocab) -> Ast:
    tree = tuple_to_tree(
        sidecar.d, sidecar.c, sidecar.u, cvocab, uvocab, tokens=sidecar.tokens
    )
    return unbinarize(tree)


# ---------------------------------------------------------------------------
# encode


def cmd_encode(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _echo_config(args, out_dir)
    split_sizes = tuple(int(x) for x in args.splits.split(","))
    if len(split_sizes) != 3:
        raise AstProbeError("--splits needs three comma-separated sizes")

    manifest = make_manifest(
        args.corpus,
        args.language,
        split_sizes,
        seed=args.seed,
        max_tokens=args.max_tokens,
    )

    tuples_dir = out_dir / "tuples"
    tuples_dir.mkdir(parents=True, exist_ok=True)

    parsed: dict[str, tuple] = {}
    for entry in manifest.samples:
        code = Path(entry.source_path).read_text(encoding="utf-8")
        ast, ranges = parse_with_token_ranges(code, args.language)
        parsed[entry.sample_id] = (ast, ranges, binarize(ast))

    cvocab, uvocab = build_vocabs(
        parsed[e.sample_id][2] for e in manifest.split("train")
    )
    save_vocabs(out_dir / "vocabs.json", cvocab, uvocab)

    kept: list = []
    for entry in manifest.samples:
        ast, ranges, tree = parsed[entry.sample_id]
        try:
            gold, _ = tree_to_tuple(tree, cvocab, uvocab)
        except UnknownLabel as exc:
            manifest.excluded.append(
                {"sample_id": entry.sample_id, "reason": f"unseen label: {exc}"}
            )
            continue
        save_sidecar(
            tuples_dir / f"{entry.sample_id}.json",
            TupleSidecar(
                sample_id=entry.sample_id,
                tokens=ast.tokens(),
                token_ranges=[list(r) for r in ranges],
                d=[int(x) for x in gold.d],
                c=[int(x) for x in gold.c],
                u=[int(x) for x in gold.u],
            ),
        )
        kept.append(entry)

    manifest.samples = kept
    manifest.save(out_dir / "manifest.jsonl")
    n_excluded = len(manifest.excluded)
    print(f"encoded {len(kept)} samples, excluded {n_excluded}")
    if not kept:
        return 2
    return 1 if n_excluded else 0


# ---------------------------------------------------------------------------
# train


def _train_once(
    data_dir: Path,
    out_dir: Path,
    layer: int,
    subspace_dim: int,
    config: TrainConfig,
) -> tuple[Path, int]:
    manifest = load_manifest(data_dir / "manifest.jsonl")
    cvocab, uvocab = load_vocabs(data_dir / "vocabs.json")
    train_samples, skip_a = _load_split(data_dir, manifest, "train", layer)
    val_samples, skip_b = _load_split(data_dir, manifest, "validation", layer)

    result = train(
        train_samples,
        val_samples,
        config,
        n_c_labels=len(cvocab),
        n_u_labels=len(uvocab),
        m2=subspace_dim,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "probe.ckpt"
    log = result.log_records()
    log["layer"] = layer
    log["subspace_dim"] = subspace_dim
    log["skipped"] = skip_a + skip_b
    save_checkpoint(ckpt_path, result.params, cvocab, uvocab, log=log)
    (out_dir / "train_log.json").write_text(
        json.dumps(log, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return ckpt_path, len(skip_a) + len(skip_b)


def cmd_train(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _echo_config(args, out_dir)
    config = TrainConfig(
        lr=args.lr,
        lam=args.lam,
        max_epochs=args.max_epochs,
        patience=min(args.patience, args.max_epochs) if args.max_epochs else 0,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    ckpt, n_skipped = _train_once(
        Path(args.data), out_dir, args.layer, args.subspace_dim, config
    )
    print(f"checkpoint written to {ckpt}" + (f" ({n_skipped} samples skipped)" if n_skipped else ""))
    return 1 if n_skipped else 0


# ---------------------------------------------------------------------------
# eval


def _eval_once(
    data_dir: Path,
    checkpoint_path: Path | None,
    split: str,
    layer: int,
    out_dir: Path,
    oracle: bool = False,
) -> tuple[dict, int]:
    manifest = load_manifest(data_dir / "manifest.jsonl")
    cvocab, uvocab = load_vocabs(data_dir / "vocabs.json")

    params = None
    if not oracle:
        assert checkpoint_path is not None
        ckpt = load_checkpoint(checkpoint_path)
        if not ckpt.matches_vocabs(cvocab, uvocab):
            raise AstProbeError(
                f"{checkpoint_path}: vocabulary digests do not match {data_dir}"
            )
        params = ckpt.params

    samples, skipped = _load_split(data_dir, manifest, split, layer)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores = []
    with open(out_dir / "scores.jsonl", "w", encoding="utf-8") as fh:
        for sample in samples:
            sidecar = load_sidecar(data_dir / "tuples" / f"{sample.sample_id}.json")
            gold_ast = _gold_ast(sidecar, cvocab, uvocab)
            if oracle:
                pred_ast = gold_ast
            else:
                pred_ast = predict_ast(
                    params, sample.hidden, cvocab, uvocab, tokens=sample.tokens
                )
            prf = score(pred_ast, gold_ast)
            scores.append(prf)
            fh.write(prf.to_json(sample_id=sample.sample_id) + "\n")

    micro = micro_average(scores)
    macro = macro_average(scores)
    summary = {
        "split": split,
        "layer": layer,
        "n_samples": len(scores),
        "n_skipped": len(skipped),
        "skipped": skipped,
        "micro": micro.as_record(),
        "macro": macro.as_record(),
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary, len(skipped)


def _print_summary(summary: dict) -> None:
    print(f"{'':10s} {'precision':>10s} {'recall':>10s} {'f1':>10s}")
    for kind in ("micro", "macro"):
        row = summary[kind]
        print(
            f"{kind:10s} {row['precision']:10.4f} {row['recall']:10.4f} "
            f"{row['f1']:10.4f}"
        )


def cmd_eval(args: argparse.Namespace) -> int:
    if not args.oracle and not args.checkpoint:
        raise AstProbeError("--checkpoint is required unless --oracle is given")
    out_dir = Path(args.out)
    _echo_config(args, out_dir)
    summary, n_skipped = _eval_once(
        Path(args.data),
        Path(args.checkpoint) if args.checkpoint else None,
        args.split,
        args.layer,
        out_dir,
        oracle=args.oracle,
    )
    _print_summary(summary)
    return 1 if n_skipped else 0


# ---------------------------------------------------------------------------
# sweeps


def _sweep_point(payload: dict) -> dict:
    """Train + eval one sweep point inside its own subdirectory."""
    data_dir = Path(payload["data"])
    out_dir = Path(payload["out"])
    config = TrainConfig(**payload["config"])
    ckpt, skipped_train = _train_once(
        data_dir, out_dir, payload["layer"], payload["subspace_dim"], config
    )
    summary, skipped_eval = _eval_once(
        data_dir, ckpt, "test", payload["layer"], out_dir
    )
    return {
        "point": payload["point"],
        "value": payload["value"],
        "precision": summary["micro"]["precision"],
        "recall": summary["micro"]["recall"],
        "f1": summary["micro"]["f1"],
        "n_skipped": skipped_train + skipped_eval,
    }


def _run_sweep(args: argparse.Namespace, kind: str, values: list[int]) -> int:
    out_dir = Path(args.out)
    _echo_config(args, out_dir)
    config = dict(
        lr=args.lr,
        lam=args.lam,
        max_epochs=args.max_epochs,
        patience=min(args.patience, args.max_epochs) if args.max_epochs else 0,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    payloads = []
    for value in values:
        payloads.append(
            {
                "data": args.data,
                "out": str(out_dir / f"{kind}-{value}"),
                "layer": value if kind == "layer" else args.layer,
                "subspace_dim": value if kind == "dim" else args.subspace_dim,
                "config": config,
                "point": kind,
                "value": value,
            }
        )

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]

    rows.sort(key=lambda r: r["value"])
    with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([kind, "precision", "recall", "f1"])
        for row in rows:
            writer.writerow(
                [row["value"], f"{row['precision']:.6f}", f"{row['recall']:.6f}",
                 f"{row['f1']:.6f}"]
            )
    (out_dir / "sweep.json").write_text(
        json.dumps({"kind": kind, "points": rows}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    for row in rows:
        print(f"{kind}={row['value']:<6d} P={row['precision']:.4f} "
              f"R={row['recall']:.4f} F1={row['f1']:.4f}")
    return 1 if any(r["n_skipped"] for r in rows) else 0


def cmd_sweep_layers(args: argparse.Namespace) -> int:
    layers = [int(x) for x in args.layers.split(",") if x.strip() != ""]
    if not layers:
        raise AstProbeError("--layers must name at least one layer")
    return _run_sweep(args, "layer", layers)


def cmd_sweep_dim(args: argparse.Namespace) -> int:
    dims = [int(x) for x in args.dims.split(",") if x.strip() != ""]
    if not dims:
        raise AstProbeError("--dims must name at least one dimension")
    return _run_sweep(args, "dim", dims)


# ---------------------------------------------------------------------------
# report


def cmd_report(args: argparse.Namespace) -> int:
    rows = []
    for run in args.runs:
        run_dir = Path(run)
        summary = run_dir / "summary.json"
        sweep = run_dir / "sweep.json"
        if summary.exists():
            data = json.loads(summary.read_text(encoding="utf-8"))
            rows.append(
                (run_dir.name, data["micro"]["precision"], data["micro"]["recall"],
                 data["micro"]["f1"])
            )
        elif sweep.exists():
            data = json.loads(sweep.read_text(encoding="utf-8"))
            for point in data["points"]:
                rows.append(
                    (f"{run_dir.name}/{data['kind']}-{point['value']}",
                     point["precision"], point["recall"], point["f1"])
                )
        else:
            print(f"warning: {run} has no summary.json or sweep.json",
                  file=sys.stderr)
    if not rows:
        return 2
    width = max(len(r[0]) for r in rows)
    print(f"{'run':{width}s} {'precision':>10s} {'recall':>10s} {'f1':>10s}")
    for name, precision, recall, f1 in rows:
        print(f"{name:{width}s} {precision:10.4f} {recall:10.4f} {f1:10.4f}")
    return 0


# ---------------------------------------------------------------------------


_COMMANDS = {
    "encode": cmd_encode,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep-layers": cmd_sweep_layers,
    "sweep-dim": cmd_sweep_dim,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "report":
        _apply_env(args)
        _apply_config(args)
    try:
        return _COMMANDS[args.command](args)
    except AstProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
