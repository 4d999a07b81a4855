"""Compiled-grammar bundle: build and load the shared parsing library.

The repo vendors the grammar runtime and the generated parser tables
for python, go, and javascript under ``grammars/`` (see the NOTICE file
there). This module compiles them into one shared library on first use
and exposes the raw C entry points through ctypes.

Resolution order for the bundle:

1. ``ASTPROBE_GRAMMAR_LIB`` environment variable (path to a prebuilt
   shared library),
2. ``<repo>/grammars/build/astprobe-grammars.so``, compiled on demand
   when a C compiler is available.
"""

from __future__ import annotations

import ctypes
import os
import shutil
import subprocess
import sys
import threading
from pathlib import Path

from .errors import GrammarBuildError

LANGUAGES = ("python", "go", "javascript")

_lock = threading.Lock()
_lib: ctypes.CDLL | None = None


class TSNode(ctypes.Structure):
    _fields_ = [
        ("context", ctypes.c_uint32 * 4),
        ("id", ctypes.c_void_p),
        ("tree", ctypes.c_void_p),
    ]


def grammars_root() -> Path:
    # src/astprobe/grammars.py -> repo root; works for editable installs
    return Path(__file__).resolve().parents[2] / "grammars"


def bundle_path() -> Path:
    override = os.environ.get("ASTPROBE_GRAMMAR_LIB")
    if override:
        return Path(override)
    suffix = ".dylib" if sys.platform == "darwin" else ".so"
    return grammars_root() / "build" / f"astprobe-grammars{suffix}"


def build_bundle(force: bool = False) -> Path:
    """Compile runtime + grammars into the bundle. Idempotent."""
    target = bundle_path()
    if target.exists() and not force:
        return target
    root = grammars_root()
    runtime = root / "runtime"
    if not runtime.is_dir():
        raise GrammarBuildError(
            f"grammar sources not found under {root}; set ASTPROBE_GRAMMAR_LIB "
            "to a prebuilt bundle instead"
        )
    compiler = os.environ.get("CC") or shutil.which("cc") or shutil.which("gcc") or shutil.which("clang")
    if compiler is None:
        raise GrammarBuildError("no C compiler found (set CC or install gcc/clang)")

    target.parent.mkdir(parents=True, exist_ok=True)
    objects: list[Path] = []

    def compile_unit(source: Path, include_dirs: list[Path], obj: Path) -> None:
        cmd = [compiler, "-c", "-O2", "-fPIC", "-std=c11"]
        for inc in include_dirs:
            cmd += ["-I", str(inc)]
        cmd += [str(source), "-o", str(obj)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise GrammarBuildError(f"compiling {source.name} failed:\n{proc.stderr}")
        objects.append(obj)

    build_dir = target.parent
    compile_unit(
        runtime / "src" / "lib.c",
        [runtime / "include", runtime / "src"],
        build_dir / "runtime.o",
    )
    for language in LANGUAGES:
        src = root / language / "src"
        compile_unit(src / "parser.c", [src], build_dir / f"{language}_parser.o")
        scanner = src / "scanner.c"
        if scanner.exists():
            compile_unit(scanner, [src], build_dir / f"{language}_scanner.o")

    link = [compiler, "-shared", *map(str, objects), "-o", str(target)]
    proc = subprocess.run(link, capture_output=True, text=True)
    if proc.returncode != 0:
        raise GrammarBuildError(f"linking the bundle failed:\n{proc.stderr}")
    for obj in objects:
        obj.unlink(missing_ok=True)
    return target


def load_library() -> ctypes.CDLL:
    """Load (building if needed) the bundle and declare the C signatures."""
    global _lib
    with _lock:
        if _lib is not None:
            return _lib
        path = bundle_path()
        if not path.exists():
            build_bundle()
        try:
            lib = ctypes.CDLL(str(path))
        except OSError as exc:
            raise GrammarBuildError(f"cannot load grammar bundle {path}: {exc}") from exc
        _declare(lib)
        _lib = lib
        return lib


def _declare(lib: ctypes.CDLL) -> None:
    c = ctypes
    lib.ts_parser_new.restype = c.c_void_p
    lib.ts_parser_new.argtypes = []
    lib.ts_parser_delete.restype = None
    lib.ts_parser_delete.argtypes = [c.c_void_p]
    lib.ts_parser_set_language.restype = c.c_bool
    lib.ts_parser_set_language.argtypes = [c.c_void_p, c.c_void_p]
    lib.ts_parser_parse_string.restype = c.c_void_p
    lib.ts_parser_parse_string.argtypes = [c.c_void_p, c.c_void_p, c.c_char_p, c.c_uint32]
    lib.ts_tree_delete.restype = None
    lib.ts_tree_delete.argtypes = [c.c_void_p]
    lib.ts_tree_root_node.restype = TSNode
    lib.ts_tree_root_node.argtypes = [c.c_void_p]
    for name, restype in [
        ("ts_node_child_count", c.c_uint32),
        ("ts_node_start_byte", c.c_uint32),
        ("ts_node_end_byte", c.c_uint32),
        ("ts_node_is_named", c.c_bool),
        ("ts_node_is_extra", c.c_bool),
        ("ts_node_is_missing", c.c_bool),
        ("ts_node_has_error", c.c_bool),
        ("ts_node_is_error", c.c_bool),
        ("ts_node_type", c.c_char_p),
    ]:
        fn = getattr(lib, name)
        fn.restype = restype
        fn.argtypes = [TSNode]
    lib.ts_node_child.restype = TSNode
    lib.ts_node_child.argtypes = [TSNode, c.c_uint32]
    for language in LANGUAGES:
        fn = getattr(lib, f"tree_sitter_{language}")
        fn.restype = c.c_void_p
        fn.argtypes = []


def main(argv: list[str] | None = None) -> int:
    """`python -m astprobe.grammars build [--force]`"""
    args = sys.argv[1:] if argv is None else argv
    if not args or args[0] != "build":
        print("usage: python -m astprobe.grammars build [--force]", file=sys.stderr)
        return 2
    path = build_bundle(force="--force" in args)
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
