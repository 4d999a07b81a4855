"""Source code -> AST via the compiled grammar bundle.

The concrete syntax tree comes back with comment nodes dropped,
zero-width tokens removed, and leaves numbered left to right. Labels
containing the "-" merge separator would make unary merging ambiguous,
so they are renamed at ingestion ("-" becomes "_").
"""

from __future__ import annotations

from . import grammars
from .errors import ParseError, UnsupportedLanguage
from .trees import MERGE_SEP, Ast, AstNode, NonTerminal, Terminal


def parse_source(code: str, language: str) -> Ast:
    """Parse `code` under the named grammar ("python", "go", "javascript")."""
    ast, _ = parse_with_token_ranges(code, language)
    return ast


def parse_with_token_ranges(
    code: str, language: str
) -> tuple[Ast, list[tuple[int, int]]]:
    """Like `parse_source`, but also return each token's byte range."""
    if language not in grammars.LANGUAGES:
        raise UnsupportedLanguage(
            f"unknown language {language!r}; supported: {', '.join(grammars.LANGUAGES)}"
        )
    lib = grammars.load_library()
    source = code.encode("utf-8")

    parser = lib.ts_parser_new()
    try:
        lang_ptr = getattr(lib, f"tree_sitter_{language}")()
        if not lib.ts_parser_set_language(parser, lang_ptr):
            raise UnsupportedLanguage(f"grammar {language!r} failed to load")
        tree = lib.ts_parser_parse_string(parser, None, source, len(source))
        if not tree:
            raise ParseError(f"{language}: parser returned no tree")
        try:
            root = lib.ts_tree_root_node(tree)
            if lib.ts_node_has_error(root):
                raise ParseError(f"{language}: grammar reported an error node")
            ranges: list[tuple[int, int]] = []
            node = _convert(lib, root, source, ranges)
            if node is None:
                raise ParseError(f"{language}: input contains no tokens")
            ast = Ast(root=node)
            ast.validate()
            return ast, ranges
        finally:
            lib.ts_tree_delete(tree)
    finally:
        lib.ts_parser_delete(parser)


def _convert(
    lib, node, source: bytes, ranges: list[tuple[int, int]]
) -> AstNode | None:
    if lib.ts_node_is_extra(node) or lib.ts_node_type(node) == b"comment":
        return None
    count = lib.ts_node_child_count(node)
    if count == 0:
        start = lib.ts_node_start_byte(node)
        end = lib.ts_node_end_byte(node)
        if start == end:
            return None  # zero-width token (e.g. layout markers)
        text = source[start:end].decode("utf-8", errors="replace")
        ranges.append((start, end))
        return Terminal(token_index=len(ranges) - 1, text=text)
    children = []
    for i in range(count):
        child = _convert(lib, lib.ts_node_child(node, i), source, ranges)
        if child is not None:
            children.append(child)
    if not children:
        return None
    label = lib.ts_node_type(node).decode("utf-8")
    if MERGE_SEP in label:
        label = label.replace(MERGE_SEP, "_")
    return NonTerminal(label=label, children=tuple(children))
