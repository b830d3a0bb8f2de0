"""Textual ``.qnl`` circuit descriptions."""

from importlib import resources

from .parser import NetlistError, parse, tokenize
from .program import Adjoint, Execution, ExecutionError, Expr, Gate, Program, execute, pretty


def corpus_files() -> dict[str, str]:
    """Bundled example netlists as ``{file name: source text}``."""
    root = resources.files(__package__) / "corpus"
    return {p.name: p.read_text(encoding="utf-8") for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".qnl")}


__all__ = [
    "Adjoint", "Execution", "ExecutionError", "Expr", "Gate", "NetlistError", "Program",
    "corpus_files", "execute", "parse", "pretty", "tokenize",
]
