"""Command-line front end: expression parsing, JSON reports, subcommands."""
from .expr import ExponentError, ExprSyntaxError, format_map, lower, parse_expr, parse_map
from .main import build_parser, main, run

__all__ = [
    "ExponentError",
    "ExprSyntaxError",
    "build_parser",
    "format_map",
    "lower",
    "main",
    "parse_expr",
    "parse_map",
    "run",
]
