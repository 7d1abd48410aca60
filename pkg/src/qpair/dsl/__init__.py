"""Scenario-file language: lexer, parser, pretty-printer and elaborator."""

from .elaborate import ElaborationResult, Plan, PlannedCommand, elaborate, load
from .lexer import Diagnostic, Span, tokenize
from .nodes import SessionAst
from .parser import ParseResult, parse
from .printer import render, render_expr, render_statement

__all__ = [
    "Diagnostic", "ElaborationResult", "ParseResult", "Plan", "PlannedCommand", "SessionAst", "Span",
    "elaborate", "load", "parse", "render", "render_expr", "render_statement", "tokenize",
]
