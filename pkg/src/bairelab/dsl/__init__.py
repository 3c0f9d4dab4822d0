from .ast import Node, const, dist, lift, substitute, to_source, var
from .evaluate import DomainError, NotEnclosable, enclose, eval_array, eval_ast, lipschitz
from .lexer import LexError, Token, tokenize
from .parser import (BuiltinDef, EpsDef, FuncDef, GaugeDef, LimitDef, ParseError, Program,
                     parse, parse_expr, parse_program, parse_rset)
from .poly import IrrationalBreak, NotPolynomial, level_breakpoints, pw_poly, real_roots

__all__ = [
    "Node", "const", "dist", "lift", "substitute", "to_source", "var",
    "DomainError", "NotEnclosable", "enclose", "eval_array", "eval_ast", "lipschitz",
    "LexError", "Token", "tokenize",
    "BuiltinDef", "EpsDef", "FuncDef", "GaugeDef", "LimitDef", "ParseError", "Program",
    "parse", "parse_expr", "parse_program", "parse_rset",
    "IrrationalBreak", "NotPolynomial", "level_breakpoints", "pw_poly", "real_roots",
]
