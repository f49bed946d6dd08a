"""Functional-notation expressions for intensional constraints.

Expression trees are immutable. Two leaf flavors exist: `Param` appears in
predicate bodies; after substitution only `VarRef` and `IntLiteral` leaves
remain (a "ground" expression). Evaluation is pure integer arithmetic with
booleans encoded as 1/0, `div`/`mod` truncating toward zero, and all results
confined to the signed 64-bit range (overflow raises `EvalError`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

from .errors import EvalError, FormatError

# operator -> arity; the closed XCSP 2.1 functional vocabulary
OPERATORS: Dict[str, int] = {
    "neg": 1, "abs": 1, "not": 1,
    "add": 2, "sub": 2, "mul": 2, "div": 2, "mod": 2, "pow": 2,
    "min": 2, "max": 2,
    "eq": 2, "ne": 2, "ge": 2, "gt": 2, "le": 2, "lt": 2,
    "and": 2, "or": 2, "xor": 2, "iff": 2,
    "if": 3,
}

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class IntLiteral:
    value: int


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class VarRef:
    index: int


@dataclass(frozen=True)
class Apply:
    op: str
    args: Tuple["Expr", ...]


Expr = Union[IntLiteral, Param, VarRef, Apply]


# -- parsing ------------------------------------------------------------------


def _tokenize(text: str) -> List[str]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "(),":
            tokens.append(c)
            i += 1
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        elif c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise FormatError("unexpected character %r in expression" % c)
    return tokens


def parse_functional(text: str, formal_params: Sequence[str]) -> Expr:
    """Parse functional notation such as ``and(eq(X0,X1),gt(X2,0))``.

    Identifiers must either be operators from the closed set or appear in
    `formal_params`; anything else is a parse error.
    """
    tokens = _tokenize(text)
    pos = 0
    params = set(formal_params)

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise FormatError("unexpected end of expression")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise FormatError("expected %r, found %r" % (expected, tok))
        pos += 1
        return tok

    def parse_expr() -> Expr:
        tok = take()
        if tok.lstrip("-").isdigit():
            return IntLiteral(int(tok))
        if tok in "(),":
            raise FormatError("unexpected token %r" % tok)
        if peek() == "(":
            if tok not in OPERATORS:
                raise FormatError("unknown operator %r" % tok)
            take("(")
            args = [parse_expr()]
            while peek() == ",":
                take(",")
                args.append(parse_expr())
            take(")")
            want = OPERATORS[tok]
            if len(args) != want:
                raise FormatError(
                    "operator %r expects %d argument(s), got %d" % (tok, want, len(args))
                )
            return Apply(tok, tuple(args))
        if tok not in params:
            raise FormatError("identifier %r is not a declared parameter" % tok)
        return Param(tok)

    result = parse_expr()
    if pos != len(tokens):
        raise FormatError("trailing tokens after expression: %r" % tokens[pos:])
    return result


# -- substitution -------------------------------------------------------------


def substitute(body: Expr, formal_params: Sequence[str],
               effective_params: Sequence[Union[VarRef, int]]) -> Expr:
    """Positionally replace each formal parameter; result is ground."""
    if len(formal_params) != len(effective_params):
        raise EvalError(
            "predicate expects %d parameter(s), got %d"
            % (len(formal_params), len(effective_params))
        )
    mapping: Dict[str, Expr] = {}
    for name, actual in zip(formal_params, effective_params):
        mapping[name] = actual if isinstance(actual, VarRef) else IntLiteral(int(actual))

    def walk(e: Expr) -> Expr:
        if isinstance(e, Param):
            return mapping[e.name]
        if isinstance(e, Apply):
            return Apply(e.op, tuple(walk(a) for a in e.args))
        return e

    return walk(body)


def var_refs(e: Expr) -> List[int]:
    """Distinct variable indices, in first-appearance order."""
    seen: List[int] = []

    def walk(node: Expr):
        if isinstance(node, VarRef):
            if node.index not in seen:
                seen.append(node.index)
        elif isinstance(node, Apply):
            for a in node.args:
                walk(a)

    walk(e)
    return seen


# -- evaluation ---------------------------------------------------------------


def _check64(v: int) -> int:
    if not (INT64_MIN <= v <= INT64_MAX):
        raise EvalError("arithmetic overflow outside 64-bit range")
    return v


def _trunc_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _int_pow(a: int, b: int) -> int:
    if b < 0:
        raise EvalError("pow with negative exponent")
    result = 1
    for _ in range(b):
        result = _check64(result * a)
    return result


def evaluate(expr: Expr, assignment: Dict[int, int]) -> int:
    """Evaluate a ground expression; raises EvalError on div/mod by zero,
    overflow, or a negative pow exponent."""
    if isinstance(expr, IntLiteral):
        return expr.value
    if isinstance(expr, VarRef):
        return assignment[expr.index]
    if isinstance(expr, Param):
        raise EvalError("unsubstituted parameter %r" % expr.name)

    op = expr.op
    if op == "if":
        cond = evaluate(expr.args[0], assignment)
        branch = expr.args[1] if cond != 0 else expr.args[2]
        return evaluate(branch, assignment)

    args = [evaluate(a, assignment) for a in expr.args]
    if op == "neg":
        return _check64(-args[0])
    if op == "abs":
        return _check64(abs(args[0]))
    if op == "not":
        return 0 if args[0] != 0 else 1
    a, b = args[0], args[1] if len(args) > 1 else 0
    if op == "add":
        return _check64(a + b)
    if op == "sub":
        return _check64(a - b)
    if op == "mul":
        return _check64(a * b)
    if op == "div":
        return _trunc_div(a, b)
    if op == "mod":
        return _check64(a - b * _trunc_div(a, b))
    if op == "pow":
        return _int_pow(a, b)
    if op == "min":
        return min(a, b)
    if op == "max":
        return max(a, b)
    if op == "eq":
        return 1 if a == b else 0
    if op == "ne":
        return 1 if a != b else 0
    if op == "ge":
        return 1 if a >= b else 0
    if op == "gt":
        return 1 if a > b else 0
    if op == "le":
        return 1 if a <= b else 0
    if op == "lt":
        return 1 if a < b else 0
    if op == "and":
        return 1 if a != 0 and b != 0 else 0
    if op == "or":
        return 1 if a != 0 or b != 0 else 0
    if op == "xor":
        return 1 if (a != 0) != (b != 0) else 0
    if op == "iff":
        return 1 if (a != 0) == (b != 0) else 0
    raise EvalError("unknown operator %r" % op)


def satisfied(expr: Expr, assignment: Dict[int, int]) -> bool:
    """Constraint reading of an expression: true iff it evaluates to 1.

    An erroring evaluation (division by zero, overflow) counts as unsatisfied.
    """
    try:
        return evaluate(expr, assignment) == 1
    except EvalError:
        return False


# -- debug serialization ------------------------------------------------------


def to_obj(e: Expr):
    """Plain-list encoding for debug dumps; `from_obj` inverts it."""
    if isinstance(e, IntLiteral):
        return ["int", e.value]
    if isinstance(e, Param):
        return ["param", e.name]
    if isinstance(e, VarRef):
        return ["var", e.index]
    return ["apply", e.op, [to_obj(a) for a in e.args]]


def from_obj(obj) -> Expr:
    tag = obj[0]
    if tag == "int":
        return IntLiteral(obj[1])
    if tag == "param":
        return Param(obj[1])
    if tag == "var":
        return VarRef(obj[1])
    if tag == "apply":
        return Apply(obj[1], tuple(from_obj(a) for a in obj[2]))
    raise ValueError("bad expression encoding: %r" % (obj,))


def to_text(e: Expr) -> str:
    """Render back to functional notation (VarRef as ``var<i>``)."""
    if isinstance(e, IntLiteral):
        return str(e.value)
    if isinstance(e, Param):
        return e.name
    if isinstance(e, VarRef):
        return "var%d" % e.index
    return "%s(%s)" % (e.op, ",".join(to_text(a) for a in e.args))
