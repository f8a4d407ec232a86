"""A tiny expression language used as a hermetic test subject.

Files hold integer/boolean functions, one per line::

    #doc Returns the given number increased by one.
    fn inc(x) = x + 1

Generated suites are files of ``test NAME: EXPR`` lines; a test passes when
its expression evaluates to ``true``. The language is small on purpose: it
gives the pipeline a real parse step (syntax and name-resolution errors play
the role of compiler errors), a real run step, and a way to loop forever so
timeouts can be exercised without a native toolchain.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Union


class MiniSyntaxError(Exception):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(message)


class MiniRuntimeError(Exception):
    """Evaluation failed (bad types, unknown name, division by zero)."""


class MiniTimeout(Exception):
    """Evaluation exceeded its deadline."""


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Num, Bool, Var, Unary, Binary, If, Call]


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple[str, ...]
    body: Expr | None  # None marks an abstract declaration
    body_text: str
    doc: str | None
    signature: str  # verbatim head, e.g. "fn inc(x)"
    line: int


@dataclass(frozen=True)
class TestDecl:
    name: str
    expr: Expr
    source: str
    line: int


@dataclass(frozen=True)
class ParseIssue:
    line: int
    message: str


@dataclass(frozen=True)
class ParsedFile:
    functions: tuple[FunctionDecl, ...]
    tests: tuple[TestDecl, ...]
    issues: tuple[ParseIssue, ...]


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>==|!=|<=|>=|[-+*/%<>(),:=]))"
)

_KEYWORDS = {"fn", "test", "if", "then", "else", "and", "or", "not", "true", "false"}


def _tokenize(text: str, line: int) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise MiniSyntaxError(f"unexpected character {rest[0]!r}", line)
        pos = m.end()
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int")))
        elif m.lastgroup == "name":
            name = m.group("name")
            tokens.append((name, name) if name in _KEYWORDS else ("name", name))
        else:
            tokens.append((m.group("op"), m.group("op")))
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[tuple[str, str]], line: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self) -> tuple[str, str]:
        if self.pos >= len(self.tokens):
            raise MiniSyntaxError("unexpected end of expression", self.line)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> str:
        tok, value = self.next()
        if tok != kind:
            raise MiniSyntaxError(f"expected {kind!r}, found {value!r}", self.line)
        return value

    def parse(self) -> Expr:
        expr = self.expression()
        if self.pos != len(self.tokens):
            _, value = self.tokens[self.pos]
            raise MiniSyntaxError(f"trailing input starting at {value!r}", self.line)
        return expr

    def expression(self) -> Expr:
        if self.peek() == "if":
            self.next()
            cond = self.expression()
            self.expect("then")
            then = self.expression()
            self.expect("else")
            orelse = self.expression()
            return If(cond, then, orelse)
        return self.or_expr()

    def or_expr(self) -> Expr:
        node = self.and_expr()
        while self.peek() == "or":
            self.next()
            node = Binary("or", node, self.and_expr())
        return node

    def and_expr(self) -> Expr:
        node = self.not_expr()
        while self.peek() == "and":
            self.next()
            node = Binary("and", node, self.not_expr())
        return node

    def not_expr(self) -> Expr:
        if self.peek() == "not":
            self.next()
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        node = self.additive()
        if self.peek() in ("==", "!=", "<", "<=", ">", ">="):
            op, _ = self.next()
            node = Binary(op, node, self.additive())
        return node

    def additive(self) -> Expr:
        node = self.multiplicative()
        while self.peek() in ("+", "-"):
            op, _ = self.next()
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Expr:
        node = self.unary()
        while self.peek() in ("*", "/", "%"):
            op, _ = self.next()
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek() == "-":
            self.next()
            return Unary("-", self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok, value = self.next()
        if tok == "int":
            return Num(int(value))
        if tok == "true":
            return Bool(True)
        if tok == "false":
            return Bool(False)
        if tok == "name":
            if self.peek() == "(":
                self.next()
                args: list[Expr] = []
                if self.peek() != ")":
                    args.append(self.expression())
                    while self.peek() == ",":
                        self.next()
                        args.append(self.expression())
                self.expect(")")
                return Call(value, tuple(args))
            return Var(value)
        if tok == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if tok == "if":
            # allow a parenthesized position to start a conditional
            self.pos -= 1
            return self.expression()
        raise MiniSyntaxError(f"unexpected token {value!r}", self.line)


def parse_expression(text: str, line: int = 1) -> Expr:
    return _ExprParser(_tokenize(text, line), line).parse()


# --- file parsing ----------------------------------------------------------

_FN_RE = re.compile(r"^fn\s+([A-Za-z_]\w*)\s*\(([^)]*)\)\s*(=)?\s*(.*)$")
_TEST_RE = re.compile(r"^test\s+([A-Za-z_]\w*)\s*:\s*(.*)$")


def _strip_comment(line: str) -> str:
    # The language has no string literals, so the first '#' always opens a comment.
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def parse_source(text: str) -> ParsedFile:
    """Parse one file. Problems become issues; parsing never raises.

    Documentation blocks are ``#doc`` lines; a block attaches to the nearest
    following ``fn`` declaration, with blank lines and plain comments allowed
    in between. A later block supersedes an earlier unattached one.
    """
    functions: list[FunctionDecl] = []
    tests: list[TestDecl] = []
    issues: list[ParseIssue] = []
    pending_doc: list[str] = []
    doc_block_open = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            doc_block_open = False
            continue
        if stripped.startswith("#doc"):
            if not doc_block_open:
                pending_doc = []
                doc_block_open = True
            pending_doc.append(stripped[len("#doc"):].strip())
            continue
        if stripped.startswith("#"):
            doc_block_open = False
            continue

        code = _strip_comment(raw).strip()
        doc_block_open = False
        if not code:
            continue

        fn_match = _FN_RE.match(code)
        test_match = _TEST_RE.match(code)
        try:
            if fn_match:
                name, raw_params, eq, body_src = fn_match.groups()
                params = tuple(p.strip() for p in raw_params.split(",") if p.strip())
                seen: set[str] = set()
                for p in params:
                    if not re.fullmatch(r"[A-Za-z_]\w*", p):
                        raise MiniSyntaxError(f"bad parameter name {p!r}", lineno)
                    if p in seen:
                        raise MiniSyntaxError(f"duplicate parameter {p!r}", lineno)
                    seen.add(p)
                if eq:
                    if not body_src.strip():
                        raise MiniSyntaxError("missing body after '='", lineno)
                    body: Expr | None = parse_expression(body_src, lineno)
                    body_text = body_src.strip()
                    head = code[: code.index("=")].rstrip()
                else:
                    if body_src.strip():
                        raise MiniSyntaxError("unexpected text after declaration", lineno)
                    body = None
                    body_text = ""
                    head = code
                doc = "\n".join(pending_doc) if pending_doc else None
                pending_doc = []
                functions.append(
                    FunctionDecl(name, params, body, body_text, doc, head, lineno)
                )
            elif test_match:
                name, expr_src = test_match.groups()
                if not expr_src.strip():
                    raise MiniSyntaxError("missing test expression", lineno)
                tests.append(TestDecl(name, parse_expression(expr_src, lineno), code, lineno))
                pending_doc = []
            else:
                raise MiniSyntaxError(f"unrecognized line {code!r}", lineno)
        except MiniSyntaxError as exc:
            issues.append(ParseIssue(exc.line, str(exc)))
            pending_doc = []

    return ParsedFile(tuple(functions), tuple(tests), tuple(issues))


# --- name resolution ("compilation") ----------------------------------------

@dataclass(frozen=True)
class CompileIssue:
    file: str
    line: int
    message: str


def _free_names(expr: Expr, bound: frozenset[str], out: list[tuple[str, int | None]]) -> None:
    if isinstance(expr, Var):
        if expr.name not in bound:
            out.append((expr.name, None))
    elif isinstance(expr, Unary):
        _free_names(expr.operand, bound, out)
    elif isinstance(expr, Binary):
        _free_names(expr.left, bound, out)
        _free_names(expr.right, bound, out)
    elif isinstance(expr, If):
        for sub in (expr.cond, expr.then, expr.orelse):
            _free_names(sub, bound, out)
    elif isinstance(expr, Call):
        out.append((expr.name, len(expr.args)))
        for arg in expr.args:
            _free_names(arg, bound, out)


def resolve_names(
    functions: dict[str, FunctionDecl],
    expr: Expr,
    bound: tuple[str, ...],
    file: str,
    line: int,
) -> list[CompileIssue]:
    """Unknown names, calls to unknown or bodyless functions, arity mismatches."""
    issues: list[CompileIssue] = []
    refs: list[tuple[str, int | None]] = []
    _free_names(expr, frozenset(bound), refs)
    for name, arity in refs:
        if arity is None:
            issues.append(CompileIssue(file, line, f"unknown name {name!r}"))
            continue
        fn = functions.get(name)
        if fn is None:
            issues.append(CompileIssue(file, line, f"unknown function {name!r}"))
        elif fn.body is None:
            issues.append(CompileIssue(file, line, f"function {name!r} has no body"))
        elif len(fn.params) != arity:
            issues.append(
                CompileIssue(
                    file,
                    line,
                    f"function {name!r} takes {len(fn.params)} argument(s), got {arity}",
                )
            )
    return issues


# --- evaluation --------------------------------------------------------------

class _Budget:
    __slots__ = ("steps", "deadline")

    def __init__(self, timeout: float | None):
        self.steps = 0
        self.deadline = None if timeout is None else time.monotonic() + timeout

    def tick(self) -> None:
        self.steps += 1
        if self.deadline is not None and self.steps % 256 == 0:
            if time.monotonic() > self.deadline:
                raise MiniTimeout("evaluation deadline exceeded")


@dataclass(frozen=True)
class _TailCall:
    name: str
    args: tuple[object, ...]


def _require_int(value: object, op: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise MiniRuntimeError(f"operator {op!r} needs integers")
    return value


def _require_bool(value: object, where: str) -> bool:
    if not isinstance(value, bool):
        raise MiniRuntimeError(f"{where} needs a boolean")
    return value


def _eval(
    expr: Expr,
    env: dict[str, object],
    functions: dict[str, FunctionDecl],
    budget: _Budget,
    tail: bool,
) -> object:
    budget.tick()
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Bool):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise MiniRuntimeError(f"unknown name {expr.name!r}") from None
    if isinstance(expr, Unary):
        value = _eval(expr.operand, env, functions, budget, False)
        if expr.op == "-":
            return -_require_int(value, "-")
        return not _require_bool(value, "'not'")
    if isinstance(expr, Binary):
        if expr.op in ("and", "or"):
            left = _require_bool(_eval(expr.left, env, functions, budget, False), expr.op)
            if expr.op == "and" and not left:
                return False
            if expr.op == "or" and left:
                return True
            return _require_bool(_eval(expr.right, env, functions, budget, False), expr.op)
        left = _eval(expr.left, env, functions, budget, False)
        right = _eval(expr.right, env, functions, budget, False)
        op = expr.op
        if op in ("==", "!="):
            if isinstance(left, bool) != isinstance(right, bool):
                raise MiniRuntimeError("cannot compare a boolean with an integer")
            return (left == right) if op == "==" else (left != right)
        lhs, rhs = _require_int(left, op), _require_int(right, op)
        if op == "+":
            return lhs + rhs
        if op == "-":
            return lhs - rhs
        if op == "*":
            return lhs * rhs
        if op == "/":
            if rhs == 0:
                raise MiniRuntimeError("division by zero")
            return lhs // rhs
        if op == "%":
            if rhs == 0:
                raise MiniRuntimeError("modulo by zero")
            return lhs % rhs
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == ">":
            return lhs > rhs
        return lhs >= rhs
    if isinstance(expr, If):
        cond = _require_bool(_eval(expr.cond, env, functions, budget, False), "'if' condition")
        branch = expr.then if cond else expr.orelse
        return _eval(branch, env, functions, budget, tail)
    if isinstance(expr, Call):
        args = tuple(_eval(a, env, functions, budget, False) for a in expr.args)
        if tail:
            # Direct tail calls loop in the trampoline below, so endless
            # recursion burns the deadline instead of the interpreter stack.
            return _TailCall(expr.name, args)
        return call_function(functions, expr.name, args, budget)
    raise MiniRuntimeError(f"cannot evaluate {expr!r}")


def call_function(
    functions: dict[str, FunctionDecl],
    name: str,
    args: tuple[object, ...],
    budget: _Budget,
) -> object:
    while True:
        fn = functions.get(name)
        if fn is None or fn.body is None:
            raise MiniRuntimeError(f"unknown or bodyless function {name!r}")
        if len(args) != len(fn.params):
            raise MiniRuntimeError(
                f"function {name!r} takes {len(fn.params)} argument(s), got {len(args)}"
            )
        result = _eval(fn.body, dict(zip(fn.params, args)), functions, budget, True)
        if isinstance(result, _TailCall):
            name, args = result.name, result.args
            continue
        return result


def evaluate_expression(
    functions: dict[str, FunctionDecl],
    expr: Expr,
    *,
    timeout: float | None = None,
) -> object:
    """Evaluate ``expr`` with no local bindings; raises on error or deadline."""
    budget = _Budget(timeout)
    result = _eval(expr, {}, functions, budget, False)
    return result
