"""Task programs: the non-expert tier of the language.

A task program is a short sequential script over the actions an expert
declared in the robot model.  The surface syntax is a small Python subset:

    # deliver both packages
    n = 2
    goto("mail room")
    for i in range(n):
        pickup(f"package {i}")
    goto("office 0")
    give("package 0")

Statements are assignments (string, f-string, integer, or ``prompt("...")``
on the right-hand side), action calls with positional arguments, and counted
``for`` loops over ``range``.  There are no conditionals and no user-defined
functions, so every program unrolls to a fixed, finite list of steps; the
runtime numbers those steps from 1 and resumes at a step boundary after a
recovery.  Loop bounds must be integer literals or variables already
assigned an integer literal, which keeps unrolling static; prompt-valued
variables may flow into f-strings and action arguments but not into bounds.
"""

from __future__ import annotations

from dataclasses import dataclass


class TaskError(Exception):
    """Malformed task program."""


# Expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class StrExpr:
    """Literal or interpolated string: parts are ("text", s) or ("var", name)."""

    parts: tuple

    def eval(self, env):
        out = []
        for kind, value in self.parts:
            if kind == "text":
                out.append(value)
            else:
                if value not in env:
                    raise TaskError(f"undefined variable {value!r}")
                out.append(str(env[value]))
        return "".join(out)


@dataclass(frozen=True)
class IntExpr:
    value: int

    def eval(self, env):
        return self.value


@dataclass(frozen=True)
class VarExpr:
    name: str

    def eval(self, env):
        if self.name not in env:
            raise TaskError(f"undefined variable {self.name!r}")
        return env[self.name]


@dataclass(frozen=True)
class PromptExpr:
    question: StrExpr


# Statements ----------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    name: str
    expr: object
    line: int


@dataclass(frozen=True)
class ActionCall:
    name: str
    args: tuple
    line: int


@dataclass(frozen=True)
class ForLoop:
    var: str
    count: object
    body: tuple
    line: int


@dataclass(frozen=True)
class Step:
    """One unrolled executable step (1-based index)."""

    index: int
    stmt: object  # Assign or ActionCall
    loop_env: tuple  # ((var, int), ...) bindings from enclosing loops


@dataclass
class TaskProgram:
    source: str
    body: tuple
    steps: tuple

    def __len__(self):
        return len(self.steps)


# Lexer ---------------------------------------------------------------------

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _tokenize(line, lineno, source):
    """Tokens: (kind, value) with kinds ident/int/str/fstr/punct."""
    tokens = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch in "(),=:":
            tokens.append(("punct", ch))
            i += 1
            continue
        if ch == '"' or (ch == "f" and i + 1 < n and line[i + 1] == '"'):
            is_f = ch == "f"
            if is_f:
                i += 1
            i += 1
            buf = []
            while i < n and line[i] != '"':
                if line[i] == "\\" and i + 1 < n:
                    esc = line[i + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    i += 2
                else:
                    buf.append(line[i])
                    i += 1
            if i >= n:
                raise TaskError(f"{source}:{lineno}: unterminated string")
            i += 1
            tokens.append(("fstr" if is_f else "str", "".join(buf)))
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and line[i + 1].isdigit()):
            j = i + 1
            while j < n and line[j].isdigit():
                j += 1
            tokens.append(("int", int(line[i:j])))
            i = j
            continue
        if ch in _IDENT_START:
            j = i + 1
            while j < n and line[j] in _IDENT_CONT:
                j += 1
            tokens.append(("ident", line[i:j]))
            i = j
            continue
        raise TaskError(f"{source}:{lineno}: unexpected character {ch!r}")
    return tokens


def _split_fstring(text, lineno, source):
    parts = []
    buf = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "{":
            if i + 1 < len(text) and text[i + 1] == "{":
                buf.append("{")
                i += 2
                continue
            j = text.find("}", i)
            if j < 0:
                raise TaskError(f"{source}:{lineno}: unclosed '{{' in f-string")
            name = text[i + 1 : j].strip()
            if not name or not all(c in _IDENT_CONT for c in name) or name[0] not in _IDENT_START:
                raise TaskError(f"{source}:{lineno}: bad f-string field {name!r}")
            if buf:
                parts.append(("text", "".join(buf)))
                buf = []
            parts.append(("var", name))
            i = j + 1
        elif ch == "}":
            if i + 1 < len(text) and text[i + 1] == "}":
                buf.append("}")
                i += 2
                continue
            raise TaskError(f"{source}:{lineno}: stray '}}' in f-string")
        else:
            buf.append(ch)
            i += 1
    if buf:
        parts.append(("text", "".join(buf)))
    return tuple(parts)


class _LineParser:
    def __init__(self, tokens, lineno, source):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.source = source

    def error(self, message):
        return TaskError(f"{self.source}:{self.lineno}: {message}")

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tk, tv = self.peek()
        if tk is None:
            raise self.error("unexpected end of line")
        if kind is not None and tk != kind:
            raise self.error(f"expected {kind}, got {tv!r}")
        if value is not None and tv != value:
            raise self.error(f"expected {value!r}, got {tv!r}")
        self.pos += 1
        return tv

    def at_end(self):
        return self.pos >= len(self.tokens)

    def parse_value(self, allow_prompt=False):
        kind, value = self.peek()
        if kind == "str":
            self.take()
            return StrExpr((("text", value),) if value else ())
        if kind == "fstr":
            self.take()
            return StrExpr(_split_fstring(value, self.lineno, self.source))
        if kind == "int":
            self.take()
            return IntExpr(value)
        if kind == "ident":
            if value == "prompt":
                if not allow_prompt:
                    raise self.error("prompt() is only allowed as an assignment value")
                self.take()
                self.take("punct", "(")
                question = self.parse_value()
                if not isinstance(question, StrExpr):
                    raise self.error("prompt() takes a string question")
                self.take("punct", ")")
                return PromptExpr(question)
            self.take()
            return VarExpr(value)
        raise self.error(f"expected a value, got {value!r}")


def _parse_block(lines, start, indent, source):
    """Parse statements at exactly `indent`, returning (statements, next_line)."""
    body = []
    i = start
    while i < len(lines):
        lineno, line_indent, tokens = lines[i]
        if line_indent < indent:
            break
        if line_indent > indent:
            raise TaskError(f"{source}:{lineno}: unexpected indentation")
        p = _LineParser(tokens, lineno, source)
        kind, value = p.peek()
        if kind == "ident" and value == "for":
            p.take()
            var = p.take("ident")
            p.take("ident", "in")
            if p.take("ident") != "range":
                raise p.error("for loops iterate over range(...)")
            p.take("punct", "(")
            count = p.parse_value()
            if not isinstance(count, (IntExpr, VarExpr)):
                raise p.error("range bound must be an integer or variable")
            p.take("punct", ")")
            p.take("punct", ":")
            if not p.at_end():
                raise p.error("for body starts on the next line")
            inner, i = _parse_block(lines, i + 1, _next_indent(lines, i + 1, indent, source), source)
            if not inner:
                raise TaskError(f"{source}:{lineno}: empty for body")
            body.append(ForLoop(var, count, tuple(inner), lineno))
            continue
        if kind == "ident":
            # lookahead: assignment or call
            nk, nv = p.tokens[p.pos + 1] if p.pos + 1 < len(p.tokens) else (None, None)
            if nk == "punct" and nv == "=":
                name = p.take("ident")
                p.take("punct", "=")
                expr = p.parse_value(allow_prompt=True)
                if not p.at_end():
                    raise p.error("trailing tokens after assignment")
                body.append(Assign(name, expr, lineno))
                i += 1
                continue
            if nk == "punct" and nv == "(":
                name = p.take("ident")
                p.take("punct", "(")
                args = []
                if p.peek() != ("punct", ")"):
                    while True:
                        args.append(p.parse_value())
                        if p.peek() == ("punct", ","):
                            p.take()
                            continue
                        break
                p.take("punct", ")")
                if not p.at_end():
                    raise p.error("trailing tokens after action call")
                body.append(ActionCall(name, tuple(args), lineno))
                i += 1
                continue
        raise TaskError(f"{source}:{lineno}: expected an assignment, action call, or for loop")
    return body, i


def _next_indent(lines, i, outer, source):
    if i >= len(lines):
        raise TaskError(f"{source}: for loop at end of file has no body")
    lineno, indent, _ = lines[i]
    if indent <= outer:
        raise TaskError(f"{source}:{lineno}: for body must be indented")
    return indent


def _unroll(body, static_env, loop_env, steps, source):
    for stmt in body:
        if isinstance(stmt, ForLoop):
            if isinstance(stmt.count, IntExpr):
                count = stmt.count.value
            else:
                name = stmt.count.name
                if name in dict(loop_env):
                    count = dict(loop_env)[name]
                elif name in static_env:
                    count = static_env[name]
                else:
                    raise TaskError(
                        f"{source}:{stmt.line}: loop bound {name!r} is not a known integer"
                    )
            if not isinstance(count, int) or count < 0:
                raise TaskError(f"{source}:{stmt.line}: loop bound must be a non-negative integer")
            for k in range(count):
                _unroll(stmt.body, static_env, loop_env + ((stmt.var, k),), steps, source)
        else:
            if isinstance(stmt, Assign) and isinstance(stmt.expr, IntExpr):
                static_env[stmt.name] = stmt.expr.value
            elif isinstance(stmt, Assign):
                static_env.pop(stmt.name, None)
            steps.append(Step(len(steps) + 1, stmt, loop_env))


def parse_task(text, source="<task>"):
    raw = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(line) - len(line.lstrip(" \t"))
        if "\t" in line[:indent]:
            raise TaskError(f"{source}:{lineno}: indent with spaces, not tabs")
        tokens = _tokenize(line, lineno, source)
        if tokens:
            raw.append((lineno, indent, tokens))
    if not raw:
        raise TaskError(f"{source}: empty task program")
    first_indent = raw[0][1]
    if first_indent != 0:
        raise TaskError(f"{source}:{raw[0][0]}: top-level statements must not be indented")
    body, consumed = _parse_block(raw, 0, 0, source)
    if consumed != len(raw):
        lineno = raw[consumed][0]
        raise TaskError(f"{source}:{lineno}: unexpected indentation")
    steps = []
    _unroll(tuple(body), {}, (), steps, source)
    if not steps:
        raise TaskError(f"{source}: task program has no steps")
    return TaskProgram(source, tuple(body), tuple(steps))


def load_task(path):
    with open(path, encoding="utf-8") as f:
        return parse_task(f.read(), source=str(path))


def eval_arg(expr, env, loop_env):
    """Evaluate an action argument or assignment value (prompts excluded)."""
    scope = dict(env)
    scope.update(dict(loop_env))
    return expr.eval(scope)
