"""S-expression reader used by the robot-model parser.

Atoms are symbols, double-quoted strings, integers, or floats.  ``;`` starts
a comment that runs to end of line.  Every parsed node remembers the line and
column it started on so later passes can report useful errors.
"""


class SexprError(Exception):
    """Raised on malformed input, with line/column in the message."""


class Symbol(str):
    """A bare atom, distinct from a quoted string."""

    __slots__ = ()

    def __repr__(self):
        return f"Symbol({str.__repr__(self)})"


class SList(list):
    """A parenthesized list that remembers where it started."""

    __slots__ = ("line", "col")

    def __init__(self, items=(), line=0, col=0):
        super().__init__(items)
        self.line = line
        self.col = col


_DELIMS = "()\"; \t\r\n"


class _Reader:
    def __init__(self, text, source):
        self.text = text
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message, line=None, col=None):
        line = self.line if line is None else line
        col = self.col if col is None else col
        return SexprError(f"{self.source}:{line}:{col}: {message}")

    def _advance(self, ch):
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1

    def _skip_blank(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance(ch)
            elif ch == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance(self.text[self.pos])
            else:
                return

    def _read_string(self):
        line, col = self.line, self.col
        self._advance('"')
        out = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                self._advance(ch)
                if self.pos >= len(self.text):
                    break
                esc = self.text[self.pos]
                out.append({"n": "\n", "t": "\t"}.get(esc, esc))
                self._advance(esc)
            elif ch == '"':
                self._advance(ch)
                return "".join(out)
            else:
                out.append(ch)
                self._advance(ch)
        raise self.error("unterminated string", line, col)

    def _read_atom(self):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _DELIMS:
            self._advance(self.text[self.pos])
        token = self.text[start:self.pos]
        try:
            return int(token)
        except ValueError:
            pass
        try:
            return float(token)
        except ValueError:
            pass
        return Symbol(token)

    def read(self):
        self._skip_blank()
        if self.pos >= len(self.text):
            return None
        ch = self.text[self.pos]
        if ch == "(":
            line, col = self.line, self.col
            self._advance(ch)
            items = SList(line=line, col=col)
            while True:
                self._skip_blank()
                if self.pos >= len(self.text):
                    raise self.error("unclosed '('", line, col)
                if self.text[self.pos] == ")":
                    self._advance(")")
                    return items
                items.append(self.read())
        if ch == ")":
            raise self.error("unexpected ')'")
        if ch == '"':
            return self._read_string()
        return self._read_atom()


def read_one(text, source="<string>"):
    """Parse exactly one s-expression; trailing content is an error."""
    reader = _Reader(text, source)
    node = reader.read()
    if node is None:
        raise reader.error("empty input")
    reader._skip_blank()
    if reader.pos < len(reader.text):
        raise reader.error("trailing content after expression")
    return node


def read_all(text, source="<string>"):
    """Parse every top-level s-expression in ``text``."""
    reader = _Reader(text, source)
    out = []
    while True:
        node = reader.read()
        if node is None:
            return out
        out.append(node)
