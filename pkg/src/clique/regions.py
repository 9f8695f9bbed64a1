"""Boolean region expressions over dataset columns.

Grammar::

    expr    := conj ("or" conj)*
    conj    := neg ("and" neg)*
    neg     := "not" neg | "(" expr ")" | compare
    compare := operand OP operand        OP in < <= > >= == !=
    operand := NUMBER | 'string' | NAME | abs(NAME)

``&``/``|``/``!`` are accepted for ``and``/``or``/``not``.  Comparisons
are strict exactly as written, e.g. ``v2 > -0.333333`` for the region
above -1/3.
"""

from __future__ import annotations

import operator
import re

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<str>'[^']*'|\"[^\"]*\")"
    r"|(?P<op><=|>=|==|!=|<|>)"
    r"|(?P<punct>[()&|!])"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*))"
)
_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt,
        ">=": operator.ge, "==": operator.eq, "!=": operator.ne}
_KEYWORDS = {"and": "&", "or": "|", "not": "!"}


class RegionError(ValueError):
    pass


def _tokenize(text: str):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise RegionError(f"cannot parse region expression at {text[pos:]!r}")
        pos = m.end()
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "name" and value.lower() in _KEYWORDS:
            kind, value = "punct", _KEYWORDS[value.lower()]
        tokens.append((kind, value))
    return tokens


class _Parser:
    def __init__(self, text, columns):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.columns = columns
        self.referenced = []

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise RegionError(f"expected {want!r} in region expression, got {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self):
        mask = self.expr()
        if self.pos != len(self.tokens):
            raise RegionError(f"unexpected {self.peek()[1]!r} in region expression")
        return mask

    def expr(self):
        mask = self.conj()
        while self.peek() == ("punct", "|"):
            self.take()
            mask = mask | self.conj()
        return mask

    def conj(self):
        mask = self.neg()
        while self.peek() == ("punct", "&"):
            self.take()
            mask = mask & self.neg()
        return mask

    def neg(self):
        tok = self.peek()
        if tok == ("punct", "!"):
            self.take()
            return ~self.neg()
        if tok == ("punct", "("):
            self.take()
            mask = self.expr()
            self.take("punct", ")")
            return mask
        left = self.operand()
        op = self.take("op")[1]
        right = self.operand()
        try:
            return np.asarray(_OPS[op](left, right), dtype=bool)
        except TypeError:
            raise RegionError(f"cannot compare with {op!r}: mismatched operand types") from None

    def operand(self):
        kind, value = self.take()
        if kind == "num":
            return float(value)
        if kind == "str":
            return value[1:-1]
        if kind == "name":
            if value == "abs" and self.peek() == ("punct", "("):
                self.take()
                col = self.column(self.take("name")[1])
                self.take("punct", ")")
                if col.dtype == object:
                    raise RegionError("abs() needs a numeric column")
                return np.abs(col)
            return self.column(value)
        raise RegionError(f"unexpected {value!r} in region expression")

    def column(self, name):
        if name not in self.columns:
            raise RegionError(f"region expression references unknown column {name!r}")
        self.referenced.append(name)
        return self.columns[name]


def dataset_columns(dataset) -> dict:
    """Name -> array for every feature and the label (categorical as strings)."""
    cols = {}
    for j, s in enumerate(dataset.schema):
        cols[s.name] = (np.array(dataset.column_strings(j), dtype=object)
                        if s.is_categorical else dataset.X[:, j])
    if dataset.is_classification:
        cols[dataset.label_name] = np.array(dataset.label_strings(), dtype=object)
    else:
        cols[dataset.label_name] = dataset.y
    return cols


def evaluate(expression: str, columns: dict) -> np.ndarray:
    """Boolean mask for ``expression`` over equal-length ``columns``."""
    if not expression or not expression.strip():
        raise RegionError("empty region expression")
    mask = _Parser(expression, columns).parse()
    n = len(next(iter(columns.values())))
    if mask.shape != (n,):
        raise RegionError("region expression must reference at least one column")
    return mask
