"""LP text format writer and reader, plus solution-file import.

Grammar accepted by :func:`read_lp` (keywords are case-insensitive)::

    file       := comment* objective constraints? bounds? integers* "end"
    objective  := ("minimize" | "maximize") [name ":"] expr
    constraints:= "subject to" { [name ":"] expr sense number }
    bounds     := "bounds" { bound-line }
    bound-line := number "<=" name "<=" number | name sense number
                | number "<=" name | name "free"
    integers   := ("binaries" | "generals") name*
    expr       := [sign] term { sign term }
    term       := number [name] | name
    sense      := "<=" | ">=" | "=" | "=<" | "=>" | "<" | ">"
    comment    := "\\" to end of line

Numbers accept ``inf``/``infinity`` in bounds. A constant term in the
objective is kept as the model's objective constant.

Solution files hold ``name value`` pairs one per line; ``#`` starts a
comment, and a ``# Objective value = v`` comment carries the objective.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .model import MilpModel, NAME_RE

KEYWORDS = {"minimize", "minimum", "min", "maximize", "maximum", "max", "subject", "such", "st", "s.t.",
            "bounds", "bound", "binaries", "binary", "bin", "generals", "general", "gen", "end", "free",
            "inf", "infinity"}
_SENSE_MAP = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "="}
_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<op><=|>=|=<|=>|<|>|=|\+|-|:)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
)


class LPParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return repr(float(x)) if x != int(x) or abs(x) >= 1e15 else str(int(x))


def _check_names(model: MilpModel) -> None:
    for v in model.variables:
        if not NAME_RE.match(v.name) or v.name.lower() in KEYWORDS:
            raise ValueError(f"variable name {v.name!r} cannot be written in LP format")
    for row in model.constraints:
        if not NAME_RE.match(row.name) or row.name.lower() in KEYWORDS:
            raise ValueError(f"constraint name {row.name!r} cannot be written in LP format")


def _expr(model: MilpModel, coeffs: dict[int, float]) -> str:
    parts = []
    for j, a in coeffs.items():
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(a))} {model.variables[j].name}")
    if not parts:
        return ""
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def dumps_lp(model: MilpModel) -> str:
    _check_names(model)
    out = [f"\\ Problem: {model.name}", "Maximize" if model.maximize else "Minimize"]
    obj = _expr(model, model.objective)
    if model.objective_constant:
        const = f"{'-' if model.objective_constant < 0 else '+'} {_fmt(abs(model.objective_constant))}"
        obj = f"{obj} {const}" if obj else const
    out.append(f" obj: {obj or '0'}")
    out.append("Subject To")
    for row in model.constraints:
        body = _expr(model, row.coeffs)
        if not body:
            body = f"0 {model.variables[0].name}" if model.variables else "0"
        out.append(f" {row.name}: {body} {row.sense} {_fmt(row.rhs)}")
    out.append("Bounds")
    for v in model.variables:
        if v.kind == "binary":
            continue
        if math.isinf(v.lb) and math.isinf(v.ub):
            out.append(f" {v.name} free")
        else:
            out.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    generals = [v.name for v in model.variables if v.kind == "integer"]
    if binaries:
        out.append("Binaries")
        out.append(" " + " ".join(binaries))
    if generals:
        out.append("Generals")
        out.append(" " + " ".join(generals))
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(model: MilpModel, path) -> None:
    Path(path).write_text(dumps_lp(model))


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            if line.lower().startswith("s.t.", pos):
                toks.append(_Tok("name", "s.t.", ln, pos + 1))
                pos += 4
                continue
            m = _TOKEN.match(line, pos)
            if not m:
                raise LPParseError(f"unexpected character {line[pos]!r}", ln, pos + 1)
            toks.append(_Tok(m.lastgroup, m.group(), ln, pos + 1))
            pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.model = MilpModel()
        self.bounds: dict[str, list[float]] = {}
        self.kinds: dict[str, str] = {}
        self.order: list[str] = []

    # token helpers
    def peek(self, k: int = 0) -> Optional[_Tok]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("", "", 1, 1)
            raise LPParseError("unexpected end of file", last.line, last.col + len(last.text))
        self.i += 1
        return tok

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.peek() or (self.toks[-1] if self.toks else _Tok("", "", 1, 1))
        raise LPParseError(msg, tok.line, tok.col)

    def section(self) -> Optional[str]:
        tok = self.peek()
        if tok is None or tok.kind != "name":
            return None
        w = tok.text.lower()
        if w in ("minimize", "minimum", "min"):
            return "min"
        if w in ("maximize", "maximum", "max"):
            return "max"
        if w in ("subject", "such"):
            nxt = self.peek(1)
            if nxt is not None and nxt.text.lower() in ("to", "that"):
                return "st"
        if w in ("st", "s.t."):
            return "st"
        if w in ("bounds", "bound"):
            return "bounds"
        if w in ("binaries", "binary", "bin"):
            return "bin"
        if w in ("generals", "general", "gen"):
            return "gen"
        if w == "end":
            return "end"
        return None

    def skip_section_word(self, sec: str) -> None:
        self.take()
        if sec == "st" and self.toks[self.i - 1].text.lower() in ("subject", "such"):
            self.take()

    def var(self, name: str) -> int:
        if name not in self.model._names:
            self.model.add_var(name)
            self.order.append(name)
        return self.model.index(name)

    def number(self) -> float:
        sign = 1.0
        tok = self.take()
        while tok.kind == "op" and tok.text in "+-":
            sign *= -1.0 if tok.text == "-" else 1.0
            tok = self.take()
        if tok.kind == "num":
            return sign * float(tok.text)
        if tok.kind == "name" and tok.text.lower() in ("inf", "infinity"):
            return sign * math.inf
        self.error(f"expected a number, got {tok.text!r}", tok)

    def label(self) -> Optional[str]:
        tok, nxt = self.peek(), self.peek(1)
        if tok is not None and tok.kind == "name" and nxt is not None and nxt.text == ":":
            self.i += 2
            return tok.text
        return None

    def expr(self, stop_on_sense: bool):
        coeffs: dict[int, float] = {}
        const = 0.0
        first = True
        while True:
            tok = self.peek()
            if tok is None or self.section() is not None:
                break
            if tok.kind == "op" and tok.text in _SENSE_MAP:
                if stop_on_sense:
                    break
                self.error("comparison in objective", tok)
            sign = 1.0
            saw_sign = False
            while tok is not None and tok.kind == "op" and tok.text in "+-":
                sign *= -1.0 if tok.text == "-" else 1.0
                saw_sign = True
                self.i += 1
                tok = self.peek()
            if not first and not saw_sign:
                self.error("expected '+' or '-' between terms", tok)
            if tok is None:
                self.error("dangling sign")
            coef = 1.0
            if tok.kind == "num":
                coef = float(tok.text)
                self.i += 1
                tok = self.peek()
                if tok is None or tok.kind != "name" or self.section() is not None:
                    const += sign * coef
                    first = False
                    continue
            if tok.kind != "name":
                self.error(f"expected a variable name, got {tok.text!r}", tok)
            j = self.var(tok.text)
            self.i += 1
            coeffs[j] = coeffs.get(j, 0.0) + sign * coef
            first = False
        return coeffs, const

    def parse(self) -> MilpModel:
        sec = self.section()
        if sec not in ("min", "max"):
            self.error("file must start with Minimize or Maximize")
        self.skip_section_word(sec)
        maximize = sec == "max"
        self.label()
        obj, const = self.expr(stop_on_sense=False)
        while True:
            sec = self.section()
            if sec is None:
                if self.peek() is None:
                    self.error("missing End")
                self.error(f"unexpected token {self.peek().text!r}")
            self.skip_section_word(sec)
            if sec == "end":
                break
            if sec == "st":
                self.constraints()
            elif sec == "bounds":
                self.bound_lines()
            elif sec in ("bin", "gen"):
                while self.peek() is not None and self.section() is None:
                    tok = self.take()
                    if tok.kind != "name":
                        self.error(f"expected a variable name, got {tok.text!r}", tok)
                    self.var(tok.text)
                    self.kinds[tok.text] = "binary" if sec == "bin" else "integer"
            else:
                self.error("objective section may appear only once", self.toks[self.i - 1])
        if self.peek() is not None:
            self.error("text after End")
        m = self.model
        for name, kind in self.kinds.items():
            v = m.variables[m.index(name)]
            v.kind = kind
            if kind == "binary":
                v.lb, v.ub = 0.0, 1.0
        for name, (lo, hi) in self.bounds.items():
            v = m.variables[m.index(name)]
            if self.kinds.get(name) == "binary":
                lo, hi = max(lo, 0.0), min(hi, 1.0)
            v.lb, v.ub = lo, hi
        m.set_objective(obj, maximize, const)
        return m

    def constraints(self) -> None:
        while self.peek() is not None and self.section() is None:
            start = self.peek()
            name = self.label()
            coeffs, const = self.expr(stop_on_sense=True)
            tok = self.take()
            if tok.kind != "op" or tok.text not in _SENSE_MAP:
                self.error("expected a comparison operator", tok)
            rhs = self.number()
            if math.isinf(rhs):
                self.error("infinite right-hand side", start)
            self.model.add_constr(coeffs, _SENSE_MAP[tok.text], rhs - const, name)

    def bound_lines(self) -> None:
        while self.peek() is not None and self.section() is None:
            line = self.peek().line
            toks = []
            while self.peek() is not None and self.peek().line == line and self.section() is None:
                toks.append(self.take())
            self._bound(toks)

    def _bound(self, toks: list[_Tok]) -> None:
        def num(ts):
            text = "".join(t.text for t in ts).lower()
            try:
                return float(text)
            except ValueError:
                self.error(f"bad number {text!r}", ts[0])

        names = [k for k, t in enumerate(toks) if t.kind == "name" and t.text.lower() not in ("inf", "infinity", "free")]
        if len(names) != 1:
            self.error("a bound line names exactly one variable", toks[0])
        k = names[0]
        name = toks[k].text
        self.var(name)
        lo, hi = self.bounds.get(name, [0.0, math.inf])
        before, after = toks[:k], toks[k + 1:]
        if len(after) == 1 and after[0].text.lower() == "free" and not before:
            lo, hi = -math.inf, math.inf
        else:
            if before:
                op = before[-1]
                if op.text not in _SENSE_MAP:
                    self.error("expected a comparison operator", op)
                v = num(before[:-1])
                s = _SENSE_MAP[op.text]
                if s == "<=":
                    lo = v
                elif s == ">=":
                    hi = v
                else:
                    lo = hi = v
            if after:
                op = after[0]
                if op.text not in _SENSE_MAP:
                    self.error("expected a comparison operator", op)
                v = num(after[1:])
                s = _SENSE_MAP[op.text]
                if s == "<=":
                    hi = v
                elif s == ">=":
                    lo = v
                else:
                    lo = hi = v
            if not before and not after:
                self.error("empty bound", toks[0])
        self.bounds[name] = [lo, hi]


def loads_lp(text: str) -> MilpModel:
    return _Parser(text).parse()


def read_lp(path) -> MilpModel:
    return loads_lp(Path(path).read_text())


@dataclass
class Solution:
    values: dict[str, float] = field(default_factory=dict)
    objective: Optional[float] = None

    def vector(self, model: MilpModel):
        import numpy as np
        x = np.zeros(model.n_vars)
        for name, v in self.values.items():
            x[model.index(name)] = v
        return x


_OBJ_LINE = re.compile(r"#\s*objective\s*value\s*=\s*(\S+)", re.IGNORECASE)


def loads_solution(text: str) -> Solution:
    sol = Solution()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _OBJ_LINE.match(line)
            if m:
                try:
                    sol.objective = float(m.group(1))
                except ValueError:
                    raise LPParseError(f"bad objective value {m.group(1)!r}", ln, raw.index(m.group(1)) + 1)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LPParseError("expected 'name value'", ln, 1)
        name, value = parts
        if not NAME_RE.match(name):
            raise LPParseError(f"bad variable name {name!r}", ln, raw.index(name) + 1)
        try:
            sol.values[name] = float(value)
        except ValueError:
            raise LPParseError(f"bad value {value!r}", ln, raw.index(value, raw.index(name) + len(name)) + 1)
    return sol


def import_solution(path) -> Solution:
    return loads_solution(Path(path).read_text())


def dumps_solution(model: MilpModel, x, objective: float) -> str:
    lines = [f"# Objective value = {objective!r}"]
    lines += [f"{v.name} {float(x[j])!r}" for j, v in enumerate(model.variables)]
    return "\n".join(lines) + "\n"


def write_solution(model: MilpModel, x, objective: float, path) -> None:
    Path(path).write_text(dumps_solution(model, x, objective))
