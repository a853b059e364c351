"""Experiment description language.

A spec is a ``;``-separated list of statements::

    group free_product(cyclic(2), cyclic(3));
    measure lazy_uniform(1/4) |> smooth({e,a});
    walk n=12 targets=[e,a,b]

See GRAMMAR.md at the repository root for the full reference.  Parsing also
resolves every element and subgroup literal against the declared group, so a
spec that parses is a spec that runs.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import AvezError, CapExceeded, GroupError, MeasureError, SubgroupError
from .groups import (
    Cyclic,
    DirectProduct,
    DirectProductGroup,
    FiniteTable,
    Free,
    FreeProduct,
    Group,
    Lattice,
    Subgroup,
    build_group,
)
from .measures import (
    DEFAULT_SUPPORT_CAP,
    Measure,
    conjugate,
    delta,
    lazy_uniform,
    power,
    product,
    smooth,
    truncate,
)


class SpecError(AvezError, ValueError):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        text = f"line {line}, column {col}: {message}"
        if expected:
            text += " (expected one of: " + ", ".join(expected) + ")"
        super().__init__(text)

    def to_json(self) -> dict:
        return {"error": "spec", "message": self.message, "line": self.line,
                "column": self.col, "expected": list(self.expected)}


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Elem:
    text: str

    def render(self) -> str:
        return self.text


@dataclass(frozen=True)
class ElemList:
    items: tuple[str, ...]

    def render(self) -> str:
        return "[" + ",".join(self.items) + "]"


@dataclass(frozen=True)
class SetLit:
    items: tuple[str, ...]

    def render(self) -> str:
        return "{" + ",".join(self.items) + "}"


@dataclass(frozen=True)
class Name:
    text: str

    def render(self) -> str:
        return self.text


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return v.render()


@dataclass(frozen=True)
class MeasureExpr:
    base: str  # delta | lazy_uniform | table | product
    args: tuple = ()
    transforms: tuple = ()

    def render(self) -> str:
        if self.base == "delta":
            head = "delta"
        elif self.base == "lazy_uniform":
            head = f"lazy_uniform({_render_value(self.args[0])})"
        elif self.base == "table":
            head = "table{" + ",".join(f"{g}:{_render_value(w)}" for g, w in self.args) + "}"
        else:
            head = f"product({self.args[0].render()}, {self.args[1].render()})"
        return " |> ".join([head] + [t.render() for t in self.transforms])


@dataclass(frozen=True)
class Transform:
    kind: str  # conjugate | smooth | truncate | power
    arg: Any

    def render(self) -> str:
        return f"{self.kind}({_render_value(self.arg)})"


PARAMS: dict[str, dict[str, str]] = {
    "describe": {},
    "walk": {"n": "int", "targets": "elems", "spectral": "bool"},
    "classify": {"n": "int", "targets": "elems", "window": "int", "cauchy": "rat",
                 "member": "rat", "nonmember": "rat"},
    "verify": {"n": "int", "samples": "int", "seed": "int", "radius": "int", "F": "set",
               "k": "int", "m": "int", "inject": "name"},
    "probe": {"n": "int", "radius": "int", "candidates": "elems", "window": "int",
              "cauchy": "rat", "member": "rat", "nonmember": "rat"},
    "chain": {"F": "set", "n": "int", "start": "elem", "steps": "int"},
}

TRANSFORMS = ("conjugate", "smooth", "truncate", "power")
GROUP_KINDS = ("free", "cyclic", "lattice", "free_product", "direct_product", "finite_table")
MEASURE_BASES = ("delta", "lazy_uniform", "table", "product")


@dataclass(frozen=True)
class Analysis:
    kind: str
    params: tuple = ()

    def get(self, name: str, default=None):
        for k, v in self.params:
            if k == name:
                return v
        return default

    def render(self) -> str:
        return " ".join([self.kind] + [f"{k}={_render_value(v)}" for k, v in self.params])


@dataclass(frozen=True)
class ExperimentSpec:
    group: Any
    measure: MeasureExpr | None = None
    analysis: Analysis | None = None

    def render(self) -> str:
        parts = [f"group {self.group.render()}"]
        if self.measure is not None:
            parts.append(f"measure {self.measure.render()}")
        if self.analysis is not None:
            parts.append(self.analysis.render())
        return ";\n".join(parts) + "\n"


render = ExperimentSpec.render


# ---------------------------------------------------------------------------
# scanner


_INT = re.compile(r"-?\d+")
_RAT = re.compile(r"-?\d+(?:/\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ATOM = re.compile(r"[-A-Za-z0-9^]+")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos: int | None = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, expected=(), pos: int | None = None) -> SpecError:
        line, col = self.where(pos)
        return SpecError(message, line, col, tuple(expected))

    def skip(self):
        t = self.text
        while self.pos < len(t):
            ch = t[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl + 1
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.accept(s):
            raise self.error(f"unexpected {self._show()}", (repr(s),))

    def _show(self) -> str:
        if self.pos >= len(self.text):
            return "end of input"
        return repr(self.text[self.pos:self.pos + 12].split("\n")[0])

    def regex(self, pattern: re.Pattern, what: str, expected=()) -> str:
        self.skip()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}, found {self._show()}", expected or (what,))
        self.pos = m.end()
        return m.group(0)

    def ident(self, expected=()) -> str:
        return self.regex(_IDENT, "identifier", expected)

    def integer(self) -> int:
        return int(self.regex(_INT, "integer"))

    def rational(self) -> Fraction:
        start = self.pos
        text = self.regex(_RAT, "rational p/q")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise self.error("zero denominator", pos=start) from None

    def atom(self) -> tuple[str, int]:
        """Raw element literal: a parenthesized group or a run of word characters."""
        self.skip()
        start = self.pos
        t = self.text
        if start < len(t) and t[start] == "(":
            depth = 0
            i = start
            while i < len(t):
                if t[i] == "(":
                    depth += 1
                elif t[i] == ")":
                    depth -= 1
                    if depth == 0:
                        self.pos = i + 1
                        return t[start:self.pos], start
                i += 1
            raise self.error("unbalanced parentheses in element literal", pos=start)
        m = _ATOM.match(t, start)
        if not m:
            raise self.error(f"expected an element literal, found {self._show()}", ("element",))
        self.pos = m.end()
        return m.group(0), start

    def json_object(self) -> tuple[str, int]:
        self.skip()
        start = self.pos
        t = self.text
        depth = 0
        i = start
        in_str = False
        while i < len(t):
            ch = t[i]
            if in_str:
                if ch == "\\":
                    i += 1
                elif ch == '"':
                    in_str = False
            elif ch == '"':
                in_str = True
            elif ch in "{[":
                depth += 1
            elif ch in "}]":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return t[start:self.pos], start
            i += 1
        raise self.error("unterminated JSON object", pos=start)

    def string(self) -> str:
        self.skip()
        start = self.pos
        if not self.accept('"'):
            raise self.error("expected a quoted string", ('"path"',))
        end = self.text.find('"', self.pos)
        if end < 0:
            raise self.error("unterminated string", pos=start)
        s = self.text[self.pos:end]
        self.pos = end + 1
        return s


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str, base_dir: Path | None):
        self.s = _Scanner(text)
        self.base_dir = base_dir or Path.cwd()
        self.group: Group | None = None

    # group expressions -------------------------------------------------
    def group_expr(self):
        s = self.s
        s.skip()
        start = s.pos
        kind = s.ident(GROUP_KINDS)
        if kind not in GROUP_KINDS:
            raise s.error(f"unknown group constructor {kind!r}", GROUP_KINDS, pos=start)
        s.expect("(")
        if kind in ("free", "cyclic", "lattice"):
            k = s.integer()
            desc = {"free": Free, "cyclic": Cyclic, "lattice": Lattice}[kind](k)
        elif kind == "free_product":
            factors = [self.group_expr()]
            while s.accept(","):
                factors.append(self.group_expr())
            desc = FreeProduct(tuple(factors))
        elif kind == "direct_product":
            left = self.group_expr()
            s.expect(",")
            desc = DirectProduct(left, self.group_expr())
        else:
            if s.peek('"'):
                path = Path(s.string())
                if not path.is_absolute():
                    path = self.base_dir / path
                try:
                    doc = json.loads(path.read_text())
                except (OSError, json.JSONDecodeError) as exc:
                    raise s.error(f"cannot read finite_table document: {exc}", pos=start) from None
            else:
                text, at = s.json_object()
                try:
                    doc = json.loads(text)
                except json.JSONDecodeError as exc:
                    raise s.error(f"invalid JSON: {exc.msg}", pos=at) from None
            try:
                desc = FiniteTable.from_json(doc)
            except GroupError as exc:
                raise s.error(str(exc), pos=start) from None
        s.expect(")")
        return desc

    # element literals ----------------------------------------------------
    def element(self, group: Group) -> str:
        text, at = self.s.atom()
        try:
            g = group.parse(text)
        except GroupError as exc:
            raise self.s.error(f"invalid element literal {text!r}: {exc}", pos=at) from None
        return group.format(g)

    def elem_list(self, group: Group, open_: str, close: str) -> tuple[str, ...]:
        s = self.s
        s.expect(open_)
        items = []
        if not s.accept(close):
            items.append(self.element(group))
            while s.accept(","):
                items.append(self.element(group))
            s.expect(close)
        return tuple(items)

    def subgroup(self, group: Group) -> SetLit:
        s = self.s
        s.skip()
        start = s.pos
        items = self.elem_list(group, "{", "}")
        try:
            Subgroup(group, [group.parse(x) for x in items])
        except SubgroupError as exc:
            raise s.error(f"subgroup literal fails closure check: {exc}", pos=start) from None
        return SetLit(items)

    # measures ------------------------------------------------------------
    def measure_expr(self, group: Group) -> MeasureExpr:
        s = self.s
        s.skip()
        start = s.pos
        base = s.ident(MEASURE_BASES)
        args: tuple = ()
        if base == "delta":
            pass
        elif base == "lazy_uniform":
            s.expect("(")
            args = (s.rational(),)
            s.expect(")")
        elif base == "table":
            s.expect("{")
            pairs = []
            while True:
                g = self.element(group)
                s.expect(":")
                pairs.append((g, s.rational()))
                if not s.accept(","):
                    break
            s.expect("}")
            args = tuple(pairs)
        elif base == "product":
            if not isinstance(group, DirectProductGroup):
                raise s.error("product(...) needs a direct_product group", pos=start)
            s.expect("(")
            left = self.measure_expr(group.left)
            s.expect(",")
            right = self.measure_expr(group.right)
            s.expect(")")
            args = (left, right)
        else:
            raise s.error(f"unknown measure constructor {base!r}", MEASURE_BASES, pos=start)
        transforms = []
        while s.accept("|>"):
            s.skip()
            tstart = s.pos
            kind = s.ident(TRANSFORMS)
            s.expect("(")
            if kind == "conjugate":
                arg = Elem(self.element(group))
            elif kind == "smooth":
                arg = self.subgroup(group)
            elif kind == "truncate":
                arg = s.rational()
            elif kind == "power":
                arg = s.integer()
            else:
                raise s.error(f"unknown transform {kind!r}", TRANSFORMS, pos=tstart)
            s.expect(")")
            transforms.append(Transform(kind, arg))
        expr = MeasureExpr(base, args, tuple(transforms))
        try:
            build_measure(expr, group)
        except CapExceeded:
            raise
        except (AvezError, ValueError) as exc:
            raise s.error(f"measure does not resolve: {exc}", pos=start) from None
        return expr

    # analyses --------------------------------------------------------------
    def analysis(self, kind: str) -> Analysis:
        s = self.s
        schema = PARAMS[kind]
        params = []
        seen = set()
        while True:
            s.skip()
            if s.at_end() or s.peek(";"):
                break
            start = s.pos
            name = s.ident(tuple(schema))
            if name not in schema:
                raise s.error(f"unknown parameter {name!r} for {kind}", tuple(schema), pos=start)
            if name in seen:
                raise s.error(f"duplicate parameter {name!r}", pos=start)
            seen.add(name)
            s.expect("=")
            params.append((name, self.value(schema[name])))
        return Analysis(kind, tuple(params))

    def value(self, typ: str):
        s = self.s
        if typ == "int":
            return s.integer()
        if typ == "rat":
            return s.rational()
        if typ == "bool":
            word = s.ident(("true", "false"))
            if word not in ("true", "false"):
                raise s.error(f"expected true or false, found {word!r}", ("true", "false"))
            return word == "true"
        if typ == "name":
            return Name(s.ident())
        if typ == "elem":
            return Elem(self.element(self.group))
        if typ == "elems":
            return ElemList(self.elem_list(self.group, "[", "]"))
        if typ == "set":
            return self.subgroup(self.group)
        raise AssertionError(typ)

    # statements ------------------------------------------------------------
    def spec(self) -> ExperimentSpec:
        s = self.s
        group_desc = None
        measure = None
        analysis = None
        first = True
        while not s.at_end():
            if not first:
                s.expect(";")
                if s.at_end():
                    break
            first = False
            s.skip()
            start = s.pos
            kw = s.ident(("group", "measure") + tuple(PARAMS))
            if kw == "group":
                if group_desc is not None:
                    raise s.error("duplicate group statement", pos=start)
                group_desc = self.group_expr()
                try:
                    self.group = build_group(group_desc)
                except GroupError as exc:
                    raise s.error(str(exc), pos=start) from None
            elif kw == "measure":
                if self.group is None:
                    raise s.error("measure before group", ("group",), pos=start)
                if measure is not None:
                    raise s.error("duplicate measure statement", pos=start)
                measure = self.measure_expr(self.group)
            elif kw in PARAMS:
                if self.group is None:
                    raise s.error(f"{kw} before group", ("group",), pos=start)
                if analysis is not None:
                    raise s.error("only one analysis statement is allowed", pos=start)
                analysis = self.analysis(kw)
            else:
                raise s.error(f"unknown statement {kw!r}", ("group", "measure") + tuple(PARAMS), pos=start)
        if group_desc is None:
            raise s.error("spec has no group statement", ("group",))
        return ExperimentSpec(group_desc, measure, analysis)


def parse_spec(text: str, base_dir: str | Path | None = None) -> ExperimentSpec:
    """Parse and resolve a spec; raises :class:`SpecError` with line/column on failure."""
    return _Parser(text, Path(base_dir) if base_dir is not None else None).spec()


# ---------------------------------------------------------------------------
# resolution


def build_measure(expr: MeasureExpr, group: Group, cap: int = DEFAULT_SUPPORT_CAP) -> Measure:
    if expr.base == "delta":
        mu = delta(group)
    elif expr.base == "lazy_uniform":
        mu = lazy_uniform(group, expr.args[0])
    elif expr.base == "table":
        weights: dict = {}
        for text, w in expr.args:
            g = group.parse(text)
            weights[g] = weights.get(g, Fraction(0)) + w
        mu = Measure.from_weights(group, weights)
    elif expr.base == "product":
        if not isinstance(group, DirectProductGroup):
            raise MeasureError("product(...) needs a direct_product group")
        mu = product(build_measure(expr.args[0], group.left, cap),
                     build_measure(expr.args[1], group.right, cap), group)
    else:
        raise MeasureError(f"unknown measure constructor {expr.base!r}")
    for t in expr.transforms:
        if t.kind == "conjugate":
            mu = conjugate(mu, group.parse(t.arg.text))
        elif t.kind == "smooth":
            mu = smooth(mu, Subgroup(group, [group.parse(x) for x in t.arg.items]), cap)
        elif t.kind == "truncate":
            mu = truncate(mu, t.arg)
        elif t.kind == "power":
            mu = power(mu, t.arg, cap)
        else:
            raise MeasureError(f"unknown transform {t.kind!r}")
    return mu


@dataclass
class Experiment:
    spec: ExperimentSpec
    group: Group
    measure: Measure | None
    extras: dict = field(default_factory=dict)

    def elements(self, value) -> list:
        return [self.group.parse(x) for x in value.items]

    def subgroup(self, value) -> Subgroup:
        return Subgroup(self.group, self.elements(value))

    def smoothing_subgroup(self) -> Subgroup | None:
        """F when the measure pipeline ends in smooth(F), optionally followed by power(k)."""
        if self.spec.measure is None:
            return None
        ts = list(self.spec.measure.transforms)
        while ts and ts[-1].kind == "power":
            ts.pop()
        if ts and ts[-1].kind == "smooth":
            return self.subgroup(ts[-1].arg)
        return None


def resolve(spec: ExperimentSpec, cap: int = DEFAULT_SUPPORT_CAP, floating: bool = False) -> Experiment:
    group = build_group(spec.group)
    mu = None
    if spec.measure is not None:
        mu = build_measure(spec.measure, group, cap)
        if floating:
            mu = mu.to_float()
    return Experiment(spec, group, mu)
