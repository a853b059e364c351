"""Group backends with canonical normal forms.

Elements are plain hashable values (ints and tuples of ints); the group object
owns the arithmetic.  Equal elements always have identical keys, so measures
can use them directly as dictionary keys.

Backends and their keys:

* ``free(d)``          reduced word, tuple of nonzero ints (``i+1`` is the
                       i-th generator, ``-(i+1)`` its inverse)
* ``cyclic(m)``        residue ``0..m-1``
* ``finite_table``     row index of the multiplication table
* ``free_product``     tuple of syllable codes, adjacent codes from different
                       factors, no identity syllables
* ``direct_product``   pair ``(left, right)``
* ``lattice(d)``       integer vector as a tuple

Each backend gets one or more letters when it is built, allocated left to
right through the descriptor and skipping ``e``.  Letters drive the textual
element encoding (``ab^-1a``, ``b2``, ``(e,c)``, ``(3,-1)``).
"""
from __future__ import annotations

import itertools
import json
import re
import string
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Iterator

from .errors import (
    BallCapExceeded,
    ElementError,
    GroupError,
    MixedGroupError,
    SubgroupError,
    TableNotAGroup,
)

DEFAULT_BALL_CAP = 2_000_000

_LETTERS = [c for c in string.ascii_lowercase if c != "e"]


# ---------------------------------------------------------------------------
# descriptors


@dataclass(frozen=True)
class Free:
    rank: int

    def render(self) -> str:
        return f"free({self.rank})"


@dataclass(frozen=True)
class Cyclic:
    order: int

    def render(self) -> str:
        return f"cyclic({self.order})"


@dataclass(frozen=True)
class FiniteTable:
    mul: tuple[tuple[int, ...], ...]
    inv: tuple[int, ...]
    identity: int = 0
    gens: tuple[int, ...] | None = None

    @property
    def order(self) -> int:
        return len(self.mul)

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "order": self.order,
            "mul": [x for row in self.mul for x in row],
            "inv": list(self.inv),
            "id": self.identity,
        }
        if self.gens is not None:
            doc["gens"] = list(self.gens)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteTable":
        try:
            order = int(doc["order"])
            flat = [int(x) for x in doc["mul"]]
            inv = tuple(int(x) for x in doc["inv"])
            ident = int(doc.get("id", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise GroupError(f"malformed finite_table document: {exc}") from None
        if order < 1 or len(flat) != order * order:
            raise GroupError("finite_table: 'mul' must be a row-major order x order table")
        rows = tuple(tuple(flat[i * order:(i + 1) * order]) for i in range(order))
        gens = doc.get("gens")
        return cls(rows, inv, ident, None if gens is None else tuple(int(g) for g in gens))

    def render(self) -> str:
        return "finite_table(" + json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + ")"


@dataclass(frozen=True)
class FreeProduct:
    factors: tuple

    def render(self) -> str:
        return "free_product(" + ", ".join(f.render() for f in self.factors) + ")"


@dataclass(frozen=True)
class DirectProduct:
    left: Any
    right: Any

    def render(self) -> str:
        return f"direct_product({self.left.render()}, {self.right.render()})"


@dataclass(frozen=True)
class Lattice:
    dim: int

    def render(self) -> str:
        return f"lattice({self.dim})"


Descriptor = Free | Cyclic | FiniteTable | FreeProduct | DirectProduct | Lattice


def descriptor_to_json(desc) -> dict:
    if isinstance(desc, Free):
        return {"kind": "free", "rank": desc.rank}
    if isinstance(desc, Cyclic):
        return {"kind": "cyclic", "order": desc.order}
    if isinstance(desc, Lattice):
        return {"kind": "lattice", "dim": desc.dim}
    if isinstance(desc, FiniteTable):
        return {"kind": "finite_table", **desc.to_json()}
    if isinstance(desc, FreeProduct):
        return {"kind": "free_product", "factors": [descriptor_to_json(f) for f in desc.factors]}
    if isinstance(desc, DirectProduct):
        return {"kind": "direct_product", "left": descriptor_to_json(desc.left),
                "right": descriptor_to_json(desc.right)}
    raise GroupError(f"unknown descriptor {desc!r}")


def descriptor_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "free":
        return Free(int(doc["rank"]))
    if kind == "cyclic":
        return Cyclic(int(doc["order"]))
    if kind == "lattice":
        return Lattice(int(doc["dim"]))
    if kind == "finite_table":
        return FiniteTable.from_json(doc)
    if kind == "free_product":
        return FreeProduct(tuple(descriptor_from_json(f) for f in doc["factors"]))
    if kind == "direct_product":
        return DirectProduct(descriptor_from_json(doc["left"]), descriptor_from_json(doc["right"]))
    raise GroupError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# base class


_TOKEN = re.compile(r"([a-zA-Z])(?:\^(-?\d+)|(\d+))?")


class Group:
    """Common interface of all backends.

    ``mul``/``inv`` validate their operands; the underscored variants skip
    validation and are what the convolution engines call in hot loops.
    """

    descriptor: Any
    identity: Any
    generators: tuple

    def __eq__(self, other):
        return isinstance(other, Group) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return f"<group {self.descriptor.render()}>"

    @property
    def name(self) -> str:
        return self.descriptor.render()

    # arithmetic -------------------------------------------------------
    def _mul(self, g, h):
        raise NotImplementedError

    def _inv(self, g):
        raise NotImplementedError

    def contains(self, g) -> bool:
        raise NotImplementedError

    def check(self, g):
        if not self.contains(g):
            raise ElementError(f"{g!r} is not a canonical element of {self.name}")
        return g

    def mul(self, g, h):
        return self._mul(self.check(g), self.check(h))

    def inv(self, g):
        return self._inv(self.check(g))

    def conj(self, g, x):
        """Return ``g^-1 x g``."""
        return self._mul(self._mul(self._inv(g), x), g)

    def word_length(self, g) -> int:
        raise NotImplementedError

    # finiteness -------------------------------------------------------
    order: int | None = None

    @property
    def is_finite(self) -> bool:
        return self.order is not None

    def elements(self) -> list:
        if self.order is None:
            raise GroupError(f"{self.name} is infinite")
        return self.ball(self.order)

    # text encoding ----------------------------------------------------
    def format(self, g) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    # enumeration ------------------------------------------------------
    def ball(self, radius: int, cap: int = DEFAULT_BALL_CAP) -> list:
        """Elements of word length <= radius, breadth first, each sphere sorted by key."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        seen = {self.identity}
        out = [self.identity]
        layer = [self.identity]
        for r in range(1, radius + 1):
            fresh = set()
            for x in layer:
                for s in self.generators:
                    y = self._mul(x, s)
                    if y not in seen:
                        fresh.add(y)
            if not fresh:
                break
            if len(seen) + len(fresh) > cap:
                raise BallCapExceeded(cap, r - 1)
            layer = sorted(fresh)
            seen.update(layer)
            out.extend(layer)
        return out

    def sphere_sizes(self, radius: int) -> list[int]:
        sizes = [0] * (radius + 1)
        for g in self.ball(radius):
            sizes[self.word_length(g)] += 1
        return sizes

    def same_group(self, other: "Group"):
        if self != other:
            raise MixedGroupError(self.name, other.name)


# ---------------------------------------------------------------------------
# free groups


class FreeGroup(Group):
    def __init__(self, rank: int, letters: list[str]):
        if rank < 1:
            raise GroupError(f"free group rank must be >= 1, got {rank}")
        self.descriptor = Free(rank)
        self.rank = rank
        self.letters = letters
        self.identity = ()
        gens = []
        for i in range(1, rank + 1):
            gens += [(i,), (-i,)]
        self.generators = tuple(gens)
        self._index = {c: i + 1 for i, c in enumerate(letters)}

    def contains(self, g) -> bool:
        if not isinstance(g, tuple):
            return False
        prev = 0
        for x in g:
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank or x == -prev:
                return False
            prev = x
        return True

    def _mul(self, g, h):
        i = 0
        n = min(len(g), len(h))
        lg = len(g)
        while i < n and g[lg - 1 - i] == -h[i]:
            i += 1
        if i:
            return g[:lg - i] + h[i:]
        return g + h

    def _inv(self, g):
        return tuple(-x for x in reversed(g))

    def word_length(self, g) -> int:
        return len(self.check(g))

    def format(self, g) -> str:
        if not g:
            return "e"
        parts = []
        for x, run in itertools.groupby(g):
            k = len(list(run)) * (1 if x > 0 else -1)
            c = self.letters[abs(x) - 1]
            parts.append(c if k == 1 else f"{c}^{k}")
        return "".join(parts)

    def letter_power(self, letter: str, k: int):
        i = self._index[letter]
        return (i,) * k if k >= 0 else (-i,) * (-k)

    def parse(self, text: str):
        return _parse_word(self, text, self._token)

    def _token(self, letter, power, digits):
        if letter not in self._index:
            raise ElementError(f"unknown letter {letter!r} for {self.name}")
        if digits is not None:
            k = int(digits)
        else:
            k = 1 if power is None else int(power)
        return self.letter_power(letter, k)


def _parse_word(group: Group, text: str, token):
    s = "".join(text.split())
    if not s:
        raise ElementError(f"empty element literal for {group.name}")
    if s in ("e", "1"):
        return group.identity
    pos = 0
    g = group.identity
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ElementError(f"cannot parse element {text!r} of {group.name} at offset {pos}")
        letter, power, digits = m.groups()
        if letter == "e" and power is None and digits is None:
            x = group.identity
        else:
            x = token(letter, power, digits)
        g = group._mul(g, x)
        pos = m.end()
    return g


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup(Group):
    """Finite group given by a validated multiplication table."""

    def __init__(self, descriptor, table, inverse, identity, gens, letter: str):
        self.descriptor = descriptor
        self.table = table
        self.inverse = inverse
        self.identity = identity
        self.order = len(table)
        self.letter = letter
        self.generators = tuple(gens)
        self._lengths = self._bfs()

    def _bfs(self):
        dist = {self.identity: 0}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for s in self.generators:
                y = self.table[x][s]
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def contains(self, g) -> bool:
        return isinstance(g, int) and not isinstance(g, bool) and 0 <= g < self.order

    def _mul(self, g, h):
        return self.table[g][h]

    def _inv(self, g):
        return self.inverse[g]

    def word_length(self, g) -> int:
        try:
            return self._lengths[self.check(g)]
        except KeyError:
            raise GroupError(f"{g} is not reachable from the generating set of {self.name}") from None

    def elements(self) -> list:
        return list(range(self.order))

    def format(self, g) -> str:
        if g == self.identity:
            return "e"
        return f"{self.letter}{g}"

    def parse(self, text: str):
        return _parse_word(self, text, self._token)

    def _token(self, letter, power, digits):
        if letter != self.letter or digits is None or power is not None:
            raise ElementError(f"expected {self.letter}<index> for {self.name}")
        g = int(digits)
        if not self.contains(g):
            raise ElementError(f"index {g} out of range for {self.name}")
        return g


class CyclicGroup(FiniteGroup):
    def __init__(self, order: int, letter: str, all_nontrivial: bool = False):
        if order < 2:
            raise GroupError(f"cyclic group order must be >= 2, got {order}")
        table = tuple(tuple((i + j) % order for j in range(order)) for i in range(order))
        inverse = tuple((-i) % order for i in range(order))
        if all_nontrivial:
            gens = list(range(1, order))
        else:
            gens = sorted({1, order - 1})
        super().__init__(Cyclic(order), table, inverse, 0, gens, letter)

    def format(self, g) -> str:
        if g == 0:
            return "e"
        return self.letter if g == 1 else f"{self.letter}{g}"

    def _token(self, letter, power, digits):
        if letter != self.letter:
            raise ElementError(f"unknown letter {letter!r} for {self.name}")
        k = int(digits) if digits is not None else (1 if power is None else int(power))
        return k % self.order


def validate_table(desc: FiniteTable) -> None:
    n = desc.order
    mul, inv, e = desc.mul, desc.inv, desc.identity
    if not 0 <= e < n:
        raise GroupError(f"identity index {e} out of range")
    if len(inv) != n or any(len(row) != n for row in mul):
        raise GroupError("finite_table dimensions do not match its order")
    for row in mul:
        for x in row:
            if not 0 <= x < n:
                raise TableNotAGroup("closure", (row, x))
    for x in range(n):
        if mul[e][x] != x or mul[x][e] != x:
            raise TableNotAGroup("identity", (e, x))
    for x in range(n):
        if mul[x][inv[x]] != e or mul[inv[x]][x] != e:
            raise TableNotAGroup("inverse", (x, inv[x]))
    for x in range(n):
        mx = mul[x]
        for y in range(n):
            xy = mx[y]
            my = mul[y]
            mxy = mul[xy]
            for z in range(n):
                if mxy[z] != mx[my[z]]:
                    raise TableNotAGroup("associativity", (x, y, z))
    if desc.gens is not None:
        gs = set(desc.gens)
        if any(not 0 <= g < n for g in gs) or any(inv[g] not in gs for g in gs):
            raise GroupError("finite_table generators must be a symmetric set of valid indices")


# ---------------------------------------------------------------------------
# free products of finite groups


class FreeProductGroup(Group):
    """Free product of finite groups; keys are alternating syllable codes."""

    def __init__(self, factors: list[FiniteGroup]):
        if len(factors) < 2:
            raise GroupError("free_product needs at least two factors")
        self.factors = factors
        self.descriptor = FreeProduct(tuple(f.descriptor for f in factors))
        self.identity = ()
        self.code_factor = [None]
        self.code_elem = [None]
        self.code_of = {}
        for i, f in enumerate(factors):
            for x in f.elements():
                if x == f.identity:
                    continue
                self.code_of[(i, x)] = len(self.code_factor)
                self.code_factor.append(i)
                self.code_elem.append(x)
        ncodes = len(self.code_factor)
        # product of two codes from the same factor; 0 means identity
        self._prod = [[None] * ncodes for _ in range(ncodes)]
        self._invc = [0] * ncodes
        for c in range(1, ncodes):
            fi, x = self.code_factor[c], self.code_elem[c]
            f = factors[fi]
            self._invc[c] = self.code_of[(fi, f.inverse[x])]
            for d in range(1, ncodes):
                if self.code_factor[d] != fi:
                    continue
                z = f.table[x][self.code_elem[d]]
                self._prod[c][d] = 0 if z == f.identity else self.code_of[(fi, z)]
        self.generators = tuple((c,) for c in range(1, ncodes))
        self._letter_factor = {f.letter: i for i, f in enumerate(factors)}

    def contains(self, g) -> bool:
        if not isinstance(g, tuple):
            return False
        prev = None
        for c in g:
            if not isinstance(c, int) or not 0 < c < len(self.code_factor):
                return False
            f = self.code_factor[c]
            if f == prev:
                return False
            prev = f
        return True

    def _mul(self, g, h):
        if not g:
            return h
        if not h:
            return g
        fac = self.code_factor
        if fac[g[-1]] != fac[h[0]]:
            return g + h
        prod = self._prod
        lg, lh = len(g), len(h)
        i = 0
        while i < lg and i < lh:
            x, y = g[lg - 1 - i], h[i]
            if fac[x] != fac[y]:
                break
            z = prod[x][y]
            if z:
                return g[:lg - 1 - i] + (z,) + h[i + 1:]
            i += 1
        return g[:lg - i] + h[i:]

    def _inv(self, g):
        invc = self._invc
        return tuple(invc[c] for c in reversed(g))

    def word_length(self, g) -> int:
        return len(self.check(g))

    def syllable(self, factor: int, x):
        f = self.factors[factor]
        if x == f.identity:
            return ()
        return (self.code_of[(factor, x)],)

    def format(self, g) -> str:
        if not g:
            return "e"
        return "".join(self.factors[self.code_factor[c]].format(self.code_elem[c]) for c in g)

    def parse(self, text: str):
        return _parse_word(self, text, self._token)

    def _token(self, letter, power, digits):
        if letter not in self._letter_factor:
            raise ElementError(f"unknown letter {letter!r} for {self.name}")
        i = self._letter_factor[letter]
        x = self.factors[i]._token(letter, power, digits)
        return self.syllable(i, x)


# ---------------------------------------------------------------------------
# direct products and lattices


def _split_pair(text: str) -> tuple[str, str]:
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ElementError(f"expected a pair '(x,y)', got {text!r}")
    inner = s[1:-1]
    depth = 0
    for i, ch in enumerate(inner):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return inner[:i], inner[i + 1:]
    raise ElementError(f"expected a pair '(x,y)', got {text!r}")


class DirectProductGroup(Group):
    def __init__(self, left: Group, right: Group):
        self.left = left
        self.right = right
        self.descriptor = DirectProduct(left.descriptor, right.descriptor)
        self.identity = (left.identity, right.identity)
        self.generators = tuple((s, right.identity) for s in left.generators) + tuple(
            (left.identity, t) for t in right.generators
        )
        if left.order is not None and right.order is not None:
            self.order = left.order * right.order

    def contains(self, g) -> bool:
        return (isinstance(g, tuple) and len(g) == 2
                and self.left.contains(g[0]) and self.right.contains(g[1]))

    def _mul(self, g, h):
        return (self.left._mul(g[0], h[0]), self.right._mul(g[1], h[1]))

    def _inv(self, g):
        return (self.left._inv(g[0]), self.right._inv(g[1]))

    def word_length(self, g) -> int:
        self.check(g)
        return self.left.word_length(g[0]) + self.right.word_length(g[1])

    def elements(self) -> list:
        if self.order is None:
            raise GroupError(f"{self.name} is infinite")
        return [(x, y) for x in self.left.elements() for y in self.right.elements()]

    def format(self, g) -> str:
        return f"({self.left.format(g[0])},{self.right.format(g[1])})"

    def parse(self, text: str):
        if text.strip() == "e":
            return self.identity
        a, b = _split_pair(text)
        return (self.left.parse(a), self.right.parse(b))


class LatticeGroup(Group):
    def __init__(self, dim: int):
        if dim < 1:
            raise GroupError(f"lattice dimension must be >= 1, got {dim}")
        self.dim = dim
        self.descriptor = Lattice(dim)
        self.identity = (0,) * dim
        gens = []
        for i in range(dim):
            unit = [0] * dim
            unit[i] = 1
            gens.append(tuple(unit))
            unit[i] = -1
            gens.append(tuple(unit))
        self.generators = tuple(gens)

    def contains(self, g) -> bool:
        return (isinstance(g, tuple) and len(g) == self.dim
                and all(isinstance(x, int) and not isinstance(x, bool) for x in g))

    def _mul(self, g, h):
        return tuple(x + y for x, y in zip(g, h))

    def _inv(self, g):
        return tuple(-x for x in g)

    def word_length(self, g) -> int:
        return sum(abs(x) for x in self.check(g))

    def format(self, g) -> str:
        if self.dim == 1:
            return str(g[0])
        return "(" + ",".join(str(x) for x in g) + ")"

    def parse(self, text: str):
        s = "".join(text.split())
        if s == "e":
            return self.identity
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        try:
            g = tuple(int(x) for x in s.split(","))
        except ValueError:
            raise ElementError(f"cannot parse lattice vector {text!r}") from None
        if len(g) != self.dim:
            raise ElementError(f"expected {self.dim} coordinates, got {text!r}")
        return g


# ---------------------------------------------------------------------------
# construction


def build_group(descriptor) -> Group:
    """Build a group handle from a descriptor, validating finite tables."""
    letters = iter(_LETTERS)
    return _build(descriptor, letters, factor=False)


def _next_letter(letters: Iterator[str]) -> str:
    try:
        return next(letters)
    except StopIteration:
        raise GroupError("descriptor needs more generator letters than are available") from None


def _build(desc, letters, factor: bool) -> Group:
    if isinstance(desc, Free):
        if desc.rank < 1:
            raise GroupError(f"free group rank must be >= 1, got {desc.rank}")
        return FreeGroup(desc.rank, [_next_letter(letters) for _ in range(desc.rank)])
    if isinstance(desc, Cyclic):
        if desc.order < 2:
            raise GroupError(f"cyclic group order must be >= 2, got {desc.order}")
        return CyclicGroup(desc.order, _next_letter(letters), all_nontrivial=factor)
    if isinstance(desc, FiniteTable):
        validate_table(desc)
        if desc.gens is not None and not factor:
            gens = sorted(set(desc.gens))
        else:
            gens = [x for x in range(desc.order) if x != desc.identity]
        return FiniteGroup(desc, desc.mul, desc.inv, desc.identity, gens, _next_letter(letters))
    if isinstance(desc, FreeProduct):
        if len(desc.factors) < 2:
            raise GroupError("free_product needs at least two factors")
        for f in desc.factors:
            if not isinstance(f, (Cyclic, FiniteTable)):
                raise GroupError("free_product factors must be finite (cyclic or finite_table)")
        return FreeProductGroup([_build(f, letters, factor=True) for f in desc.factors])
    if isinstance(desc, DirectProduct):
        left = _build(desc.left, letters, factor)
        right = _build(desc.right, letters, factor)
        return DirectProductGroup(left, right)
    if isinstance(desc, Lattice):
        return LatticeGroup(desc.dim)
    raise GroupError(f"unknown descriptor {desc!r}")


def direct_product(left: Group, right: Group) -> Group:
    """Direct product of two built groups, keeping their letters."""
    return DirectProductGroup(left, right)


# ---------------------------------------------------------------------------
# subgroups


class Subgroup:
    """Explicit finite subgroup with a conjugation certificate.

    The certificate maps each (generator s, member f) to ``s^-1 f s``; the
    subgroup is normal iff every recorded value is a member.
    """

    def __init__(self, group: Group, elements: Iterable):
        self.group = group
        elems = []
        seen = set()
        for x in elements:
            group.check(x)
            if x not in seen:
                seen.add(x)
                elems.append(x)
        if group.identity not in seen:
            raise SubgroupError("subgroup must contain the identity")
        for x in elems:
            if group._inv(x) not in seen:
                raise SubgroupError(f"not closed under inverses at {group.format(x)}")
            for y in elems:
                if group._mul(x, y) not in seen:
                    raise SubgroupError(
                        f"not closed under multiplication: {group.format(x)}*{group.format(y)}")
        self.elements = tuple(sorted(elems))
        self.members = frozenset(elems)

    @classmethod
    def generated(cls, group: Group, gens: Iterable, cap: int = 100_000) -> "Subgroup":
        gens = [group.check(g) for g in gens]
        gens += [group._inv(g) for g in gens]
        seen = {group.identity}
        frontier = [group.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for s in gens:
                    y = group._mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) > cap:
                            raise SubgroupError(f"generated subgroup exceeds {cap} elements")
            frontier = nxt
        return cls(group, seen)

    @classmethod
    def trivial(cls, group: Group) -> "Subgroup":
        return cls(group, [group.identity])

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.members

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.group == other.group and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return "{" + ",".join(self.group.format(x) for x in self.elements) + "}"

    @cached_property
    def certificate(self) -> dict:
        G = self.group
        return {(s, f): G.conj(s, f) for s in G.generators for f in self.elements}

    def normality_witness(self, conjugators: Iterable | None = None):
        """First (x, f) with ``x^-1 f x`` outside the subgroup, or None."""
        if conjugators is None:
            for (s, f), y in self.certificate.items():
                if y not in self.members:
                    return s, f
            return None
        G = self.group
        for x in conjugators:
            for f in self.elements:
                if G.conj(x, f) not in self.members:
                    return x, f
        return None

    @property
    def is_normal(self) -> bool:
        return self.normality_witness() is None
