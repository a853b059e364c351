"""Finitely supported probability measures with exact rational weights.

A :class:`Measure` stores integer numerators over one common denominator, so
convolution is a hash-map aggregation of integer products with a single
denominator multiply at the end.  Weights are handed out as
:class:`fractions.Fraction`.  In floating mode the numerators are floats and
the denominator is ``1.0``; such measures report ``exact == False``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .errors import MeasureError, MixedGroupError, SubgroupError, SupportCapExceeded
from .groups import DirectProductGroup, Group, Subgroup, build_group, descriptor_from_json, descriptor_to_json

DEFAULT_SUPPORT_CAP = 5_000_000

Weight = Fraction | float


def _common_factor(den: int, values: Iterable[int]) -> int:
    g = den
    for v in values:
        g = math.gcd(g, v)
        if g == 1:
            break
    return g


class Measure:
    """Immutable finitely supported measure on ``group``.

    ``deficit`` is the mass lost to truncation; stored weights plus the
    deficit always sum to exactly one.
    """

    def __init__(self, group: Group, num: dict, den, deficit: Weight = Fraction(0),
                 declared_generating: bool = False, factors: tuple | None = None):
        self.group = group
        self._num = num
        self._den = den
        self.deficit = deficit
        self.declared_generating = declared_generating
        self.factors = factors

    # construction ------------------------------------------------------
    @classmethod
    def from_weights(cls, group: Group, weights: dict, deficit=0,
                     declared_generating: bool = False) -> "Measure":
        """Build an exact measure from ``{element: rational}``; zero weights are dropped."""
        fr = {}
        for g, w in weights.items():
            group.check(g)
            w = Fraction(w)
            if w < 0:
                raise MeasureError(f"negative weight at {group.format(g)}")
            if w:
                fr[g] = w
        deficit = Fraction(deficit)
        if deficit < 0:
            raise MeasureError("deficit must be non-negative")
        if sum(fr.values(), Fraction(0)) + deficit != 1:
            raise MeasureError("weights plus deficit must sum to exactly 1")
        den = 1
        for w in fr.values():
            den = den * w.denominator // math.gcd(den, w.denominator)
        num = {g: w.numerator * (den // w.denominator) for g, w in fr.items()}
        return cls(group, num, den, deficit, declared_generating)

    # access --------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return isinstance(self._den, int)

    def __getitem__(self, g) -> Weight:
        v = self._num.get(g)
        if v is None:
            return Fraction(0) if self.exact else 0.0
        return Fraction(v, self._den) if self.exact else v

    weight = __getitem__

    def __len__(self):
        return len(self._num)

    def __contains__(self, g):
        return g in self._num

    def __iter__(self) -> Iterator:
        return iter(self._num)

    @property
    def support(self):
        return self._num.keys()

    def items(self) -> Iterator[tuple]:
        if self.exact:
            den = self._den
            return ((g, Fraction(v, den)) for g, v in self._num.items())
        return iter(self._num.items())

    def sorted_items(self) -> list[tuple]:
        return sorted(self.items(), key=lambda kv: kv[0])

    def total(self) -> Weight:
        if self.exact:
            return Fraction(sum(self._num.values()), self._den)
        return math.fsum(self._num.values())

    @property
    def identity_mass(self) -> Weight:
        return self[self.group.identity]

    def norm2(self) -> Weight:
        """Squared l2 norm, the sum of squared weights."""
        if self.exact:
            return Fraction(sum(v * v for v in self._num.values()), self._den * self._den)
        return math.fsum(v * v for v in self._num.values())

    @cached_property
    def symmetric(self) -> bool:
        inv = self.group._inv
        num = self._num
        return all(num.get(inv(g)) == v for g, v in num.items())

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.group.name.encode())
        for g, v in sorted(self._num.items(), key=lambda kv: kv[0]):
            h.update(f"{g!r}:{v!r};".encode())
        h.update(f"/{self._den!r}|{self.deficit!r}".encode())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Measure) or other.group != self.group:
            return NotImplemented
        if self.exact and other.exact:
            return dict(self.items()) == dict(other.items()) and self.deficit == other.deficit
        return dict(self.items()) == dict(other.items())

    __hash__ = None

    def __repr__(self):
        shown = ", ".join(f"{self.group.format(g)}:{w}" for g, w in self.sorted_items()[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} atoms)"
        return f"Measure[{self.group.name}]{{{shown}{more}}}"

    def to_float(self) -> "Measure":
        if not self.exact:
            return self
        den = self._den
        num = {g: v / den for g, v in self._num.items()}
        return Measure(self.group, num, 1.0, float(self.deficit), self.declared_generating,
                       None if self.factors is None else tuple(f.to_float() for f in self.factors))

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        fmt = self.group.format
        return {
            "group": descriptor_to_json(self.group.descriptor),
            "entries": [[fmt(g), _rat(w)] for g, w in self.sorted_items()],
            "deficit": _rat(self.deficit),
        }

    @classmethod
    def from_json(cls, doc: dict, group: Group | None = None) -> "Measure":
        if group is None:
            group = build_group(descriptor_from_json(doc["group"]))
        weights = {}
        for text, w in doc["entries"]:
            g = group.parse(text)
            weights[g] = weights.get(g, Fraction(0)) + Fraction(w)
        return cls.from_weights(group, weights, Fraction(doc.get("deficit", "0")))


def _rat(w) -> str:
    if isinstance(w, Fraction):
        return f"{w.numerator}/{w.denominator}"
    return repr(w)


def _finish(group, num, den, deficit_in: bool, declared=False) -> Measure:
    """Reduce the common denominator and recompute the deficit as 1 - total."""
    if isinstance(den, int):
        g = _common_factor(den, num.values())
        if g > 1:
            num = {k: v // g for k, v in num.items()}
            den //= g
        deficit = 1 - Fraction(sum(num.values()), den) if deficit_in else Fraction(0)
    else:
        num = {k: v for k, v in num.items() if v > 0.0}
        deficit = max(0.0, 1.0 - math.fsum(num.values())) if deficit_in else 0.0
    return Measure(group, num, den, deficit, declared)


def _same(mu: Measure, tau: Measure):
    if mu.group != tau.group:
        raise MixedGroupError(mu.group.name, tau.group.name)
    if mu.exact != tau.exact:
        raise MeasureError("cannot mix exact and floating measures")


# ---------------------------------------------------------------------------
# constructors


def delta(group: Group) -> Measure:
    return Measure(group, {group.identity: 1}, 1)


def lazy_uniform(group: Group, laziness=Fraction(0)) -> Measure:
    """Mass ``laziness`` at the identity, the rest spread evenly over the standard generators."""
    alpha = Fraction(laziness)
    if not 0 <= alpha < 1:
        raise MeasureError(f"laziness must lie in [0,1), got {alpha}")
    gens = group.generators
    if not gens:
        raise MeasureError(f"{group.name} has an empty generating set")
    step = (1 - alpha) / len(gens)
    weights = {s: step for s in gens}
    if alpha:
        weights[group.identity] = alpha
    return Measure.from_weights(group, weights, declared_generating=True)


def uniform_on(subgroup: Subgroup) -> Measure:
    """The uniform probability measure on a finite subgroup."""
    n = len(subgroup)
    return Measure(subgroup.group, {f: 1 for f in subgroup.elements}, n)


# ---------------------------------------------------------------------------
# convolution


def convolve(mu: Measure, tau: Measure, cap: int = DEFAULT_SUPPORT_CAP, step=None) -> Measure:
    """``(mu * tau)(y) = sum_x mu(x) tau(x^-1 y)``, computed by pushing forward products."""
    _same(mu, tau)
    mul = mu.group._mul
    out: dict = {}
    get = out.get
    tau_items = list(tau._num.items())
    for x, a in mu._num.items():
        for y, b in tau_items:
            z = mul(x, y)
            out[z] = get(z, 0) + a * b
        if len(out) > cap:
            raise SupportCapExceeded(cap, len(out), step)
    declared = mu.declared_generating and tau.declared_generating
    return _finish(mu.group, out, mu._den * tau._den, bool(mu.deficit or tau.deficit), declared)


def power(mu: Measure, n: int, cap: int = DEFAULT_SUPPORT_CAP) -> Measure:
    """``mu^{*n}`` by binary squaring."""
    if n < 1:
        raise ValueError("power needs n >= 1")
    result = None
    base = mu
    k = n
    while k:
        if k & 1:
            result = base if result is None else convolve(result, base, cap, step=n)
        k >>= 1
        if k:
            base = convolve(base, base, cap, step=n)
    return result


def walk(mu: Measure, cap: int = DEFAULT_SUPPORT_CAP, upto: int | None = None) -> Iterator[tuple[int, Measure]]:
    """Yield ``(n, mu^{*n})`` for n = 1, 2, ... (up to ``upto``) by repeated right convolution.

    The next power is only computed when the consumer asks for it.
    """
    cur = mu
    n = 1
    while True:
        yield n, cur
        if upto is not None and n >= upto:
            return
        n += 1
        cur = convolve(cur, mu, cap, step=n)


def conjugate(mu: Measure, g) -> Measure:
    """``mu_g(x) = mu(g^-1 x g)``; the support moves to ``g supp(mu) g^-1``."""
    G = mu.group
    G.check(g)
    ginv = G._inv(g)
    num = {G.conj(ginv, x): v for x, v in mu._num.items()}
    return Measure(G, num, mu._den, mu.deficit, mu.declared_generating)


def smooth(mu: Measure, F: Subgroup, cap: int = DEFAULT_SUPPORT_CAP) -> Measure:
    """``pi_F * mu * pi_F`` for a finite subgroup F."""
    if not isinstance(F, Subgroup):
        raise SubgroupError("smooth needs a verified Subgroup")
    if F.group != mu.group:
        raise MixedGroupError(F.group.name, mu.group.name)
    pi = uniform_on(F)
    if not mu.exact:
        pi = pi.to_float()
    out = convolve(convolve(pi, mu, cap), pi, cap)
    out.declared_generating = mu.declared_generating
    return out


def product(phi: Measure, psi: Measure, group: Group | None = None) -> Measure:
    """Product measure ``(x, y) -> phi(x) psi(y)`` on the direct product."""
    if group is None:
        group = DirectProductGroup(phi.group, psi.group)
    if not isinstance(group, DirectProductGroup) or group.left != phi.group or group.right != psi.group:
        raise MixedGroupError(group.name, f"{phi.group.name} x {psi.group.name}")
    if phi.exact != psi.exact:
        raise MeasureError("cannot mix exact and floating measures")
    num = {(x, y): a * b for x, a in phi._num.items() for y, b in psi._num.items()}
    out = _finish(group, num, phi._den * psi._den, bool(phi.deficit or psi.deficit),
                  phi.declared_generating and psi.declared_generating)
    out.factors = (phi, psi)
    return out


def truncate(mu: Measure, eps) -> Measure:
    """Drop the lightest atoms while the dropped mass stays within ``eps``.

    Weights are not renormalized: the result is a pointwise lower bound of
    ``mu`` and the dropped mass is added to the deficit.
    """
    if mu.exact:
        eps = Fraction(eps)
    if not 0 <= eps < 1:
        raise MeasureError(f"truncation budget must lie in [0,1), got {eps}")
    if not eps:
        return mu
    budget = eps * mu._den if mu.exact else eps
    order = sorted(mu._num.items(), key=lambda kv: (kv[1], kv[0]))
    removed = 0
    dropped = 0
    for _, v in order:
        if removed + v > budget:
            break
        removed += v
        dropped += 1
    if not dropped:
        return mu
    keep = {g: v for g, v in order[dropped:]}
    num = {g: keep[g] for g in mu._num if g in keep}
    lost = Fraction(removed, mu._den) if mu.exact else removed
    return Measure(mu.group, num, mu._den, mu.deficit + lost, mu.declared_generating)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    symmetric: bool
    identity_mass: Weight
    aperiodic: str  # "proved" | "period_two_risk" | "unknown"
    support_contains_standard_generators: bool
    notes: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.symmetric and self.aperiodic == "proved" and self.support_contains_standard_generators

    def to_json(self) -> dict:
        return {
            "symmetric": self.symmetric,
            "identity_mass": _rat(self.identity_mass),
            "aperiodic": self.aperiodic,
            "support_contains_standard_generators": self.support_contains_standard_generators,
            "notes": list(self.notes),
        }


def validate(mu: Measure) -> ValidationReport:
    """Report symmetry, aperiodicity and the generator-containment check; never raises."""
    sym = mu.symmetric
    e_mass = mu.identity_mass
    if e_mass > 0:
        aperiodic = "proved"
    elif sym:
        aperiodic = "period_two_risk"
    else:
        aperiodic = "unknown"
    gens_ok = all(s in mu for s in mu.group.generators)
    notes = []
    if mu.factors is not None:
        notes.append("product measure: support generates the direct product of the factor supports' subgroups")
    if aperiodic == "period_two_risk":
        notes.append("identity mass is zero: return probabilities may vanish at odd n")
    if mu.deficit:
        notes.append(f"truncated: deficit {_rat(mu.deficit)}")
    if not mu.exact:
        notes.append("floating weights: results are not exact")
    return ValidationReport(sym, e_mass, aperiodic, gens_ok, tuple(notes))
