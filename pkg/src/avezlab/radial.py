"""Distance-from-identity recurrence for generator-transitive walks on free groups.

When a measure on ``free(d)`` puts mass ``alpha`` on the identity and equal
mass on each of the ``2d`` generator letters, the probability of a reduced
word depends only on its length.  The walk then collapses to a birth-death
chain on ``k = 0, 1, 2, ...`` and ``mu^{*n}(g) = p_n(|g|) / N(|g|)`` with
``N(k) = 2d (2d-1)^(k-1)`` words of length ``k``.

Probabilities are kept as integer numerators over ``D**n`` where ``D`` is the
common denominator of one step, so a step costs three small-integer
multiplies per distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import MeasureError


def sphere_size(d: int, k: int) -> int:
    """Number of reduced words of length k in the free group of rank d."""
    if k == 0:
        return 1
    return 2 * d * (2 * d - 1) ** (k - 1)


@dataclass(frozen=True)
class RadialDistribution:
    rank: int
    laziness: Fraction
    step: int
    num: tuple
    den: int | float

    @property
    def exact(self) -> bool:
        return isinstance(self.den, int)

    def p(self, k: int):
        if k < 0:
            raise ValueError("distance must be non-negative")
        v = self.num[k] if k < len(self.num) else 0
        return Fraction(v, self.den) if self.exact else v / self.den

    @property
    def probs(self) -> tuple:
        return tuple(self.p(k) for k in range(len(self.num)))

    def total(self):
        if self.exact:
            return Fraction(sum(self.num), self.den)
        return math.fsum(self.num) / self.den

    def element_mass(self, k: int):
        """``mu^{*n}(g)`` for any g with ``|g| = k``."""
        return self.p(k) / sphere_size(self.rank, k)

    def return_norm(self):
        """``sum_g mu^{*n}(g)^2``, which equals ``mu^{*2n}(e)``."""
        d = self.rank
        r = 2 * d - 1
        num = self.num
        K = len(num) - 1
        while K > 0 and not num[K]:
            K -= 1
        if self.exact:
            # sum_{k>=1} v_k^2 / (2d r^(k-1)) by Horner over a common denominator
            acc = 0
            for k in range(1, K + 1):
                acc = acc * r + num[k] * num[k]
            scale = 2 * d * r ** max(K - 1, 0)
            total = num[0] * num[0] * scale + acc
            return Fraction(total, scale * self.den * self.den)
        return math.fsum(v * v / sphere_size(d, k) for k, v in enumerate(num) if v) / (self.den * self.den)


def _weights(d: int, alpha: Fraction, exact: bool):
    """Integer one-step weights (stay, out-of-origin, forward, back) and their denominator."""
    q = alpha.denominator
    a = alpha.numerator
    D = 2 * d * q
    stay = 2 * d * a
    out0 = 2 * d * (q - a)
    fwd = (q - a) * (2 * d - 1)
    back = q - a
    if exact:
        return stay, out0, fwd, back, D
    return stay / D, out0 / D, fwd / D, back / D, 1


def radial_start(d: int, laziness=Fraction(0), exact: bool = True) -> RadialDistribution:
    alpha = Fraction(laziness)
    if d < 1:
        raise MeasureError("rank must be >= 1")
    if not 0 <= alpha < 1:
        raise MeasureError(f"laziness must lie in [0,1), got {alpha}")
    return RadialDistribution(d, alpha, 0, (1,) if exact else (1.0,), 1 if exact else 1.0)


def _advance(old: list, stay, out0, fwd, back) -> list:
    o = old + [0, 0]
    new = [stay * o[0] + back * o[1], stay * o[1] + out0 * o[0] + back * o[2]]
    new += [stay * x + fwd * lo + back * hi for lo, x, hi in zip(o[1:-2], o[2:-1], o[3:])]
    return new


def radial_step(p: RadialDistribution) -> RadialDistribution:
    """One step of the birth-death chain on word length."""
    stay, out0, fwd, back, D = _weights(p.rank, p.laziness, p.exact)
    new = _advance(list(p.num), stay, out0, fwd, back)
    while len(new) > p.step + 2:
        new.pop()
    den = p.den * D if p.exact else 1.0
    return RadialDistribution(p.rank, p.laziness, p.step + 1, tuple(new), den)


def radial_walk(d: int, laziness=Fraction(0), exact: bool = True) -> Iterator[RadialDistribution]:
    """Yield the distance distributions for n = 0, 1, 2, ... ."""
    p = radial_start(d, laziness, exact)
    stay, out0, fwd, back, D = _weights(d, p.laziness, exact)
    cur = list(p.num)
    den = p.den
    n = 0
    while True:
        yield RadialDistribution(d, p.laziness, n, tuple(cur), den)
        cur = _advance(cur, stay, out0, fwd, back)
        n += 1
        del cur[n + 1:]
        if exact:
            den *= D


def radial_ratio(p: RadialDistribution, k: int):
    """Avez ratio ``mu^{*n}(g) / mu^{*n}(e)`` for any g at distance k."""
    if p.num[0] == 0:
        raise MeasureError(
            f"return probability vanishes at n={p.step}; with zero laziness use even n")
    if p.exact:
        return Fraction(p.num[k] if k < len(p.num) else 0, p.num[0] * sphere_size(p.rank, k))
    v = p.num[k] if k < len(p.num) else 0.0
    return v / (p.num[0] * sphere_size(p.rank, k))


def kesten_radius(d: int) -> float:
    """Spectral radius ``sqrt(2d-1)/d`` of the simple random walk on ``free(d)``."""
    return math.sqrt(2 * d - 1) / d
