"""Markov chain on a finite normal subgroup F driven by ``kappa = mu^{*|F|}``.

A step of the kappa-walk by ``x`` moves the F-coordinate either by right
multiplication (``x`` in F) or by conjugation ``f -> x^-1 f x`` (``x`` outside
F).  The chain is symmetric, hence reversible for the uniform distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import RatioSeries, ratio_table
from .errors import CapExceeded, NormalityViolation, SubgroupError
from .groups import Subgroup
from .measures import DEFAULT_SUPPORT_CAP, Measure, _rat, power


@dataclass
class FactorChain:
    F: Subgroup
    kernel: Measure
    P: list[list[Fraction]]
    right: list[list[Fraction]]
    conj: list[list[Fraction]]

    @property
    def states(self) -> tuple:
        return self.F.elements

    def __len__(self):
        return len(self.F)

    def index(self, f) -> int:
        return self.F.elements.index(f)

    def to_json(self) -> dict:
        G = self.F.group
        return {"F": [G.format(f) for f in self.states],
                "P": [[_rat(x) for x in row] for row in self.P]}


def chain_from_kernel(kernel: Measure, F: Subgroup) -> FactorChain:
    """Transition matrix of the F-coordinate for steps drawn from ``kernel``."""
    G = kernel.group
    if F.group != G:
        raise SubgroupError("subgroup lives in a different group")
    states = F.elements
    idx = {f: i for i, f in enumerate(states)}
    n = len(states)
    zero = Fraction(0)
    right = [[zero] * n for _ in range(n)]
    conj = [[zero] * n for _ in range(n)]
    for x, w in kernel.items():
        if x in F:
            for i, f in enumerate(states):
                right[i][idx[G._mul(f, x)]] += w
        else:
            for i, f in enumerate(states):
                y = G.conj(x, f)
                j = idx.get(y)
                if j is None:
                    raise NormalityViolation(x, f, G.format(x), G.format(f))
                conj[i][j] += w
    P = [[right[i][j] + conj[i][j] for j in range(n)] for i in range(n)]
    return FactorChain(F, kernel, P, right, conj)


def build_chain(mu: Measure, F: Subgroup, cap: int = DEFAULT_SUPPORT_CAP) -> FactorChain:
    """Chain for ``kappa = mu^{*|F|}``, after checking normality and ``F <= supp(kappa)``."""
    G = mu.group
    if F.group != G:
        raise SubgroupError("subgroup lives in a different group")
    witness = F.normality_witness()
    if witness is None:
        witness = F.normality_witness(mu.support)
    if witness is not None:
        x, f = witness
        raise NormalityViolation(x, f, G.format(x), G.format(f))
    kappa = power(mu, len(F), cap)
    missing = [f for f in F.elements if f not in kappa]
    if missing:
        raise SubgroupError(
            f"F is not contained in supp(mu^*{len(F)}): missing {G.format(missing[0])}")
    return chain_from_kernel(kappa, F)


# ---------------------------------------------------------------------------
# checks


@dataclass
class BalanceReport:
    balanced: bool
    violations: list[tuple] = field(default_factory=list)


def detailed_balance_check(chain: FactorChain) -> BalanceReport:
    """``pi(f) P(f,g) = pi(g) P(g,f)`` for uniform pi, exactly, over all pairs."""
    n = len(chain)
    pi = Fraction(1, n)
    P = chain.P
    bad = [(chain.states[i], chain.states[j])
           for i in range(n) for j in range(i + 1, n) if pi * P[i][j] != pi * P[j][i]]
    return BalanceReport(not bad, bad)


def row_sums(chain: FactorChain) -> list[Fraction]:
    return [sum(row, Fraction(0)) for row in chain.P]


def is_stochastic(chain: FactorChain) -> bool:
    return all(s == 1 for s in row_sums(chain))


def stationary_uniform(chain: FactorChain) -> bool:
    """True when ``uniform . P == uniform`` exactly."""
    n = len(chain)
    u = Fraction(1, n)
    return all(sum((u * chain.P[i][j] for i in range(n)), Fraction(0)) == u for j in range(n))


def aperiodicity_witness(chain: FactorChain) -> bool:
    return all(chain.P[i][i] > 0 for i in range(len(chain)))


def _step(dist: list, P: list) -> list:
    n = len(dist)
    return [sum((dist[i] * P[i][j] for i in range(n) if dist[i]), Fraction(0)) for j in range(n)]


def total_variation(dist: list, n: int) -> Fraction:
    u = Fraction(1, n)
    return sum((abs(p - u) for p in dist), Fraction(0)) / 2


@dataclass
class MixingProfile:
    tv: list[tuple[int, Fraction]]
    threshold: float
    mixed_at: int | None

    def to_json(self) -> list:
        return [[n, _rat(t)] for n, t in self.tv]


def mixing_profile(chain: FactorChain, start, N: int, threshold: float = 1e-6) -> MixingProfile:
    """Exact ``TV(start . P^n, uniform)`` for n = 0..N.

    ``start`` is an element of F (point mass) or a dict ``{f: probability}``.
    """
    n = len(chain)
    if isinstance(start, dict):
        dist = [Fraction(start.get(f, 0)) for f in chain.states]
        if sum(dist) != 1:
            raise ValueError("start distribution must sum to 1")
    else:
        dist = [Fraction(0)] * n
        dist[chain.index(start)] = Fraction(1)
    out = []
    mixed = None
    for k in range(N + 1):
        tv = total_variation(dist, n)
        out.append((k, tv))
        if mixed is None and tv < threshold:
            mixed = k
        if k < N:
            dist = _step(dist, chain.P)
    return MixingProfile(out, threshold, mixed)


# ---------------------------------------------------------------------------
# end-to-end check of the finite normal subgroup statement


@dataclass
class RellReport:
    chain: FactorChain
    balance: BalanceReport
    stationary: bool
    stochastic: bool
    mixing: MixingProfile
    series: dict[object, RatioSeries]

    @property
    def ok(self) -> bool:
        return self.balance.balanced and self.stationary and self.stochastic

    def to_json(self, series_refs: dict | None = None) -> dict:
        G = self.chain.F.group
        doc = self.chain.to_json()
        doc.update({
            "balanced": self.balance.balanced,
            "violations": [[G.format(a), G.format(b)] for a, b in self.balance.violations],
            "stationary_uniform": self.stationary,
            "row_stochastic": self.stochastic,
            "aperiodic_witness": aperiodicity_witness(self.chain),
            "mixing": self.mixing.to_json(),
            "mixed_at": self.mixing.mixed_at,
            "rell": series_refs if series_refs is not None else
            {s.label: [[e.n, _rat(e.value)] for e in s.entries] for s in self.series.values()},
        })
        return doc


def rell_verify(mu: Measure, F: Subgroup, N: int, mixing_steps: int | None = None,
                start=None, cap: int = DEFAULT_SUPPORT_CAP) -> RellReport:
    """Ratio series of every f in F by exact convolution in G, next to the chain diagnostics."""
    chain = build_chain(mu, F, cap)
    balance = detailed_balance_check(chain)
    if start is None:
        start = next((f for f in F.elements if f != mu.group.identity), mu.group.identity)
    mixing = mixing_profile(chain, start, N if mixing_steps is None else mixing_steps)
    series = ratio_table(mu, list(F.elements), N, engine="sparse", cap=cap)
    if any(not s.complete for s in series.values()):
        raise CapExceeded(next(s.stop_reason for s in series.values() if not s.complete))
    return RellReport(chain, balance, stationary_uniform(chain), is_stochastic(chain), mixing, series)

