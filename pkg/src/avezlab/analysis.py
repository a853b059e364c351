"""Ratio series, l2 displacement, spectral estimates and membership evidence.

Three engines produce ratio series ``r_n(g) = mu^{*n}(g) / mu^{*n}(e)``:

``sparse``          repeated exact convolution of the measure
``radial``          the word-length recurrence, for lazy uniform walks on free groups
``product-factored``  per-factor series multiplied together, for product measures

``engine="auto"`` picks the cheapest engine that applies.
"""
from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapExceeded, MeasureError
from .groups import FreeGroup
from .measures import DEFAULT_SUPPORT_CAP, Measure, _rat, conjugate, convolve, power, walk
from .radial import radial_ratio, radial_walk


# ---------------------------------------------------------------------------
# ratio series


@dataclass(frozen=True)
class RatioEntry:
    n: int
    lo: Fraction | float
    hi: Fraction | float
    note: str = ""

    @property
    def value(self):
        return self.lo if self.lo == self.hi else (self.lo + self.hi) / 2


@dataclass
class RatioSeries:
    target: object
    label: str
    engine: str
    exact: bool = True
    entries: list[RatioEntry] = field(default_factory=list)
    complete: bool = True
    stop_reason: str | None = None

    def __len__(self):
        return len(self.entries)

    def at(self, n: int) -> RatioEntry:
        for entry in self.entries:
            if entry.n == n:
                return entry
        raise KeyError(n)

    def values(self) -> dict[int, object]:
        return {e.n: e.value for e in self.entries}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "ratio_lo", "ratio_hi", "exact", "engine"])
        for e in self.entries:
            exact = self.exact and e.lo == e.hi
            w.writerow([e.n, _rat(e.lo), _rat(e.hi), str(exact).lower(), self.engine])
        return buf.getvalue()


def radial_parameters(mu: Measure):
    """``(rank, laziness)`` when mu is a lazy uniform walk on a free group, else None."""
    G = mu.group
    if not isinstance(G, FreeGroup) or mu.deficit:
        return None
    gens = G.generators
    allowed = set(gens) | {G.identity}
    if any(g not in allowed for g in mu.support) or any(s not in mu for s in gens):
        return None
    weights = {mu[s] for s in gens}
    if len(weights) != 1:
        return None
    alpha = mu.identity_mass
    if not mu.exact:
        return None
    return G.rank, Fraction(alpha)


def pick_engine(mu: Measure) -> str:
    if mu.factors is not None and not mu.deficit:
        return "product-factored"
    if radial_parameters(mu) is not None:
        return "radial"
    return "sparse"


def _interval(pg, pe, deficit):
    if not deficit:
        r = pg / pe
        return r, r
    hi = (pg + deficit) / pe
    return pg / (pe + deficit), hi


def _sparse_table(mu, targets, N, cap):
    out = {g: RatioSeries(g, mu.group.format(g), "sparse", mu.exact) for g in targets}
    e = mu.group.identity
    try:
        for n, m in walk(mu, cap, N):
            pe = m[e]
            if not pe:
                continue
            for g, series in out.items():
                pg = m[g]
                lo, hi = _interval(pg, pe, m.deficit)
                note = "unreachable" if not pg and not m.deficit else ""
                series.entries.append(RatioEntry(n, lo, hi, note))
    except CapExceeded as exc:
        for series in out.values():
            series.complete = False
            series.stop_reason = str(exc)
    return out


def _radial_table(mu, targets, N):
    d, alpha = radial_parameters(mu)
    G = mu.group
    lengths = {g: G.word_length(g) for g in targets}
    out = {g: RatioSeries(g, G.format(g), "radial", True) for g in targets}
    for p in radial_walk(d, alpha):
        n = p.step
        if n == 0:
            continue
        if n > N:
            break
        if not p.num[0]:
            continue
        for g, series in out.items():
            r = radial_ratio(p, lengths[g])
            series.entries.append(RatioEntry(n, r, r, "" if r else "unreachable"))
    return out


def _product_table(mu, targets, N, cap):
    phi, psi = mu.factors
    left = ratio_table(phi, list(dict.fromkeys(g[0] for g in targets)), N, cap=cap)
    right = ratio_table(psi, list(dict.fromkeys(g[1] for g in targets)), N, cap=cap)
    G = mu.group
    out = {}
    for g in targets:
        a, b = left[g[0]], right[g[1]]
        series = RatioSeries(g, G.format(g), "product-factored", a.exact and b.exact)
        rb = {e.n: e for e in b.entries}
        for ea in a.entries:
            eb = rb.get(ea.n)
            if eb is None:
                continue
            note = ";".join(x for x in (ea.note, eb.note) if x)
            series.entries.append(RatioEntry(ea.n, ea.lo * eb.lo, ea.hi * eb.hi, note))
        series.complete = a.complete and b.complete
        series.stop_reason = a.stop_reason or b.stop_reason
        out[g] = series
    return out


def ratio_table(mu: Measure, targets: Sequence, N: int, engine: str = "auto",
                cap: int = DEFAULT_SUPPORT_CAP) -> dict:
    """Ratio series for several targets from one family of convolution powers."""
    if N < 1:
        raise ValueError("N must be >= 1")
    targets = [mu.group.check(g) for g in targets]
    if engine == "auto":
        engine = pick_engine(mu)
    if engine == "product-factored":
        if mu.factors is None:
            raise MeasureError("product-factored engine needs a product measure")
        return _product_table(mu, targets, N, cap)
    if engine == "radial":
        if radial_parameters(mu) is None:
            raise MeasureError("radial engine needs a lazy uniform measure on a free group")
        return _radial_table(mu, targets, N)
    if engine == "sparse":
        return _sparse_table(mu, targets, N, cap)
    raise ValueError(f"unknown engine {engine!r}")


def ratio_series(mu: Measure, g, N: int, engine: str = "auto",
                 cap: int = DEFAULT_SUPPORT_CAP) -> RatioSeries:
    return ratio_table(mu, [g], N, engine, cap)[mu.group.check(g)]


# ---------------------------------------------------------------------------
# power cache


class PowerCache:
    """Write-once cache of convolution powers keyed by (measure digest, n)."""

    def __init__(self, cap: int = DEFAULT_SUPPORT_CAP):
        self.cap = cap
        self._store: dict = {}
        self._lock = threading.Lock()

    def get(self, mu: Measure, n: int) -> Measure:
        key = (mu.digest, n)
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            return hit
        if n % 2 == 0 and (mu.digest, n // 2) in self._store:
            half = self._store[(mu.digest, n // 2)]
            value = convolve(half, half, self.cap, step=n)
        else:
            value = power(mu, n, self.cap)
        with self._lock:
            return self._store.setdefault(key, value)


# ---------------------------------------------------------------------------
# l2 displacement


@dataclass(frozen=True)
class Displacement:
    n: int
    via_identity: Fraction | float
    direct: Fraction | float

    @property
    def agree(self) -> bool:
        if isinstance(self.via_identity, Fraction) and isinstance(self.direct, Fraction):
            return self.via_identity == self.direct
        return math.isclose(self.via_identity, self.direct, rel_tol=1e-9, abs_tol=1e-12)


def displacement(mu: Measure, g, n: int, cache: PowerCache | None = None) -> Displacement:
    """Squared displacement ``||g.xi_n - xi_n||^2`` two ways.

    ``via_identity`` uses ``2 - 2 mu^{*2n}(g)/mu^{*2n}(e)``; ``direct`` sums the
    squared differences of the normalized n-step distribution and its translate.
    """
    G = mu.group
    G.check(g)
    cache = cache or PowerCache()
    pn = cache.get(mu, n)
    p2n = cache.get(mu, 2 * n)
    pe = p2n[G.identity]
    if not pe:
        raise MeasureError(f"mu^*{2 * n}(e) vanishes")
    via = 2 - 2 * p2n[g] / pe
    ginv = G._inv(g)
    num = pn._num
    points = set(num)
    points.update(G._mul(g, x) for x in num)
    zero = 0
    diff = sum((num.get(G._mul(ginv, x), zero) - num.get(x, zero)) ** 2 for x in points)
    norm = sum(v * v for v in num.values())
    direct = Fraction(diff, norm) if pn.exact else diff / norm
    return Displacement(n, via, direct)


def _sqrt_le_sum(a, b, c) -> bool:
    """Exact ``sqrt(a) <= sqrt(b) + sqrt(c)`` for non-negative rationals."""
    lhs = a - b - c
    if lhs <= 0:
        return True
    return lhs * lhs <= 4 * b * c


@dataclass(frozen=True)
class TriangleReport:
    n: int
    d2_gh: Fraction
    d2_g: Fraction
    d2_h: Fraction
    holds: bool

    @property
    def floats(self) -> tuple[float, float, float]:
        return tuple(math.sqrt(float(x)) for x in (self.d2_gh, self.d2_g, self.d2_h))


def subgroup_check(mu: Measure, g, h, n: int, cache: PowerCache | None = None) -> TriangleReport:
    """Check ``d_n(gh) <= d_n(g) + d_n(h)`` in squared form, without square roots."""
    G = mu.group
    cache = cache or PowerCache()
    d_gh = displacement(mu, G.mul(g, h), n, cache).via_identity
    d_g = displacement(mu, g, n, cache).via_identity
    d_h = displacement(mu, h, n, cache).via_identity
    return TriangleReport(n, d_gh, d_g, d_h, _sqrt_le_sum(d_gh, d_g, d_h))


# ---------------------------------------------------------------------------
# spectral estimate


def _root(x, k: int) -> float:
    """``x ** (1/k)`` for a positive rational of any size."""
    if isinstance(x, Fraction):
        return math.exp((math.log(x.numerator) - math.log(x.denominator)) / k)
    return x ** (1.0 / k)


@dataclass
class SpectralEstimate:
    """``rho_n = mu^{*2n}(e)^(1/2n)``; ``returns`` keeps the exact return probabilities."""

    engine: str
    rho: dict[int, float] = field(default_factory=dict)
    returns: dict[int, object] = field(default_factory=dict)
    complete: bool = True
    stop_reason: str | None = None

    @property
    def doubling_pairs(self) -> list[tuple[int, bool]]:
        out = []
        for n, r in self.returns.items():
            r2 = self.returns.get(2 * n)
            if r2 is not None:
                out.append((n, r2 >= r * r))
        return out

    @property
    def doubling_monotone(self) -> bool:
        return all(ok for _, ok in self.doubling_pairs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "rho", "return_prob"])
        for n in sorted(self.rho):
            w.writerow([n, repr(self.rho[n]), _rat(self.returns[n])])
        return buf.getvalue()


def spectral_estimate(mu: Measure, N: int, at: Iterable[int] | None = None, engine: str = "auto",
                      cap: int = DEFAULT_SUPPORT_CAP) -> SpectralEstimate:
    """Return-probability growth ``rho_n`` for n in ``at`` (default 1..N).

    ``mu^{*2n}(e)`` is obtained as the squared l2 norm of ``mu^{*n}``.
    """
    wanted = set(range(1, N + 1)) if at is None else {n for n in at if 1 <= n <= N}
    if engine == "auto":
        engine = pick_engine(mu)
    est = SpectralEstimate(engine)
    if engine == "product-factored":
        a = spectral_estimate(mu.factors[0], N, wanted, cap=cap)
        b = spectral_estimate(mu.factors[1], N, wanted, cap=cap)
        for n in sorted(set(a.returns) & set(b.returns)):
            est.returns[n] = a.returns[n] * b.returns[n]
            est.rho[n] = _root(est.returns[n], 2 * n)
        est.complete = a.complete and b.complete
        est.stop_reason = a.stop_reason or b.stop_reason
        return est
    if engine == "radial":
        d, alpha = radial_parameters(mu)
        for p in radial_walk(d, alpha):
            if p.step > N:
                break
            if p.step in wanted:
                r = p.return_norm()
                est.returns[p.step] = r
                est.rho[p.step] = _root(r, 2 * p.step)
        return est
    try:
        for n, m in walk(mu, cap, max(wanted, default=0)):
            if n in wanted:
                r = m.norm2()
                est.returns[n] = r
                est.rho[n] = _root(r, 2 * n)
    except CapExceeded as exc:
        est.complete = False
        est.stop_reason = str(exc)
    return est


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Policy:
    window: int = 20
    cauchy_tol: Fraction = Fraction(1, 1000)
    member_delta: Fraction = Fraction(1, 50)
    nonmember_delta: Fraction = Fraction(1, 20)

    def __post_init__(self):
        for name in ("cauchy_tol", "member_delta", "nonmember_delta"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.window < 1:
            raise ValueError("window must be >= 1")

    def to_json(self) -> dict:
        return {"window": self.window, "cauchy_tol": _rat(self.cauchy_tol),
                "member_delta": _rat(self.member_delta), "nonmember_delta": _rat(self.nonmember_delta),
                "parity": "even"}


@dataclass(frozen=True)
class MembershipVerdict:
    target: str
    verdict: str  # member-evidence | nonmember-evidence | undecided
    evidence: dict
    policy: Policy

    def to_json(self) -> dict:
        return {"target": self.target, "verdict": self.verdict,
                "policy": self.policy.to_json(), "evidence": self.evidence}


def _distance_range(entry: RatioEntry):
    lo, hi = entry.lo, entry.hi
    far = max(abs(lo - 1), abs(hi - 1))
    near = 0 if lo <= 1 <= hi else min(abs(lo - 1), abs(hi - 1))
    return near, far


def classify(series: RatioSeries, policy: Policy = Policy()) -> MembershipVerdict:
    """Evidence verdict from the last ``policy.window`` even-n entries of a series."""
    entries = sorted((e for e in series.entries if e.n % 2 == 0), key=lambda e: e.n)
    evidence: dict = {"final_n": max((e.n for e in series.entries), default=None),
                      "engine": series.engine}
    if len(entries) < policy.window:
        evidence["reason"] = f"only {len(entries)} even-n entries, window needs {policy.window}"
        return MembershipVerdict(series.label, "undecided", evidence, policy)
    tail = entries[-policy.window:]
    exact = series.exact
    tol, dm, dn = policy.cauchy_tol, policy.member_delta, policy.nonmember_delta
    if not exact:
        tol, dm, dn = float(tol), float(dm), float(dn)
    width = max(e.hi for e in tail) - min(e.lo for e in tail)
    near, far = _distance_range(tail[-1])
    evidence.update({
        "tail_window": [tail[0].n, tail[-1].n],
        "tail_width": float(width),
        "tail_value": float(tail[-1].value),
        "distance_from_one": float(abs(tail[-1].value - 1)),
    })
    if width > tol:
        verdict = "undecided"
        evidence["reason"] = "tail not Cauchy within tolerance"
    elif far <= dm:
        verdict = "member-evidence"
    elif near > dn:
        verdict = "nonmember-evidence"
    else:
        verdict = "undecided"
        evidence["reason"] = "tail value between member and nonmember bands"
    return MembershipVerdict(series.label, verdict, evidence, policy)


def tail_width(series: RatioSeries, lo_n: int, hi_n: int, parity: int | None = 0) -> Fraction:
    """Max minus min of the series over ``lo_n <= n <= hi_n`` (even n by default)."""
    vals = [e for e in series.entries if lo_n <= e.n <= hi_n and (parity is None or e.n % 2 == parity)]
    if not vals:
        raise ValueError("empty window")
    return max(e.hi for e in vals) - min(e.lo for e in vals)


# ---------------------------------------------------------------------------
# k-th power consistency


@dataclass
class KPowerReport:
    k: int
    target: str
    rows: list[tuple[int, object, object]]

    @property
    def equal(self) -> bool:
        return bool(self.rows) and all(a == b for _, a, b in self.rows)


def kpower_consistency(mu: Measure, k: int, g, M: int, cap: int = DEFAULT_SUPPORT_CAP) -> KPowerReport:
    """Compare the series of ``mu^{*k}`` at m with the series of mu at km, for m = 1..M."""
    if k < 1:
        raise ValueError("k must be >= 1")
    kappa = power(mu, k, cap)
    rk = ratio_series(kappa, g, M, engine="sparse", cap=cap)
    rm = ratio_series(mu, g, k * M, engine="sparse", cap=cap)
    if not (rk.complete and rm.complete):
        raise CapExceeded(rk.stop_reason or rm.stop_reason)
    by_n = {e.n: e.value for e in rm.entries}
    rows = [(e.n, e.value, by_n.get(k * e.n)) for e in rk.entries]
    return KPowerReport(k, mu.group.format(g), rows)


# ---------------------------------------------------------------------------
# amenable radical probe


@dataclass
class ProbeRow:
    candidate: str
    conjugator: str
    conjugated: str
    verdict: str


@dataclass
class ProbeReport:
    rows: list[ProbeRow]
    policy: Policy
    N: int
    radius: int

    def summary(self) -> list[dict]:
        out: dict[str, dict] = {}
        for row in self.rows:
            s = out.setdefault(row.candidate, {"candidate": row.candidate, "member": 0,
                                               "nonmember": 0, "undecided": 0})
            s[row.verdict.split("-")[0]] += 1
        for s in out.values():
            s["escapes_some_conjugate"] = s["nonmember"] > 0
            s["member_under_all_conjugators"] = s["nonmember"] == 0 and s["undecided"] == 0
        return list(out.values())

    def to_json(self) -> dict:
        return {"N": self.N, "conjugation_radius": self.radius, "policy": self.policy.to_json(),
                "rows": [asdict(r) for r in self.rows], "summary": self.summary()}


def radical_probe(mu: Measure, radius: int, candidates: Sequence, N: int,
                  policy: Policy = Policy(), engine: str = "auto",
                  cap: int = DEFAULT_SUPPORT_CAP) -> ProbeReport:
    """Classify each candidate x against every conjugated measure ``mu_g``, g in the ball.

    Uses ``mu_g^{*n}(x) = mu^{*n}(g^-1 x g)``, so only powers of mu are computed.
    """
    if not candidates:
        raise ValueError("empty candidate set")
    G = mu.group
    conjugators = G.ball(radius)
    pairs = [(x, g, G.conj(g, G.check(x))) for x in candidates for g in conjugators]
    table = ratio_table(mu, list(dict.fromkeys(y for _, _, y in pairs)), N, engine, cap)
    verdicts = {y: classify(s, policy).verdict for y, s in table.items()}
    if any(not s.complete for s in table.values()):
        raise CapExceeded(next(s.stop_reason for s in table.values() if not s.complete))
    rows = [ProbeRow(G.format(x), G.format(g), G.format(y), verdicts[y]) for x, g, y in pairs]
    return ProbeReport(rows, policy, N, radius)


def conjugated_series(mu: Measure, g, x, N: int, cap: int = DEFAULT_SUPPORT_CAP) -> RatioSeries:
    """Series of x under ``mu_g`` computed directly from the conjugated measure."""
    return ratio_series(conjugate(mu, g), x, N, engine="sparse", cap=cap)
