"""Exact-identity verification suite behind ``avezlab verify``.

Every check compares two independently computed sides with exact rational
equality (or an exact inequality) and reports pass, fail or skip.  No check
convolves beyond the requested n, so displacement and triangle checks (which
need the 2n-th power) stop at n/2.  Passing
``inject=<check>`` perturbs one side of that check as a negative control.
"""
from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction

from .analysis import PowerCache, displacement, kpower_consistency, radial_parameters, subgroup_check
from .chain import build_chain, detailed_balance_check, is_stochastic, stationary_uniform
from .measures import conjugate, convolve, delta, walk
from .radial import radial_walk, sphere_size
from .speclang import Experiment

CHECKS = (
    "delta_identity",
    "power_symmetry",
    "conjugation_identity",
    "smoothing_invariance",
    "product_factorization",
    "displacement_identity",
    "triangle_inequality",
    "kpower_consistency",
    "detailed_balance",
    "radial_oracle",
)

_BUMP = Fraction(1, 10**12)


@dataclass
class CheckResult:
    name: str
    status: str  # pass | fail | skip
    cases: int = 0
    detail: str = ""


class Context:
    def __init__(self, exp: Experiment, n: int, samples: int, seed: int, radius: int,
                 cap: int, inject: str | None, F=None, k=None, m=None):
        self.exp = exp
        self.mu = exp.measure
        self.G = exp.group
        self.n = n
        self.samples = samples
        self.seed = seed
        self.radius = radius
        self.cap = cap
        self.inject = inject
        self.F = F
        self.k = k
        self.m = m
        self._powers = []
        self._walk = None

    def rng(self, name: str) -> random.Random:
        return random.Random(f"{self.seed}:{name}")

    def power(self, k: int):
        if self._walk is None:
            self._walk = walk(self.mu, self.cap)
        while len(self._powers) < k:
            self._powers.append(next(self._walk)[1])
        return self._powers[k - 1]

    def ball(self, radius: int) -> list:
        return self.G.ball(radius)


def _compare(name: str, cases, corrupt: bool) -> CheckResult:
    cases = list(cases)
    if corrupt and cases:
        label, lhs, rhs = cases[0]
        cases[0] = (label, lhs + _BUMP, rhs)
    bad = [label for label, lhs, rhs in cases if lhs != rhs]
    if bad:
        return CheckResult(name, "fail", len(cases), f"{len(bad)} mismatches, first: {bad[0]}")
    return CheckResult(name, "pass", len(cases))


def check_delta_identity(ctx: Context, corrupt=False) -> CheckResult:
    mu = ctx.mu
    d = delta(ctx.G)
    left, right = convolve(d, mu, ctx.cap), convolve(mu, d, ctx.cap)
    fmt = ctx.G.format
    cases = [(f"delta*mu at {fmt(g)}", left[g], w) for g, w in mu.sorted_items()]
    cases += [(f"mu*delta at {fmt(g)}", right[g], w) for g, w in mu.sorted_items()]
    cases.append(("support size", len(left) + len(right), 2 * len(mu)))
    return _compare("delta_identity", cases, corrupt)


def check_power_symmetry(ctx: Context, corrupt=False) -> CheckResult:
    if not ctx.mu.symmetric:
        return CheckResult("power_symmetry", "skip", detail="measure is not symmetric")
    G = ctx.G
    cases = []
    for k in range(1, min(ctx.n, 8) + 1):
        m = ctx.power(k)
        for g, w in m.sorted_items():
            cases.append((f"n={k} g={G.format(g)}", w, m[G._inv(g)]))
    return _compare("power_symmetry", cases, corrupt)


def check_conjugation_identity(ctx: Context, corrupt=False) -> CheckResult:
    G = ctx.G
    rng = ctx.rng("conjugation")
    ball = ctx.ball(ctx.radius)
    pairs = [(rng.choice(ball), rng.choice(ball)) for _ in range(ctx.samples)]
    nmax = min(ctx.n, 8)
    cases = []
    by_g: dict = {}
    for g, y in pairs:
        by_g.setdefault(g, []).append(y)
    for g in sorted(by_g):
        nu = conjugate(ctx.mu, g)
        for k, nk in walk(nu, ctx.cap, nmax):
            mk = ctx.power(k)
            for y in by_g[g]:
                cases.append((f"n={k} g={G.format(g)} y={G.format(y)}", nk[y], mk[G.conj(g, y)]))
    return _compare("conjugation_identity", cases, corrupt)


def check_smoothing_invariance(ctx: Context, corrupt=False) -> CheckResult:
    F = ctx.exp.smoothing_subgroup()
    if F is None:
        return CheckResult("smoothing_invariance", "skip", detail="measure is not smoothed")
    G = ctx.G
    e = G.identity
    cases = []
    for k in range(1, ctx.n + 1):
        m = ctx.power(k)
        for f in F.elements:
            cases.append((f"n={k} f={G.format(f)}", m[f], m[e]))
        if k <= 8:
            for x, w in m.sorted_items():
                for f in F.elements:
                    cases.append((f"n={k} coset {G.format(f)}.{G.format(x)}", m[G._mul(f, x)], w))
    return _compare("smoothing_invariance", cases, corrupt)


def check_product_factorization(ctx: Context, corrupt=False) -> CheckResult:
    mu = ctx.mu
    if mu.factors is None:
        return CheckResult("product_factorization", "skip", detail="measure is not a product")
    phi, psi = mu.factors
    G = ctx.G
    rng = ctx.rng("product")
    cases = []
    nmax = min(ctx.n, 6)
    for (k, pk), (_, qk) in zip(walk(phi, ctx.cap, nmax), walk(psi, ctx.cap, nmax)):
        m = ctx.power(k)
        support = sorted(m.support)
        points = [G.identity] + rng.sample(support, min(ctx.samples, len(support)))
        # points off the support must vanish on both sides
        points += [(x, y) for x in list(pk.support)[:2] for y in G.right.ball(1)]
        for x, y in points:
            cases.append((f"n={k} ({G.format((x, y))})", m[(x, y)], pk[x] * qk[y]))
    return _compare("product_factorization", cases, corrupt)


def check_displacement_identity(ctx: Context, corrupt=False) -> CheckResult:
    G = ctx.G
    rng = ctx.rng("displacement")
    ball = ctx.ball(ctx.radius)
    cache = PowerCache(ctx.cap)
    nmax = min(ctx.n // 2, 5)
    if nmax < 1:
        return CheckResult("displacement_identity", "skip", detail="needs n >= 2")
    cases = []
    for i in range(ctx.samples):
        g = rng.choice(ball)
        k = 1 + i % nmax
        d = displacement(ctx.mu, g, k, cache)
        cases.append((f"n={k} g={G.format(g)}", d.via_identity, d.direct))
    return _compare("displacement_identity", cases, corrupt)


def check_triangle_inequality(ctx: Context, corrupt=False) -> CheckResult:
    G = ctx.G
    rng = ctx.rng("triangle")
    ball = ctx.ball(min(ctx.radius, 2))
    cache = PowerCache(ctx.cap)
    nmax = min(ctx.n // 2, 5)
    if nmax < 1:
        return CheckResult("triangle_inequality", "skip", detail="needs n >= 2")
    bad = []
    for i in range(ctx.samples):
        g, h = rng.choice(ball), rng.choice(ball)
        k = 1 + i % nmax
        rep = subgroup_check(ctx.mu, g, h, k, cache)
        holds = rep.holds
        if corrupt and i == 0:
            holds = False
        if not holds:
            bad.append(f"n={k} g={G.format(g)} h={G.format(h)}")
    if bad:
        return CheckResult("triangle_inequality", "fail", ctx.samples, f"violated at {bad[0]}")
    return CheckResult("triangle_inequality", "pass", ctx.samples)


def check_kpower_consistency(ctx: Context, corrupt=False) -> CheckResult:
    G = ctx.G
    ks = [ctx.k] if ctx.k else [2, 3]
    targets = [t for t in ctx.ball(1)][:3]
    cases = []
    for k in ks:
        M = ctx.m if ctx.m else max(1, min(4, ctx.n // k))
        for g in targets:
            rep = kpower_consistency(ctx.mu, k, g, M, ctx.cap)
            for m, a, b in rep.rows:
                cases.append((f"k={k} m={m} g={G.format(g)}", a, b))
    return _compare("kpower_consistency", cases, corrupt)


def check_detailed_balance(ctx: Context, corrupt=False) -> CheckResult:
    if ctx.F is None:
        return CheckResult("detailed_balance", "skip", detail="no subgroup F given")
    G = ctx.G
    chain = build_chain(ctx.mu, ctx.F, ctx.cap)
    if corrupt and len(chain) > 1:
        chain.P[0][1] += _BUMP
        chain.P[0][0] -= _BUMP
    bal = detailed_balance_check(chain)
    n = len(chain)
    if not (bal.balanced and stationary_uniform(chain) and is_stochastic(chain)):
        first = bal.violations[0] if bal.violations else None
        where = f"({G.format(first[0])},{G.format(first[1])})" if first else "stationarity"
        return CheckResult("detailed_balance", "fail", n * n, f"violated at {where}")
    return CheckResult("detailed_balance", "pass", n * n)


def check_radial_oracle(ctx: Context, corrupt=False) -> CheckResult:
    params = radial_parameters(ctx.mu)
    if params is None:
        return CheckResult("radial_oracle", "skip", detail="measure is not lazy uniform on a free group")
    d, alpha = params
    G = ctx.G
    cases = []
    for p in radial_walk(d, alpha):
        k = p.step
        if k == 0:
            continue
        if k > min(ctx.n, 8):
            break
        m = ctx.power(k)
        sphere_mass = [Fraction(0)] * (k + 1)
        for g, w in m.sorted_items():
            ell = len(g)
            sphere_mass[ell] += w
            cases.append((f"n={k} g={G.format(g)}", w, p.p(ell) / sphere_size(d, ell)))
        for ell in range(k + 1):
            cases.append((f"n={k} sphere {ell}", sphere_mass[ell], p.p(ell)))
    return _compare("radial_oracle", cases, corrupt)


def run_suite(ctx: Context) -> list[CheckResult]:
    out = []
    for name in CHECKS:
        fn = globals()[f"check_{name}"]
        out.append(fn(ctx, corrupt=(ctx.inject == name)))
    return out


def results_json(results: list[CheckResult]) -> dict:
    return {"passed": all(r.status != "fail" for r in results),
            "checks": [asdict(r) for r in results]}
