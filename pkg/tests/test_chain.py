import itertools
import json
from fractions import Fraction as Q
from pathlib import Path

import pytest

from avezlab.chain import (
    aperiodicity_witness,
    build_chain,
    chain_from_kernel,
    detailed_balance_check,
    is_stochastic,
    mixing_profile,
    rell_verify,
    stationary_uniform,
    total_variation,
)
from avezlab.errors import NormalityViolation, SubgroupError
from avezlab.groups import Cyclic, DirectProduct, FiniteTable, Free, FreeProduct, Subgroup, build_group
from avezlab.measures import Measure, lazy_uniform, product

from oracles import rell_closed_form

S3 = build_group(FiniteTable.from_json(json.loads(
    (Path(__file__).parent.parent / "specs" / "s3.json").read_text())))
F2C3 = build_group(DirectProduct(Free(2), Cyclic(3)))


def s3_measure():
    return Measure.from_weights(S3, {0: Q(1, 4), 1: Q(1, 4), 2: Q(1, 4), 3: Q(1, 4)})


def rell_measure():
    psi = Measure.from_weights(F2C3.right, {0: Q(1, 2), 1: Q(1, 4), 2: Q(1, 4)})
    return product(lazy_uniform(F2C3.left, Q(1, 4)), psi, F2C3)


def test_trivial_subgroup_chain():
    mu = lazy_uniform(F2C3, Q(1, 4))
    chain = build_chain(mu, Subgroup.trivial(F2C3))
    assert chain.P == [[1]]
    assert detailed_balance_check(chain).balanced


def test_non_normal_subgroup_rejected():
    G = build_group(FreeProduct((Cyclic(2), Cyclic(3))))
    F = Subgroup(G, [G.identity, G.parse("a")])
    with pytest.raises(NormalityViolation) as exc:
        build_chain(lazy_uniform(G, Q(1, 4)), F)
    assert "b" in str(exc.value)


def test_subgroup_outside_kappa_support():
    # kappa = mu^2 of a walk with no holding never hits the odd element
    G = build_group(Cyclic(2))
    mu = Measure.from_weights(G, {1: Q(1)})
    with pytest.raises(SubgroupError):
        build_chain(mu, Subgroup(G, [0, 1]))


def brute_s3_matrix():
    """P(f, .) from all 4^3 step triples, acting by hand on the table."""
    mul = lambda x, y: S3.mul(x, y)
    A3 = [0, 1, 2]
    P = [[Q(0)] * 3 for _ in range(3)]
    for steps in itertools.product([0, 1, 2, 3], repeat=3):
        x = 0
        for s in steps:
            x = mul(x, s)
        for i, f in enumerate(A3):
            y = mul(f, x) if x in A3 else mul(mul(S3.inv(x), f), x)
            P[i][A3.index(y)] += Q(1, 64)
    return P


def test_s3_chain_against_brute_force():
    chain = build_chain(s3_measure(), Subgroup(S3, [0, 1, 2]))
    assert chain.P == brute_s3_matrix()
    assert chain.P[0] == [Q(5, 8), Q(3, 16), Q(3, 16)]
    assert detailed_balance_check(chain).balanced
    assert stationary_uniform(chain) and is_stochastic(chain)
    assert aperiodicity_witness(chain)


def test_s3_mixing():
    chain = build_chain(s3_measure(), Subgroup(S3, [0, 1, 2]))
    prof = mixing_profile(chain, 1, 12)
    tvs = [t for _, t in prof.tv]
    for n, t in prof.tv:
        assert t == Q(2, 3) * Q(7, 16) ** n
    assert all(a > b for a, b in zip(tvs, tvs[1:]))
    flat = mixing_profile(chain, {0: Q(1, 3), 1: Q(1, 3), 2: Q(1, 3)}, 5)
    assert all(t == 0 for _, t in flat.tv)
    with pytest.raises(ValueError):
        mixing_profile(chain, {0: Q(1, 2)}, 3)


def test_c3_kernel_chain_mixing():
    C3 = build_group(Cyclic(3))
    psi = Measure.from_weights(C3, {0: Q(1, 2), 1: Q(1, 4), 2: Q(1, 4)})
    chain = chain_from_kernel(psi, Subgroup(C3, [0, 1, 2]))
    prof = mixing_profile(chain, 0, 8)
    assert prof.tv[2][1] == Q(1, 24)
    for n, t in prof.tv:
        assert t == Q(2, 3) * Q(1, 4) ** n


def test_perturbed_matrix_reports_violation():
    chain = build_chain(s3_measure(), Subgroup(S3, [0, 1, 2]))
    chain.P[0][1] += Q(1, 100)
    chain.P[0][0] -= Q(1, 100)
    rep = detailed_balance_check(chain)
    assert not rep.balanced
    assert rep.violations == [(0, 1)]
    assert is_stochastic(chain) and not stationary_uniform(chain)


def test_total_variation_basic():
    assert total_variation([Q(1), Q(0)], 2) == Q(1, 2)
    assert total_variation([Q(1, 4)] * 4, 4) == 0


def test_rell_on_product():
    F = Subgroup(F2C3, [F2C3.parse(x) for x in ["(e,e)", "(e,c)", "(e,c2)"]])
    rep = rell_verify(rell_measure(), F, 6, mixing_steps=10, start=F2C3.parse("(e,c)"))
    assert rep.ok
    for f in ("(e,c)", "(e,c2)"):
        s = rep.series[F2C3.parse(f)]
        assert [e.value for e in s.entries] == [rell_closed_form(n) for n in range(1, 7)]
        evens = [s.at(n).value for n in (2, 4, 6)]
        assert evens == sorted(evens)
    assert all(e.value == 1 for e in rep.series[F2C3.identity].entries)
    doc = rep.to_json()
    assert doc["balanced"] and doc["stationary_uniform"] and doc["row_stochastic"]
    tv = [Q(t) for _, t in doc["mixing"]]
    assert tv[0] == Q(2, 3) and all(a > b for a, b in zip(tv, tv[1:]))
