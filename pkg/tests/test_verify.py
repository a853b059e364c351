import pytest

from avezlab.speclang import parse_spec, resolve
from avezlab.verify import CHECKS, Context, results_json, run_suite


def suite(text, n=4, samples=6, seed=0, radius=2, inject=None, F=None, k=None, m=None):
    exp = resolve(parse_spec(text))
    ctx = Context(exp, n, samples, seed, radius, 10 ** 6, inject,
                  F=exp.subgroup(parse_spec(text).analysis.get("F")) if F else None, k=k, m=m)
    return {r.name: r for r in run_suite(ctx)}


C2C3_SMOOTH = "group free_product(cyclic(2), cyclic(3)); measure lazy_uniform(1/4) |> smooth({e,a})"
RELL = ("group direct_product(free(2), cyclic(3)); "
        "measure product(lazy_uniform(1/4), table{e:1/2,c:1/4,c2:1/4}); verify F={(e,e),(e,c),(e,c2)}")


def test_all_checks_pass_on_smoothed_measure():
    res = suite(C2C3_SMOOTH, n=6)
    assert list(res) == list(CHECKS)
    assert res["smoothing_invariance"].status == "pass" and res["smoothing_invariance"].cases > 0
    assert all(r.status in ("pass", "skip") for r in res.values())
    # no product structure and no F here
    assert res["product_factorization"].status == "skip"
    assert res["detailed_balance"].status == "skip"
    assert res["radial_oracle"].status == "skip"


def test_product_and_balance_checks_run():
    res = suite(RELL, n=4, F=True)
    for name in ("product_factorization", "detailed_balance", "conjugation_identity"):
        assert res[name].status == "pass", res[name]


def test_radial_oracle_runs_on_free_group():
    res = suite("group free(2); measure lazy_uniform(1/4)", n=5)
    assert res["radial_oracle"].status == "pass"
    assert res["radial_oracle"].cases > 50


@pytest.mark.parametrize("name", ["delta_identity", "power_symmetry", "conjugation_identity",
                                  "smoothing_invariance", "kpower_consistency", "displacement_identity"])
def test_injected_fault_is_caught(name):
    res = suite(C2C3_SMOOTH, n=4, inject=name)
    assert res[name].status == "fail"
    others = [r for r in res.values() if r.name != name]
    assert all(r.status != "fail" for r in others)
    assert not results_json(list(res.values()))["passed"]


def test_injected_balance_fault():
    res = suite(RELL, n=2, F=True, inject="detailed_balance")
    assert res["detailed_balance"].status == "fail"


def test_small_n_skips_displacement():
    res = suite("group cyclic(7); measure lazy_uniform(1/3)", n=1)
    assert res["displacement_identity"].status == "skip"
    assert res["delta_identity"].status == "pass"


def test_seed_determinism():
    a = suite(C2C3_SMOOTH, n=4, seed=7)
    b = suite(C2C3_SMOOTH, n=4, seed=7)
    assert [(r.status, r.cases, r.detail) for r in a.values()] == [(r.status, r.cases, r.detail) for r in b.values()]


def test_kpower_custom_k_and_m():
    res = suite("group lattice(2); measure lazy_uniform(1/5)", n=6, k=3, m=2)
    assert res["kpower_consistency"].status == "pass"
