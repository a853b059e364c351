import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avezlab.errors import (
    BallCapExceeded,
    ElementError,
    GroupError,
    MixedGroupError,
    NormalityViolation,
    SubgroupError,
    TableNotAGroup,
)
from avezlab.groups import (
    Cyclic,
    DirectProduct,
    FiniteTable,
    Free,
    FreeProduct,
    Lattice,
    Subgroup,
    build_group,
    descriptor_from_json,
    descriptor_to_json,
)

from oracles import from_string, reduce_word, to_string, word_inverse

S3 = json.loads(open(__file__.replace("tests/test_groups.py", "specs/s3.json")).read())

DESCRIPTORS = [
    Free(2),
    Free(3),
    Cyclic(3),
    Cyclic(7),
    Lattice(1),
    Lattice(2),
    FreeProduct((Cyclic(2), Cyclic(3))),
    FreeProduct((Cyclic(2), Cyclic(2), Cyclic(3))),
    DirectProduct(Free(2), Cyclic(3)),
    DirectProduct(Lattice(1), FreeProduct((Cyclic(2), Cyclic(3)))),
    FiniteTable.from_json(S3),
]


@pytest.fixture(params=DESCRIPTORS, ids=lambda d: d.render()[:40])
def group(request):
    return build_group(request.param)


def test_cyclic_three():
    G = build_group(Cyclic(3))
    assert sorted(G.elements()) == [0, 1, 2]
    assert G.identity == 0
    assert G.order == 3


def test_c2_c3_generators():
    G = build_group(FreeProduct((Cyclic(2), Cyclic(3))))
    assert [G.format(s) for s in G.generators] == ["a", "b", "b2"]
    a, b = G.parse("a"), G.parse("b")
    assert G.mul(a, a) == G.identity
    assert G.mul(b, G.mul(b, b)) == G.identity


def test_non_associative_table_rejected():
    # a Latin square with identity 0 and inverses that is not associative
    mul = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    doc = {"order": 5, "mul": [x for row in mul for x in row], "inv": [0, 1, 2, 3, 4], "id": 0}
    with pytest.raises(TableNotAGroup) as exc:
        build_group(FiniteTable.from_json(doc))
    assert exc.value.axiom == "associativity"
    x, y, z = exc.value.witness
    assert mul[mul[x][y]][z] != mul[x][mul[y][z]]


def test_bad_table_identity_and_inverse():
    doc = {"order": 2, "mul": [0, 1, 1, 0], "inv": [0, 0], "id": 0}
    with pytest.raises(TableNotAGroup):
        build_group(FiniteTable.from_json(doc))
    with pytest.raises(GroupError):
        build_group(FiniteTable.from_json({"order": 2, "mul": [0, 1, 1], "inv": [0, 1], "id": 0}))


@pytest.mark.parametrize("bad", [Free(0), Cyclic(1), Lattice(0), FreeProduct((Cyclic(2),)),
                                 FreeProduct((Free(1), Cyclic(2)))])
def test_out_of_range_descriptors(bad):
    with pytest.raises(GroupError):
        build_group(bad)


def test_free_multiplication_examples():
    G = build_group(Free(2))
    p = G.parse
    assert G.mul(p("a"), p("a^-1")) == G.identity
    assert G.mul(p("ab"), p("b^-1a")) == p("a^2")
    assert G.format(G.inv(p("ab^-1"))) == "ba^-1"
    assert G.inv(G.identity) == G.identity
    assert G.word_length(p("ab^-1a")) == 3
    assert G.word_length(G.identity) == 0


def test_free_product_collapse():
    G = build_group(FreeProduct((Cyclic(2), Cyclic(3))))
    assert G.mul(G.parse("ab"), G.parse("b2")) == G.parse("a")
    assert G.format(G.mul(G.parse("ab"), G.parse("ba"))) == "ab2a"
    assert G.word_length(G.parse("ab2ab")) == 4


def test_lattice_examples():
    G = build_group(Lattice(2))
    g = G.parse("(3,-1)")
    assert G.inv(g) == (-3, 1)
    assert G.word_length(g) == 4
    assert G.format(G.inv(g)) == "(-3,1)"


def test_ball_examples():
    F2 = build_group(Free(2))
    assert sorted(F2.format(g) for g in F2.ball(1)) == sorted(["e", "a", "a^-1", "b", "b^-1"])
    assert len(F2.ball(8)) == 2 * 3 ** 8 - 1 == 13121
    assert len(build_group(Cyclic(3)).ball(10)) == 3


@pytest.mark.parametrize("d", [1, 2, 3])
def test_free_sphere_sizes(d):
    G = build_group(Free(d))
    sizes = G.sphere_sizes(8 if d < 3 else 6)
    assert sizes[0] == 1
    for k, n in enumerate(sizes[1:], start=1):
        assert n == 2 * d * (2 * d - 1) ** (k - 1)


def test_ball_is_deterministic_and_ordered(group):
    b1 = group.ball(3)
    b2 = build_group(group.descriptor).ball(3)
    assert b1 == b2
    lengths = [group.word_length(g) for g in b1]
    assert lengths == sorted(lengths)
    assert len(set(b1)) == len(b1)


def test_ball_cap():
    with pytest.raises(BallCapExceeded):
        build_group(Free(3)).ball(10, cap=1000)


def test_group_axioms_on_ball(group):
    ball = group.ball(2)[:25]
    e = group.identity
    for g in ball:
        assert group.mul(g, group.inv(g)) == e
        assert group.inv(group.inv(g)) == g
        assert group.mul(e, g) == g == group.mul(g, e)
        for h in ball[:8]:
            for k in ball[:6]:
                assert group.mul(group.mul(g, h), k) == group.mul(g, group.mul(h, k))


def test_format_parse_round_trip(group):
    for g in group.ball(3):
        assert group.parse(group.format(g)) == g


def test_invalid_literals(group):
    for text in ["zz", "", "a^x"]:
        with pytest.raises(GroupError):
            group.parse(text)


def test_mixed_group_and_foreign_element():
    F2 = build_group(Free(2))
    with pytest.raises(ElementError):
        F2.mul((1,), (5,))
    with pytest.raises(ElementError):
        F2.mul((1, -1), (2,))  # not reduced
    assert build_group(Free(2)) == F2
    with pytest.raises(MixedGroupError):
        F2.same_group(build_group(Free(3)))


def test_direct_product_componentwise():
    G = build_group(DirectProduct(Free(2), Cyclic(3)))
    L, R = G.left, G.right
    for g in G.ball(2):
        for h in G.ball(1):
            assert G.mul(g, h) == (L.mul(g[0], h[0]), R.mul(g[1], h[1]))


def test_descriptor_json_round_trip():
    for d in DESCRIPTORS:
        assert descriptor_from_json(json.loads(json.dumps(descriptor_to_json(d)))) == d


# free-group arithmetic against a string-reduction oracle ---------------------

words = st.text(alphabet="aAbBcC", max_size=12)


@settings(max_examples=200, deadline=None)
@given(words, words, words)
def test_free_group_against_string_oracle(u, v, w):
    G = build_group(Free(3))
    gu, gv, gw = (from_string(reduce_word(x)) for x in (u, v, w))
    prod = G.mul(G.mul(gu, gv), gw)
    assert to_string(prod) == reduce_word(u + v + w)
    assert prod == G.mul(gu, G.mul(gv, gw))
    assert to_string(G.inv(gu)) == word_inverse(reduce_word(u))
    assert G.word_length(gu) == len(reduce_word(u))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "b2"]), max_size=12))
def test_free_product_normal_form(letters):
    """Products of generators stay alternating and match a brute reduction."""
    G = build_group(FreeProduct((Cyclic(2), Cyclic(3))))
    g = G.identity
    for s in letters:
        g = G.mul(g, G.parse(s))
    # oracle: exponents of a mod 2 and b mod 3 over a run-length reduction
    stack: list[list] = []
    for s in letters:
        f, k = ("a", 1) if s == "a" else ("b", 1 if s == "b" else 2)
        if stack and stack[-1][0] == f:
            stack[-1][1] = (stack[-1][1] + k) % (2 if f == "a" else 3)
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([f, k])
    text = "".join(f if k == 1 else f"{f}{k}" for f, k in stack) or "e"
    assert G.format(g) == text
    assert G.parse(G.format(g)) == g


# subgroups -------------------------------------------------------------------


def test_subgroup_checks():
    G = build_group(FreeProduct((Cyclic(2), Cyclic(3))))
    F = Subgroup(G, [G.identity, G.parse("a")])
    assert len(F) == 2 and not F.is_normal
    assert F.normality_witness() == (G.parse("b"), G.parse("a"))
    with pytest.raises(SubgroupError):
        Subgroup(G, [G.identity, G.parse("b")])
    with pytest.raises(SubgroupError):
        Subgroup(G, [G.parse("a")])
    B = Subgroup.generated(G, [G.parse("b")])
    assert sorted(G.format(x) for x in B.elements) == ["b", "b2", "e"]


def test_normal_subgroups():
    S3G = build_group(FiniteTable.from_json(S3))
    A3 = Subgroup(S3G, [0, 1, 2])
    assert A3.is_normal
    for (s, f), y in A3.certificate.items():
        assert y in A3 and S3G.conj(s, f) == y
    D = build_group(DirectProduct(Free(2), Cyclic(3)))
    F = Subgroup(D, [D.parse(x) for x in ["(e,e)", "(e,c)", "(e,c2)"]])
    assert F.is_normal
    assert Subgroup.trivial(D).is_normal


def test_normality_violation_error_fields():
    err = NormalityViolation("b", "a", "b", "a")
    assert "b" in str(err) and isinstance(err, SubgroupError)
