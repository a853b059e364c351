import math
from itertools import islice
from fractions import Fraction as Q

import pytest

from avezlab.errors import MeasureError
from avezlab.groups import Free, build_group
from avezlab.measures import lazy_uniform, walk
from avezlab.radial import (
    kesten_radius,
    radial_ratio,
    radial_start,
    radial_step,
    radial_walk,
    sphere_size,
)


def test_first_steps():
    p = radial_step(radial_start(2, 0))
    assert p.probs == (0, 1)
    p2 = radial_step(p)
    assert p2.p(0) == Q(1, 4)
    assert p2.p(2) == Q(3, 4)
    assert radial_ratio(radial_start(2, Q(1, 4)), 0) == 1


def test_transition_probabilities():
    """One step from distance k follows the stated birth-death rule."""
    d, alpha = 3, Q(1, 5)
    p = radial_step(radial_start(d, alpha))
    assert p.p(0) == alpha and p.p(1) == 1 - alpha
    q = radial_step(p)
    up = (1 - alpha) * Q(2 * d - 1, 2 * d)
    down = (1 - alpha) / (2 * d)
    assert q.p(2) == p.p(1) * up
    assert q.p(1) == p.p(1) * alpha + p.p(0) * (1 - alpha)
    assert q.p(0) == p.p(0) * alpha + p.p(1) * down


@pytest.mark.parametrize("d,alpha,N", [(2, Q(0), 8), (2, Q(1, 4), 8), (3, Q(0), 6), (3, Q(1, 4), 6), (1, Q(1, 3), 10)])
def test_matches_sparse_engine(d, alpha, N):
    G = build_group(Free(d))
    mu = lazy_uniform(G, alpha)
    for (n, m), p in zip(walk(mu, upto=N), islice(radial_walk(d, alpha), 1, None)):
        assert p.step == n
        by_len: dict = {}
        for g, w in m.items():
            assert w == p.element_mass(len(g))
            by_len[len(g)] = by_len.get(len(g), 0) + w
        for k in range(n + 1):
            assert by_len.get(k, 0) == p.p(k)


def test_mass_conservation():
    for p in radial_walk(2, Q(1, 4)):
        if p.step > 60:
            break
        assert p.total() == 1


def test_return_norm_is_sum_of_squares():
    for p in radial_walk(2, Q(1, 3)):
        if p.step > 12:
            break
        direct = sum(p.element_mass(k) ** 2 * sphere_size(2, k) for k in range(len(p.num)))
        assert p.return_norm() == direct


def test_return_norm_matches_sparse():
    G = build_group(Free(2))
    mu = lazy_uniform(G, Q(1, 4))
    ms = dict(walk(mu, upto=10))
    for p in radial_walk(2, Q(1, 4)):
        if p.step == 0:
            continue
        if p.step > 5:
            break
        assert p.return_norm() == ms[2 * p.step][G.identity]


def test_float_fallback_tracks_exact():
    ex = list(islice(radial_walk(2, Q(1, 4)), 200))
    fl = list(islice(radial_walk(2, Q(1, 4), exact=False), 200))
    assert not fl[-1].exact
    for k in range(4):
        assert math.isclose(float(radial_ratio(ex[-1], k)), radial_ratio(fl[-1], k), rel_tol=1e-9)


def test_zero_return_probability_raises():
    p = radial_step(radial_start(2, 0))
    with pytest.raises(MeasureError):
        radial_ratio(p, 1)


def test_bad_parameters():
    with pytest.raises(MeasureError):
        radial_start(0, 0)
    with pytest.raises(MeasureError):
        radial_start(2, 1)


def test_ratio_stays_below_one():
    """Golden fixture for d=2, alpha=1/4, k=1 (computed by the recurrence)."""
    for p in radial_walk(2, Q(1, 4)):
        if p.step == 400:
            r = radial_ratio(p, 1)
            assert 0.85 < r < 0.87
            break


def test_kesten_radius():
    assert kesten_radius(2) == pytest.approx(math.sqrt(3) / 2)
    assert kesten_radius(1) == 1
