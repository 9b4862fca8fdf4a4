from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ncsim import gz


def quaternion_triad(a, b, c, d):
    """Columns of the rotation matrix of an integer quaternion: an orthogonal rational triad."""
    n = a * a + b * b + c * c + d * d
    m = [
        [a*a + b*b - c*c - d*d, 2 * (b*c - a*d), 2 * (b*d + a*c)],
        [2 * (b*c + a*d), a*a - b*b + c*c - d*d, 2 * (c*d - a*b)],
        [2 * (b*d - a*c), 2 * (c*d + a*b), a*a - b*b - c*c + d*d],
    ]
    return [[Fraction(m[r][k], n) for r in range(3)] for k in range(3)]


@pytest.mark.parametrize("raw, expected", [
    ((Fraction(3, 5), Fraction(4, 5), 0), (3, 4, 0, 5)),
    (("-3/5", "-4/5", "0"), (3, 4, 0, 5)),
    ((6, 8, 0), (3, 4, 0, 5)),
    ((0, 0, -7), (0, 0, 1, 1)),
    ((2, 3, 6), (2, 3, 6, 7)),
])
def test_reduce(raw, expected):
    v = gz.reduce(raw)
    assert (*v.components, v.n) == expected


@pytest.mark.parametrize("raw", [(1, 1, 0), (1, 1, 1), (0, 0, 0), (1, 2)])
def test_reduce_rejects(raw):
    with pytest.raises(gz.NotUnitNormalizable):
        gz.reduce(raw)


def test_colour_follows_odd_position():
    assert gz.gz_colour(gz.reduce((3, 4, 0))) == 1
    assert gz.gz_colour(gz.reduce((4, 3, 0))) == 0
    assert gz.gz_colour(gz.reduce((2, 3, 6))) == 0


def test_small_enumerations():
    assert len(gz.enumerate_rational_triads(1)) == 1
    r = gz.verify(5)
    assert (r.vectors, r.triads, r.violations) == (27, 11, 0)


def test_triads_are_orthogonal_and_distinct():
    for t in gz.enumerate_rational_triads(12):
        a, b, c = t
        assert a.dot(b) == b.dot(c) == a.dot(c) == 0
        assert sorted({a.odd_position, b.odd_position, c.odd_position}) == [0, 1, 2]


def test_report_serializes():
    d = gz.verify(3).to_dict()
    assert d["ok"] is True and d["max_component"] == 3


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(-30, 30)] * 4))
def test_every_rational_triad_has_exactly_one_one(q):
    assume(any(q))
    triad = quaternion_triad(*q)
    vecs = [gz.reduce(v) for v in triad]
    assert sum(gz.gz_colour(v) for v in vecs) == 1


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.integers(-20, 20)] * 4), st.integers(1, 50), st.booleans())
def test_reduce_is_scale_and_sign_invariant(q, k, flip):
    assume(any(q))
    v = quaternion_triad(*q)[0]
    s = -k if flip else k
    assert gz.reduce(v) == gz.reduce([x * s for x in v])
