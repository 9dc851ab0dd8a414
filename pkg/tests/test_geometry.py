import pytest

from slitstrip.geometry import (GeometryError, Strip, format_key, half_set, make_geometry,
                                parse_half_set, parse_key, remove, signed_indicator,
                                symmetric_geometry)


def test_smallest_geometry_has_two_dual_sites():
    g = make_geometry(-1, 1)
    assert g.width == 2
    assert g.dual_sites == (-1, 1)
    assert g.modes == (1, 3)


def test_balanced_width_four_splits_legs_evenly():
    g = make_geometry(-2, 2)
    assert g.modes == (1, 3, 5, 7)
    assert (g.left_width, g.right_width) == (2, 2)
    assert g.left_modes == g.right_modes == (1, 3)


@pytest.mark.parametrize("a, b, msg", [(0, 3, "a must be negative"), (-2, 0, "b must be positive")])
def test_slit_must_lie_strictly_inside(a, b, msg):
    with pytest.raises(GeometryError, match=msg):
        make_geometry(a, b)


def test_plain_strip_rejects_empty_width():
    with pytest.raises(GeometryError):
        Strip(2, 2)


def test_symmetric_geometry_puts_extra_column_on_the_right():
    assert (symmetric_geometry(5).a, symmetric_geometry(5).b) == (-2, 3)
    with pytest.raises(GeometryError):
        symmetric_geometry(1)


def test_dual_index_rejects_sites_outside():
    g = make_geometry(-1, 2)
    assert [g.dual_index(x) for x in g.dual_sites] == [0, 1, 2]
    with pytest.raises(GeometryError):
        g.dual_index(5)
    with pytest.raises(GeometryError):
        g.dual_index(0)


@pytest.mark.parametrize("k, expected", [(5, 1), (3, -1), (1, 1), (7, 0)])
def test_signed_indicator_alternates_from_the_top(k, expected):
    assert signed_indicator((1, 3, 5), k) == expected


def test_half_set_sorts_and_validates():
    assert half_set([5, 1, 3]) == (1, 3, 5)
    for bad in ([2], [-1], [1, 1]):
        with pytest.raises(GeometryError):
            half_set(bad)
    with pytest.raises(GeometryError):
        half_set([5], width=2)


def test_key_round_trip():
    key = parse_key("1,3;;5")
    assert key == ((1, 3), (), (5,))
    assert format_key(*key) == "1,3;;5"
    assert parse_half_set("  ") == ()
    with pytest.raises(GeometryError):
        parse_key("1;3")
    with pytest.raises(GeometryError):
        parse_half_set("1,x")


def test_remove_drops_one_index():
    assert remove((1, 3, 5), 3) == (1, 5)
