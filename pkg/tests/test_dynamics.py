import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paradim.dynamics import (
    Cycle,
    classify_parameter,
    continue_cycle,
    cycle_from_point,
    find_cycle,
    iterate,
    orbit_jet,
    parabolic_parameter,
    select_cycle_point,
)
from paradim.errors import CollisionError, DomainError, EscapeError, MinimalityError


def test_iterate_fixed_point_of_square():
    orb = iterate(0, 1, 3)
    assert orb.values == (1, 1, 1, 1)
    assert orb.derivative == 8
    assert orb.log_derivative == pytest.approx(3 * math.log(2), abs=1e-15)


def test_iterate_superattracting_two_cycle():
    assert iterate(-1, 0, 2).values == (0, -1, 0)


def test_iterate_parabolic_fixed_point():
    orb = iterate(-0.75, -0.5, 1)
    assert orb.values == (-0.5, -0.5)
    assert orb.derivative == -1


def test_iterate_zero_steps_and_negative():
    assert iterate(0.3, 0.1, 0).values == (0.1,)
    with pytest.raises(DomainError):
        iterate(0, 0, -1)


def test_iterate_escape_reports_index():
    with pytest.raises(EscapeError) as err:
        iterate(2, 0, 50)
    # 0, 2, 6, 38, 1446, ~2.1e6, ~4.4e12: the sixth step crosses 1e8
    assert err.value.index == 6


def test_find_cycle_superattracting_fixed_point():
    cyc = find_cycle(0, 1, 0.1)
    assert abs(cyc.points[0]) < 1e-15
    assert cyc.multiplier == 0


def test_find_cycle_parabolic_two_cycle():
    cyc = find_cycle(-1.25, 2, 0.3j)
    assert abs(cyc.multiplier + 1) <= 1e-8


def test_find_cycle_attracting_fixed_point():
    cyc = find_cycle(-0.5, 1, -0.3)
    assert cyc.points[0] == pytest.approx((1 - math.sqrt(3)) / 2, abs=1e-14)
    assert cyc.multiplier == pytest.approx(1 - math.sqrt(3), abs=1e-14)


def test_find_cycle_rejects_lower_period():
    # the fixed point of z^2 also solves f^2(z) = z
    with pytest.raises(MinimalityError):
        find_cycle(0, 2, 0.01, retries=0)


def test_continue_fixed_point():
    cyc = continue_cycle(find_cycle(0, 1, 0.1), 0, 0.1, 4)
    r = math.sqrt(0.6)
    assert cyc.points[0] == pytest.approx((1 - r) / 2, abs=1e-13)
    assert cyc.multiplier == pytest.approx(1 - r, abs=1e-13)


def test_continue_two_cycle_matches_vieta():
    cyc = continue_cycle(find_cycle(-1, 2, 0.1), -1, -1.2, 8)
    assert cyc.multiplier == pytest.approx(4 * (-1.2 + 1), abs=1e-12)
    # period-2 points solve z^2 + z + c + 1 = 0
    for z in cyc.points:
        assert abs(z * z + z - 0.2) < 1e-12


def test_continue_through_saddle_node_collides():
    start = find_cycle(0.2, 1, 0.3)
    with pytest.raises(CollisionError) as err:
        continue_cycle(start, 0.2, 0.3, 8)
    assert abs(err.value.at - 0.25) < 1e-3


def test_parabolic_parameters():
    assert parabolic_parameter(1) == pytest.approx(-0.75, abs=1e-12)
    assert parabolic_parameter(2) == pytest.approx(-1.25, abs=1e-12)
    assert parabolic_parameter(1, target=1.0) == pytest.approx(0.25, abs=1e-7)


def test_classify_examples():
    assert classify_parameter(2).kind == "escaping"
    cl = classify_parameter(-1)
    assert (cl.kind, cl.period) == ("attracting", 2)
    assert abs(cl.multiplier) < 1e-12
    cl = classify_parameter(-0.5)
    assert cl.period == 1
    assert cl.multiplier.real == pytest.approx(1 - math.sqrt(3), abs=1e-12)


def test_classify_parabolic_is_undetermined():
    assert classify_parameter(-0.75).kind == "undetermined"


def test_select_cycle_point_prefers_large_second_derivative():
    cyc = find_cycle(-1.25, 2, 0.3)
    i = select_cycle_point(cyc)
    s = [abs(orbit_jet(cyc.c, z, 2)[2]) for z in cyc.points]
    assert s[i] == max(s)


# -------------------------------------------------------------- properties

cardioid = st.builds(
    lambda r, t: (r * cmath.exp(1j * t) / 2) - (r * cmath.exp(1j * t) / 2) ** 2,
    st.floats(0.0, 0.95), st.floats(-math.pi, math.pi),
)


@given(cardioid, st.integers(1, 20), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_chain_rule(c, n, x, y):
    z0 = complex(x, y)
    orb = iterate(c, z0, n)
    prod = 1 + 0j
    for v in orb.values[:-1]:
        prod *= 2 * v
    for j in range(n):
        assert orb.values[j + 1] == orb.values[j] ** 2 + c
    assert abs(orb.derivative - prod) <= 1e-12 * max(abs(prod), 1e-300)


@given(st.floats(-1.9, 0.24), st.integers(1, 4), st.floats(-1.5, 1.5), st.floats(-1.0, 1.0))
def test_cycle_invariants(c, k, x, y):
    try:
        cyc = find_cycle(c, k, complex(x, y))
    except Exception:
        return  # seed outside every basin
    pts = cyc.points
    mult = 1 + 0j
    for i, z in enumerate(pts):
        assert abs(z * z + c - pts[(i + 1) % k]) <= 1e-12 * max(1.0, abs(z))
        mult *= 2 * z
    assert abs(mult - cyc.multiplier) <= 1e-10 * max(1.0, abs(mult))
    for d in range(1, k):
        if k % d == 0:
            assert abs(orbit_jet(c, pts[0], d)[0] - pts[0]) > 1e-9


@given(st.floats(-0.7, 0.2), st.floats(-0.02, 0.02))
def test_continuation_round_trip(c, dc):
    start = cycle_from_point(c, 1, (1 - cmath.sqrt(1 - 4 * c)) / 2)
    there = continue_cycle(start, c, c + dc, 4)
    back = continue_cycle(there, c + dc, c, 4)
    assert abs(back.points[0] - start.points[0]) <= 1e-9


@given(st.floats(-1.4, -0.8), st.floats(0.05, 1.0))
def test_real_cycles_closed_under_conjugation(c, y):
    try:
        cyc = find_cycle(c, 2, complex(0.2, y))
    except Exception:
        return
    pts = cyc.points
    for z in pts:
        assert min(abs(z.conjugate() - w) for w in pts) <= 1e-10


def test_cycle_type_is_frozen():
    cyc = Cycle(0j, 1, (0j,), 0j)
    with pytest.raises(AttributeError):
        cyc.period = 2
