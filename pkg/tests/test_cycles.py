import numpy as np
import pytest

from knotcycle import cycles
from knotcycle.contact import ContactFunction, iterate_sigma
from knotcycle.curve import circle_distance
from knotcycle.symmetry import shift_residual

from conftest import rotation_map

PAPER_NINE = np.array([0, 0.159, 0.175, 0.334, 0.492, 0.508, 0.667, 0.826, 0.841])
RELAX = 5


def sine_map(p, q, wobble=0.3, n=2000):
    """Rotation by p/q composed with a 1/q-periodic wobble; sigma^q then has
    the 2q zeros of sin(2 pi q t) as fixed points."""
    b = np.arange(n + 1) / n
    v = b + p / q + wobble * np.sin(2 * np.pi * q * b) / (2 * np.pi * q)
    return ContactFunction(b, v)


# synthetic maps ------------------------------------------------------------

def test_rigid_rotation_is_degenerate():
    fps = cycles.fixed_points(rotation_map(1 / 3), 3)
    assert fps.degenerate
    assert cycles.cycles_from(rotation_map(1 / 3), fps) == []


@pytest.mark.parametrize('p,q', [(1, 3), (2, 5), (4, 9)])
def test_winding_rotation(p, q):
    assert cycles.winding_number(rotation_map(p / q), q) == p
    assert cycles.winding_number(rotation_map(p / q), 0) == 0


def test_two_period_two_orbits():
    cf = sine_map(1, 2)
    fps = cycles.fixed_points(cf, 2)
    assert np.allclose(np.sort(fps.points), [0, 0.25, 0.5, 0.75], atol=1e-9)
    found = cycles.detect_cycles(cf, 2)
    mins = cycles.minimal_cycles(found, 2)
    assert len(mins) == 2
    v = cycles.counting_check(fps, found, 2)
    assert v.holds and v.fixed == 4 and v.slack == 0


def test_counting_empty():
    cf = rotation_map(0.5 ** 0.5 - 0.5, wobble=0.0)
    fps = cycles.fixed_points(cf, 1)
    v = cycles.counting_check(fps, [], 1)
    assert v.holds and v.fixed == 0 and v.minimal_cycles == 0


def test_ordering_rotation_two_fifths():
    found = cycles.minimal_cycles(cycles.detect_cycles(sine_map(2, 5), 5), 5)
    assert found
    for c in found:
        assert cycles.cycle_ordering(c) == (0, 3, 1, 4, 2)


def test_one_cycle_ordering():
    c = cycles.Cycle((0.3,), 1, True, 0.0, 0)
    assert cycles.cycle_ordering(c) == (0,)


def test_stability_labels():
    found = cycles.minimal_cycles(cycles.detect_cycles(sine_map(1, 2), 2), 2)
    assert sorted(c.stability for c in found) == ['attracting', 'repelling']


def test_partition_rejects_short_cycle():
    with pytest.raises(cycles.CycleError):
        cycles.partition(cycles.Cycle((0.1, 0.6), 2, True, 0.0, 1))


def test_detect_cycles_limit():
    with pytest.raises(ValueError):
        cycles.detect_cycles(rotation_map(0.1), 161)


def test_attractor_guards():
    cf = sine_map(1, 2)
    with pytest.raises(ValueError):
        cycles.attractor_orbit(cf, 0.1, 10_001)
    with pytest.raises(ValueError):
        cycles.attractor_report(cf, cycles.Cycle((0.0, 0.5), 2, True, 0, 1), grid=32)


# bundled reconstruction ----------------------------------------------------

def test_nine_fixed_points(trefoil_cf):
    fps = cycles.fixed_points(trefoil_cf, 9)
    att = fps.points[np.array(fps.kinds) == 'attracting']
    assert len(att) == 9
    d = circle_distance(np.sort(att)[:, None], PAPER_NINE[None, :]).min(axis=1)
    assert np.max(d) < 5e-3
    # split touches: every attracting point has a repelling partner nearby
    rep = fps.points[np.array(fps.kinds) == 'repelling']
    assert len(rep) == 9
    assert np.max(circle_distance(att[:, None], rep[None, :]).min(axis=1)) < 2e-3 * RELAX


def test_sigma9_of_zero(trefoil_cf):
    x = iterate_sigma(trefoil_cf, 0.0, 9)
    assert circle_distance(x, 0.0) < 2e-3 * RELAX


def test_fixed_points_shift_invariant(trefoil_cf):
    fps = cycles.fixed_points(trefoil_cf, 9)
    assert shift_residual(fps.points) < 2e-3


def test_no_two_cycle(trefoil_cf):
    assert len(cycles.fixed_points(trefoil_cf, 2)) == 0


def test_winding_regression(trefoil_cf):
    assert cycles.winding_number(trefoil_cf, 9) == 4
    assert cycles.winding_number(trefoil_cf, 1) == 0


@pytest.mark.parametrize('n', [2, 7, 11, 13, 16, 20, 25])
def test_excluded_lengths(trefoil_cf, n):
    assert cycles.detect_cycles(trefoil_cf, n, ns=[n]) == []


def test_eighteen_only_multiples(trefoil_cf):
    found = cycles.detect_cycles(trefoil_cf, 18, ns=[9, 18])
    c18 = [c for c in found if c.n == 18]
    assert c18 and not any(c.minimal for c in c18)
    ids = {c.id for c in found if c.n == 9}
    assert all(c.multiple_of in ids for c in c18)


def test_single_touch_cycle(trefoil_cf):
    found = cycles.detect_cycles(trefoil_cf, 30)
    mins = cycles.minimal_cycles(found)
    assert {c.n for c in mins} == {9}
    groups = cycles.touch_groups(found, tol=2e-3 * RELAX)
    assert len(groups) == 1 and groups[0][0].stability == 'attracting'


def test_counting_up_to_30(trefoil_cf):
    found = cycles.detect_cycles(trefoil_cf, 30)
    for n in range(1, 31):
        assert cycles.counting_check(cycles.fixed_points(trefoil_cf, n), found, n).holds


def test_only_multiples_up_to_144(trefoil_cf):
    found = cycles.detect_cycles(trefoil_cf, 144)
    for c in found:
        assert c.residual < 2e-3
        if not c.minimal:
            assert c.n % 9 == 0 and c.multiple_of is not None
        else:
            assert c.n == 9


def test_cyclic_permutations_are_cycles(trefoil_cf, nine_cycle):
    for i in range(9):
        assert cycles.cycle_residual(trefoil_cf, nine_cycle.rotated(i).params) < 2e-3


def test_nine_ordering(nine_cycle):
    i0 = int(np.argmin(circle_distance(np.array(nine_cycle.params), 0.0)))
    assert cycles.cycle_ordering(nine_cycle.rotated(i0)) == cycles.NINE_ORDER


def test_partition(nine_partition):
    p = nine_partition
    assert sum(a.length for a in p.arcs) == pytest.approx(1.0, abs=1e-9)
    a2 = p.arc('alpha2')
    assert circle_distance(a2.start, 0.159) < 5e-3 and circle_distance(a2.end, 0.175) < 5e-3
    for k in (1, 2, 3):
        assert p.arc(f'beta{k}').length == pytest.approx(p.arc(f'beta~{k}').length,
                                                       abs=2e-3 * RELAX)
    assert p.s(9) == p.s(0)


def test_piece_map(trefoil_cf, nine_partition):
    rep = cycles.piece_map_check(trefoil_cf, nine_partition)
    assert rep.chain == cycles.NINE_CHAIN
    assert rep.max_endpoint_residual < 2e-3
    assert rep.interior_ok['alpha1']
    assert rep.ok


def test_orbit_on_cycle(trefoil_cf, nine_partition):
    s0 = nine_partition.s(0)
    o = cycles.attractor_orbit(trefoil_cf, s0, 20, stride=9)
    assert np.max(circle_distance(np.mod(o, 1.0), s0)) < 2e-3


def test_orbit_from_005(trefoil_cf, nine_partition):
    o = cycles.attractor_orbit(trefoil_cf, 0.05, 16, stride=9)
    o = o - 4 * np.arange(17)
    assert np.all(np.diff(o) >= 0)
    assert o[-1] == pytest.approx(nine_partition.s(7), abs=2e-3)


def test_attractor_report(trefoil_cf, nine_cycle):
    rep = cycles.attractor_report(trefoil_cf, nine_cycle)
    assert rep.all_converged and np.all(rep.monotone)
    assert np.max(circle_distance(rep.limit, rep.nearest)) < 2e-3
    # non-uniform convergence: the worst start lags far behind the median
    i = 5
    assert rep.sup_trace[i] > 10 * rep.median_trace[i]
    m = rep.median_trace
    assert m[1] > m[10] > m[100] or (m[1] > m[10] and m[100] == 0)
