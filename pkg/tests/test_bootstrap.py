import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsening_lab.bootstrap import (
    MbpConfig,
    Rectangle,
    RectangleSet,
    internally_spans,
    mbp_closure,
    mbp_from_text,
    mbp_step,
    mbp_to_text,
    minus_bootstrap_closure,
    minus_bootstrap_rectangles,
    rectangles_conflict,
    sample_mbp_config,
    spanning_probability,
)
from coarsening_lab.lattice import BoxShape, cube


def _field(side, occupied):
    occ = np.zeros((side, side), dtype=np.uint8)
    for c in occupied:
        occ[c] = 1
    return MbpConfig(BoxShape((side, side)), occ.ravel())


def brute_force_closure(config: MbpConfig) -> MbpConfig:
    cur = config
    while True:
        nxt = mbp_step(cur)
        if np.array_equal(nxt.occupied, cur.occupied):
            return cur
        cur = nxt


def test_step_absorbing_on_full():
    cfg = MbpConfig(cube(4, 2), np.ones(16, np.uint8))
    assert np.array_equal(mbp_step(cfg).occupied, cfg.occupied)


def test_step_direct_rule_application():
    cfg = _field(3, [(1, 0), (0, 1)])
    out = mbp_step(cfg).view()
    assert out[0, 0] == 1 and out[1, 1] == 1
    assert out.sum() == 4


def test_step_needs_all_axes():
    cfg = _field(4, [(0, 0), (2, 0)])
    assert np.array_equal(mbp_step(cfg).occupied, cfg.occupied)


def test_closure_empty():
    cfg = _field(4, [])
    assert mbp_closure(cfg).occupied.sum() == 0


def test_closure_first_row_and_column_fill():
    n = 6
    occ = [(0, j) for j in range(n)] + [(i, 0) for i in range(n)]
    out = mbp_closure(_field(n, occ))
    assert (out.occupied == 1).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 0.9))
def test_closure_equals_brute_force(seed, theta):
    cfg = sample_mbp_config(cube(8, 2), theta, seed=seed)
    assert np.array_equal(mbp_closure(cfg).occupied, brute_force_closure(cfg).occupied)


def test_closure_equals_brute_force_d3():
    cfg = sample_mbp_config(cube(4, 3), 0.4, seed=5)
    assert np.array_equal(mbp_closure(cfg).occupied, brute_force_closure(cfg).occupied)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_closure_monotone_and_idempotent(seed):
    cfg = sample_mbp_config(cube(6, 2), 0.3, seed=seed)
    closed = mbp_closure(cfg)
    # idempotent
    assert np.array_equal(mbp_closure(closed).occupied, closed.occupied)
    # adding occupied sites never removes closure sites
    more = cfg.copy()
    extra = sample_mbp_config(cube(6, 2), 0.2, seed=seed + 1)
    more.occupied |= extra.occupied
    assert (mbp_closure(more).occupied >= closed.occupied).all()


def test_internally_spans_degenerate_cases():
    full = MbpConfig(cube(3, 2), np.ones(9, np.uint8))
    assert internally_spans(full, (0, 0), (3, 3))
    # single vacant site with everything outside occupied: restriction zeroes it
    cfg = MbpConfig(cube(3, 2), np.ones(9, np.uint8))
    cfg.view()[1, 1] = 0
    assert not internally_spans(cfg, (1, 1), (2, 2))
    with pytest.raises(ValueError):
        internally_spans(full, (0, 0), (4, 4))


def test_spanning_probability_degenerate():
    assert spanning_probability(5, 1.0, 2, replicas=20, seed=1).estimate == 1.0
    assert spanning_probability(5, 0.0, 2, replicas=20, seed=1).estimate == 0.0
    with pytest.raises(ValueError):
        spanning_probability(5, 1.5, 2, replicas=5)


def test_spanning_probability_theta_one_spans_every_replica():
    est = spanning_probability(4, 1.0, 3, replicas=10, seed=0)
    assert est.successes == est.trials


def test_minus_closure_rule():
    f = np.ones((5, 5), np.int8)
    f[2, 2] = f[2, 3] = -1
    out = minus_bootstrap_closure(f)
    # no site has two -1 axis neighbors, nothing grows
    assert (out == f).all()
    f2 = np.ones((5, 5), np.int8)
    f2[2, 1] = f2[1, 2] = -1
    out2 = minus_bootstrap_closure(f2)
    assert out2[2, 2] == -1 and out2[1, 1] == -1


def test_rectangles_empty_field():
    assert minus_bootstrap_rectangles(np.ones((4, 4), np.int8)).rectangles == ()


def test_rectangles_adjacent_pair_one_rectangle():
    f = np.ones((5, 5), np.int8)
    f[1, 2] = f[2, 2] = -1
    rs = minus_bootstrap_rectangles(f)
    assert len(rs.rectangles) == 1
    r = rs.rectangles[0]
    assert r.contains((1, 2)) and r.contains((2, 2))


def test_rectangles_far_singletons():
    f = np.ones((6, 6), np.int8)
    f[0, 0] = -1
    f[0, 3] = -1  # l1 distance 3: no growth, separated singletons
    rs = minus_bootstrap_rectangles(f)
    assert len(rs.rectangles) == 2
    assert rs.well_separated()
    assert all(r.sides == (1, 1) for r in rs.rectangles)


def test_conflict_criterion():
    # conflict iff the per-axis gaps sum to <= 2 (a site within l1-distance 1 of both)
    a = Rectangle((0, 0), (1, 1))
    assert rectangles_conflict(a, Rectangle((0, 3), (0, 3)))  # gap 2 on one axis
    assert rectangles_conflict(a, Rectangle((3, 0), (4, 1)))  # gap 2 on the other
    assert not rectangles_conflict(a, Rectangle((3, 3), (4, 4)))  # diagonal gaps 2+2
    assert not rectangles_conflict(a, Rectangle((0, 4), (1, 5)))  # gap 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.4))
def test_rectangle_set_invariants(seed, minus_density):
    occ = sample_mbp_config(cube(7, 2), minus_density, seed=seed)
    field = np.where(occ.view() == 1, -1, 1).astype(np.int8)
    closed = minus_bootstrap_closure(field)
    rs = minus_bootstrap_rectangles(field)
    assert rs.well_separated()
    minus_sites = list(zip(*np.nonzero(closed == -1)))
    for site in minus_sites:
        assert rs.covers(site)
    # minimality: every rectangle holds at least one closure -1 site
    for r in rs.rectangles:
        assert any(r.contains(s) for s in minus_sites)


def _minus_internally_spanned(field, lo, hi):
    """Threshold-two closure of the field restricted to the rectangle covers it."""
    sub = field[lo[0]:hi[0] + 1, lo[1]:hi[1] + 1]
    return (minus_bootstrap_closure(sub) == -1).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_aizenman_lebowitz_style_check(seed):
    # a long rectangle in the closure forces an internally spanned
    # subrectangle at every intermediate scale window
    occ = sample_mbp_config(cube(7, 2), 0.25, seed=seed)
    field = np.where(occ.view() == 1, -1, 1).astype(np.int8)
    for rect in minus_bootstrap_rectangles(field).rectangles:
        longer = max(rect.sides)
        for j in range(2, longer):
            found = False
            for a0 in range(rect.lo[0], rect.hi[0] + 1):
                for b0 in range(a0, rect.hi[0] + 1):
                    for a1 in range(rect.lo[1], rect.hi[1] + 1):
                        for b1 in range(a1, rect.hi[1] + 1):
                            side = max(b0 - a0 + 1, b1 - a1 + 1)
                            if not (max(j // 2 - 1, 1) <= side <= j):
                                continue
                            if _minus_internally_spanned(field, (a0, a1), (b0, b1)):
                                found = True
                                break
                        if found:
                            break
                    if found:
                        break
                if found:
                    break
            assert found, f"no spanned subrectangle at window j={j} in {rect}"


def test_field_text_io_round_trip():
    cfg = sample_mbp_config(cube(5, 2), 0.5, seed=3)
    text = mbp_to_text(cfg)
    assert text.splitlines()[0].startswith("d=2 sides=5,5")
    back = mbp_from_text(text)
    assert np.array_equal(back.occupied, cfg.occupied)
