import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from coarsening_lab.asep import (
    AsepState,
    StaircaseInterface,
    TRAJECTORY_HEADER,
    asep_to_quadrant,
    current_h0,
    dump_trajectory,
    evolve_asep,
    ld_event_probability,
    quadrant_interface,
    quadrant_to_asep,
    sample_watch_positions,
    step_initial,
    truncation_size,
)


def test_step_initial_values():
    assert step_initial(1).positions.tolist() == [-1]
    assert step_initial(3).positions.tolist() == [-1, -2, -3]
    with pytest.raises(ValueError):
        step_initial(0)


def test_positions_strictly_decreasing_enforced():
    with pytest.raises(ValueError):
        AsepState(np.array([3, 3, 1]))


def test_free_particle_poisson_oracle():
    # q=1, M=1: displacement after t is Poisson(t)
    t, reps = 5.0, 10_000
    pos, _ = sample_watch_positions(1, 1.0, t, 1, master_seed=2, replicas=reps)
    disp = pos + 1
    assert abs(disp.mean() - t) < 3 * math.sqrt(t / reps)


def test_zero_elapsed_is_identity():
    st_ = step_initial(5)
    evolve_asep(st_, 0.0, 0.8, seed=4)
    assert st_.positions.tolist() == [-1, -2, -3, -4, -5]


def test_time_must_not_decrease():
    st_ = step_initial(2)
    evolve_asep(st_, 1.0, 0.8, seed=4)
    with pytest.raises(ValueError):
        evolve_asep(st_, 0.5, 0.8, seed=4)


def test_seed_binding():
    st_ = step_initial(2)
    evolve_asep(st_, 1.0, 0.8, seed=4)
    with pytest.raises(ValueError):
        evolve_asep(st_, 2.0, 0.8, seed=5)


def test_exclusion_order_kept_every_event():
    for seed in range(50):
        st_ = step_initial(12)
        evolve_asep(st_, 20.0, 0.7, seed=seed, check_order=True)
        assert (np.diff(st_.positions) < 0).all()


def test_trajectory_determinism_vs_split():
    a = step_initial(6)
    evolve_asep(a, 9.0, 0.75, seed=3)
    b = step_initial(6)
    for t in (2.0, 5.0, 9.0):
        evolve_asep(b, t, 0.75, seed=3)
    assert np.array_equal(a.positions, b.positions)
    assert a.event_count == b.event_count


def test_truncation_robustness_ks():
    # doubling M leaves x_10(50) statistically unchanged (KS at 5%)
    a, _ = sample_watch_positions(200, 0.75, 50.0, 10, master_seed=6, replicas=1000)
    b, _ = sample_watch_positions(400, 0.75, 50.0, 10, master_seed=7, replicas=1000)
    assert sps.ks_2samp(a, b).pvalue > 0.05


def test_current_h0():
    assert current_h0(step_initial(4)) == 0
    assert current_h0(AsepState(np.array([3, 1, -2]))) == 2


def test_trajectory_dump_schema():
    st_ = step_initial(4)
    lines = dump_trajectory(st_, 3.0, 0.8, seed=12)
    assert lines[0] == TRAJECTORY_HEADER
    assert len(lines) > 1
    for row in lines[1:]:
        t, ev, j, old, new, blocked = row.split(",")
        assert 1 <= int(j) <= 4
        assert abs(int(new) - int(old)) <= 1
        assert int(blocked) in (0, 1)
        if int(blocked):
            assert int(new) == int(old)


def test_quadrant_interface_maps_to_step():
    st_ = quadrant_to_asep(quadrant_interface(), n_particles=5)
    assert st_.positions.tolist() == [-1, -2, -3, -4, -5]


def test_single_eat_event_maps_to_right_jump():
    st_ = quadrant_to_asep(quadrant_interface(), n_particles=3)
    st_.positions[0] += 1  # one right jump of x_1
    iface = asep_to_quadrant(st_)
    assert iface.heights == (1,)  # the outer corner cell was eaten


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=0, max_size=6))
def test_round_trip_bijection(raw):
    heights = tuple(sorted(raw, reverse=True))
    iface = StaircaseInterface(heights)
    back = asep_to_quadrant(quadrant_to_asep(iface, n_particles=len(heights) + 2))
    assert back.heights == iface.heights


def test_malformed_staircase_rejected():
    with pytest.raises(ValueError):
        StaircaseInterface((1, 3))
    with pytest.raises(ValueError):
        StaircaseInterface((-1,))
    with pytest.raises(ValueError):
        asep_to_quadrant(AsepState(np.array([-5, -6])))  # h_1 = -4 < 0


def test_ld_event_probability_monotone_trend():
    # tail event P(x_m(t/gamma) < 0) decreasing in t at fixed eps
    eps, q = 0.3, 0.9
    ests = []
    for t in (6.0, 12.0, 24.0):
        m = max(1, int(t * (1 - eps) / 4))
        ests.append(ld_event_probability(m, t, q, replicas=20_000, seed=5).estimate)
    assert ests[0] > ests[1] > ests[2]


def test_ld_event_probability_validation():
    with pytest.raises(ValueError):
        ld_event_probability(2, 10.0, 0.5, replicas=10)
    with pytest.raises(ValueError):
        ld_event_probability(0, 10.0, 0.9, replicas=10)


def test_watch_index_must_fit_truncation():
    with pytest.raises(ValueError):
        sample_watch_positions(5, 0.8, 1.0, 6, 0, 10)


def test_truncation_size_rule():
    assert truncation_size(3, 12.0) == 3 + 12 + 10
    assert truncation_size(2, 11.5) == 2 + 12 + 10


def test_quadrant_window_doubling_insensitive():
    # boundary influence at the default window is far below MC noise
    from coarsening_lab.asep import quadrant_minus_probability, quadrant_window_side
    from coarsening_lab.stats import z_score_of_difference

    side = quadrant_window_side(3.0, 2, 1)
    a, _ = quadrant_minus_probability(side, 0.7, 3.0, 2, 1, 19, 20_000)
    b, _ = quadrant_minus_probability(side + 24, 0.7, 3.0, 2, 1, 23, 20_000)
    assert abs(z_score_of_difference(a, b)) < 4.0


def test_coupling_identity_second_point():
    # P(spin at (3,2) = -1 at t) = P(x_2(t) < 1) at another (q, t) point
    from coarsening_lab.asep import quadrant_minus_probability, quadrant_window_side
    from coarsening_lab.stats import wilson_interval, z_score_of_difference

    q, t, m, l = 0.85, 3.0, 3, 2
    side = quadrant_window_side(t, m, l)
    lattice, viol = quadrant_minus_probability(side, q, t, m, l, 31, 30_000, check_staircase=True)
    pos, _ = sample_watch_positions(truncation_size(l, t), q, t, l, 37, 30_000)
    asep = wilson_interval(int((pos < m - l).sum()), 30_000)
    assert viol == 0
    assert abs(z_score_of_difference(lattice, asep)) <= 3.5
