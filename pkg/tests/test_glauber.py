import math

import numpy as np
import pytest
from scipy import stats as sps

from coarsening_lab import _kernels as K
from coarsening_lab.glauber import (
    EVENT_LOG_HEADER,
    GlauberSim,
    Never,
    Timeout,
    couple,
    dump_event_log,
    erosion_time,
    erosion_times,
    evolve_coupled,
    evolve_until,
    first_minus_time_after,
)
from coarsening_lab.lattice import Boundary, cube, quadrant_config, sample_product_config, uniform_config


def test_q1_all_plus_box_never_flips():
    sim = GlauberSim(uniform_config(cube(4, 2), 1, Boundary.ALL_MINUS), q=1.0, seed=2)
    evolve_until(sim, 25.0)
    assert (sim.config.spins == 1).all()
    assert sim.event_count > 0


def test_zero_elapsed_time_is_identity():
    sim = GlauberSim(sample_product_config(cube(5, 2), 0.5, seed=4), q=0.3, seed=4)
    evolve_until(sim, 2.0)
    snap = sim.config.spins.copy()
    events = sim.event_count
    evolve_until(sim, 2.0)
    assert np.array_equal(sim.config.spins, snap)
    assert sim.event_count == events


def test_evolve_time_validation():
    sim = GlauberSim(uniform_config(cube(2, 2), 1), q=0.5)
    evolve_until(sim, 1.0)
    with pytest.raises(ValueError):
        evolve_until(sim, 0.5)
    with pytest.raises(ValueError):
        evolve_until(sim, math.inf)


def test_single_site_survival_probability():
    # isolated -1 site with AllPlus boundary flips at its first ring:
    # P(still -1 at t=1) = exp(-1), checked at 3 standard errors
    reps = 100_000
    _, censored = erosion_times(1, 0.5, 1, master_seed=11, replicas=reps, t_max=1.0)
    p_hat = censored.mean()
    target = math.exp(-1.0)
    se = math.sqrt(target * (1 - target) / reps)
    assert abs(p_hat - target) < 3 * se


def test_single_site_erosion_is_exponential():
    times, censored = erosion_times(1, 0.7, 2, master_seed=13, replicas=10_000, t_max=200.0)
    assert not censored.any()
    assert abs(times.mean() - 1.0) < 3 / math.sqrt(10_000)
    # one-site marginal: flip times are Exp(1) (KS at 5%)
    assert sps.kstest(times, "expon").pvalue > 0.05


def test_erosion_q1_small_cube_terminates():
    times, censored = erosion_times(2, 1.0, 2, master_seed=5, replicas=500, t_max=100.0)
    assert not censored.any()
    assert times.mean() < 20.0


def test_erosion_timeout_is_censored():
    out = erosion_time(6, 0.0, 2, seed=1, t_max=0.5)
    assert isinstance(out, Timeout) and out.t_max == 0.5


def test_erosion_argument_validation():
    with pytest.raises(ValueError):
        erosion_time(0, 0.5, 2)
    with pytest.raises(ValueError):
        erosion_time(2, 1.5, 2)
    with pytest.raises(ValueError):
        erosion_time(2, 0.5, 2, t_max=0.0)


def test_trajectory_determinism_and_split_evolve():
    cfg = sample_product_config(cube(6, 2), 0.4, seed=21)
    a = GlauberSim(cfg, q=0.6, seed=21)
    b = GlauberSim(cfg, q=0.6, seed=21)
    evolve_until(a, 7.0)
    for t in (1.0, 2.5, 2.5, 6.0, 7.0):
        evolve_until(b, t)
    assert np.array_equal(a.config.spins, b.config.spins)
    assert a.event_count == b.event_count
    assert a._state == b._state


def test_event_log_schema_and_determinism():
    cfg = sample_product_config(cube(4, 2), 0.5, seed=8)
    lines = dump_event_log(GlauberSim(cfg, q=0.5, seed=8), 3.0)
    again = dump_event_log(GlauberSim(cfg, q=0.5, seed=8), 3.0)
    assert lines == again
    assert lines[0] == EVENT_LOG_HEADER
    assert len(lines) > 1
    prev_t = 0.0
    for row in lines[1:]:
        idx, t, site, e, old, new, tie = row.split(",")
        t = float(t)
        assert t >= prev_t
        prev_t = t
        assert int(e) % 2 == 0
        assert int(old) in (-1, 1) and int(new) in (-1, 1)
        assert int(tie) in (0, 1)
        if int(e) < 0:
            assert int(new) == int(old)
        if int(e) > 0:
            assert int(new) == -int(old)


def test_coupled_identical_configs_stay_identical():
    cfg = sample_product_config(cube(5, 2), 0.5, seed=31)
    pair = couple(cfg, 0.7, cfg, 0.7, seed=31)
    evolve_coupled(pair, 4.0)
    assert np.array_equal(pair.low.config.spins, pair.high.config.spins)
    assert pair.violations == 0


def test_coupled_extreme_order_preserved():
    lo = uniform_config(cube(5, 2), -1, Boundary.ALL_MINUS)
    hi = uniform_config(cube(5, 2), 1, Boundary.ALL_PLUS)
    pair = couple(lo, 0.7, hi, 0.7, seed=3)
    evolve_coupled(pair, 5.0)
    assert pair.violations == 0
    assert np.all(pair.low.config.spins <= pair.high.config.spins)


def test_coupled_bias_ordering():
    cfg = sample_product_config(cube(6, 2), 0.5, Boundary.ALL_PLUS, seed=17)
    pair = couple(cfg, 0.5, cfg, 0.9, seed=17)
    evolve_coupled(pair, 3.0)
    assert pair.violations == 0
    assert (pair.high.config.spins == 1).sum() >= (pair.low.config.spins == 1).sum()


def test_coupled_rejects_unordered_or_bad_q():
    lo = uniform_config(cube(3, 2), 1)
    hi = uniform_config(cube(3, 2), -1)
    with pytest.raises(ValueError):
        couple(lo, 0.5, hi, 0.5)
    with pytest.raises(ValueError):
        couple(hi, 0.9, lo, 0.5)


def test_first_minus_never_for_stable_plus():
    sim = GlauberSim(uniform_config(cube(3, 2), 1, Boundary.ALL_MINUS), q=1.0, seed=1)
    out = first_minus_time_after(sim, (1, 1), 0.0, 20.0)
    assert isinstance(out, Never)


def test_first_minus_immediate_when_already_minus():
    cfg = uniform_config(cube(3, 2), 1)
    cfg.view()[1, 1] = -1
    sim = GlauberSim(cfg, q=0.5, seed=2)
    assert first_minus_time_after(sim, (1, 1), 0.0, 5.0) == 0.0


def test_first_minus_horizon_validation():
    sim = GlauberSim(uniform_config(cube(3, 2), 1), q=0.5)
    with pytest.raises(ValueError):
        first_minus_time_after(sim, (1, 1), 2.0, 2.0)


def test_minus_probability_decreases_with_time():
    # origin-minus probability strictly below the t=0 value at a later time
    reps = 1000
    out = np.empty(reps, np.float64)
    K.fixation_probe_many(24, 0.9, 0.9, 40.0, np.uint64(71), reps, out)
    p20 = (out >= 20.0).mean()
    p0 = (out >= 0.0).mean()
    assert p20 < p0


def test_quadrant_staircase_zero_violations_smoke():
    out_minus = np.empty(200, np.int8)
    out_viol = np.empty(200, np.int64)
    K.quadrant_minus_many(32, 0.7, 8.0, 2, 1, np.uint64(5), 200, True, out_minus, out_viol)
    assert out_viol.sum() == 0


def test_all_plus_box_absorbing_any_q_with_plus_boundary():
    sim = GlauberSim(uniform_config(cube(4, 2), 1, Boundary.ALL_PLUS), q=0.2, seed=9)
    evolve_until(sim, 30.0)
    assert (sim.config.spins == 1).all()


def test_erosion_linear_not_quadratic_smoke():
    # T(64)/T(8) far closer to the linear 8x than the diffusive 64x
    t8, _ = erosion_times(8, 0.75, 2, master_seed=3, replicas=200, t_max=3000.0)
    t64, _ = erosion_times(64, 0.75, 2, master_seed=4, replicas=100, t_max=3000.0)
    ratio = np.median(t64) / np.median(t8)
    assert 8.0 < ratio < 25.0


@pytest.mark.parametrize("q", [0.55, 0.75, 0.95])
def test_quadrant_staircase_invariant_across_bias(q):
    out_minus = np.empty(200, np.int8)
    out_viol = np.empty(200, np.int64)
    K.quadrant_minus_many(32, q, 10.0, 2, 1, np.uint64(13), 200, True, out_minus, out_viol)
    assert out_viol.sum() == 0


@pytest.mark.parametrize("make_cfg", [
    lambda: sample_product_config(cube(5, 2), 0.5, Boundary.ALL_MINUS, seed=41),
    lambda: sample_product_config(cube(4, 3), 0.5, Boundary.FREE, seed=43),
    lambda: quadrant_config(6),
])
def test_event_log_energies_match_reference_implementation(make_cfg):
    # replay the kernel's log against the pure-python local energy
    from coarsening_lab.lattice import local_energy

    cfg = make_cfg()
    sim = GlauberSim(cfg, q=0.5, seed=17)
    lines = dump_event_log(sim, 4.0)
    replay = cfg.copy()
    shape = replay.shape
    for row in lines[1:]:
        _, _, site, e, old, new, _ = row.split(",")
        coords = shape.coords(int(site))
        assert int(old) == replay.spin_at(coords)
        assert int(e) == local_energy(replay, coords)
        replay.spins[int(site)] = int(new)
    assert np.array_equal(replay.spins, sim.config.spins)
