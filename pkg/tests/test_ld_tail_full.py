"""Full-size lower-tail slope run (skip with COARSENING_LAB_SKIP_FULL=1)."""

import pytest

from coarsening_lab.experiments import default_spec, run
from coarsening_lab.rate import RateParams, phi_plus


@pytest.mark.full
def test_ld_tail_slope_beats_half_rate():
    spec = default_spec("ld-tail")
    spec.master_seed = 4242
    res = run(spec)
    cells = [r for r in res.rows if r["kind"] == "cell"]
    fit = [r for r in res.rows if r["kind"] == "fit"][0]
    assert all(c["successes"] > 0 for c in cells)
    ests = [c["estimate"] for c in cells]
    assert all(a > b for a, b in zip(ests, ests[1:]))  # decreasing in t
    target = -0.5 * phi_plus(0.3, RateParams.from_q(0.95))
    print(f"LD TAIL slope={fit['slope']:.4f} needed <= {target:.4f}", flush=True)
    assert fit["slope"] <= target
    assert fit["slope_target"] == -phi_plus(0.3, RateParams.from_q(0.95))
