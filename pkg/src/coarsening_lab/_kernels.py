"""Event-driven numba kernels for the Glauber and ASEP simulators.

All kernels implement the same event engine: a single exponential race at
rate = site count (equivalent in law to independent rate-1 clocks), one
uniform site pick per event, and counter-mode tie-break uniforms indexed by
the global event number.  Stream draw order per event is (gap, site[, dir]),
so trajectories are bit-identical however evolve calls are split.

Replica kernels derive one stream per replica from (master_seed, replica)
and write only to their own output slot; results are therefore invariant to
thread count and scheduling.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange, uint64

from .rng import GAMMA as _G
from .rng import TAG_EVENTS, TAG_INIT, TAG_TIE, U01_SCALE

GAMMA = uint64(_G)
MIX1 = uint64(0xBF58476D1CE4E5B9)
MIX2 = uint64(0x94D049BB133111EB)
T_TAG_INIT = uint64(TAG_INIT)
T_TAG_EVENTS = uint64(TAG_EVENTS)
T_TAG_TIE = uint64(TAG_TIE)


@njit(uint64(uint64), cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> uint64(30))) * MIX1
    z = (z ^ (z >> uint64(27))) * MIX2
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _u01(u):
    return (u >> uint64(11)) * U01_SCALE


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _sub(seed, tag):
    return _mix(seed ^ tag)


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _rep_seed(master, r):
    return _mix(master + (r + uint64(1)) * GAMMA)


@njit(cache=True, inline="always")
def _tie_u(tie_seed, event_i):
    return _u01(_mix(tie_seed + (event_i + uint64(1)) * GAMMA))


@njit(cache=True, inline="always")
def _counter_u(sub_seed, i):
    return _u01(_mix(sub_seed + (i + uint64(1)) * GAMMA))


@njit(cache=True, inline="always")
def _energy(spins, p, strides, d):
    tot = 0
    for a in range(d):
        st = strides[a]
        tot += spins[p - st] + spins[p + st]
    return -spins[p] * tot


# -- single-trajectory Glauber advance ----------------------------------------


@njit(cache=True)
def glauber_advance(spins, site_pad, strides, d, q, state, tie_seed, event_i, next_time, clock, t_target):
    """Advance one trajectory to t_target.  Mutates spins (padded, flat).

    next_time is the absolute time of the already-scheduled next event, or
    NaN when not yet drawn.  Returns (state, event_i, next_time, flips).
    """
    n = site_pad.size
    nn = uint64(n)
    flips = 0
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / n
    while next_time <= t_target:
        state += GAMMA
        p = site_pad[_mix(state) % nn]
        e = _energy(spins, p, strides, d)
        if e > 0:
            spins[p] = -spins[p]
            flips += 1
        elif e == 0:
            new = 1 if _tie_u(tie_seed, event_i) < q else -1
            if new != spins[p]:
                spins[p] = new
                flips += 1
        event_i += uint64(1)
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / n
    return state, event_i, next_time, flips


@njit(cache=True)
def glauber_advance_log(
    spins, site_pad, strides, d, q, state, tie_seed, event_i, next_time, clock, t_target,
    log_time, log_site, log_e, log_old, log_new, log_tie,
):
    """Same engine, recording one row per event.  Returns state tuple + count."""
    n = site_pad.size
    nn = uint64(n)
    cap = log_time.size
    k = 0
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / n
    while next_time <= t_target and k < cap:
        state += GAMMA
        s = _mix(state) % nn
        p = site_pad[s]
        e = _energy(spins, p, strides, d)
        old = spins[p]
        used_tie = 0
        new = old
        if e > 0:
            new = -old
        elif e == 0:
            used_tie = 1
            new = 1 if _tie_u(tie_seed, event_i) < q else -1
        spins[p] = new
        log_time[k] = next_time
        log_site[k] = s
        log_e[k] = e
        log_old[k] = old
        log_new[k] = new
        log_tie[k] = used_tie
        k += 1
        event_i += uint64(1)
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / n
    return state, event_i, next_time, k


@njit(cache=True)
def glauber_watch_minus(spins, site_pad, strides, d, q, state, tie_seed, event_i, next_time, clock, horizon, watch_p):
    """Advance until the watched padded index takes spin -1, or past horizon.

    Returns (state, event_i, next_time, found_time) with found_time = NaN if
    the watched site never turns -1 by the horizon.
    """
    n = site_pad.size
    nn = uint64(n)
    found = np.nan
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / n
    while next_time <= horizon:
        state += GAMMA
        p = site_pad[_mix(state) % nn]
        e = _energy(spins, p, strides, d)
        if e > 0:
            spins[p] = -spins[p]
        elif e == 0:
            spins[p] = 1 if _tie_u(tie_seed, event_i) < q else -1
        event_i += uint64(1)
        t_ev = next_time
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / n
        if p == watch_p and spins[p] == -1:
            found = t_ev
            break
    return state, event_i, next_time, found


# -- coupled pair --------------------------------------------------------------


@njit(cache=True)
def coupled_advance(
    sp_lo, sp_hi, site_pad, strides, d, q_lo, q_hi, state, tie_seed, event_i, next_time, clock, t_target, check_order,
):
    """Shared rings + shared tie uniforms; counts ordering violations."""
    n = site_pad.size
    nn = uint64(n)
    violations = 0
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / n
    while next_time <= t_target:
        state += GAMMA
        p = site_pad[_mix(state) % nn]
        e_lo = _energy(sp_lo, p, strides, d)
        e_hi = _energy(sp_hi, p, strides, d)
        need_tie = (e_lo == 0) or (e_hi == 0)
        u = _tie_u(tie_seed, event_i) if need_tie else 0.0
        if e_lo > 0:
            sp_lo[p] = -sp_lo[p]
        elif e_lo == 0:
            sp_lo[p] = 1 if u < q_lo else -1
        if e_hi > 0:
            sp_hi[p] = -sp_hi[p]
        elif e_hi == 0:
            sp_hi[p] = 1 if u < q_hi else -1
        if check_order and sp_lo[p] > sp_hi[p]:
            violations += 1
        event_i += uint64(1)
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / n
    return state, event_i, next_time, violations


@njit(cache=True, parallel=True)
def coupled_order_many(side, d, p_hi, p_drop, q_lo, q_hi, t_target, master_seed, n_rep, out_viol):
    """Replicated coupled runs from random ordered initials (AllPlus pad).

    high ~ product(p_hi); low = high with extra -1's dropped in w.p. p_drop,
    so low <= high pointwise.  out_viol[r] = ordering violations seen.
    """
    pad_side = side + 2
    npad = pad_side**d
    n = side**d
    strides = np.empty(d, np.int64)
    strides[d - 1] = 1
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * pad_side
    site_pad = np.empty(n, np.int64)
    for s in range(n):
        rem = s
        ppos = 0
        for a in range(d):
            sd = side**(d - 1 - a)
            c = rem // sd
            rem -= c * sd
            ppos += (c + 1) * strides[a]
        site_pad[s] = ppos
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        init = _sub(seed, T_TAG_INIT)
        state = _sub(seed, T_TAG_EVENTS)
        tie_seed = _sub(seed, T_TAG_TIE)
        sp_lo = np.ones(npad, np.int8)
        sp_hi = np.ones(npad, np.int8)
        for s in range(n):
            u1 = _counter_u(init, uint64(2 * s))
            u2 = _counter_u(init, uint64(2 * s + 1))
            hi = 1 if u1 < p_hi else -1
            lo = hi
            if hi == 1 and u2 < p_drop:
                lo = -1
            sp_hi[site_pad[s]] = hi
            sp_lo[site_pad[s]] = lo
        st, ev, nxt, viol = coupled_advance(
            sp_lo, sp_hi, site_pad, strides, d, q_lo, q_hi, state, tie_seed,
            uint64(0), np.nan, 0.0, t_target, True,
        )
        out_viol[r] = viol


# -- replicated erosion ---------------------------------------------------------


@njit(cache=True)
def _cube_geometry(side, d):
    pad_side = side + 2
    npad = pad_side**d
    n = side**d
    strides = np.empty(d, np.int64)
    strides[d - 1] = 1
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * pad_side
    site_pad = np.empty(n, np.int64)
    for s in range(n):
        rem = s
        ppos = 0
        for a in range(d):
            sd = side**(d - 1 - a)
            c = rem // sd
            rem -= c * sd
            ppos += (c + 1) * strides[a]
        site_pad[s] = ppos
    return npad, strides, site_pad


@njit(cache=True)
def _erosion_one(side, d, q, seed, t_max, npad, strides, site_pad):
    """All -1 cube in an all +1 sea; first time the cube is all +1."""
    n = site_pad.size
    nn = uint64(n)
    spins = np.ones(npad, np.int8)
    for s in range(n):
        spins[site_pad[s]] = -1
    minus = n
    state = _sub(seed, T_TAG_EVENTS)
    tie_seed = _sub(seed, T_TAG_TIE)
    event_i = uint64(0)
    state += GAMMA
    t = -np.log1p(-_u01(_mix(state))) / n
    while t <= t_max:
        state += GAMMA
        p = site_pad[_mix(state) % nn]
        e = _energy(spins, p, strides, d)
        if e > 0:
            spins[p] = -spins[p]
            minus += 1 if spins[p] == -1 else -1
        elif e == 0:
            new = 1 if _tie_u(tie_seed, event_i) < q else -1
            if new != spins[p]:
                spins[p] = new
                minus += 1 if new == -1 else -1
        if minus == 0:
            return t, False
        event_i += uint64(1)
        state += GAMMA
        t += -np.log1p(-_u01(_mix(state))) / n
    return t_max, True


@njit(cache=True, parallel=True)
def erosion_many(side, d, q, master_seed, n_rep, t_max, out_time, out_censored):
    npad, strides, site_pad = _cube_geometry(side, d)
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        t, censored = _erosion_one(side, d, q, seed, t_max, npad, strides, site_pad)
        out_time[r] = t
        out_censored[r] = censored


# -- q=1 box fixation and the fixation probe ------------------------------------


@njit(cache=True, parallel=True)
def box_fixation_many(side, d, p_plus, q, horizon, boundary_value, master_seed, n_rep, out_fixed, out_time):
    """Product(p_plus) initial inside, constant boundary; did the box reach
    all +1 by the horizon?  Early exit on absorption is only valid for q=1
    (fixed cubes) or AllPlus boundary; callers enforce that.
    """
    npad, strides, site_pad = _cube_geometry(side, d)
    n = site_pad.size
    nn = uint64(n)
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        init = _sub(seed, T_TAG_INIT)
        state = _sub(seed, T_TAG_EVENTS)
        tie_seed = _sub(seed, T_TAG_TIE)
        spins = np.full(npad, boundary_value, np.int8)
        minus = 0
        for s in range(n):
            sp = 1 if _counter_u(init, uint64(s)) < p_plus else -1
            spins[site_pad[s]] = sp
            if sp == -1:
                minus += 1
        event_i = uint64(0)
        state += GAMMA
        t = -np.log1p(-_u01(_mix(state))) / n
        fixed = minus == 0
        t_fix = 0.0 if fixed else np.nan
        while not fixed and t <= horizon:
            state += GAMMA
            p = site_pad[_mix(state) % nn]
            e = _energy(spins, p, strides, d)
            if e > 0:
                spins[p] = -spins[p]
                minus += 1 if spins[p] == -1 else -1
            elif e == 0:
                new = 1 if _tie_u(tie_seed, event_i) < q else -1
                if new != spins[p]:
                    spins[p] = new
                    minus += 1 if new == -1 else -1
            if minus == 0:
                fixed = True
                t_fix = t
            event_i += uint64(1)
            state += GAMMA
            t += -np.log1p(-_u01(_mix(state))) / n
        out_fixed[r] = fixed
        out_time[r] = t_fix


@njit(cache=True, parallel=True)
def fixation_probe_many(side, p_plus, q, horizon, master_seed, n_rep, out_slast):
    """d=2 product(p_plus) box, AllPlus pad; out_slast[r] = last time the
    center site holds spin -1 within [0, horizon] (-inf if never, horizon if
    still -1 at the end)."""
    d = 2
    npad, strides, site_pad = _cube_geometry(side, d)
    n = site_pad.size
    nn = uint64(n)
    center = (side // 2) * side + side // 2
    watch_p = site_pad[center]
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        init = _sub(seed, T_TAG_INIT)
        state = _sub(seed, T_TAG_EVENTS)
        tie_seed = _sub(seed, T_TAG_TIE)
        spins = np.ones(npad, np.int8)
        for s in range(n):
            spins[site_pad[s]] = 1 if _counter_u(init, uint64(s)) < p_plus else -1
        cur_minus = spins[watch_p] == -1
        last_exit = -np.inf
        event_i = uint64(0)
        state += GAMMA
        t = -np.log1p(-_u01(_mix(state))) / n
        while t <= horizon:
            state += GAMMA
            p = site_pad[_mix(state) % nn]
            e = _energy(spins, p, strides, d)
            if e > 0:
                spins[p] = -spins[p]
            elif e == 0:
                spins[p] = 1 if _tie_u(tie_seed, event_i) < q else -1
            if p == watch_p:
                if cur_minus and spins[p] == 1:
                    last_exit = t
                    cur_minus = False
                elif spins[p] == -1:
                    cur_minus = True
            event_i += uint64(1)
            state += GAMMA
            t += -np.log1p(-_u01(_mix(state))) / n
        out_slast[r] = horizon if cur_minus else last_exit


# -- quadrant (corner growth/decay) runs ----------------------------------------


@njit(cache=True)
def _quadrant_one(side, q, t_target, seed, check_staircase, lam):
    """One quadrant trajectory on [0,side-1]^2; returns (spins, violations).

    lam[b] = eaten length of row b (number of leading +1's at (1..a, b)); it
    is maintained incrementally and checked against the staircase rule at
    every flip when check_staircase is set.
    """
    d = 2
    pad_side = side + 2
    npad = pad_side * pad_side
    n = side * side
    nn = uint64(n)
    strides = np.empty(2, np.int64)
    strides[0] = pad_side
    strides[1] = 1
    spins = np.empty(npad, np.int8)
    # pad holds the Quadrant pattern at global coords in [-1, side]
    for g0 in range(-1, side + 1):
        for g1 in range(-1, side + 1):
            v = -1 if (g0 >= 1 and g1 >= 1) else 1
            spins[(g0 + 1) * pad_side + (g1 + 1)] = v
    site_pad = np.empty(n, np.int64)
    for s in range(n):
        c0 = s // side
        c1 = s - c0 * side
        site_pad[s] = (c0 + 1) * pad_side + (c1 + 1)
    for b in range(lam.size):
        lam[b] = 0
    violations = 0
    state = _sub(seed, T_TAG_EVENTS)
    tie_seed = _sub(seed, T_TAG_TIE)
    event_i = uint64(0)
    state += GAMMA
    t = -np.log1p(-_u01(_mix(state))) / n
    while t <= t_target:
        state += GAMMA
        s = _mix(state) % nn
        p = site_pad[s]
        e = _energy(spins, p, strides, d)
        old = spins[p]
        new = old
        if e > 0:
            new = -old
        elif e == 0:
            new = 1 if _tie_u(tie_seed, event_i) < q else -1
        if new != old:
            spins[p] = new
            a = s // side  # global coords == box coords
            b = s - a * side
            if check_staircase:
                if a < 1 or b < 1:
                    violations += 1
                elif new == 1:
                    # eat cell (a, b): must extend row b, nested under row b-1
                    above = side if b == 1 else lam[b - 1]
                    if a != lam[b] + 1 or above < a:
                        violations += 1
                    lam[b] = a
                else:
                    # regrow cell (a, b): must shrink row b, nested over row b+1
                    below = 0 if b + 1 >= side else lam[b + 1]
                    if a != lam[b] or below > a - 1:
                        violations += 1
                    lam[b] = a - 1
            elif a >= 1 and b >= 1:
                lam[b] = a if new == 1 else a - 1
        event_i += uint64(1)
        state += GAMMA
        t += -np.log1p(-_u01(_mix(state))) / n
    return spins, violations


@njit(cache=True, parallel=True)
def quadrant_minus_many(side, q, t_target, m, l, master_seed, n_rep, check_staircase, out_minus, out_viol):
    """Replicated quadrant runs; out_minus[r] = 1 iff spin at (m, l) is -1
    at t_target."""
    pad_side = side + 2
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        lam = np.zeros(side, np.int64)
        spins, viol = _quadrant_one(side, q, t_target, seed, check_staircase, lam)
        out_minus[r] = 1 if spins[(m + 1) * pad_side + (l + 1)] == -1 else 0
        out_viol[r] = viol


# -- watched all-+1 region stability ---------------------------------------------


@njit(cache=True, parallel=True)
def plus_region_stability_many(side, d, p_outside, q, horizon, lo, hi, master_seed, n_rep, out_viol):
    """Random product(p_outside) box with AllMinus pad, except the sub-box
    [lo, hi) forced to +1.  out_viol[r] = number of events flipping a
    sub-box site to -1 (expected zero at q=1 for sub-box side >= 2)."""
    npad, strides, site_pad = _cube_geometry(side, d)
    n = site_pad.size
    nn = uint64(n)
    watch = np.zeros(npad, np.int8)
    for s in range(n):
        rem = s
        inside = True
        for a in range(d):
            sd = side**(d - 1 - a)
            c = rem // sd
            rem -= c * sd
            if c < lo[a] or c >= hi[a]:
                inside = False
        if inside:
            watch[site_pad[s]] = 1
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        init = _sub(seed, T_TAG_INIT)
        state = _sub(seed, T_TAG_EVENTS)
        tie_seed = _sub(seed, T_TAG_TIE)
        spins = np.full(npad, -1, np.int8)
        for s in range(n):
            p = site_pad[s]
            if watch[p] == 1:
                spins[p] = 1
            else:
                spins[p] = 1 if _counter_u(init, uint64(s)) < p_outside else -1
        viol = 0
        event_i = uint64(0)
        state += GAMMA
        t = -np.log1p(-_u01(_mix(state))) / n
        while t <= horizon:
            state += GAMMA
            p = site_pad[_mix(state) % nn]
            e = _energy(spins, p, strides, d)
            if e > 0:
                spins[p] = -spins[p]
            elif e == 0:
                spins[p] = 1 if _tie_u(tie_seed, event_i) < q else -1
            if watch[p] == 1 and spins[p] == -1:
                viol += 1
            event_i += uint64(1)
            state += GAMMA
            t += -np.log1p(-_u01(_mix(state))) / n
        out_viol[r] = viol


# -- ASEP ------------------------------------------------------------------------


@njit(cache=True)
def asep_advance(pos, q, state, event_i, next_time, clock, t_target, check_order):
    """Advance ASEP positions (strictly decreasing int64) to t_target.

    Global rate-M race; a blocked jump consumes the ring.  Per event the
    stream order is (gap, particle, direction).  Returns
    (state, event_i, next_time, violations).
    """
    M = pos.size
    mm = uint64(M)
    violations = 0
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / M
    while next_time <= t_target:
        state += GAMMA
        j = int(_mix(state) % mm)
        state += GAMMA
        right = _u01(_mix(state)) < q
        if right:
            if j == 0 or pos[j - 1] > pos[j] + 1:
                pos[j] += 1
        else:
            if j == M - 1 or pos[j + 1] < pos[j] - 1:
                pos[j] -= 1
        if check_order:
            if j > 0 and pos[j - 1] <= pos[j]:
                violations += 1
            if j < M - 1 and pos[j] <= pos[j + 1]:
                violations += 1
        event_i += uint64(1)
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / M
    return state, event_i, next_time, violations


@njit(cache=True)
def asep_advance_log(pos, q, state, event_i, next_time, clock, t_target,
                     log_time, log_particle, log_old, log_new, log_blocked):
    M = pos.size
    mm = uint64(M)
    cap = log_time.size
    k = 0
    if np.isnan(next_time):
        state += GAMMA
        next_time = clock - np.log1p(-_u01(_mix(state))) / M
    while next_time <= t_target and k < cap:
        state += GAMMA
        j = int(_mix(state) % mm)
        state += GAMMA
        right = _u01(_mix(state)) < q
        old = pos[j]
        new = old
        blocked = 0
        if right:
            if j == 0 or pos[j - 1] > pos[j] + 1:
                new = old + 1
            else:
                blocked = 1
        else:
            if j == M - 1 or pos[j + 1] < pos[j] - 1:
                new = old - 1
            else:
                blocked = 1
        pos[j] = new
        log_time[k] = next_time
        log_particle[k] = j + 1
        log_old[k] = old
        log_new[k] = new
        log_blocked[k] = blocked
        k += 1
        event_i += uint64(1)
        state += GAMMA
        next_time += -np.log1p(-_u01(_mix(state))) / M
    return state, event_i, next_time, k


@njit(cache=True, parallel=True)
def asep_many(M, q, t_target, master_seed, n_rep, watch_j, out_watch_pos, out_h0):
    """Replicated step-initial ASEP runs.

    out_watch_pos[r] = position of particle watch_j (1-based) at t_target;
    out_h0[r] = number of particles at positions >= 1.
    """
    for r in prange(n_rep):
        seed = _rep_seed(uint64(master_seed), uint64(r))
        state = _sub(seed, T_TAG_EVENTS)
        pos = np.empty(M, np.int64)
        for j in range(M):
            pos[j] = -(j + 1)
        st, ev, nxt, viol = asep_advance(pos, q, state, uint64(0), np.nan, 0.0, t_target, False)
        out_watch_pos[r] = pos[watch_j - 1]
        h0 = 0
        for j in range(M):
            if pos[j] >= 1:
                h0 += 1
            else:
                break
        out_h0[r] = h0
