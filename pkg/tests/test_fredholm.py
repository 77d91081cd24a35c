import cmath
import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from coarsening_lab.asep import sample_watch_positions, truncation_size
from coarsening_lab.fredholm import (
    QuadratureSpec,
    ResidueError,
    WorkloadError,
    default_quadrature,
    f_tau,
    fredholm_det,
    kernel_J,
    pochhammer_inf,
    prob_xm_positive,
    q_binomial_identity,
    residue_identity_value,
)
from coarsening_lab.rate import RateParams

PR = RateParams.from_q(0.75)
QUAD = default_quadrature(PR)


# -- f_tau and the Pochhammer product --------------------------------------------


def brute_f_tau(mu, z, tau, terms=400):
    pos = sum((tau * z) ** k / (1 - tau**k * mu) for k in range(terms))
    neg = sum((1.0 / z) ** j / (tau**j - mu) for j in range(1, terms))
    return pos + neg


def test_f_tau_long_sum_oracle():
    val = f_tau(0.5, 1.5, 0.3, tol=1e-15)
    assert abs(val - brute_f_tau(0.5, 1.5, 0.3)) < 1e-12


def test_f_tau_complex_oracle():
    mu = 0.4 + 0.3j
    z = 1.8 * cmath.exp(1.1j)
    val = f_tau(mu, z, 0.35, tol=1e-15)
    assert abs(val - brute_f_tau(mu, z, 0.35)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.6), st.floats(0.05, 1.0), st.floats(0.2, 0.8), st.floats(0.0, 2 * math.pi))
def test_f_tau_conjugation_symmetry(tau, mu_im, radius_frac, arg):
    # imaginary part bounded away from 0 keeps mu off the (real) pole set
    mu = 0.4 + mu_im * 1j
    z = (1.0 + radius_frac * (1.0 / tau - 1.0) * 0.9) * cmath.exp(1j * arg)
    a = f_tau(mu, z, tau)
    b = f_tau(mu.conjugate(), z.conjugate(), tau)
    assert abs(b - a.conjugate()) < 1e-10 * max(1.0, abs(a))


def test_f_tau_domain_guards():
    with pytest.raises(ValueError):
        f_tau(0.5, 1.5, 0.0)  # tau = 0 rejected
    with pytest.raises(ValueError):
        f_tau(0.5, 0.9, 0.3)  # |z| <= 1
    with pytest.raises(ValueError):
        f_tau(0.5, 4.0, 0.3)  # |z| >= 1/tau
    with pytest.raises(ValueError):
        f_tau(1.0, 1.5, 0.3)  # mu on a pole (tau^0)
    with pytest.raises(ValueError):
        f_tau(0.0, 1.5, 0.3)  # divergent at mu = 0


def test_pochhammer_degenerate():
    assert pochhammer_inf(0.0, 0.3) == 1.0
    assert abs(pochhammer_inf(1.0, 0.3)) < 1e-12


def test_pochhammer_long_product_oracle():
    brute = 1.0
    for k in range(200):
        brute *= 1 - 0.5 * 0.3**k
    assert abs(pochhammer_inf(0.5, 0.3, tol=1e-15) - brute) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(0.1, 0.7))
def test_pochhammer_conjugation(re, im, tau):
    mu = re + im * 1j
    assert abs(pochhammer_inf(mu.conjugate(), tau) - pochhammer_inf(mu, tau).conjugate()) < 1e-12


# -- kernel ------------------------------------------------------------------------


def test_kernel_quadrature_self_convergence():
    mu = 0.5 + 0.2j
    eta = QUAD.r * cmath.exp(0.4j)
    eta_p = QUAD.r * cmath.exp(-1.3j)
    a = kernel_J(eta, eta_p, mu, 2, 4.0, PR, QUAD)
    b = kernel_J(eta, eta_p, mu, 2, 4.0, PR, replace(QUAD, n_zeta=256))
    assert abs(a - b) / abs(b) < 1e-8


def test_kernel_conjugation_symmetry():
    mu = 0.5 + 0.2j
    eta = QUAD.r * cmath.exp(0.7j)
    eta_p = QUAD.r * cmath.exp(2.0j)
    a = kernel_J(eta, eta_p, mu, 2, 4.0, PR, QUAD)
    b = kernel_J(eta.conjugate(), eta_p.conjugate(), mu.conjugate(), 2, 4.0, PR, QUAD)
    assert abs(b - a.conjugate()) < 1e-12 * max(1.0, abs(a))


def test_kernel_finite_on_all_node_pairs():
    from coarsening_lab.fredholm import _kernel_matrix

    _, J = _kernel_matrix(0.3 + 0.4j, 3, 6.0, PR, QUAD)
    assert np.isfinite(J).all()


def test_kernel_off_circle_rejected():
    with pytest.raises(ValueError):
        kernel_J(0.5 * QUAD.r, QUAD.r, 0.5, 2, 4.0, PR, QUAD)


def test_action_form_matches_kernel_integrand():
    # the exp(t(S(zeta) - S(eta'))) rewrite of the bare integrand agrees with
    # the phi ratio when zeta and eta' sit in the same half plane (the
    # fractional powers share a branch there)
    from coarsening_lab.fredholm import _phi
    from coarsening_lab.rate import action_S

    t, eps = 6.0, 0.25
    m = int(t * (1 - eps) / 4)  # = 1, so m - t(1-eps)/4 has magnitude <= 1
    zeta = QUAD.r_prime * cmath.exp(1.2j)
    eta_p = QUAD.r * cmath.exp(0.9j)
    bare = _phi(zeta, t) * zeta**m / (_phi(eta_p, t) * eta_p ** (m + 1))
    rewritten = (
        cmath.exp(t * (action_S(zeta, eps) - action_S(eta_p, eps)))
        * (zeta / eta_p) ** (m - t * (1 - eps) / 4.0)
        / eta_p
    )
    assert abs(bare - rewritten) / abs(bare) < 1e-10


# -- determinant ---------------------------------------------------------------------


def test_det_at_zero_mu():
    out = fredholm_det(0.0, 3, 6.0, PR, QUAD)
    assert out.value == 1.0 and out.tail_bound == 0.0


def test_det_truncation_within_tail_estimate():
    mu = complex(QUAD.R)
    two = fredholm_det(mu, 2, 4.0, PR, replace(QUAD, n_max=2))
    three = fredholm_det(mu, 2, 4.0, PR, replace(QUAD, n_max=3))
    assert abs(three.value - two.value) <= two.tail_estimate
    assert abs(three.value - two.value) <= two.tail_bound


def test_det_conjugation():
    mu = 0.3 + 0.5j
    a = fredholm_det(mu, 2, 4.0, PR, QUAD)
    b = fredholm_det(mu.conjugate(), 2, 4.0, PR, QUAD)
    assert abs(b.value - a.value.conjugate()) < 1e-12


def test_workload_guard():
    with pytest.raises(WorkloadError):
        fredholm_det(0.5, 2, 4.0, PR, replace(QUAD, n_eta=4096, n_mu=1024))


def test_quadrature_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(r=0.2, r_prime=1.5, R=0.6).validate(PR.tau)
    with pytest.raises(ValueError):
        QuadratureSpec(r=0.7, r_prime=2.5, R=0.6).validate(PR.tau)  # r' >= r/tau
    with pytest.raises(ValueError):
        QuadratureSpec(r=0.7, r_prime=1.5, R=1.0).validate(PR.tau)  # excluded radius
    with pytest.raises(ValueError):
        QuadratureSpec(r=0.7, r_prime=1.5, R=0.6, n_eta=8)


# -- contour identities ----------------------------------------------------------------


def test_residue_identity():
    assert abs(residue_identity_value(0.3) - 1.0) < 1e-8


def test_q_binomial_identity():
    lhs, rhs = q_binomial_identity(0.3, 2.5)
    assert abs(lhs - rhs) < 1e-8


# -- the probability ---------------------------------------------------------------------


def exact_ctmc_prob(m, T, q, M=6, lo=-13, hi=6, threshold=0):
    """Generator-exponential oracle on a truncated state space (sparse)."""
    from scipy.sparse import lil_matrix
    from scipy.sparse.linalg import expm_multiply

    states = list(itertools.combinations(range(hi, lo - 1, -1), M))
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    Q = lil_matrix((n, n))
    for s, i in idx.items():
        for j in range(M):
            t = list(s)
            t[j] += 1
            if (j == 0 or t[j] < s[j - 1]) and t[j] <= hi:
                k = idx.get(tuple(t))
                if k is not None:
                    Q[i, k] += q
            t = list(s)
            t[j] -= 1
            if (j == M - 1 or t[j] > s[j + 1]) and t[j] >= lo:
                k = idx.get(tuple(t))
                if k is not None:
                    Q[i, k] += 1 - q
    Q = Q.tocsr()
    diag = np.asarray(Q.sum(axis=1)).ravel()
    Q.setdiag(-diag)
    p0 = np.zeros(n)
    p0[idx[tuple(-j for j in range(1, M + 1))]] = 1.0
    pT = expm_multiply(Q.T * T, p0)
    return sum(pT[i] for s, i in idx.items() if s[m - 1] > threshold)


def test_probability_matches_exact_oracle():
    # n_max=6: at these small t the determinant series needs more orders
    # than the desk-scale default (the reported tail estimate covers it)
    deep = replace(QUAD, n_max=6)
    for m, t in ((1, 0.1), (1, 1.0), (2, 1.0)):
        ana = prob_xm_positive(m, t, PR, deep).p
        exact = exact_ctmc_prob(m, t / PR.gamma, PR.q)
        assert abs(ana - exact) < 2e-4, (m, t, ana, exact)


def test_default_truncation_error_within_reported_estimate():
    m, t = 1, 0.1
    res = prob_xm_positive(m, t, PR, QUAD)
    exact = exact_ctmc_prob(m, t / PR.gamma, PR.q)
    assert abs(res.p - exact) <= res.det_tail_estimate + 2e-4


def test_bare_kernel_is_the_shifted_threshold_event():
    # dropping the threshold factor gives P(x_m > -1), cross-checked exactly
    deep = replace(QUAD, n_max=6)
    for m, t in ((1, 0.5), (2, 1.5)):
        ana = prob_xm_positive(m, t, PR, deep, threshold=-1).p
        exact = exact_ctmc_prob(m, t / PR.gamma, PR.q, threshold=-1)
        assert abs(ana - exact) < 2e-4, (m, t, ana, exact)


def test_probability_monotone_in_m():
    vals = [prob_xm_positive(m, 6.0, PR, QUAD).p for m in (1, 2, 3, 4)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_probability_deterministic():
    a = prob_xm_positive(3, 6.0, PR, QUAD)
    b = prob_xm_positive(3, 6.0, PR, QUAD)
    assert a.p == b.p and a.raw == b.raw


def test_probability_r_independent():
    base = prob_xm_positive(3, 6.0, PR, QUAD).p
    for R in (0.45, 0.9):
        assert prob_xm_positive(3, 6.0, PR, replace(QUAD, R=R)).p == pytest.approx(base, abs=5e-8)


def test_probability_validation():
    with pytest.raises(ValueError):
        prob_xm_positive(0, 6.0, PR, QUAD)
    with pytest.raises(ValueError):
        prob_xm_positive(3, -1.0, PR, QUAD)


def test_saddle_radii_default():
    quad = default_quadrature(PR, eps=0.05)
    from coarsening_lab.rate import critical_points

    z1, z2 = critical_points(0.05)
    assert quad.r == abs(z1) and quad.r_prime == abs(z2)
    quad.validate(PR.tau)


# -- rank-one determinant bound ----------------------------------------------------------


def test_rank_one_determinant_bound():
    # |det(ones + t^-delta J~)| <= B^n n^{n/2+1} t^{-delta(n-1)}, B = 1 + max|J~|
    rng = np.random.default_rng(7)
    delta = 1.0 / 8.0
    for t in (1e4, 1e8):
        for n in range(1, 7):
            for _ in range(20):
                Jt = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
                mat = np.ones((n, n)) + t**-delta * Jt
                B = 1.0 + np.abs(Jt).max()
                bound = B**n * n ** (n / 2.0 + 1.0) * t ** (-delta * (n - 1))
                assert abs(np.linalg.det(mat)) <= bound
