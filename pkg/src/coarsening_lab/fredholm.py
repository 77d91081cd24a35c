"""Exact pre-limit tail probability via contour quadrature of a Fredholm
determinant.

The probability that the m-th particle sits right of the origin at time
t/gamma is a mu-contour integral of (mu;tau)_inf det(1 + mu J), where J is
a kernel on the circle |eta| = r defined through a zeta-contour integral on
|zeta| = r' involving the bilateral series f_tau.  All circles are
discretized with the periodic trapezoid rule, which converges spectrally
for these analytic integrands; the determinant series is truncated at
n_max with a reported Hadamard-style tail bound.

The kernel carries a factor ((1-zeta)/(1-eta'))^(threshold+1) selecting the
event {x_m > threshold}; with the factor dropped (threshold = -1) the same
contour machinery produces the event {x_m > -1}.  Both thresholds are
validated against an exact generator-exponential oracle and Monte Carlo in
the test suite.

Admissible radii: tau < r < 1 < r' < r/tau, and R > tau for the mu circle
avoiding the radii {1, 1/tau, 1/tau^2, ...}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .rate import RateParams, critical_points


class WorkloadError(RuntimeError):
    """Refused: requested node counts exceed the documented budget."""


class ResidueError(RuntimeError):
    """The mu integral came back with a non-real residue; carries the raw value."""

    def __init__(self, raw: complex, limit: float):
        super().__init__(f"imaginary residue {raw.imag:.3e} exceeds {limit:.1e}; raw value {raw}")
        self.raw = raw


# refuse evaluations above ~this many complex kernel operations
WORKLOAD_BUDGET = 4e9


@dataclass(frozen=True)
class QuadratureSpec:
    """Contour radii, node counts, and truncation orders."""

    r: float
    r_prime: float
    R: float
    n_zeta: int = 128
    n_eta: int = 64
    n_mu: int = 64
    n_max: int = 3
    series_tol: float = 1e-14

    def __post_init__(self):
        if min(self.n_zeta, self.n_eta, self.n_mu) < 16:
            raise ValueError("node counts must be >= 16")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not 0.0 < self.series_tol < 1e-3:
            raise ValueError("series_tol must be a small positive number")

    def validate(self, tau: float) -> None:
        if not tau < self.r < 1.0:
            raise ValueError(f"need tau < r < 1, got r={self.r}, tau={tau}")
        if not 1.0 < self.r_prime < self.r / tau:
            raise ValueError(f"need 1 < r' < r/tau, got r'={self.r_prime}, r/tau={self.r / tau}")
        if not self.R > tau:
            raise ValueError(f"need R > tau, got R={self.R}")
        k = 0
        while tau**-k <= self.R * (1 + 1e-12):
            if abs(self.R - tau**-k) < 1e-9:
                raise ValueError(f"R={self.R} sits on the excluded radius tau^-{k}")
            k += 1

    def workload(self) -> float:
        return float(self.n_mu) * (self.n_zeta * self.n_eta + self.n_max * self.n_eta**3)

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        """Same radii with all node counts scaled (for self-convergence checks)."""
        return replace(
            self,
            n_zeta=self.n_zeta * factor,
            n_eta=self.n_eta * factor,
            n_mu=self.n_mu * factor,
        )


def default_quadrature(params: RateParams, eps: float | None = None, **overrides) -> QuadratureSpec:
    """Radii at the saddle circles when an eps is in play, else mid-annulus."""
    tau = params.tau
    if eps is not None and 0.0 < eps < params.eps_circ:
        z1, z2 = critical_points(eps)
        r, r_prime = abs(z1), abs(z2)
    else:
        r = (1.0 + tau) / 2.0
        r_prime = (1.0 + r / tau) / 2.0
    R = (1.0 + tau) / 2.0
    k = 0
    while tau**-k <= R * (1 + 1e-12):
        if abs(R - tau**-k) < 1e-9:
            R += 1e-3
        k += 1
    spec = QuadratureSpec(r=r, r_prime=r_prime, R=R, **overrides)
    spec.validate(tau)
    return spec


def f_tau(mu: complex, z, tau: float, tol: float = 1e-14):
    """Bilateral series sum_k tau^k z^k / (1 - tau^k mu), for 1 < |z| < 1/tau.

    Split as sum_{k>=0} (tau z)^k / (1 - tau^k mu) plus
    sum_{j>=1} z^-j / (tau^j - mu); each half stops once its geometric tail
    bound drops below tol.  z may be an array (fixed mu); the bilateral sum
    needs mu != 0.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0,1), got {tau}")
    z = np.asarray(z, dtype=np.complex128)
    az = np.abs(z)
    if np.any(az <= 1.0) or np.any(az >= 1.0 / tau):
        raise ValueError("need 1 < |z| < 1/tau for the bilateral series")
    mu = complex(mu)
    if abs(mu) < 1e-100:
        raise ValueError("the bilateral series diverges as mu -> 0")
    out = np.zeros(z.shape, dtype=np.complex128)
    # k >= 0: terms (tau z)^k / (1 - tau^k mu), ratio |tau z| < 1
    ratio_pos = tau * float(np.max(az))
    zk = np.ones(z.shape, dtype=np.complex128)
    tk = 1.0
    for _ in range(100000):
        denom = 1.0 - tk * mu
        if abs(denom) < 1e-12:
            raise ValueError(f"mu={mu} sits on a pole of the series")
        term = zk / denom
        out += term
        tk *= tau
        zk = zk * (tau * z)
        if float(np.max(np.abs(term))) * ratio_pos / (1.0 - ratio_pos) < tol:
            break
    # k <= -1: terms z^-j / (tau^j - mu), ratio 1/|z| < 1
    ratio_neg = 1.0 / float(np.min(az))
    zinv = 1.0 / z
    zj = zinv.copy()
    tj = tau
    for _ in range(100000):
        denom = tj - mu
        if abs(denom) < 1e-12:
            raise ValueError(f"mu={mu} sits on a pole of the series")
        term = zj / denom
        out += term
        tj *= tau
        zj = zj * zinv
        if float(np.max(np.abs(term))) * ratio_neg / (1.0 - ratio_neg) < tol and tj < abs(mu) / 2.0:
            break
    return out if out.shape else complex(out)


def pochhammer_inf(mu: complex, tau: float, tol: float = 1e-14) -> complex:
    """(mu; tau)_inf = prod_{k>=0} (1 - mu tau^k), with a first-order tail.

    Factors are multiplied until |mu| tau^k < tol; the remaining product is
    exp(-mu tau^K / (1 - tau)) to first order.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0,1), got {tau}")
    mu = complex(mu)
    out = 1.0 + 0.0j
    scale = 1.0
    for _ in range(100000):
        if abs(mu) * scale < tol:
            break
        out *= 1.0 - mu * scale
        scale *= tau
    return out * np.exp(-mu * scale / (1.0 - tau))


def _phi(zeta, t: float):
    return np.exp(t * zeta / (1.0 - zeta))


def _circle(radius: float, n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return radius * np.exp(1j * theta)


def kernel_J(eta: complex, eta_p: complex, mu: complex, m: int, t: float,
             params: RateParams, quad: QuadratureSpec, threshold: int = 0) -> complex:
    """One kernel entry via trapezoid quadrature on the zeta circle.

    The factor ((1-zeta)/(1-eta'))^(threshold+1) selects the event
    {x_m(t/gamma) > threshold}; threshold = -1 drops it, leaving the bare
    phi ratio (the two forms are cross-checked against Monte Carlo in the
    test suite).
    """
    quad.validate(params.tau)
    for name, val in (("eta", eta), ("eta_p", eta_p)):
        if abs(abs(val) - quad.r) > 1e-9 * quad.r:
            raise ValueError(f"{name} must lie on the circle |.| = r = {quad.r}")
    zeta = _circle(quad.r_prime, quad.n_zeta)
    f = f_tau(mu, zeta / eta_p, params.tau, quad.series_tol)
    integrand = _phi(zeta, t) * zeta**m / (_phi(eta_p, t) * eta_p ** (m + 1)) * f / (zeta - eta)
    integrand = integrand * ((1.0 - zeta) / (1.0 - eta_p)) ** (threshold + 1)
    return complex(np.sum(zeta * integrand) / quad.n_zeta)


def _kernel_matrix(mu: complex, m: int, t: float, params: RateParams, quad: QuadratureSpec,
                   threshold: int = 0):
    """Kernel on all eta-node pairs: J = C @ B with the Cauchy factor in C."""
    eta = _circle(quad.r, quad.n_eta)
    zeta = _circle(quad.r_prime, quad.n_zeta)
    zratio = zeta[:, None] / eta[None, :]
    f = f_tau(mu, zratio, params.tau, quad.series_tol)
    col = _phi(zeta, t) * zeta**m * (1.0 - zeta) ** (threshold + 1)
    row = (1.0 - eta) ** (-(threshold + 1)) / (_phi(eta, t) * eta ** (m + 1))
    B = col[:, None] * f * row[None, :]
    C = (zeta[None, :] / (zeta[None, :] - eta[:, None])) / quad.n_zeta
    return eta, C @ B


def _elementary_from_powers(powers: list[complex]) -> list[complex]:
    """Newton's identities: e_n from power sums p_1..p_n (e_0 = 1)."""
    e = [1.0 + 0.0j]
    for n in range(1, len(powers) + 1):
        acc = 0.0 + 0.0j
        for k in range(1, n + 1):
            acc += (-1) ** (k - 1) * e[n - k] * powers[k - 1]
        e.append(acc / n)
    return e


@dataclass(frozen=True)
class FredholmValue:
    value: complex
    tail_bound: float  # Hadamard bound on all discarded orders
    tail_estimate: float  # geometric extrapolation of the observed term decay
    terms: tuple[complex, ...]


def fredholm_det(mu: complex, m: int, t: float, params: RateParams, quad: QuadratureSpec,
                 threshold: int = 0) -> FredholmValue:
    """det(1 + mu J) truncated at n_max, with a Hadamard-style tail bound.

    The n-fold contour integrals of n x n kernel determinants collapse to
    elementary symmetric functions of the Nystrom matrix, computed from
    traces of its powers.  The reported tail bounds every discarded order n
    by |mu|^n n^{n/2} s^n / n! where s is the quadrature row-sup norm.
    """
    quad.validate(params.tau)
    if quad.workload() > WORKLOAD_BUDGET:
        raise WorkloadError(
            f"workload {quad.workload():.2e} exceeds budget {WORKLOAD_BUDGET:.1e}"
        )
    if mu == 0:
        return FredholmValue(1.0 + 0.0j, 0.0, 0.0, ())
    eta, J = _kernel_matrix(mu, m, t, params, quad, threshold)
    M = (eta[:, None] / quad.n_eta) * J
    powers = []
    Mk = M
    for _ in range(quad.n_max):
        powers.append(complex(np.trace(Mk)))
        Mk = Mk @ M
    e = _elementary_from_powers(powers)
    terms = tuple(mu**n * e[n] for n in range(1, quad.n_max + 1))
    value = 1.0 + sum(terms)
    s = float(np.sum(np.abs(eta) / quad.n_eta * np.max(np.abs(J), axis=1)))
    tail = 0.0
    amu = abs(mu)
    n = quad.n_max + 1
    while n < quad.n_max + 200:
        log_inc = n * (math.log(amu) + math.log(s)) + 0.5 * n * math.log(n) - math.lgamma(n + 1.0)
        inc = math.exp(min(log_inc, 700.0))
        tail += inc
        if inc < 1e-18 * max(tail, 1e-300):
            break
        n += 1
    if quad.n_max >= 2 and abs(terms[-2]) > 0:
        rho = min(0.9, abs(terms[-1]) / abs(terms[-2]))
        tail_est = min(tail, 2.0 * abs(terms[-1]) * rho / (1.0 - rho))
    else:
        tail_est = tail
    return FredholmValue(complex(value), tail, tail_est, terms)


@dataclass(frozen=True)
class TailProbability:
    p: float
    raw: complex
    imag_residue: float
    det_tail_bound: float
    det_tail_estimate: float


RESIDUE_LIMIT = 1e-6


def prob_xm_positive(m: int, t: float, params: RateParams, quad: QuadratureSpec,
                     threshold: int = 0) -> TailProbability:
    """P(x_m(t/gamma) > threshold) from the step start, by mu quadrature.

    The imaginary part of the contour sum must vanish up to RESIDUE_LIMIT;
    the real part is clamped to [0,1] only after that check passes.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not t > 0:
        raise ValueError("t must be positive")
    quad.validate(params.tau)
    mus = _circle(quad.R, quad.n_mu)
    total = 0.0 + 0.0j
    tail = 0.0
    tail_est = 0.0
    for mu in mus:  # fixed order: bit-stable summation
        det = fredholm_det(complex(mu), m, t, params, quad, threshold)
        poch = pochhammer_inf(complex(mu), params.tau, quad.series_tol)
        total += poch * det.value
        tail += abs(poch) * det.tail_bound
        tail_est += abs(poch) * det.tail_estimate
    raw = complex(total / quad.n_mu)
    tail /= quad.n_mu
    tail_est /= quad.n_mu
    if abs(raw.imag) > RESIDUE_LIMIT:
        raise ResidueError(raw, RESIDUE_LIMIT)
    return TailProbability(float(min(1.0, max(0.0, raw.real))), raw, abs(raw.imag), tail, tail_est)


# -- contour identities (step-6 style checks) ------------------------------------


def residue_identity_value(tau: float, R: float | None = None, n_mu: int = 256, tol: float = 1e-14) -> complex:
    """(2 pi i)^-1 contour integral of (mu;tau)_inf dmu/mu; equals 1."""
    if R is None:
        R = (1.0 + tau) / 2.0
    mus = _circle(R, n_mu)
    return complex(sum(pochhammer_inf(mu, tau, tol) for mu in mus) / n_mu)


def q_binomial_identity(tau: float, w: complex, R: float | None = None, n_mu: int = 256, tol: float = 1e-14):
    """Both sides of the contour/series identity for the f_tau integral.

    lhs = (2 pi i)^-1 contour integral of (mu;tau)_inf f_tau(mu, w) dmu over
    |mu| = R in (tau, 1); rhs = -(w^-1 (tau;tau)_inf) / (w^-1; tau)_inf.
    """
    if R is None:
        R = (1.0 + tau) / 2.0
    if not tau < R < 1.0:
        raise ValueError("R must be in (tau, 1) so the enclosed poles are tau^j, j >= 1")
    mus = _circle(R, n_mu)
    lhs = complex(sum(mu * pochhammer_inf(mu, tau, tol) * f_tau(mu, w, tau, tol) for mu in mus) / n_mu)
    winv = 1.0 / complex(w)
    rhs = -winv * pochhammer_inf(tau, tau, tol) / pochhammer_inf(winv, tau, tol)
    return lhs, rhs
