"""Closed-form large-deviation machinery for the slow-current tail.

The saddle function S(z) = z/(1-z) + ((1-eps)/4) log(-z) has two real
critical points z1 = (sqrt(eps)-1)/(sqrt(eps)+1) in (-1,0) and z2 = 1/z1.
The uncapped rate is phi_hat(eps) = S(z1) - S(z2) =
sqrt(eps) - (1-eps) atanh(sqrt(eps)); the usable rate phi_plus caps it at
eps_circ = ((1-sqrt(tau))/(1+sqrt(tau)))^2, the largest eps for which the
saddle radii fit the admissible contour annuli (tau = (1-q)/q).

All functions here are pure; they feed both the Monte Carlo slope tests and
the default contour radii of the determinant evaluator.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


def atanh_stable(x: float) -> float:
    """atanh via 0.5*(log1p(x) - log1p(-x)); accurate toward x -> 1."""
    if not -1.0 < x < 1.0:
        raise ValueError(f"atanh argument must be in (-1,1), got {x}")
    return 0.5 * (math.log1p(x) - math.log1p(-x))


@dataclass(frozen=True)
class RateParams:
    """Derived constants of the biased walk: gamma = 2q-1, tau = (1-q)/q."""

    q: float
    gamma: float
    tau: float
    eps_circ: float

    @classmethod
    def from_q(cls, q: float) -> "RateParams":
        if not 0.5 < q <= 1.0:
            raise ValueError(f"q must be in (1/2, 1], got {q}")
        gamma = 2.0 * q - 1.0
        tau = (1.0 - q) / q
        s = math.sqrt(tau)
        eps_circ = ((1.0 - s) / (1.0 + s)) ** 2
        return cls(q, gamma, tau, eps_circ)

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.0:
            raise ValueError("tau out of range")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma out of range")
        if not 0.0 < self.eps_circ <= 1.0:
            raise ValueError("eps_circ out of range")
        if abs(self.gamma - (2.0 * self.q - 1.0)) > 0.0 or abs(self.tau - (1.0 - self.q) / self.q) > 0.0:
            raise ValueError("gamma/tau inconsistent with q")


def action_S(zeta: complex, eps: float) -> complex:
    """S(zeta) = zeta/(1-zeta) + ((1-eps)/4) log(-zeta), principal branch.

    The branch cut of log(-zeta) sits on the positive real zeta axis, away
    from the left-half-plane contours used here.
    """
    zeta = complex(zeta)
    if zeta == 0 or zeta == 1:
        raise ValueError(f"S is singular at zeta={zeta}")
    return zeta / (1.0 - zeta) + (1.0 - eps) / 4.0 * cmath.log(-zeta)


def critical_points(eps: float) -> tuple[float, float]:
    """The two real roots of S'(zeta) = 0: z1 in (-1,0) and z2 = 1/z1."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    s = math.sqrt(eps)
    z1 = (s - 1.0) / (s + 1.0)
    return z1, 1.0 / z1


def s_second(eps: float) -> tuple[float, float]:
    """Closed forms of S'' at the two critical points (negative, positive)."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    s = math.sqrt(eps)
    s1 = -((1.0 + s) ** 3) * s / (4.0 * (1.0 - s))
    s2 = ((1.0 - s) ** 3) * s / (4.0 * (1.0 + s))
    return s1, s2


def phi_hat(eps: float) -> float:
    """Uncapped rate sqrt(eps) - (1-eps) atanh(sqrt(eps))."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    s = math.sqrt(eps)
    return s - (1.0 - eps) * atanh_stable(s)


def phi_plus(eps: float, params: RateParams) -> float:
    """The rate function: phi_hat below eps_circ, constant at its eps_circ
    value above (weakly increasing on (0,1))."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    return phi_hat(min(eps, params.eps_circ))


def re_s_on_circle(which: int, eps: float, thetas) -> np.ndarray:
    """Re S(z_i e^{i theta}) on the circle through the chosen critical point."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.size == 0:
        raise ValueError("empty theta grid")
    z = critical_points(eps)[which - 1]
    pts = z * np.exp(1j * thetas)
    return np.array([action_S(p, eps).real for p in pts])


def dtheta_re_s(which: int, eps: float, theta: float) -> float:
    """Closed-form d/dtheta of Re S(z_i e^{i theta}).

    Positive on (0, pi) around z1 and negative around z2, which is what
    makes the circles steepest-descent admissible.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    s = math.sqrt(eps)
    val = (1.0 - eps) * s * math.sin(theta) / (1.0 + eps + (1.0 - eps) * math.cos(theta)) ** 2
    return val if which == 1 else -val


def rate_table(eps_grid, params: RateParams) -> list[dict]:
    """Rows of (eps, phi_hat, phi_plus, z1, z2, S''(z1), S''(z2))."""
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        z1, z2 = critical_points(eps)
        s1, s2 = s_second(eps)
        rows.append(
            {
                "eps": eps,
                "phi_hat": float(phi_hat(eps)),
                "phi_plus": float(phi_plus(eps, params)),
                "zeta1": z1,
                "zeta2": z2,
                "s_second_1": s1,
                "s_second_2": s2,
            }
        )
    return rows
