"""Block-argument parameter schedules and the master probability bound.

The recursion eps_{k+1} = exp(-chi / eps_k^{1/(d-1)}) is doubly exponential:
within a few levels the quantities leave double range, then the range of
doubles-of-logs, and so on.  Values here are carried as "linforms"

    x = c + sum_i  m_i * e^{h_i} * atom_i,

where each atom is the (interned) exponential of an earlier linform that was
too large to collapse into a float.  Distinct atoms differ by unbounded
ratios, so sums, products, exp, log and comparisons reduce to exact float
arithmetic on the leading coefficients; the only approximations are (a)
floors treated as exact once the floored value exceeds 2^53 (flagged per
row) and (b) additions of comparable astronomically-large terms, resolved
through double-precision logs.  All decisive schedule comparisons have
margins that are themselves astronomically large, so these approximations
cannot flip them.

Everything below double overflow is additionally carried as an exact float,
so "direct" and extended evaluations can be cross-checked where both exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# -- extended-log linform arithmetic ---------------------------------------------

_ATOM_DEFS: list["LinForm"] = []  # atom i = exp(defining linform)
_ATOM_KEYS: dict[tuple, int] = {}
_ATOM_ORDER: dict[tuple[int, int], int] = {}

_LOG_MAX = 700.0  # collapse exp() into floats only below this
_FLOOR_EXACT = 2.0**53


@dataclass(frozen=True)
class Term:
    atom: int
    m: float  # coefficient = m * e^h, m kept in a moderate band
    h: float

    def scaled(self, lam: float) -> "Term":
        return _norm_term(self.atom, self.m * lam, self.h)


def _norm_term(atom: int, m: float, h: float) -> Term:
    if m != 0.0 and not 1e-140 < abs(m) < 1e140:
        shift = math.floor(math.log(abs(m)))
        m *= math.exp(-shift)
        h += shift
    return Term(atom, m, h)


@dataclass(frozen=True)
class LinForm:
    """c + sum of m*e^h*atom terms; atoms strictly ordered by growth."""

    const: float = 0.0
    terms: tuple[Term, ...] = ()

    def is_const(self) -> bool:
        return not self.terms


def lf(c: float) -> LinForm:
    return LinForm(float(c), ())


def _atom_cmp(a: int, b: int) -> int:
    """-1/0/+1 comparing the growth of two atoms (their defining linforms)."""
    if a == b:
        return 0
    key = (a, b) if a < b else (b, a)
    if key not in _ATOM_ORDER:
        _ATOM_ORDER[key] = lf_sign(lf_sub(_ATOM_DEFS[key[0]], _ATOM_DEFS[key[1]]))
    c = _ATOM_ORDER[key]
    return c if a < b else -c


def lf_add(a: LinForm, b: LinForm) -> LinForm:
    merged: dict[int, Term] = {t.atom: t for t in a.terms}
    for t in b.terms:
        if t.atom in merged:
            o = merged[t.atom]
            h = max(o.h, t.h)
            m = o.m * math.exp(o.h - h) + t.m * math.exp(t.h - h)
            if m == 0.0:
                del merged[t.atom]
            else:
                merged[t.atom] = _norm_term(t.atom, m, h)
        else:
            merged[t.atom] = t
    terms = tuple(sorted(merged.values(), key=lambda t: t.atom))
    return LinForm(a.const + b.const, terms)


def lf_scale(a: LinForm, lam: float) -> LinForm:
    if lam == 0.0:
        return lf(0.0)
    return LinForm(a.const * lam, tuple(t.scaled(lam) for t in a.terms if t.m * lam != 0.0))


def lf_sub(a: LinForm, b: LinForm) -> LinForm:
    return lf_add(a, lf_scale(b, -1.0))


def _dominant(a: LinForm) -> Term | None:
    dom = None
    for t in a.terms:
        if t.m == 0.0:
            continue
        if dom is None or _atom_cmp(t.atom, dom.atom) > 0:
            dom = t
    return dom


def lf_sign(a: LinForm) -> int:
    dom = _dominant(a)
    if dom is not None:
        return 1 if dom.m > 0 else -1
    return (a.const > 0) - (a.const < 0)


def lf_cmp(a: LinForm, b: LinForm) -> int:
    return lf_sign(lf_sub(a, b))


def lf_float(a: LinForm):
    """Float view: exact for pure consts, +-inf when atom terms dominate."""
    dom = _dominant(a)
    if dom is None:
        return a.const
    return math.inf if dom.m > 0 else -math.inf


def _intern_atom(defining: LinForm) -> tuple[int, float]:
    """Atom for exp(defining); returns (atom_id, base_const).

    Atoms are keyed by the term-part of the defining linform; the constant
    offset is folded into the caller's coefficient.
    """
    key = tuple((t.atom, t.m, t.h) for t in defining.terms)
    if key not in _ATOM_KEYS:
        _ATOM_KEYS[key] = len(_ATOM_DEFS)
        _ATOM_DEFS.append(defining)
    idx = _ATOM_KEYS[key]
    return idx, _ATOM_DEFS[idx].const


def lf_exp(a: LinForm) -> LinForm:
    """exp(a) as a value-linform; a must be a positive quantity when huge."""
    if a.is_const() and a.const <= _LOG_MAX:
        return lf(math.exp(a.const))
    if lf_sign(a) < 0:
        raise ArithmeticError("exp of a negative huge quantity is not representable here")
    atom, base = _intern_atom(a)
    return LinForm(0.0, (_norm_term(atom, 1.0, a.const - base),))


def lf_log(a: LinForm) -> LinForm:
    """log of a positive value-linform."""
    dom = _dominant(a)
    if dom is None:
        if a.const <= 0.0:
            raise ArithmeticError("log of a nonpositive value")
        return lf(math.log(a.const))
    if dom.m < 0:
        raise ArithmeticError("log of a negative value")
    lead = lf_add(lf(dom.h + math.log(dom.m)), _ATOM_DEFS[dom.atom])
    # remaining terms are smaller by unbounded ratios; fold what is foldable
    rest = LinForm(a.const, tuple(t for t in a.terms if t.atom != dom.atom))
    if rest.is_const() and rest.const != 0.0:
        ratio = lf_sub(lf_log_abs_const(rest), lead)
        if ratio.is_const() and ratio.const > -_LOG_MAX:
            lead = lf_add(lead, lf(math.log1p(math.copysign(math.exp(ratio.const), rest.const))))
    return lead


def lf_log_abs_const(a: LinForm) -> LinForm:
    return lf(math.log(abs(a.const)))


# -- extended reals: sign + log-magnitude, with an exact float fast path ----------


@dataclass(frozen=True)
class XReal:
    """Nonnegative extended real: exact float when possible, else exp(linform)."""

    f: float | None  # exact value when representable
    log: LinForm | None  # log of the value (None only for zero)

    @classmethod
    def from_float(cls, v: float) -> "XReal":
        if v < 0:
            raise ValueError("XReal is for nonnegative schedule quantities")
        return cls(v, lf(math.log(v)) if v > 0 else None)

    @classmethod
    def from_log(cls, logv: LinForm) -> "XReal":
        v = lf_float(logv)
        f = math.exp(v) if -745.0 < v < _LOG_MAX else None
        return cls(f, logv)

    @property
    def is_zero(self) -> bool:
        return self.log is None

    def to_float(self) -> float:
        if self.f is not None:
            return self.f
        return math.inf if lf_sign(self.log) > 0 else 0.0

    def mul(self, other: "XReal") -> "XReal":
        if self.is_zero or other.is_zero:
            return XReal(0.0, None)
        if self.f is not None and other.f is not None:
            v = self.f * other.f
            if v < math.inf:
                return XReal.from_float(v)
        return XReal.from_log(lf_add(self.log, other.log))

    def scale(self, c: float) -> "XReal":
        return self.mul(XReal.from_float(c))

    def pow(self, e: float) -> "XReal":
        if self.is_zero:
            return self
        if self.f is not None:
            v = self.f**e
            if 0.0 < v < math.inf:
                return XReal.from_float(v)
        return XReal.from_log(lf_scale(self.log, e))

    def add(self, other: "XReal") -> "XReal":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.f is not None and other.f is not None:
            v = self.f + other.f
            if v < math.inf:
                return XReal.from_float(v)
        hi, lo = (self, other) if lf_cmp(self.log, other.log) >= 0 else (other, self)
        delta = lf_sub(lo.log, hi.log)
        out = hi.log
        if delta.is_const() and delta.const > -_LOG_MAX:
            out = lf_add(out, lf(math.log1p(math.exp(delta.const))))
        return XReal.from_log(out)

    def floor(self) -> tuple["XReal", bool]:
        """(floored value, exact flag); identity above 2^53."""
        if self.f is not None and self.f < _FLOOR_EXACT:
            return XReal.from_float(float(math.floor(self.f))), True
        return self, False

    def cmp(self, other: "XReal") -> int:
        if self.is_zero and other.is_zero:
            return 0
        if self.is_zero:
            return -1
        if other.is_zero:
            return 1
        if self.f is not None and other.f is not None:
            return (self.f > other.f) - (self.f < other.f)
        return lf_cmp(self.log, other.log)


def _neg_exp_value(coef: float, exponent: XReal) -> LinForm:
    """The linform  -coef * exp(exponent)  for positive coef and huge exponent,
    used for log-domain master-bound terms of the form d*log(...) - gamma*n*L."""
    val = lf_exp(exponent.log) if exponent.f is None or exponent.f > _LOG_MAX else lf(math.exp(exponent.f))
    return lf_scale(val, -coef)


# -- schedule parameters and rows -------------------------------------------------


def constants_alpha1(d: int, C: float, gamma: float) -> tuple[float, float]:
    """The (D, chi) pair driving the alpha = 1 schedule."""
    if d < 2 or C <= 0 or gamma <= 0:
        raise ValueError("need d >= 2 and positive C, gamma")
    root = (2.0 * math.e) ** (1.0 / (d - 1))
    D = 6.0 / (5.0 * root) + 32.0 * d * C
    chi = min(1.0 / (24.0 * root), gamma / (4.0 * root), D * math.log(2.0) / 64.0)
    return D, chi


def alpha_gt1_L0_cap(d: int, alpha: float, delta: float, eps0: float) -> float:
    """Largest admissible L0 for the alpha > 1 schedule."""
    K = (2.0 * math.e) ** (alpha / ((alpha - 1.0) * (d - 1.0))) / (32.0 * d * math.e) ** (1.0 / (alpha - 1.0))
    return K * eps0 ** (-2.0 * delta / ((d - 1.0) * (alpha - 1.0)))


@dataclass(frozen=True)
class ScheduleParams:
    d: int
    C: float
    gamma: float
    eps0: float
    L0: int
    k_max: int
    alpha: float = 1.0
    delta: float = 0.0
    chi: float | None = None  # alpha > 1 only; alpha = 1 computes its own

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        if not 0.0 < self.eps0 < 1.0:
            raise ValueError("eps0 must be in (0,1)")
        if self.C <= 0 or self.gamma <= 0:
            raise ValueError("C and gamma must be positive")
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.alpha == 1.0:
            if self.L0 < 4:
                raise ValueError("alpha = 1 schedule needs L0 >= 4")
        else:
            if self.delta <= 0.0:
                raise ValueError("alpha > 1 schedule needs delta > 0")
            cap = alpha_gt1_L0_cap(self.d, self.alpha, self.delta, self.eps0)
            if self.L0 > cap:
                raise ValueError(f"L0 = {self.L0} exceeds the admissible cap {cap:.6g}")
            if self.chi is None or self.chi <= 0.0:
                raise ValueError("alpha > 1 schedule needs an explicit chi > 0")
        if self.L0 < 1:
            raise ValueError("L0 must be >= 1")

    def derived_constants(self) -> tuple[float, float]:
        if self.alpha == 1.0:
            return constants_alpha1(self.d, self.C, self.gamma)
        D, _ = constants_alpha1(self.d, self.C, self.gamma)
        return D, float(self.chi)


@dataclass
class ScheduleRow:
    k: int
    eps: XReal
    n: XReal
    l: XReal  # l_k (1 at k = 0)
    L: XReal
    t: XReal  # t_k (0 at k = 0)
    T: XReal
    master_bound: "MasterBound | None"
    floors_exact: bool
    underflowed: bool  # eps_k below double range

    def as_floats(self) -> dict:
        return {
            "k": self.k,
            "eps_k": self.eps.to_float(),
            "log_eps_k": lf_float(self.eps.log) if self.eps.log is not None else -math.inf,
            "n_k": self.n.to_float(),
            "l_k": self.l.to_float(),
            "L_k": self.L.to_float(),
            "t_k": self.t.to_float(),
            "T_k": self.T.to_float(),
            "master_bound_k": self.master_bound.to_float() if self.master_bound else math.nan,
            "log_master_bound_k": lf_float(self.master_bound.log_total) if self.master_bound else math.nan,
            "floors_exact": self.floors_exact,
            "underflowed": self.underflowed,
        }


@dataclass
class MasterBound:
    """The three-term bound on the next-level block failure probability."""

    log_bootstrap: LinForm | None  # None when eps~ = 0 (term exactly zero)
    log_erosion: LinForm
    log_paths: LinForm
    log_total: LinForm
    flags: tuple[str, ...] = ()

    def to_float(self) -> float:
        v = lf_float(self.log_total)
        return math.exp(v) if v < _LOG_MAX else math.inf

    def leq_log(self, log_target: LinForm) -> bool:
        return lf_cmp(self.log_total, log_target) <= 0


def _log_of(x: XReal) -> LinForm:
    if x.is_zero:
        raise ArithmeticError("log of zero schedule quantity")
    return x.log


def _logsumexp(parts) -> LinForm:
    parts = [p for p in parts if p is not None]
    out = parts[0]
    for nxt in parts[1:]:
        if lf_cmp(nxt, out) > 0:
            out, nxt = nxt, out
        delta = lf_sub(nxt, out)
        if delta.is_const() and delta.const > -_LOG_MAX:
            out = lf_add(out, lf(math.log1p(math.exp(delta.const))))
    return out


def _path_sum_log(L_next: XReal, t_next: XReal, d: int) -> tuple[LinForm, tuple[str, ...]]:
    """log of 4d L_{k+1} sum_{r >= floor(L_{k+1}/4)} (2de t_{k+1} / r)^r.

    Terms are accumulated in log domain and truncated once below 1e-300 of
    the partial sum; above double range the sum collapses to its first term
    (the term ratio is then itself astronomically small).
    """
    flags: tuple[str, ...] = ()
    x_real, exact = L_next.scale(0.25).floor()
    if not exact:
        flags += ("path_floor_approx",)
    if x_real.is_zero:
        raise ValueError("path sum needs L_{k+1} >= 4")
    if t_next.is_zero:
        raise ValueError("path sum needs t_{k+1} > 0")
    c2de = math.log(2.0 * d) + 1.0
    if x_real.f is not None and t_next.f is not None and L_next.f is not None:
        x = int(x_real.f)
        logt = math.log(t_next.f)
        log_partial = -math.inf
        r = x
        while True:
            log_term = r * (c2de + logt - math.log(r))
            hi, lo = max(log_partial, log_term), min(log_partial, log_term)
            log_partial = hi + math.log1p(math.exp(lo - hi))
            r += 1
            nxt = r * (c2de + logt - math.log(r))
            if nxt < log_partial - 690.8:
                break
            if r > x + 10_000_000:
                flags += ("path_sum_not_converged",)
                break
        return lf(math.log(4.0 * d) + math.log(L_next.f) + log_partial), flags
    # beyond doubles the sum collapses to its first term: the per-term decay
    # log(2de t / x) is astronomically negative along valid schedules
    base = lf_add(lf(c2de), lf_sub(_log_of(t_next), _log_of(x_real)))
    if lf_sign(base) >= 0:
        flags += ("path_sum_hump_unresolved",)
    first = _mul_value_log(x_real, base)  # x * log(2de t / x)
    total = lf_add(lf_add(lf(math.log(4.0 * d)), _log_of(L_next)), first)
    if base.is_const() and base.const < 0:
        ratio = math.exp(base.const)
        if ratio < 1.0:
            total = lf_add(total, lf(-math.log1p(-ratio)))
    return total, flags


def _mul_value_log(x: XReal, v: LinForm) -> LinForm:
    """x * v for a huge positive x and a real v given as a linform."""
    if x.f is not None and v.is_const():
        return lf(x.f * v.const)
    sign = lf_sign(v)
    if sign == 0:
        return lf(0.0)
    if v.is_const():
        mag = lf_add(_log_of(x), lf(math.log(abs(v.const))))
    else:
        mag = lf_add(_log_of(x), lf_log_abs(v))
    return lf_scale(lf_exp(mag), float(sign))


def lf_log_abs(v: LinForm) -> LinForm:
    """log |v| for a linform representing a (possibly huge) real."""
    dom = _dominant(v)
    if dom is None:
        return lf(math.log(abs(v.const)))
    lead = lf_add(lf(dom.h + math.log(abs(dom.m))), _ATOM_DEFS[dom.atom])
    return lead


def master_bound(
    eps_tilde: XReal | float,
    n_k: XReal | float,
    l_next: XReal | float,
    L_k: XReal | float,
    L_next: XReal | float,
    t_next: XReal | float,
    d: int,
    gamma: float,
    C: float = 1.0,
    alpha: float = 1.0,
) -> MasterBound:
    """Three-term bound: bootstrap term + erosion term + chronological paths.

    Preconditions (checked, reported by name): the block-count bound
    1 <= n_k <= floor(5 l_{k+1} / 3), and the erosion-time bound
    t_{k+1} >= C (n_k L_k)^alpha.
    """
    as_x = lambda v: v if isinstance(v, XReal) else XReal.from_float(float(v))
    eps_tilde, n_k, l_next, L_k, L_next, t_next = map(as_x, (eps_tilde, n_k, l_next, L_k, L_next, t_next))
    flags: tuple[str, ...] = ()
    five_thirds_l, _ = l_next.scale(5.0 / 3.0).floor()
    if n_k.cmp(XReal.from_float(1.0)) < 0 or n_k.cmp(five_thirds_l) > 0:
        raise ValueError("block-count bound violated: need 1 <= n_k <= floor(5 l_{k+1} / 3)")
    if t_next.cmp(n_k.mul(L_k).pow(alpha).scale(C)) < 0:
        raise ValueError("erosion-time bound violated: need t_{k+1} >= C (n_k L_k)^alpha")

    # bootstrap term: (5 n l' / 3)^d * (2 n^{d-1} eps~)^{floor(n/3)}
    if eps_tilde.is_zero:
        log_t1 = None
    else:
        inner = lf_add(lf(math.log(2.0)), lf_add(lf_scale(_log_of(n_k), float(d - 1)), _log_of(eps_tilde)))
        n3, n3_exact = n_k.scale(1.0 / 3.0).floor()
        if not n3_exact:
            flags += ("bootstrap_floor_approx",)
        if not inner.is_const():
            raise ArithmeticError("2 n^{d-1} eps~ should collapse to a float-scale log")
        if inner.const >= 0.0:
            flags += ("bootstrap_term_not_contracting",)
        pref = lf_scale(
            lf_add(lf(math.log(5.0 / 3.0)), lf_add(_log_of(n_k), _log_of(l_next))), float(d)
        )
        log_t1 = lf_add(pref, _mul_value_log(n3, lf(inner.const)))

    # erosion term: (5 l' / 3)^d * exp(-gamma n L)
    pref2 = lf_scale(lf_add(lf(math.log(5.0 / 3.0)), _log_of(l_next)), float(d))
    nl = n_k.mul(L_k)
    if nl.f is not None and gamma * nl.f < math.inf:
        log_t2 = lf_add(pref2, lf(-gamma * nl.f))
    else:
        log_t2 = lf_add(pref2, _neg_exp_value(gamma, nl))

    # chronological-path term
    log_t3, pflags = _path_sum_log(L_next, t_next, d)
    flags += pflags

    total = _logsumexp((log_t1, log_t2, log_t3))
    return MasterBound(log_t1, log_t2, log_t3, total, flags)


def schedule(params: ScheduleParams) -> list[ScheduleRow]:
    """Rows k = 0..k_max+1 of the parameter recursion, with master bounds.

    Row k's master bound uses (eps_k, n_k, l_{k+1}, L_k, L_{k+1}, t_{k+1}),
    so master_bound_k can be compared against eps of row k+1.  The final row
    carries no master bound.
    """
    D, chi = params.derived_constants()
    d, C, alpha = params.d, params.C, params.alpha
    inv = 1.0 / (d - 1)
    two_e = 2.0 * math.e

    rows: list[ScheduleRow] = []
    eps = XReal.from_float(params.eps0)
    L = XReal.from_float(float(params.L0))
    t = XReal(0.0, None)
    T = XReal(0.0, None)
    l = XReal.from_float(1.0)
    for k in range(params.k_max + 2):
        n, n_exact = eps.scale(two_e).pow(-inv).floor()
        underflow = eps.f is None or eps.f == 0.0
        if k > params.k_max:
            rows.append(ScheduleRow(k, eps, n, l, L, t, T, None, n_exact, underflow))
            break
        if alpha == 1.0:
            l_next, l_exact = eps.pow(-inv).scale(D).floor()
            t_next = n.mul(L).scale(C)
        else:
            l_next, l_exact = eps.pow(-(alpha + 2.0 * params.delta) * inv).floor()
            t_next = n.mul(L).pow(alpha).scale(C)
        L_next = L.mul(l_next)
        mb = master_bound(eps, n, l_next, L, L_next, t_next, d, params.gamma, C, alpha)
        rows.append(ScheduleRow(k, eps, n, l, L, t, T, mb, n_exact and l_exact, underflow))
        # eps_{k+1} = exp(-chi / eps_k^{1/(d-1)})
        log_next = lf_scale(lf_exp(lf_scale(_log_of(eps), -inv)), -chi)
        eps = XReal.from_log(log_next)
        l, L, t = l_next, L_next, t_next
        T = T.add(t_next)
    return rows


def time_constraint_holds(next_row: ScheduleRow, d: int) -> bool:
    """floor(L_{k+1}/4) >= 4 d e t_{k+1}, the geometric-path prerequisite."""
    lhs, _ = next_row.L.scale(0.25).floor()
    rhs = next_row.t.scale(4.0 * d * math.e)
    return lhs.cmp(rhs) >= 0


# -- the (E1)-(E8) condition report -----------------------------------------------


@dataclass(frozen=True)
class Condition:
    name: str
    ok: bool
    lhs: float
    rhs: float


def check_conditions(
    eps_prime: float,
    d: int,
    D: float,
    chi: float,
    gamma: float,
    C: float,
    schedule_prefix: list[ScheduleRow] | None = None,
) -> list[Condition]:
    """Evaluate the smallness conditions backing the induction, by name.

    The last condition is checked through its sufficient form
    eps_k <= eps_0^k along the provided schedule prefix.
    """
    if eps_prime <= 0 or min(D, chi, gamma, C) <= 0:
        raise ValueError("inputs must be positive")
    root = (2.0 * math.e) ** (1.0 / (d - 1))
    epow = eps_prime ** (1.0 / (d - 1))
    out = []
    out.append(Condition("E1", eps_prime <= 1.0 / (3.0 ** (d - 1) * 2.0 * math.e), eps_prime, 1.0 / (3.0 ** (d - 1) * 2.0 * math.e)))
    out.append(Condition("E2", eps_prime <= D ** (d - 1), eps_prime, D ** (d - 1)))
    lhs3 = math.exp(max(-745.0, -(1.0 / (12.0 * root) - chi) / epow)) * (5.0 * D / (3.0 * root)) ** d * eps_prime ** (-2.0 * d / (d - 1))
    out.append(Condition("E3", lhs3 <= 0.25, lhs3, 0.25))
    lhs4 = (5.0 * D / 3.0) ** d * eps_prime ** (-d / (d - 1)) * math.exp(max(-745.0, -(gamma / (2.0 * root) - chi) / epow))
    out.append(Condition("E4", lhs4 <= 0.25, lhs4, 0.25))
    c_hat = 8.0 * d * 16.0 / (math.e * math.log(2.0))  # sup of x 2^{-x/16} at x = 16/log 2
    lhs5 = c_hat * math.exp(max(-745.0, -(D * math.log(2.0) / 32.0 - chi) / epow))
    out.append(Condition("E5", lhs5 <= 0.5, lhs5, 0.5))
    lhs6 = math.exp(max(-745.0, -chi / epow)) / eps_prime**2
    out.append(Condition("E6", lhs6 <= 1.0, lhs6, 1.0))
    iota = chi / (d - 1)
    rhs7 = min(iota ** (-iota / (d - 1)), iota ** (-(d - 1) / math.log(iota)))
    out.append(Condition("E7", eps_prime <= rhs7, eps_prime, rhs7))
    if schedule_prefix:
        ok8 = True
        worst = 0.0
        log_e0 = math.log(schedule_prefix[0].eps.f)
        for row in schedule_prefix[1:]:
            target = lf(row.k * log_e0)
            if lf_cmp(row.eps.log, target) > 0:
                ok8 = False
                worst = max(worst, lf_float(lf_sub(row.eps.log, target)))
        out.append(Condition("E8", ok8, worst, 0.0))
    return out
