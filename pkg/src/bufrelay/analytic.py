"""Closed and semi-closed forms for the adaptive link-selection relay.

Every distribution this module touches is a finite sum of five primitive
shapes in the SNR variable x:

    exp     c * e^(-x/a)
    ratio   c * (mu/(x+mu)) * e^(-x/a)
    ratio2  c * (mu/(x+mu))^2 * e^(-x/a)
    e1      c * e^(mu/a) E_1((x+mu)/a)          (finite a)
    e1log   c * (-euler_gamma - ln(x+mu))        (infinite-a limit of e1;
                                                  appears only in zero-sum
                                                  groups so the discarded
                                                  ln(a) offset cancels)

The marginal CCDF, the product CCDF of the bottleneck SNR, and the joint
CCDF of (selection decision, hop SNR) are all built as term lists once, and
then rates, gaussian-weight expectations (for error probability) and
log-squared weights (for the second moment of rate) follow from one small
dictionary of integrals per shape. The same machinery therefore guarantees
that a probability, its rate integral and its error-weight integral always
refer to the same underlying expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from . import specfun
from .channel import LinkParams
from .specfun import (
    DEFAULT_QUAD,
    EULER_GAMMA,
    QuadratureSpec,
    dilog,
    exp_integral_en_scaled,
    integral_I,
    integral_J,
    integral_K,
    integral_L,
    integral_M,
    quad_semi_infinite,
)

__all__ = [
    "HopPair",
    "SelectionThresholds",
    "ModulationParams",
    "SerTriple",
    "ApproxQs",
    "lambda_rho",
    "reverse",
    "joint_ccdf_sr",
    "joint_ccdf_rd",
    "lsp",
    "qs_pip_exact",
    "approx_qs_pip",
    "rho_opt_fixed",
    "rho_for_qs",
    "avg_capacity_hop",
    "avg_rate_cabr_hop_s",
    "avg_rate_cabr_hop_s_quad",
    "avg_rate_cabr_hop_r",
    "avg_rate_cabr",
    "avg_rate_cnbr",
    "avg_rate_cnbr_quad",
    "avg_rate_cbr",
    "ew_joint_ccdf_sr",
    "ew_joint_ccdf_sr_quad",
    "ser_exact_cabr",
    "ser_exact_cabr_quad",
    "ser_exact_cnbr",
    "ser_asym_cabr",
    "ser_asym_cnbr",
    "second_moment_rate_hop_s",
    "second_moment_rate_hop_s_quad",
    "delay_bound_adaptive",
    "rho_for_delay_bound",
]

LN2 = math.log(2.0)

# Relative closeness of mu_r and rho*mu_s below which the removable-pole
# branch expressions replace the general ones.
BRANCH_TOL = 1e-6

# Below this |mu - 1| the ratio shapes switch to their mu -> 1 limits
# (the general forms divide by mu - 1).
_MU_ONE_TOL = 1e-8


@dataclass(frozen=True)
class HopPair:
    """First-hop and second-hop link parameters."""

    s: LinkParams
    r: LinkParams


@dataclass(frozen=True)
class SelectionThresholds:
    """Selection thresholds: interior rho, empty-buffer rho_c, full-buffer rho_d."""

    rho: float
    rho_c: float
    rho_d: float

    def __post_init__(self) -> None:
        for name in ("rho", "rho_c", "rho_d"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive")

    @classmethod
    def uniform(cls, rho: float) -> "SelectionThresholds":
        return cls(rho=rho, rho_c=rho, rho_d=rho)


@dataclass(frozen=True)
class ModulationParams:
    """Error-rate model parameters and the fixed packet rate in bits per use."""

    eta: float = 2.0
    phi: float = 1.0
    rate_R: float = 1.0

    def __post_init__(self) -> None:
        if not (self.eta > 0.0) or not (self.phi > 0.0) or not (self.rate_R > 0.0):
            raise ValueError("eta, phi and rate_R must be positive")


class SerTriple(NamedTuple):
    p_s: float
    p_r: float
    p_bound: float


class ApproxQs(NamedTuple):
    value: float
    starving_side: bool


# ---------------------------------------------------------------------------
# term machinery


@dataclass(frozen=True)
class _Term:
    kind: str  # exp | ratio | ratio2 | e1 | e1log
    c: float
    mu: float
    a: float


def _mk(kind: str, c: float, mu: float, a: float, out: list) -> None:
    if c != 0.0:
        out.append(_Term(kind, c, mu, a))


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def _eval_term(t: _Term, x: float) -> float:
    if t.kind == "e1log":
        return t.c * (-EULER_GAMMA - math.log(x + t.mu))
    decay = 1.0 if math.isinf(t.a) else math.exp(-x / t.a)
    if t.kind == "exp":
        return t.c * decay
    if t.kind == "ratio":
        return t.c * decay * (t.mu / (x + t.mu))
    if t.kind == "ratio2":
        return t.c * decay * (t.mu / (x + t.mu)) ** 2
    # e1 (finite a by construction)
    return t.c * decay * exp_integral_en_scaled(1, (x + t.mu) / t.a)


def eval_terms(terms: Iterable[_Term], x: float) -> float:
    return math.fsum(_eval_term(t, x) for t in terms)


def _rate_term_nats(t: _Term, quad: QuadratureSpec) -> float:
    """int_0^inf term(x)/(1+x) dx for one primitive shape."""
    c, mu, a = t.c, t.mu, t.a
    if t.kind == "exp":
        if math.isinf(a):
            raise ValueError("rate diverges: constant term with no decay")
        return c * integral_I(1, 1.0, a)
    if t.kind == "ratio":
        if abs(mu - 1.0) < _MU_ONE_TOL:
            return c if math.isinf(a) else c * integral_I(2, 1.0, a)
        g = mu / (mu - 1.0)
        if math.isinf(a):
            return c * g * math.log(mu)
        return c * g * (integral_I(1, 1.0, a) - integral_I(1, mu, a))
    if t.kind == "ratio2":
        if abs(mu - 1.0) < _MU_ONE_TOL:
            return 0.5 * c if math.isinf(a) else c * integral_I(3, 1.0, a)
        g = mu / (mu - 1.0)
        if math.isinf(a):
            return c * (g * g * math.log(mu) - g)
        return c * (
            g * g * (integral_I(1, 1.0, a) - integral_I(1, mu, a))
            - g * integral_I(2, mu, a)
        )
    if t.kind == "e1":
        return c * integral_J(mu, a, quad)
    # e1log: meaningful only summed over a zero-sum group
    return c * dilog(1.0 - mu)


def rate_terms_nats(terms: Iterable[_Term], quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return math.fsum(_rate_term_nats(t, quad) for t in terms)


def _ew_term(t: _Term, eta: float, quad: QuadratureSpec) -> float:
    """Expectation of one shape under the weight sqrt(eta/(2 pi w)) e^(-eta w/2)."""
    c, mu, a = t.c, t.mu, t.a
    if t.kind == "exp":
        if math.isinf(a):
            return c
        return c * math.sqrt(eta * a / (eta * a + 2.0))
    if t.kind == "ratio":
        return c * integral_K(mu, a, eta)
    if t.kind == "ratio2":
        kappa = 0.5 * eta + _inv(a)
        return c * (
            integral_K(mu, a, eta) * (0.5 - kappa * mu)
            + mu * math.sqrt(0.5 * eta * kappa)
        )
    if t.kind == "e1":
        return c * integral_L(mu, a, eta, quad)
    return c * integral_L(mu, math.inf, eta, quad)


def ew_terms(
    terms: Iterable[_Term], eta: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    return math.fsum(_ew_term(t, eta, quad) for t in terms)


def _w2_term_nats(t: _Term, quad: QuadratureSpec) -> float:
    """int_0^inf 2 ln(1+x) term(x) / (1+x) dx for one shape."""
    c, mu, a = t.c, t.mu, t.a
    if t.kind == "exp":
        if math.isinf(a):
            raise ValueError("second moment diverges: constant term with no decay")
        return 2.0 * c * integral_J(1.0, a, quad)
    if t.kind == "ratio":
        if math.isinf(a):
            if abs(mu - 1.0) < _MU_ONE_TOL:
                return 2.0 * c
            return -2.0 * c * mu * dilog(1.0 - mu) / (mu - 1.0)
        if abs(mu - 1.0) < _MU_ONE_TOL:

            def f(x: float) -> float:
                return 2.0 * math.log1p(x) * math.exp(-x / a) / (1.0 + x) ** 2

            return c * quad_semi_infinite(f, quad)
        g = mu / (mu - 1.0)
        return 2.0 * c * g * (integral_J(1.0, a, quad) - integral_J(mu, a, quad))
    if t.kind == "ratio2":
        inv_a = _inv(a)

        def f2(x: float) -> float:
            return (
                2.0
                * math.log1p(x)
                * (mu / (x + mu)) ** 2
                * math.exp(-x * inv_a)
                / (1.0 + x)
            )

        return c * quad_semi_infinite(f2, quad)
    if t.kind == "e1":
        return c * integral_M(mu, a, quad)

    def f3(x: float) -> float:
        return 2.0 * math.log1p(x) * (math.log1p(x) - math.log(x + mu)) / (1.0 + x)

    return c * quad_semi_infinite(f3, quad)


def w2_terms_nats(terms: Iterable[_Term], quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return math.fsum(_w2_term_nats(t, quad) for t in terms)


# ---------------------------------------------------------------------------
# term builders


def _require_samplable(link: LinkParams, label: str) -> None:
    if math.isinf(link.lam) and link.p != 1.0:
        raise ValueError(f"{label}: infinite lam requires p = 1")


def marginal_terms(link: LinkParams) -> list[_Term]:
    """Terms of the marginal CCDF e^(-x/lam) [1 - p (1 - mu/(x+mu))]."""
    out: list[_Term] = []
    _mk("exp", 1.0 - link.p, 1.0, link.lam, out)
    _mk("ratio", link.p, link.mu, link.lam, out)
    return out


def product_terms(pair: HopPair) -> list[_Term]:
    """Terms of Pr{min(gamma_s, gamma_r) > x} = Fc_s(x) Fc_r(x)."""
    ps, mus, lams = pair.s.p, pair.s.mu, pair.s.lam
    pr, mur, lamr = pair.r.p, pair.r.mu, pair.r.lam
    inv_a = _inv(lams) + _inv(lamr)
    a = math.inf if inv_a == 0.0 else 1.0 / inv_a
    out: list[_Term] = []
    _mk("exp", (1.0 - ps) * (1.0 - pr), 1.0, a, out)
    if abs(mur - mus) < BRANCH_TOL * max(mur, mus):
        mu = 0.5 * (mus + mur)
        _mk("ratio", ps * (1.0 - pr) + pr * (1.0 - ps), mu, a, out)
        _mk("ratio2", ps * pr, mu, a, out)
        return out
    _mk("ratio", ps * (1.0 - pr + pr * mur / (mur - mus)), mus, a, out)
    _mk("ratio", pr * (1.0 - ps - ps * mus / (mur - mus)), mur, a, out)
    return out


def lambda_rho(pair: HopPair, rho: float) -> float:
    """Harmonic scale 1/lam_rho = 1/(rho lam_s) + 1/lam_r."""
    if not (rho > 0.0):
        raise ValueError("rho must be positive")
    inv = _inv(pair.s.lam) / rho + _inv(pair.r.lam)
    return math.inf if inv == 0.0 else 1.0 / inv


def joint_terms_sr(pair: HopPair, rho: float) -> list[_Term]:
    """Terms of Pr{select first hop, gamma_s > x} for the interior threshold rho."""
    if not (rho > 0.0):
        raise ValueError("rho must be positive")
    _require_samplable(pair.s, "hop s")
    _require_samplable(pair.r, "hop r")
    ps, mus, lams = pair.s.p, pair.s.mu, pair.s.lam
    pr, mur, lamr = pair.r.p, pair.r.mu, pair.r.lam
    inv_ls, inv_lr = _inv(lams), _inv(lamr)

    # decay scale of the mixed terms: e^(-rho x / lam_rho) = e^(-x/a)
    inv_a = inv_ls + rho * inv_lr
    a = math.inf if inv_a == 0.0 else 1.0 / inv_a

    # weight lam_rho/(rho lam_s); irrelevant (coefficient 0) when both lams
    # are infinite, so any finite placeholder works there.
    u1 = inv_ls / rho
    u2 = inv_lr
    w = u1 / (u1 + u2) if (u1 + u2) > 0.0 else 0.0

    out: list[_Term] = []
    _mk("exp", 1.0 - ps, 1.0, lams, out)
    _mk("exp", -(1.0 - ps) * (1.0 - pr) * w, 1.0, a, out)
    _mk("ratio", ps, mus, lams, out)

    d = mur - rho * mus
    if abs(d) < BRANCH_TOL * max(mur, rho * mus):
        # removable-pole branch at mu_r = rho mu_s
        _mk(
            "ratio",
            -ps * ((1.0 - pr) - 0.5 * pr * (mur * inv_lr - mus * inv_ls)),
            mus,
            a,
            out,
        )
        _mk("ratio2", -0.5 * ps * pr, mus, a, out)
        c6 = (
            ps * (1.0 - pr) * mur * inv_lr
            - pr * (1.0 - ps) * mus * inv_ls
            + 0.5 * ps * pr * ((mus * inv_ls) ** 2 - (mur * inv_lr) ** 2)
        )
        if c6 != 0.0:
            _mk("e1", c6, mus, a, out)
        return out

    _mk("ratio", -ps * (1.0 - pr + mur * pr / d), mus, a, out)
    if math.isinf(a):
        # both hops interference limited: the two E1 coefficients collapse to
        # an exactly zero-sum logarithmic pair
        cpair = ps * pr * rho * mus * mur / (d * d)
        _mk("e1log", cpair, mus, math.inf, out)
        _mk("e1log", -cpair, mur / rho, math.inf, out)
        return out
    c3 = ps * rho * mus * (
        (1.0 - pr) * inv_lr + mur * pr * inv_lr / d + mur * pr / (d * d)
    )
    c4 = -pr * mur * (
        (1.0 - ps) * inv_ls / rho - mus * ps * inv_ls / d + rho * mus * ps / (d * d)
    )
    _mk("e1", c3, mus, a, out)
    _mk("e1", c4, mur / rho, a, out)
    return out


# ---------------------------------------------------------------------------
# public operations


def reverse(
    pair: HopPair, thr: SelectionThresholds
) -> tuple[HopPair, SelectionThresholds]:
    """Swap the hop roles.

    The selection rule compares gamma_r against threshold * gamma_s, so under
    the role swap every threshold acts on the reciprocal comparison: the
    interior threshold inverts, and the boundary thresholds invert while
    trading places (the empty-buffer rule of the swapped system plays the
    full-buffer role of the original, and vice versa). Applying the operation
    twice is the identity.
    """
    return (
        HopPair(s=pair.r, r=pair.s),
        SelectionThresholds(
            rho=1.0 / thr.rho, rho_c=1.0 / thr.rho_d, rho_d=1.0 / thr.rho_c
        ),
    )


def joint_ccdf_sr(pair: HopPair, rho: float, x: float) -> float:
    """Pr{gamma_r <= rho gamma_s, gamma_s > x}: first hop selected and strong."""
    if x < 0.0:
        raise ValueError("x must be non-negative")
    v = eval_terms(joint_terms_sr(pair, rho), x)
    return min(1.0, max(0.0, v))


def joint_ccdf_rd(pair: HopPair, rho: float, x: float) -> float:
    """Pr{gamma_r > rho gamma_s, gamma_r > x}: second hop selected and strong."""
    rpair, _ = reverse(pair, SelectionThresholds.uniform(rho))
    return joint_ccdf_sr(rpair, 1.0 / rho, x)


def lsp(pair: HopPair, rho: float) -> tuple[float, float]:
    """Link-selection probabilities (q_s, q_r) for the interior threshold."""
    q_s = joint_ccdf_sr(pair, rho, 0.0)
    return q_s, 1.0 - q_s


def qs_pip_exact(pair: HopPair, rho: float) -> float:
    """Interference-limited q_s in closed form, z = rho mu_s / mu_r."""
    z = rho * pair.s.mu / pair.r.mu
    if abs(z - 1.0) < 1e-6:
        return 0.5 + (z - 1.0) / 6.0
    om = 1.0 - z
    return -z / om - z * math.log(z) / (om * om)


def approx_qs_pip(pair: HopPair, rho: float) -> ApproxQs:
    """Geometric-series approximation q_s ~ z/(1+z), z = rho mu_s / mu_r.

    Intended for the starving side z < 1 (flagged otherwise); it is exact at
    z = 1 and degrades as z -> 0.
    """
    z = rho * pair.s.mu / pair.r.mu
    return ApproxQs(value=z / (1.0 + z), starving_side=z < 1.0)


def _regime(pair: HopPair) -> str:
    if pair.s.p == 0.0 and pair.r.p == 0.0:
        return "ptp"
    if (
        pair.s.p == 1.0
        and pair.r.p == 1.0
        and math.isinf(pair.s.lam)
        and math.isinf(pair.r.lam)
    ):
        return "pip"
    return "mixed"


def rho_opt_fixed(pair: HopPair) -> float:
    """Fixed-rate optimal threshold: the rho that makes q_s = 1/2.

    Pure regimes have closed forms; otherwise q_s is monotone in rho and a
    log-domain bisection suffices.
    """
    regime = _regime(pair)
    if regime == "ptp":
        return pair.r.lam / pair.s.lam
    if regime == "pip":
        return pair.r.mu / pair.s.mu

    def f(log10_rho: float) -> float:
        return lsp(pair, 10.0**log10_rho)[0] - 0.5

    lo, hi = -30.0, 30.0
    flo, fhi = f(lo), f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise ValueError("could not bracket q_s = 1/2 within log10 rho in [-30, 30]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < 1e-10:
            return 10.0**mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return 10.0 ** (0.5 * (lo + hi))


def rho_for_qs(pair: HopPair, q_target: float) -> float:
    """Threshold whose first-hop selection probability equals q_target.

    The selection probability is monotone increasing in rho, so a log-domain
    bisection converges unconditionally.
    """
    if not (0.0 < q_target < 1.0):
        raise ValueError("q_target must lie in (0, 1)")
    lo, hi = -30.0, 30.0
    if lsp(pair, 10.0**lo)[0] > q_target or lsp(pair, 10.0**hi)[0] < q_target:
        raise ValueError("q_target not bracketed within log10 rho in [-30, 30]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = lsp(pair, 10.0**mid)[0] - q_target
        if abs(f) < 1e-12:
            return 10.0**mid
        if f < 0.0:
            lo = mid
        else:
            hi = mid
    return 10.0 ** (0.5 * (lo + hi))


def avg_capacity_hop(link: LinkParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Ergodic capacity E[log2(1 + gamma)] of one hop in bits per channel use."""
    return rate_terms_nats(marginal_terms(link), quad) / LN2


def avg_rate_cabr_hop_s(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Average rate carried by the first hop under adaptive selection."""
    return rate_terms_nats(joint_terms_sr(pair, rho), quad) / LN2


def avg_rate_cabr_hop_s_quad(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Same quantity by direct quadrature of the joint CCDF (cross-check path)."""
    terms = joint_terms_sr(pair, rho)

    def f(x: float) -> float:
        return eval_terms(terms, x) / (1.0 + x)

    return quad_semi_infinite(f, quad) / LN2


def avg_rate_cabr_hop_r(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Average rate carried by the second hop under adaptive selection."""
    rpair, _ = reverse(pair, SelectionThresholds.uniform(rho))
    return avg_rate_cabr_hop_s(rpair, 1.0 / rho, quad)


def avg_rate_cabr(
    pair: HopPair, quad: QuadratureSpec = DEFAULT_QUAD
) -> tuple[float, float]:
    """Adaptive-rate throughput and the threshold balancing the two hop rates.

    The first-hop rate grows with rho while the second-hop rate shrinks, so
    the balance point is found by bisection on log10 rho; the common value is
    the end-to-end average rate.
    """

    def gap(log10_rho: float) -> tuple[float, float, float]:
        rho = 10.0**log10_rho
        rs = avg_rate_cabr_hop_s(pair, rho, quad)
        rr = avg_rate_cabr_hop_r(pair, rho, quad)
        return rs - rr, rs, rr

    lo, hi = -30.0, 30.0
    glo = gap(lo)[0]
    ghi = gap(hi)[0]
    if glo > 0.0 or ghi < 0.0:
        raise ValueError("could not bracket the rate balance point")
    rs = rr = 0.0
    mid = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g, rs, rr = gap(mid)
        if abs(g) <= 1e-8 * max(rs, rr):
            break
        if g < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (rs + rr), 10.0**mid


def avg_rate_cnbr(pair: HopPair, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Fixed-alternation relay rate (1/2) E[log2(1 + min(gamma_s, gamma_r))]."""
    return rate_terms_nats(product_terms(pair), quad) / (2.0 * LN2)


def avg_rate_cnbr_quad(pair: HopPair, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Cross-check path: direct quadrature over the product CCDF."""
    terms = product_terms(pair)

    def f(x: float) -> float:
        return eval_terms(terms, x) / (1.0 + x)

    return quad_semi_infinite(f, quad) / (2.0 * LN2)


def avg_rate_cbr(pair: HopPair, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Block-scheduled buffered relay rate: half the bottleneck hop capacity."""
    return 0.5 * min(avg_capacity_hop(pair.s, quad), avg_capacity_hop(pair.r, quad))


def ew_joint_ccdf_sr(
    pair: HopPair, rho: float, eta: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Expectation of the joint selection CCDF under the gaussian error weight."""
    return ew_terms(joint_terms_sr(pair, rho), eta, quad)


def ew_joint_ccdf_sr_quad(
    pair: HopPair, rho: float, eta: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Cross-check path: direct quadrature with w = t*t against the term sum."""
    terms = joint_terms_sr(pair, rho)
    coef = 2.0 * math.sqrt(0.5 * eta / math.pi)

    def f(t: float) -> float:
        w = t * t
        return coef * math.exp(-0.5 * eta * w) * eval_terms(terms, w)

    return quad_semi_infinite(f, quad)


def ser_exact_cabr(
    pair: HopPair, rho: float, mod: ModulationParams, quad: QuadratureSpec = DEFAULT_QUAD
) -> SerTriple:
    """Per-hop symbol error rates conditioned on selection, and their sum bound."""
    q_s, q_r = lsp(pair, rho)
    # conditioning divides two absolutely-accurate closed forms; below ~1e-12
    # the numerator q - Ew is cancellation noise and the quotient has no
    # correct digits
    if not (q_s > 1e-12) or not (q_r > 1e-12):
        raise ValueError(
            "selection is too one-sided to condition on (q_s or q_r <= 1e-12)"
        )
    ew_s = ew_joint_ccdf_sr(pair, rho, mod.eta, quad)
    p_s = 0.5 * mod.phi * (q_s - ew_s) / q_s
    rpair, _ = reverse(pair, SelectionThresholds.uniform(rho))
    ew_r = ew_joint_ccdf_sr(rpair, 1.0 / rho, mod.eta, quad)
    p_r = 0.5 * mod.phi * (q_r - ew_r) / q_r
    return SerTriple(p_s, p_r, p_s + p_r)


def ser_exact_cabr_quad(
    pair: HopPair, rho: float, mod: ModulationParams, quad: QuadratureSpec = DEFAULT_QUAD
) -> SerTriple:
    """Cross-check path for the conditional error rates via direct quadrature."""
    q_s, q_r = lsp(pair, rho)
    ew_s = ew_joint_ccdf_sr_quad(pair, rho, mod.eta, quad)
    p_s = 0.5 * mod.phi * (q_s - ew_s) / q_s
    rpair, _ = reverse(pair, SelectionThresholds.uniform(rho))
    ew_r = ew_joint_ccdf_sr_quad(rpair, 1.0 / rho, mod.eta, quad)
    p_r = 0.5 * mod.phi * (q_r - ew_r) / q_r
    return SerTriple(p_s, p_r, p_s + p_r)


def ser_exact_cnbr(
    pair: HopPair, mod: ModulationParams, quad: QuadratureSpec = DEFAULT_QUAD
) -> SerTriple:
    """Per-hop symbol error rates of the fixed-alternation relay."""
    vals = []
    for link in (pair.s, pair.r):
        ew = ew_terms(marginal_terms(link), mod.eta, quad)
        vals.append(0.5 * mod.phi * (1.0 - ew))
    return SerTriple(vals[0], vals[1], vals[0] + vals[1])


def _interference_factor(link: LinkParams) -> float:
    return _inv(link.lam) + link.p / link.mu


def ser_asym_cabr(pair: HopPair, rho: float, mod: ModulationParams) -> SerTriple:
    """High-SNR error-rate approximation for adaptive selection (slope-2 regime)."""
    q_s, q_r = lsp(pair, rho)
    prod = _interference_factor(pair.s) * _interference_factor(pair.r)
    base = 0.75 * mod.phi / (mod.eta * mod.eta)
    p_s = base * (rho / q_s) * prod
    p_r = base * (1.0 / (rho * q_r)) * prod
    return SerTriple(p_s, p_r, p_s + p_r)


def ser_asym_cnbr(pair: HopPair, mod: ModulationParams) -> SerTriple:
    """High-SNR error-rate approximation for the fixed-alternation relay (slope 1)."""
    base = 0.5 * mod.phi / mod.eta
    p_s = base * _interference_factor(pair.s)
    p_r = base * _interference_factor(pair.r)
    return SerTriple(p_s, p_r, p_s + p_r)


def second_moment_rate_hop_s(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Second moment of the selected first-hop rate (bits^2 per channel use^2)."""
    return w2_terms_nats(joint_terms_sr(pair, rho), quad) / (LN2 * LN2)


def second_moment_rate_hop_s_quad(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Cross-check path: direct quadrature of the defining log-squared integral."""
    terms = joint_terms_sr(pair, rho)

    def f(x: float) -> float:
        return 2.0 * math.log1p(x) * eval_terms(terms, x) / (1.0 + x)

    return quad_semi_infinite(f, quad) / (LN2 * LN2)


def second_moment_rate_hop_r(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    rpair, _ = reverse(pair, SelectionThresholds.uniform(rho))
    return second_moment_rate_hop_s(rpair, 1.0 / rho, quad)


def delay_bound_adaptive(
    pair: HopPair, rho: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Mean-delay upper bound for the adaptive scheme run below the balance point.

    Requires the buffer-starving condition xi = (second-hop rate)/(first-hop
    rate) > 1; the bound diverges as the rates balance.
    """
    # the masked moments are absolutely accurate, so once the first hop is
    # essentially never selected their ratios carry no correct digits (and
    # the bound has long since plateaued anyway)
    if lsp(pair, rho)[0] < 1e-7:
        raise ValueError(
            "threshold too one-sided for the conditional-moment delay bound"
        )
    m1s = avg_rate_cabr_hop_s(pair, rho, quad)
    m1r = avg_rate_cabr_hop_r(pair, rho, quad)
    xi = m1r / m1s
    if not (xi > 1.0):
        raise ValueError("delay bound requires a starving buffer (xi > 1)")
    m2s = second_moment_rate_hop_s(pair, rho, quad)
    m2r = second_moment_rate_hop_r(pair, rho, quad)
    return (
        0.5
        / (xi * m1s) ** 2
        * (xi * xi * m2s + (2.0 * xi - 1.0) * m2r)
        / (xi - 1.0)
    )


def rho_for_delay_bound(
    pair: HopPair,
    t_target: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Largest rho (below the rate balance point) whose delay bound meets t_target.

    The bound increases toward infinity as rho approaches the balance point,
    so the inversion scans down from there and bisects.
    """
    if not (t_target > 0.0):
        raise ValueError("t_target must be positive")
    _, rho_bal = avg_rate_cabr(pair, quad)
    hi = math.log10(rho_bal) - 1e-3
    lo = hi
    for _ in range(200):
        lo -= 0.25
        if lo < -30.0:
            raise ValueError("delay target unreachable within the search range")
        try:
            if delay_bound_adaptive(pair, 10.0**lo, quad) <= t_target:
                break
        except ValueError:
            continue
    else:
        raise ValueError("delay target unreachable")
    # make sure the upper end exceeds the target; walk hi down if it is
    # numerically past the balance point
    while hi > lo:
        try:
            if delay_bound_adaptive(pair, 10.0**hi, quad) > t_target:
                break
        except ValueError:
            pass
        hi -= 0.05
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        try:
            val = delay_bound_adaptive(pair, 10.0**mid, quad)
        except ValueError:
            hi = mid
            continue
        if val <= t_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return 10.0**lo
