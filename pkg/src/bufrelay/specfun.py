"""Special functions and the named semi-infinite integrals behind the closed forms.

Everything here is a pure function. The five integral families (I, J, K, L, M)
show up throughout the rate / error-probability / delay expressions; each one
is exposed with its closed or semi-closed form plus enough numerical care to
survive the parameter ranges the sweeps use (decay scales from 1e-4 to 1e4 and
the distinguished infinite scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "ConvergenceError",
    "EULER_GAMMA",
    "exp_integral_en",
    "exp_integral_en_scaled",
    "dilog",
    "integral_I",
    "integral_J",
    "integral_K",
    "integral_L",
    "integral_M",
]

EULER_GAMMA = 0.57721566490153286060651209008240243


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadrature used by the semi-closed integrals."""

    absolute_tolerance: float = 1e-10
    relative_tolerance: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.absolute_tolerance > 0.0 and self.relative_tolerance > 0.0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


class ConvergenceError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, what: str, achieved: float, requested: float):
        super().__init__(
            f"{what}: achieved abs error {achieved:.3e} vs requested {requested:.3e}"
        )
        self.achieved = achieved
        self.requested = requested


def quad_semi_infinite(f, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integrate f over [0, inf) by mapping x = t/(1-t) onto [0, 1).

    The compactified form lets one adaptive scheme cover every tail weight we
    meet (exponential, gaussian, algebraic) without ad hoc truncation.
    """

    def g(t: float) -> float:
        om = 1.0 - t
        x = t / om
        return f(x) / (om * om)

    res = integrate.quad(
        g,
        0.0,
        1.0,
        epsabs=quad.absolute_tolerance,
        epsrel=quad.relative_tolerance,
        limit=quad.max_subdivisions,
        full_output=1,
    )
    value, abserr = res[0], res[1]
    requested = max(quad.absolute_tolerance, quad.relative_tolerance * abs(value))
    # quad reports its own error estimate; a modest safety factor separates
    # "roundoff-limited but fine" from genuinely unconverged results.
    if abserr > 50.0 * requested or math.isnan(value):
        raise ConvergenceError("semi-infinite quadrature", abserr, requested)
    return value


def exp_integral_en(n: int, x: float) -> float:
    """Generalized exponential integral E_n(x) = int_1^inf t^(-n) e^(-x t) dt."""
    if n < 0 or n != int(n):
        raise ValueError("order n must be a non-negative integer")
    n = int(n)
    if n <= 1:
        if x <= 0.0:
            raise ValueError("E_n(x) with n <= 1 requires x > 0")
    elif x < 0.0:
        raise ValueError("E_n(x) requires x >= 0")
    if x == 0.0:
        return 1.0 / (n - 1.0)
    if x > 600.0:
        return math.exp(-x) * _en_continued_fraction(n, x)
    return float(special.expn(n, x))


def exp_integral_en_scaled(n: int, x: float) -> float:
    """e^x * E_n(x), stable for arbitrarily large x.

    The plain product overflows/underflows past x ~ 700; beyond a safe switch
    point the value comes from the continued fraction of E_n evaluated without
    the e^(-x) prefactor.
    """
    if n < 0 or n != int(n):
        raise ValueError("order n must be a non-negative integer")
    n = int(n)
    if n <= 1:
        if x <= 0.0:
            raise ValueError("scaled E_n with n <= 1 requires x > 0")
    elif x < 0.0:
        raise ValueError("scaled E_n requires x >= 0")
    if x == 0.0:
        return 1.0 / (n - 1.0)
    if n == 0:
        return 1.0 / x
    if x > 600.0:
        return _en_continued_fraction(n, x)
    return math.exp(x) * float(special.expn(n, x))


def _en_continued_fraction(n: int, x: float) -> float:
    # Modified Lentz evaluation of the E_n continued fraction, returning
    # e^x E_n(x). Converges fast for x >> 1 where we use it. The stopping
    # tolerance must sit a few ulps above machine epsilon or rounding noise
    # in delta can stall the loop just short of it.
    eps = 1e-15
    tiny = 1e-300
    b = x + n
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        a = -i * (n - 1 + i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ConvergenceError("E_n continued fraction", abs(delta - 1.0), eps)


def dilog(x: float) -> float:
    """Euler dilogarithm Li2(x) for x <= 1."""
    if x > 1.0:
        raise ValueError("dilog defined here only for x <= 1")
    return float(special.spence(1.0 - x))


def integral_I(n: int, mu: float, lam: float, x: float = 0.0) -> float:
    """I_n(mu, lam; x) = int_x^inf mu^(n-1) e^(-s/lam) / (s+mu)^n ds.

    Closed form: (mu/(x+mu))^(n-1) e^(mu/lam) E_n((x+mu)/lam), evaluated in a
    scaled fashion so large mu/lam never overflows.
    """
    if n < 1 or n != int(n):
        raise ValueError("order n must be a positive integer")
    if not (mu > 0.0) or not (lam > 0.0):
        raise ValueError("mu and lam must be positive")
    if x < 0.0:
        raise ValueError("lower limit x must be non-negative")
    n = int(n)
    if math.isinf(lam):
        # exp(-s/lam) -> 1; the integral converges only for n >= 2.
        if n == 1:
            return math.inf
        return (mu / (x + mu)) ** (n - 1) / (n - 1.0)
    return (
        (mu / (x + mu)) ** (n - 1)
        * math.exp(-x / lam)
        * exp_integral_en_scaled(n, (x + mu) / lam)
    )


def integral_I_quad(
    n: int, mu: float, lam: float, x: float = 0.0, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Defining-integral evaluation of I_n, kept as an independent cross-check path."""
    if n < 1 or n != int(n):
        raise ValueError("order n must be a positive integer")
    if not (mu > 0.0) or not (lam > 0.0):
        raise ValueError("mu and lam must be positive")

    def f(t: float) -> float:
        s = x + t
        return mu ** (n - 1) * math.exp(-s / lam) / (s + mu) ** n

    return quad_semi_infinite(f, quad)


def integral_J(mu: float, lam: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """J(mu, lam) = int_0^inf ln(1+x) e^(-x/lam) / (x+mu) dx."""
    if not (mu > 0.0) or not (lam > 0.0) or math.isinf(lam):
        raise ValueError("mu and lam must be positive and finite")

    def f(x: float) -> float:
        return math.log1p(x) * math.exp(-x / lam) / (x + mu)

    return quad_semi_infinite(f, quad)


def integral_K(mu: float, lam: float, eta: float) -> float:
    """K(mu, lam, eta) = int_0^inf sqrt(eta/(2 pi w)) mu e^(-(eta/2 + 1/lam) w) / (w+mu) dw.

    Closed form sqrt(pi eta mu / 2) * erfcx(sqrt((eta/2 + 1/lam) mu)); the
    infinite-scale case drops the 1/lam term.
    """
    if not (mu > 0.0) or not (eta > 0.0):
        raise ValueError("mu and eta must be positive")
    if not (lam > 0.0):
        raise ValueError("lam must be positive (or infinite)")
    kappa = 0.5 * eta + (0.0 if math.isinf(lam) else 1.0 / lam)
    return math.sqrt(0.5 * math.pi * eta * mu) * float(
        special.erfcx(math.sqrt(kappa * mu))
    )


def integral_K_quad(
    mu: float, lam: float, eta: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """Defining-integral evaluation of K (substituting w = t*t to kill the 1/sqrt(w))."""
    inv_lam = 0.0 if math.isinf(lam) else 1.0 / lam
    coef = 2.0 * math.sqrt(0.5 * eta / math.pi)

    def f(t: float) -> float:
        w = t * t
        return coef * mu * math.exp(-(0.5 * eta + inv_lam) * w) / (w + mu)

    return quad_semi_infinite(f, quad)


def integral_L(
    mu: float, lam: float, eta: float, quad: QuadratureSpec = DEFAULT_QUAD
) -> float:
    """L(mu, lam, eta) = int_0^inf sqrt(eta/(2 pi w)) e^(-eta w/2) e^(mu/lam) E_1((w+mu)/lam) dw.

    The w = t*t substitution removes the integrable endpoint singularity.

    Infinite decay scale: the integral grows like ln(lam), so this routine
    returns the renormalized limit of L(mu, lam) - ln(lam), i.e. the gaussian
    average of (-euler_gamma - ln(w+mu)). Callers only ever consume such
    values in differences or zero-sum combinations where the discarded offset
    cancels, which keeps the interference-limited expressions finite.
    """
    if not (mu > 0.0) or not (eta > 0.0):
        raise ValueError("mu and eta must be positive")
    if not (lam > 0.0):
        raise ValueError("lam must be positive (or infinite)")
    coef = 2.0 * math.sqrt(0.5 * eta / math.pi)

    if math.isinf(lam):

        def f_reg(t: float) -> float:
            w = t * t
            return coef * math.exp(-0.5 * eta * w) * (-EULER_GAMMA - math.log(w + mu))

        return quad_semi_infinite(f_reg, quad)

    def f(t: float) -> float:
        w = t * t
        return (
            coef
            * math.exp(-0.5 * eta * w - w / lam)
            * exp_integral_en_scaled(1, (w + mu) / lam)
        )

    return quad_semi_infinite(f, quad)


def integral_M(mu: float, lam: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """M(mu, lam) = int_0^inf ln(1+x)^2 e^(-x/lam) / (x+mu) dx."""
    if not (mu > 0.0) or not (lam > 0.0) or math.isinf(lam):
        raise ValueError("mu and lam must be positive and finite")

    def f(x: float) -> float:
        lg = math.log1p(x)
        return lg * lg * math.exp(-x / lam) / (x + mu)

    return quad_semi_infinite(f, quad)
