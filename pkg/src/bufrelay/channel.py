"""Link-level statistics of the underlay two-hop network.

The secondary transmitter of each hop sends with the largest power allowed by
both its own peak constraint and the interference cap at the primary receiver.
With unit-mean Rayleigh fading on both the data channel (mean Omega_h) and the
interference channel (mean Omega_g), the received SNR of hop i is

    gamma_i = min(gamma_max, gamma_p / |g_i|^2) |h_i|^2

which is fully described by the pair (lam, mu) plus the derived probability p
that the interference cap binds. p = 0 recovers the peak-power-only regime,
p = 1 with infinite lam the interference-limited regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NodeGeometry",
    "PowerConstraints",
    "LinkParams",
    "RegimeOverride",
    "REGIMES",
    "derive_link_params",
    "link_ccdf",
    "link_pdf",
    "sample_snr",
]

REGIMES = ("exact", "ptp", "pip")


@dataclass(frozen=True)
class NodeGeometry:
    """Node distances (source-relay, relay-destination, source-primary, relay-primary)."""

    d_sr: float
    d_rd: float
    d_sp: float
    d_rp: float
    alpha: float = 3.0

    def __post_init__(self) -> None:
        for name in ("d_sr", "d_rd", "d_sp", "d_rp", "alpha"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class PowerConstraints:
    """Peak transmit SNR and interference-cap SNR, stored in dB."""

    gamma_max_db: float
    gamma_p_db: float

    @property
    def gamma_max(self) -> float:
        return 10.0 ** (self.gamma_max_db / 10.0)

    @property
    def gamma_p(self) -> float:
        return 10.0 ** (self.gamma_p_db / 10.0)

    @classmethod
    def from_linear(cls, gamma_max: float, gamma_p: float) -> "PowerConstraints":
        if not (gamma_max > 0.0) or not (gamma_p > 0.0):
            raise ValueError("linear SNR constraints must be positive")
        return cls(10.0 * math.log10(gamma_max), 10.0 * math.log10(gamma_p))


@dataclass(frozen=True)
class LinkParams:
    """(lam, mu, p) statistical description of one hop.

    lam  mean SNR when only the peak power constraint binds (may be inf),
    mu   mean SNR of the interference-limited branch,
    p    probability the interference cap binds; equals exp(-mu/lam) whenever
         the parameters come from one physical configuration.
    """

    lam: float
    mu: float
    p: float

    def __post_init__(self) -> None:
        if not (self.lam > 0.0):
            raise ValueError("lam must be positive (inf allowed)")
        if not (self.mu > 0.0) or math.isinf(self.mu):
            raise ValueError("mu must be positive and finite")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")

    @classmethod
    def from_lambda_mu(cls, lam: float, mu: float) -> "LinkParams":
        p = 1.0 if math.isinf(lam) else math.exp(-mu / lam)
        return cls(lam=lam, mu=mu, p=p)

    @property
    def consistent(self) -> bool:
        """True when p matches exp(-mu/lam), i.e. the link is physically samplable."""
        p_ref = 1.0 if math.isinf(self.lam) else math.exp(-self.mu / self.lam)
        return abs(self.p - p_ref) <= 1e-12


@dataclass(frozen=True)
class RegimeOverride:
    """Formula-path override: keep stored (lam, mu) but force p to 0 or 1."""

    mode: str = "exact"

    def __post_init__(self) -> None:
        if self.mode not in REGIMES:
            raise ValueError(f"mode must be one of {REGIMES}")


def _regime_mode(regime) -> str:
    mode = getattr(regime, "mode", regime)
    if mode not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    return mode


def _effective_p(link: LinkParams, regime) -> float:
    mode = _regime_mode(regime)
    if mode == "ptp":
        return 0.0
    if mode == "pip":
        return 1.0
    return link.p


def derive_link_params(
    geom: NodeGeometry,
    pc: PowerConstraints,
    omega_h_s: float | None = None,
    omega_h_r: float | None = None,
) -> tuple[LinkParams, LinkParams]:
    """Map geometry and power constraints to per-hop (lam, mu, p).

    Path loss gives Omega = d^(-alpha) on every channel; the data-channel
    Omega_h values can be overridden (sweeps sometimes pin them directly while
    keeping the interference geometry).
    """
    if omega_h_s is None:
        omega_h_s = geom.d_sr ** (-geom.alpha)
    if omega_h_r is None:
        omega_h_r = geom.d_rd ** (-geom.alpha)
    if not (omega_h_s > 0.0) or not (omega_h_r > 0.0):
        raise ValueError("fading overrides must be positive")
    omega_g_s = geom.d_sp ** (-geom.alpha)
    omega_g_r = geom.d_rp ** (-geom.alpha)
    hop_s = LinkParams.from_lambda_mu(
        lam=pc.gamma_max * omega_h_s, mu=pc.gamma_p * omega_h_s / omega_g_s
    )
    hop_r = LinkParams.from_lambda_mu(
        lam=pc.gamma_max * omega_h_r, mu=pc.gamma_p * omega_h_r / omega_g_r
    )
    return hop_s, hop_r


def link_ccdf(link: LinkParams, s, regime="exact"):
    """Marginal CCDF Pr{gamma > s} = e^(-s/lam) [1 - p (1 - mu/(s+mu))]."""
    p = _effective_p(link, regime)
    s = np.asarray(s, dtype=float)
    decay = np.exp(-s / link.lam) if not math.isinf(link.lam) else np.ones_like(s)
    out = decay * (1.0 - p * (1.0 - link.mu / (s + link.mu)))
    return float(out) if out.ndim == 0 else out


def link_pdf(link: LinkParams, s, regime="exact"):
    """Marginal PDF of the link SNR; written so the infinite-lam case stays finite."""
    p = _effective_p(link, regime)
    s = np.asarray(s, dtype=float)
    mu = link.mu
    if math.isinf(link.lam):
        out = p * mu / (s + mu) ** 2
    else:
        out = np.exp(-s / link.lam) * (
            (1.0 - p * (1.0 - mu / (s + mu))) / link.lam + p * mu / (s + mu) ** 2
        )
    return float(out) if out.ndim == 0 else out


def sample_snr(link: LinkParams, rng: np.random.Generator, size=None, regime="exact"):
    """Draw instantaneous SNR(s): min(lam, mu/v) * u with u, v unit exponentials.

    Both exponentials are always consumed so that matched-seed runs stay
    aligned across regime choices. Forced overrides only reinterpret the
    draw; an exact-regime link must carry a consistent p.
    """
    mode = _regime_mode(regime)
    u = rng.standard_exponential(size)
    v = rng.standard_exponential(size)
    if mode == "ptp":
        if math.isinf(link.lam):
            raise ValueError("peak-power-only regime needs a finite lam")
        return link.lam * u
    if mode == "pip":
        return link.mu * u / v
    if math.isinf(link.lam):
        return link.mu * u / v
    if not link.consistent:
        if link.p == 0.0:
            return link.lam * u
        raise ValueError(
            "link has a forced p inconsistent with (lam, mu); "
            "sample with an explicit regime override instead"
        )
    return np.minimum(link.lam, link.mu / v) * u
