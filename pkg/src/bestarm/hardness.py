"""Hardness parameters H1-H4, separability margin, and error-bound evaluators.

Every bound comes in two forms: ``bound_*`` returns the value clipped to
[0,1] for reporting, and ``log_bound_*`` returns the natural log of the raw
value so decay rates can be checked at budgets where the bound underflows.
Budgets T may be scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .core import BoundedUnit, Bernoulli, Family, Gaussian, GapProfile
from .errors import BudgetTooSmall, InvalidK, SeparabilityViolated

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class HardnessProfile:
    H1: float
    H2: float
    H3: float
    H4: float
    H4_tilde: float  # K * H4
    separability_margin: float  # Delta_[2] - (1 - 2/K) * Delta_[K]
    eta: float | None  # None when the margin is negative

    def as_row(self, K: int) -> dict:
        return {
            "K": K,
            "H1": self.H1,
            "H2": self.H2,
            "H3": self.H3,
            "H4": self.H4,
            "KH4": self.H4_tilde,
            "margin": self.separability_margin,
            "eta": self.eta if self.eta is not None else "",
        }


def hardness(profile: GapProfile, K: int | None = None) -> HardnessProfile:
    """Hardness terms of a gap profile.

    H1 sums 1/Delta_i^2 over all K arms with the best arm contributing its
    runner-up gap; H2 = max_{i>=2} i/(mu_[1]-mu_[i])^2; H3 = K/Delta_[1]^2;
    H4 = 1/(Delta_[1]+Delta_[K])^2. eta is the largest feasible separability
    constant min(1, K^2 H4 margin^2), absent when the margin is negative.
    """
    g = np.asarray(profile.gaps)
    if K is None:
        K = len(g)
    elif K != len(g):
        raise InvalidK(f"K={K} does not match profile with {len(g)} gaps")
    H1 = float(np.sum(1.0 / g**2))
    idx = np.arange(2, K + 1)
    H2 = float(np.max(idx / g[1:] ** 2))
    H3 = float(K / g[0] ** 2)
    H4 = float(1.0 / (g[0] + g[-1]) ** 2)
    margin = float(g[1] - (1.0 - 2.0 / K) * g[-1])
    eta = min(1.0, K**2 * H4 * margin**2) if margin >= 0 else None
    return HardnessProfile(
        H1=H1,
        H2=H2,
        H3=H3,
        H4=H4,
        H4_tilde=float(K * H4),
        separability_margin=margin,
        eta=eta,
    )


def q_function(x):
    """Standard Gaussian upper-tail probability Q(x), via erfc."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def q_lower(x):
    """Lower bound x/((1+x^2) sqrt(2 pi)) exp(-x^2/2), valid for x > 0."""
    x = np.asarray(x, dtype=float)
    out = x / ((1.0 + x**2) * _SQRT_2PI) * np.exp(-(x**2) / 2.0)
    return float(out) if out.ndim == 0 else out


def q_upper(x):
    """Upper bound exp(-x^2/2)/(x sqrt(2 pi)), valid for x > 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(-(x**2) / 2.0) / (x * _SQRT_2PI)
    return float(out) if out.ndim == 0 else out


def _family_kind(family, sigma2: float | None) -> tuple[str, float | None]:
    if isinstance(family, Gaussian):
        s2 = family.sigma2 if sigma2 is None else sigma2
        if s2 <= 0:
            raise InvalidK("gaussian bounds need sigma2 > 0")
        return "gaussian", s2
    if isinstance(family, (Bernoulli, BoundedUnit)):
        return "bounded", None
    if family == "gaussian":
        if sigma2 is None or sigma2 <= 0:
            raise InvalidK("gaussian bounds need sigma2 > 0")
        return "gaussian", sigma2
    if family == "bounded":
        return "bounded", None
    raise InvalidK(f"unknown reward family {family!r}")


def _finish(logv, clip: bool):
    arr = np.asarray(logv, dtype=float)
    if clip:
        with np.errstate(over="ignore"):
            arr = np.minimum(np.exp(arr), 1.0)
    return float(arr) if arr.ndim == 0 else arr


def log_bound_ue(family: Family | str, K: int, T, H3: float, sigma2: float | None = None):
    """Natural log of the uniform-exploration error bound."""
    kind, s2 = _family_kind(family, sigma2)
    T = np.asarray(T, dtype=float)
    if kind == "bounded":
        out = math.log(K - 1) - T / (2.0 * H3)
    else:
        with np.errstate(divide="ignore"):
            out = (
                math.log(K - 1)
                + 0.5 * (np.log(H3 * s2) - np.log(math.pi * T))
                - T / (4.0 * H3 * s2)
            )
    return float(out) if np.ndim(out) == 0 else out


def bound_ue(family, K, T, H3, sigma2=None):
    return _finish(log_bound_ue(family, K, T, H3, sigma2), clip=True)


def log_bound_sr(family: Family | str, K: int, T, H2: float, sigma2: float | None = None):
    """Natural log of the successive-rejects bound; needs T > K."""
    kind, s2 = _family_kind(family, sigma2)
    T = np.asarray(T, dtype=float)
    if np.any(T <= K):
        raise BudgetTooSmall(f"SR bound needs T > K={K}")
    lead = math.log(K * (K - 1) / 2.0)
    lnK = math.log(K)
    if kind == "bounded":
        out = lead - (T - K) / (lnK * H2)
    else:
        out = (
            lead
            + 0.5 * (np.log(H2 * s2 * lnK) - np.log(2.0 * math.pi * (T - K)))
            - (T - K) / (2.0 * H2 * s2 * lnK)
        )
    return float(out) if np.ndim(out) == 0 else out


def bound_sr(family, K, T, H2, sigma2=None):
    return _finish(log_bound_sr(family, K, T, H2, sigma2), clip=True)


def log_bound_sh(family: Family | str, K: int, T, H2: float, sigma2: float | None = None):
    """Natural log of the sequential-halving bound."""
    kind, s2 = _family_kind(family, sigma2)
    T = np.asarray(T, dtype=float)
    m = math.log2(K)
    lead = math.log(3.0 * m)
    if kind == "bounded":
        out = lead - T / (8.0 * H2 * m)
    else:
        with np.errstate(divide="ignore"):
            out = (
                lead
                + 0.5 * (np.log(2.0 * H2 * s2 * m) - np.log(math.pi * T))
                - T / (8.0 * H2 * s2 * m)
            )
    return float(out) if np.ndim(out) == 0 else out


def bound_sh(family, K, T, H2, sigma2=None):
    return _finish(log_bound_sh(family, K, T, H2, sigma2), clip=True)


def log_bound_re(
    family: Family | str,
    K: int,
    T,
    H4: float,
    eta: float | None,
    sigma2: float | None = None,
):
    """Natural log of the combinatorial (grouped) exploration bound.

    K must be a power of two (pass the padded count for padded instances).
    """
    if K < 2 or K & (K - 1):
        raise InvalidK(f"RE bound needs a power-of-two K, got {K}")
    if eta is None or not 0.0 < eta <= 1.0:
        raise SeparabilityViolated(f"RE bound needs eta in (0,1], got {eta}")
    kind, s2 = _family_kind(family, sigma2)
    T = np.asarray(T, dtype=float)
    m = math.log2(K)
    if kind == "bounded":
        scale = 8.0 * H4 * K * m * (0.5 + 1.0 / (6.0 * math.sqrt(H4)))
        out = math.log(m) - eta * T / scale
    else:
        with np.errstate(divide="ignore"):
            out = (
                0.5 * (np.log(4.0 * H4 * s2 * K * m**3) - np.log(math.pi * eta * T))
                - eta * T / (16.0 * H4 * s2 * K * m)
            )
    return float(out) if np.ndim(out) == 0 else out


def bound_re(family, K, T, H4, eta, sigma2=None):
    return _finish(log_bound_re(family, K, T, H4, eta, sigma2), clip=True)


def bound_exploration_failure(K: int, m: int, eps: float, sigma2: float):
    """Initial-exploration failure probability 2K Q(eps sqrt(m)/sigma)."""
    if m < 1:
        raise BudgetTooSmall(f"need m >= 1 exploration pulls, got {m}")
    if eps <= 0:
        raise InvalidK(f"need eps > 0, got {eps}")
    val = 2.0 * K * q_function(eps * math.sqrt(m) / math.sqrt(sigma2))
    return min(1.0, float(val))
