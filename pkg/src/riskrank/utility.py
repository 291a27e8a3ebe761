"""Risk indicator, adaptive set utility and the expected-utility objective.

The exponential risk indicator g(x) = (1 - exp(-a*x)) / a (identity at a = 0)
is concave for a > 0 (risk-averse), linear at a = 0 (risk-neutral) and convex
for a < 0 (risk-seeking).  The utility of an unobserved choice S for a user
with observed (item, payoff) pairs is

    Z(S) = sum_{(kappa, v)} v * g(mass(kappa, S)) + mu_term(S)

where mass(kappa, S) is kappa's total similarity to S and the mu term adds
cross-user item means.  The objective of an ordered choice combines the
ranked lottery with the utilities of the choice's prefixes:

    F(S) = sum_i p_i * Z(first i items of S).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .preference import SimilarityFn, lottery_from_masses, set_masses

MU_MODES = ("choice-items", "observed-items", "none")


@dataclass(frozen=True)
class RiskConfig:
    """Risk parameter, mu handling and similarity choice; fixes Z and F."""

    a: float
    mu_mode: str = "choice-items"
    f: SimilarityFn = field(default_factory=SimilarityFn)

    def __post_init__(self):
        if not np.isfinite(self.a):
            raise ValueError("risk parameter a must be finite")
        if self.mu_mode not in MU_MODES:
            raise ValueError(f"unknown mu_mode {self.mu_mode!r}")


@dataclass(eq=False)
class ObservedProfile:
    """A user's observed items and their payoffs (ordinal ratings)."""

    items: np.ndarray
    payoffs: np.ndarray

    def __post_init__(self):
        self.items = np.asarray(self.items, dtype=np.int64)
        self.payoffs = np.asarray(self.payoffs, dtype=np.float64)
        if self.items.shape != self.payoffs.shape:
            raise ValueError("items and payoffs must have matching length")
        if len(set(self.items.tolist())) != self.items.size:
            raise ValueError("observed items must be distinct")
        if self.items.size and not ((self.payoffs >= 0) & (self.payoffs <= 5)).all():
            raise ValueError("payoffs must lie in 0..5")

    @classmethod
    def for_user(cls, dataset, triple_indices, user: int) -> "ObservedProfile":
        """Profile of one user restricted to the given triple indices."""
        idx = np.asarray(triple_indices, dtype=np.int64)
        mask = dataset.users[idx] == user
        sel = idx[mask]
        return cls(items=dataset.items[sel], payoffs=dataset.ratings[sel])


def risk_g(x, a: float):
    """Exponential risk indicator; identity when a = 0."""
    x = np.asarray(x, dtype=np.float64)
    if a == 0.0:
        out = x
    else:
        out = -np.expm1(-a * x) / a
    return float(out) if out.ndim == 0 else out


def mu_term(choice, profile: ObservedProfile, cfg: RiskConfig, mu: np.ndarray) -> float:
    if cfg.mu_mode == "choice-items":
        idx = np.asarray(list(choice), dtype=np.int64)
        return float(mu[idx].sum()) if idx.size else 0.0
    if cfg.mu_mode == "observed-items":
        return float(mu[profile.items].sum())
    return 0.0


def utility_Z(
    profile: ObservedProfile,
    choice,
    model,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> float:
    """Adaptive utility of an unobserved item set for one user."""
    items = np.asarray(list(choice), dtype=np.int64)
    if items.size and np.isin(items, profile.items).any():
        raise ValueError("choice must be disjoint from the observed items")
    base = 0.0
    if profile.items.size:
        masses = set_masses(profile.items, items, model, cfg.f)
        base = float(profile.payoffs @ risk_g(masses, cfg.a))
    return base + mu_term(items, profile, cfg, mu)


def objective_F(
    choice,
    profile: ObservedProfile,
    model,
    cfg: RiskConfig,
    mu: np.ndarray,
    k: int | None = None,
) -> float:
    """Expected utility of an ordered choice under its ranked lottery.

    The lottery is built against the profile's observed items; ``k`` is the
    target choice size passed through to the position weights.
    """
    items = np.asarray(list(choice), dtype=np.int64)
    if items.size == 0:
        raise ValueError("objective needs a non-empty choice")
    masses = set_masses(items, profile.items, model, cfg.f)
    p = lottery_from_masses(masses, k)
    total = 0.0
    for i in range(items.size):
        total += p[i] * utility_Z(profile, items[: i + 1], model, cfg, mu)
    return float(total)
