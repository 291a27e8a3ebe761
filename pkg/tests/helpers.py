"""Shared seeded fixtures for unit and acceptance tests."""

from collections import namedtuple

import numpy as np

from riskrank import FactorModel, ObservedProfile, RiskConfig, SimilarityFn

Instance = namedtuple(
    "Instance", "model profile candidates mu num_items d seed"
)

BASE_SEED = 90210


def random_instance(seed, n_candidates=8, n_observed=6, d=4):
    """Small seeded instance: candidates 0..n_candidates-1, observed after."""
    rng = np.random.default_rng(seed)
    total = n_candidates + n_observed
    V = rng.uniform(0.05, 1.0, size=(total, d))
    U = rng.uniform(0.05, 1.0, size=(4, d))
    model = FactorModel(
        U=U, V=V, d=d, lam=0.0, seed=seed, iterations=0,
        objective_trace=np.asarray([0.0]),
    )
    observed = np.arange(n_candidates, total)
    payoffs = rng.integers(1, 6, size=n_observed)
    profile = ObservedProfile(items=observed, payoffs=payoffs)
    mu = rng.uniform(1.0, 5.0, size=total)
    candidates = np.arange(n_candidates)
    return Instance(model, profile, candidates, mu, total, d, seed)


def risk_config(a, mu_mode="choice-items", similarity=None):
    return RiskConfig(a=a, mu_mode=mu_mode, f=similarity or SimilarityFn())


def instance_suite(count=100, **kwargs):
    return [random_instance(BASE_SEED + i, **kwargs) for i in range(count)]
