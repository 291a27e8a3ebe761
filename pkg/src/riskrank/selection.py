"""Top-k selection strategies.

``greedy_select`` grows an ordered choice by appending, at each step, the
candidate that maximizes the expected-utility objective of the extended
prefix.  ``greedy_select_Z`` greedily maximizes the set utility alone,
ignoring rank probabilities.  ``pointwise_topk`` ranks candidates by the
factor-model prediction.  Brute-force maximizers over ordered sequences and
plain sets serve as oracles on small instances.

All strategies break ties by the smallest item index and are deterministic.
"""

from __future__ import annotations

import logging
from itertools import combinations, permutations

import numpy as np

from .factorization import FactorModel
from .preference import position_weights, similarity_matrix
from .utility import ObservedProfile, RiskConfig, objective_F, utility_Z

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_CANDIDATES = 12
BRUTE_FORCE_MAX_K = 3


def _candidate_array(candidates, profile: ObservedProfile) -> np.ndarray:
    cand = np.unique(np.asarray(list(candidates), dtype=np.int64))
    if cand.size and np.isin(cand, profile.items).any():
        raise ValueError("candidates must be disjoint from the observed items")
    return cand


class _GreedyState:
    """Per-user scoring state shared by the greedy strategies.

    Precomputes the observed-item x candidate similarity matrix once; each
    step then scores every remaining candidate with O(|E| * |candidates|)
    vector work.
    """

    def __init__(self, candidates: np.ndarray, profile, model, cfg, mu):
        self.cand = candidates
        self.profile = profile
        self.cfg = cfg
        self.a = cfg.a
        # sim_e[j, c]: similarity of observed item j to candidate c
        self.sim_e = similarity_matrix(cfg.f, model.V[profile.items], model.V[candidates])
        self.w_obs = self.sim_e.sum(axis=0)  # candidate mass against observed set
        self.mu_cand = mu[candidates]
        self.mu_const = (
            float(mu[profile.items].sum()) if cfg.mu_mode == "observed-items" else 0.0
        )
        self.active = np.ones(candidates.size, dtype=bool)
        self.s_kappa = np.zeros(profile.items.size)  # masses s(kappa, S)
        self.sel_positions: list[int] = []
        self.z_prefix: list[float] = []
        self.w_sel: list[float] = []
        self.mu_sum = 0.0

    def _g(self, x):
        if self.a == 0.0:
            return x
        return -np.expm1(-self.a * x) / self.a

    def z_with_candidate(self) -> np.ndarray:
        """Z of the current prefix extended by each candidate."""
        masses = self.s_kappa[:, None] + self.sim_e
        base = self.profile.payoffs @ self._g(masses)
        if self.cfg.mu_mode == "choice-items":
            return base + self.mu_sum + self.mu_cand
        return base + self.mu_const

    def objective_with_candidate(self, z_last: np.ndarray) -> np.ndarray:
        """F of the current prefix extended by each candidate."""
        t = len(self.sel_positions) + 1
        C = position_weights(t)
        prefix_mass = C[: t - 1] * np.asarray(self.w_sel)
        z_vals = np.asarray(self.z_prefix)
        num_base = float(prefix_mass @ z_vals) if t > 1 else 0.0
        den_base = float(prefix_mass.sum()) if t > 1 else 0.0
        m_last = C[t - 1] * self.w_obs
        denom = den_base + m_last
        fallback = (float(z_vals.sum()) + z_last) / t  # all-zero mass: uniform lottery
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = (num_base + m_last * z_last) / denom
        return np.where(denom > 0, scores, fallback)

    def take(self, pos: int, z_value: float) -> None:
        self.sel_positions.append(pos)
        self.active[pos] = False
        self.s_kappa = self.s_kappa + self.sim_e[:, pos]
        self.z_prefix.append(z_value)
        self.w_sel.append(float(self.w_obs[pos]))
        self.mu_sum += float(self.mu_cand[pos])

    def chosen_items(self) -> list[int]:
        return [int(self.cand[p]) for p in self.sel_positions]


def _greedy(k, candidates, profile, model, cfg, mu, use_objective: bool):
    cand = _candidate_array(candidates, profile)
    if cand.size == 0:
        log.warning("greedy selection called with an empty candidate set")
        return [], []
    state = _GreedyState(cand, profile, model, cfg, mu)
    steps = min(k, cand.size)
    winning: list[float] = []
    for _ in range(steps):
        z_last = state.z_with_candidate()
        scores = state.objective_with_candidate(z_last) if use_objective else z_last
        scores = np.where(state.active, scores, -np.inf)
        pos = int(np.argmax(scores))  # first maximum: smallest item index wins ties
        winning.append(float(scores[pos]))
        state.take(pos, float(z_last[pos]))
    return state.chosen_items(), winning


def greedy_select(
    k: int,
    candidates,
    profile: ObservedProfile,
    model: FactorModel,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> list[int]:
    """Greedy expected-utility selection of an ordered top-k choice."""
    return _greedy(k, candidates, profile, model, cfg, mu, use_objective=True)[0]


def greedy_select_scored(
    k: int,
    candidates,
    profile: ObservedProfile,
    model: FactorModel,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> tuple[list[int], list[float]]:
    """Like :func:`greedy_select`, also returning each step's winning score."""
    return _greedy(k, candidates, profile, model, cfg, mu, use_objective=True)


def greedy_select_Z(
    k: int,
    candidates,
    profile: ObservedProfile,
    model: FactorModel,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> list[int]:
    """Greedy set-utility selection, ignoring rank probabilities."""
    return _greedy(k, candidates, profile, model, cfg, mu, use_objective=False)[0]


def brute_force_select(
    k: int,
    candidates,
    profile: ObservedProfile,
    model: FactorModel,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> tuple[list[int], float]:
    """Exact maximizer of the objective over all ordered k-sequences.

    Guarded to small instances; ties resolve to the lexicographically
    smallest sequence.
    """
    cand = _candidate_array(candidates, profile)
    if cand.size > BRUTE_FORCE_MAX_CANDIDATES or k > BRUTE_FORCE_MAX_K:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidates "
            f"and k <= {BRUTE_FORCE_MAX_K}"
        )
    size = min(k, cand.size)
    best_seq: list[int] | None = None
    best_value = -np.inf
    for seq in permutations(cand.tolist(), size):
        value = objective_F(seq, profile, model, cfg, mu)
        if value > best_value:
            best_value = value
            best_seq = list(seq)
    assert best_seq is not None
    return best_seq, float(best_value)


def brute_force_best_set(
    k: int,
    candidates,
    profile: ObservedProfile,
    model: FactorModel,
    cfg: RiskConfig,
    mu: np.ndarray,
) -> tuple[list[int], float]:
    """Exact maximizer of the set utility over all k-subsets."""
    cand = _candidate_array(candidates, profile)
    if cand.size > BRUTE_FORCE_MAX_CANDIDATES:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidates")
    size = min(k, cand.size)
    best_set: list[int] | None = None
    best_value = -np.inf
    for subset in combinations(cand.tolist(), size):
        value = utility_Z(profile, subset, model, cfg, mu)
        if value > best_value:
            best_value = value
            best_set = list(subset)
    assert best_set is not None
    return best_set, float(best_value)


def pointwise_topk(k: int, candidates, model: FactorModel, user: int) -> list[int]:
    """Top-k candidates by predicted rating, ties by smallest item index."""
    return pointwise_topk_scored(k, candidates, model, user)[0]


def pointwise_topk_scored(
    k: int, candidates, model: FactorModel, user: int
) -> tuple[list[int], list[float]]:
    cand = np.unique(np.asarray(list(candidates), dtype=np.int64))
    if cand.size == 0:
        return [], []
    scores = model.predict_items(user, cand)
    order = np.argsort(-scores, kind="stable")[: min(k, cand.size)]
    return cand[order].tolist(), [float(s) for s in scores[order]]
