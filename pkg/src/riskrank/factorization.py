"""Non-negative latent features from observed ratings.

Weighted regularized NMF: minimize the squared error over observed entries
plus a Frobenius penalty on both factors, with both factors constrained
non-negative.  Solved by masked multiplicative updates (observed entries
weight 1, unobserved 0), which keep the factors non-negative and the
objective non-increasing.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(eq=False)
class FactorModel:
    """Trained user/item feature matrices, U: (m, d), V: (n, d)."""

    U: np.ndarray
    V: np.ndarray
    d: int
    lam: float
    seed: int
    iterations: int
    objective_trace: np.ndarray

    def predict(self, user: int, item: int) -> float:
        return float(self.U[user] @ self.V[item])

    def predict_items(self, user: int, items: np.ndarray) -> np.ndarray:
        return self.V[items] @ self.U[user]


def _objective(ratings, pred, U, V, lam):
    resid = ratings - pred
    return float(resid @ resid + lam * ((U * U).sum() + (V * V).sum()))


def train_wnmf(
    users: np.ndarray,
    items: np.ndarray,
    ratings: np.ndarray,
    num_users: int,
    num_items: int,
    d: int = 20,
    lam: float = 0.1,
    max_iter: int = 200,
    tol: float = 1e-4,
    seed: int = 0,
    verbose: bool = False,
) -> FactorModel:
    """Fit a weighted regularized NMF to observed rating triples.

    Args:
        users, items, ratings: parallel arrays of observed triples.
        num_users, num_items: matrix dimensions m and n.
        d: latent rank.
        lam: Frobenius regularization weight (>= 0).
        max_iter: maximum number of update sweeps.
        tol: stop when the relative objective decrease falls below this.
        seed: rng seed for the uniform initialization.
        verbose: log the objective every 25 iterations.

    Returns:
        FactorModel with non-negative factors and the per-iteration
        objective trace (initial value first).
    """
    if len(ratings) == 0:
        raise ValueError("empty training set")
    if d < 1:
        raise ValueError("latent rank d must be >= 1")
    if d > min(num_users, num_items):
        log.warning("d=%d exceeds min(m, n)=%d", d, min(num_users, num_items))

    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    vals = np.asarray(ratings, dtype=np.float64)

    rng = np.random.default_rng(seed)
    scale = np.sqrt(vals.mean() / d)  # initial predictions on rating scale
    U = rng.uniform(0.0, scale, size=(num_users, d))
    V = rng.uniform(0.0, scale, size=(num_items, d))

    R = sp.csr_matrix((vals, (users, items)), shape=(num_users, num_items))
    Rt = R.T.tocsr()
    RV = R @ V  # recomputed after each V update

    # fixed sparsity structure: build the csr index layout once and only
    # swap prediction values in afterwards
    nnz = vals.size
    tmpl = sp.csr_matrix((np.arange(nnz), (users, items)), shape=(num_users, num_items))
    if tmpl.nnz != nnz:
        raise ValueError("duplicate (user, item) pairs in training triples")
    order_ui = tmpl.data.astype(np.int64)
    ui_indices, ui_indptr = tmpl.indices, tmpl.indptr
    tmpl_t = sp.csr_matrix((np.arange(nnz), (items, users)), shape=(num_items, num_users))
    order_iu = tmpl_t.data.astype(np.int64)
    iu_indices, iu_indptr = tmpl_t.indices, tmpl_t.indptr

    if num_users * num_items <= 25_000_000:
        def predictions():
            return (U @ V.T)[users, items]
    else:
        def predictions():
            return (U.take(users, axis=0) * V.take(items, axis=0)).sum(axis=1)

    trace = [_objective(vals, predictions(), U, V, lam)]
    iterations = 0
    for it in range(max_iter):
        pred = predictions()
        P = sp.csr_matrix(
            (pred[order_ui], ui_indices, ui_indptr), shape=(num_users, num_items)
        )
        U *= RV / (P @ V + lam * U + _EPS)

        pred = predictions()
        Pt = sp.csr_matrix(
            (pred[order_iu], iu_indices, iu_indptr), shape=(num_items, num_users)
        )
        V *= Rt @ U / (Pt @ U + lam * V + _EPS)
        RV = R @ V

        obj = _objective(vals, predictions(), U, V, lam)
        trace.append(obj)
        iterations = it + 1
        if verbose and iterations % 25 == 0:
            log.info("wnmf iter %d objective %.6g", iterations, obj)
        prev = trace[-2]
        if prev > 0 and (prev - obj) / prev < tol:
            break

    return FactorModel(
        U=U,
        V=V,
        d=d,
        lam=lam,
        seed=seed,
        iterations=iterations,
        objective_trace=np.asarray(trace),
    )


def item_means(items: np.ndarray, ratings: np.ndarray, num_items: int) -> np.ndarray:
    """Per-item mean of observed ratings; 0 for items with no observations."""
    items = np.asarray(items, dtype=np.int64)
    vals = np.asarray(ratings, dtype=np.float64)
    sums = np.bincount(items, weights=vals, minlength=num_items)
    counts = np.bincount(items, minlength=num_items)
    return np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)


def save_model(model: FactorModel, out_dir) -> None:
    """Write U.csv, V.csv and a meta.json record."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.savetxt(out_dir / "U.csv", model.U, delimiter=",", fmt="%.17g")
    np.savetxt(out_dir / "V.csv", model.V, delimiter=",", fmt="%.17g")
    meta = {
        "d": model.d,
        "lambda": model.lam,
        "seed": model.seed,
        "iterations": model.iterations,
        "final_objective": float(model.objective_trace[-1]),
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_model(model_dir) -> FactorModel:
    model_dir = Path(model_dir)
    U = np.loadtxt(model_dir / "U.csv", delimiter=",", ndmin=2)
    V = np.loadtxt(model_dir / "V.csv", delimiter=",", ndmin=2)
    meta = json.loads((model_dir / "meta.json").read_text())
    return FactorModel(
        U=U,
        V=V,
        d=int(meta["d"]),
        lam=float(meta["lambda"]),
        seed=int(meta["seed"]),
        iterations=int(meta["iterations"]),
        objective_trace=np.asarray([float(meta["final_objective"])]),
    )
