"""Chebyshev model tree: CART routing with a Chebyshev polynomial per leaf.

Each leaf that holds enough rows gets its own interaction-free Chebyshev
regressor (with its own per-leaf feature scaler); undersized leaves fall back
to their training mean. Final predictions are clipped to the whole training
target's mean +/- 3 standard deviations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from .cart import Count, RegressionTree, cart_fit, cart_route
from .chebypoly import ChebyPolyModel, fit_chebypoly


def leaf_fallback_threshold(complexity: int) -> int:
    """Minimum leaf size that still gets a polynomial: max(2*(c+1), 10)."""
    return max(2 * (complexity + 1), 10)


@dataclass
class ChebyTreeModel:
    tree: RegressionTree
    leaf_models: Dict[int, Union[ChebyPolyModel, float]]
    complexity: int
    alpha: float
    y_mean: float
    y_std: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        leaves = cart_route(self.tree, X)
        out = np.empty(X.shape[0])
        for leaf in np.unique(leaves):
            rows = np.flatnonzero(leaves == leaf)
            model = self.leaf_models[int(leaf)]
            if isinstance(model, float):
                out[rows] = model
            else:
                out[rows] = model.predict(X[rows])
        lo = self.y_mean - 3.0 * self.y_std
        hi = self.y_mean + 3.0 * self.y_std
        return np.clip(out, lo, hi)

    def to_dict(self) -> dict:
        leaves = {}
        for leaf, model in self.leaf_models.items():
            if isinstance(model, float):
                leaves[str(leaf)] = {"kind": "constant", "value": model}
            else:
                leaves[str(leaf)] = {"kind": "chebypoly", "model": model.to_dict()}
        return {
            "tree": self.tree.to_dict(),
            "leaf_models": leaves,
            "complexity": self.complexity,
            "alpha": self.alpha,
            "y_mean": self.y_mean,
            "y_std": self.y_std,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChebyTreeModel":
        leaf_models: Dict[int, Union[ChebyPolyModel, float]] = {}
        for key, entry in d["leaf_models"].items():
            if entry["kind"] == "constant":
                leaf_models[int(key)] = float(entry["value"])
            else:
                leaf_models[int(key)] = ChebyPolyModel.from_dict(entry["model"])
        return cls(
            tree=RegressionTree.from_dict(d["tree"]),
            leaf_models=leaf_models,
            complexity=int(d["complexity"]),
            alpha=float(d["alpha"]),
            y_mean=float(d["y_mean"]),
            y_std=float(d["y_std"]),
        )


def fit_chebytree(
    X: np.ndarray,
    y: np.ndarray,
    complexity: int,
    alpha: float,
    max_depth: int,
    min_samples_leaf: Count = 1,
) -> ChebyTreeModel:
    """Grow the routing tree on raw features, then fit one polynomial per leaf.

    The polynomial-vs-constant choice per leaf is made once at training time
    from the leaf's row count.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    tree = cart_fit(X, y, max_depth=max_depth, min_samples_leaf=min_samples_leaf,
                    min_samples_split=2)
    threshold = leaf_fallback_threshold(complexity)
    leaf_models: Dict[int, Union[ChebyPolyModel, float]] = {}
    for leaf in tree.leaf_ids:
        rows = tree.leaf_rows[leaf]
        if rows.shape[0] >= threshold:
            leaf_models[leaf] = fit_chebypoly(
                X[rows], y[rows], complexity=complexity, alpha=alpha,
                include_interactions=False,
            )
        else:
            leaf_models[leaf] = float(y[rows].mean())
    return ChebyTreeModel(
        tree=tree,
        leaf_models=leaf_models,
        complexity=int(complexity),
        alpha=float(alpha),
        y_mean=float(y.mean()),
        y_std=float(y.std()),
    )
