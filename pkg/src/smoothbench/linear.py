"""Ridge regression baseline on standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Standardizer
from .numkit import ridge_solve


@dataclass
class RidgeModel:
    standardizer: Standardizer
    weights: np.ndarray
    intercept: float
    alpha: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.standardizer.apply(X) @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "standardizer": self.standardizer.to_dict(),
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeModel":
        return cls(
            standardizer=Standardizer.from_dict(d["standardizer"]),
            weights=np.asarray(d["weights"], dtype=np.float64),
            intercept=float(d["intercept"]),
            alpha=float(d["alpha"]),
        )


def fit_ridge(X: np.ndarray, y: np.ndarray, alpha: float) -> RidgeModel:
    """Standardize features, then solve ridge with an unpenalised intercept."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    std = Standardizer().fit(X)
    weights, intercept = ridge_solve(std.apply(X), y, alpha, fit_intercept=True)
    return RidgeModel(standardizer=std, weights=weights,
                      intercept=float(intercept), alpha=float(alpha))
