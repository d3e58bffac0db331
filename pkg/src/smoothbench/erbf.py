"""Anisotropic Gaussian RBF network trained by a three-stage pipeline.

f(x) = sum_k w_k exp(-1/2 sum_j (x_j - c_kj)^2 / sigma_kj^2) + b, with one
width per (unit, feature) so each bump can stretch independently per axis.

Stage 1 places centres on training points (sampled proportionally to a local
Lipschitz estimate of the target, or by k-means). Stage 2 initialises widths
from local neighbourhood statistics. Stage 3 refines log-widths by L-BFGS
against training MSE with the output layer held fixed; the output layer is
then re-solved by ridge on the final activations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .data import Standardizer
from .numkit import OptimResult, kmeans, knn_indices, lbfgs_minimize, ridge_solve

WIDTH_FLOOR = 1e-6
WIDTH_CAP = 1e3

CENTER_MODES = ("lipschitz", "kmeans")
WIDTH_MODES = ("local_ridge", "local_variance")


@dataclass(frozen=True)
class ErbfConfig:
    n_rbf: Union[int, str] = "auto"
    alpha: float = 1.0
    center_init: str = "lipschitz"
    width_init: str = "local_ridge"
    width_optim_iters: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.center_init not in CENTER_MODES:
            raise ValueError(f"center_init must be one of {CENTER_MODES}")
        if self.width_init not in WIDTH_MODES:
            raise ValueError(f"width_init must be one of {WIDTH_MODES}")
        if self.n_rbf != "auto" and (not isinstance(self.n_rbf, (int, np.integer)) or self.n_rbf < 1):
            raise ValueError("n_rbf must be 'auto' or a positive integer")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.width_optim_iters < 0:
            raise ValueError("width_optim_iters must be >= 0")


def auto_k(n: int, d: int) -> int:
    """Default RBF unit count: clip(max(40, 2d), 20, min(200, n // 10)).

    The upper bound wins if the bounds cross on small n.
    """
    if n < 10:
        raise ValueError("auto_k needs n >= 10")
    v = max(40, 2 * d)
    lo, hi = 20, min(200, n // 10)
    return min(max(v, lo), hi)


def local_lipschitz(
    X: np.ndarray,
    y: np.ndarray,
    k: int = 5,
    eps: float = 1e-12,
    clip_percentile: float = 99.0,
) -> np.ndarray:
    """Per-point local Lipschitz estimate of the target.

    L_i = max over the k nearest neighbours of |y_i - y_j| / (||x_i - x_j|| + eps),
    then capped at the given percentile to tame outliers.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows")
    kk = min(k, n - 1)
    L = np.empty(n)
    sq_norms = (X * X).sum(axis=1)
    chunk = max(1, int(2_000_000 // max(1, n)))
    for start in range(0, n, chunk):
        rows = slice(start, min(start + chunk, n))
        d2 = sq_norms[rows, None] + sq_norms[None, :] - 2.0 * (X[rows] @ X.T)
        np.maximum(d2, 0.0, out=d2)
        for i in range(d2.shape[0]):
            gi = start + i
            d2[i, gi] = np.inf
            nb = np.argpartition(d2[i], kk - 1)[:kk]
            dists = np.sqrt(d2[i, nb])
            L[gi] = np.max(np.abs(y[gi] - y[nb]) / (dists + eps))
    cap = np.percentile(L, clip_percentile)
    return np.minimum(L, cap)


def place_centers(
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    mode: str,
    seed: int,
) -> np.ndarray:
    """Stage 1: choose k centres in (standardized) feature space.

    lipschitz mode samples k distinct training rows without replacement with
    probability proportional to the local Lipschitz estimate (uniform when the
    estimates are all zero). kmeans mode returns k-means centroids.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if mode == "kmeans":
        centers, _ = kmeans(X, k, seed=seed)
        return centers
    if mode != "lipschitz":
        raise ValueError(f"unknown center mode {mode!r}")
    weights = local_lipschitz(X, y)
    if np.count_nonzero(weights) < k:
        # not enough positive mass to draw k distinct rows: mix in a uniform floor
        floor = weights.max() * 1e-12 if weights.max() > 0 else 1.0
        weights = weights + floor
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=k, replace=False, p=weights / weights.sum())
    return X[idx].copy()


def init_widths(
    X: np.ndarray,
    y: np.ndarray,
    centers: np.ndarray,
    mode: str,
) -> np.ndarray:
    """Stage 2: per-centre, per-feature width initialisation.

    Each centre looks at its k = max(10, min(100, n // K)) nearest training
    points. local_ridge sets sigma_kj = 1.5 sqrt(d) * sqrt(Var_local(x_j) / |beta_j|)
    with beta from a lightly regularised local linear fit (|beta| floored at
    1e-8); local_variance sets sigma_kj = std_local(x_j) * sqrt(d). Outputs are
    clamped to [1e-6, 1e3] so every width is strictly positive and finite.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    K = centers.shape[0]
    if mode not in WIDTH_MODES:
        raise ValueError(f"unknown width mode {mode!r}")
    k_nn = min(n, max(10, min(100, n // K)))
    sigma = np.empty((K, d))
    tau = 1.5 * math.sqrt(d)
    for ki in range(K):
        nb = knn_indices(X, centers[ki], k_nn)
        Xnb = X[nb]
        var = Xnb.var(axis=0)
        if mode == "local_ridge":
            beta, _ = ridge_solve(Xnb, y[nb], alpha=1e-3, fit_intercept=True)
            beta = np.maximum(np.abs(beta), 1e-8)
            sigma[ki] = tau * np.sqrt(var / beta)
        else:
            sigma[ki] = np.sqrt(var) * math.sqrt(d)
    return np.clip(sigma, WIDTH_FLOOR, WIDTH_CAP)


def erbf_activations(X: np.ndarray, centers: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Activation matrix Phi with Phi[i, k] = exp(-1/2 sum_j ((x_ij-c_kj)/sigma_kj)^2)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    K, d = sigma.shape
    Phi = np.empty((n, K))
    # widths at the edge of float range are legal during line-search probing;
    # the resulting inf/underflow arithmetic is well defined, so keep it quiet
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        for start, stop in _chunks(n, K * d):
            Z = (X[start:stop, None, :] - centers[None, :, :]) / sigma[None, :, :]
            Phi[start:stop] = np.exp(-0.5 * (Z * Z).sum(axis=2))
    return Phi


def erbf_loss_and_grad(
    theta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    centers: np.ndarray,
    weights: np.ndarray,
    bias: float,
) -> Tuple[float, np.ndarray]:
    """Training MSE and its exact gradient in log-width coordinates.

    theta is log(sigma) flattened to length K*d; centres, output weights and
    bias are held fixed. d mse / d theta_kj =
    (2/n) sum_i r_i w_k Phi_ik (x_ij - c_kj)^2 / sigma_kj^2.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    K, d = centers.shape
    n = X.shape[0]
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        sigma = np.exp(np.asarray(theta, dtype=np.float64).reshape(K, d))
        Phi = erbf_activations(X, centers, sigma)
        r = Phi @ weights + bias - y
        mse = float(r @ r) / n
        G = np.zeros((K, d))
        for start, stop in _chunks(n, K * d):
            D = X[start:stop, None, :] - centers[None, :, :]
            Z2 = (D / sigma[None, :, :]) ** 2
            np.minimum(Z2, 1e30, out=Z2)  # keep 0 * inf out of the contraction
            A = r[start:stop, None] * Phi[start:stop]
            G += np.einsum("ik,ikj->kj", A, Z2)
        G *= (2.0 / n) * weights[:, None]
    grad = G.ravel()
    if not math.isfinite(mse):
        raise ValueError("non-finite training loss in width optimisation")
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise ValueError(f"non-finite width gradient at parameter index {int(bad[0])}")
    return mse, grad


def _chunks(n: int, cols: int, budget: int = 4_000_000):
    """Row slices keeping chunk_rows * cols temporaries near the element budget."""
    step = max(1, budget // max(1, cols))
    for start in range(0, n, step):
        yield start, min(start + step, n)


@dataclass
class ErbfModel:
    config: ErbfConfig
    standardizer: Standardizer
    centers: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    bias: float
    y_mean: float
    y_std: float
    fit_info: dict = field(default_factory=dict)

    @property
    def n_rbf(self) -> int:
        return self.centers.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        Xs = self.standardizer.apply(X)
        Phi = erbf_activations(Xs, self.centers, self.sigma)
        return Phi @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "config": {
                "n_rbf": self.config.n_rbf,
                "alpha": self.config.alpha,
                "center_init": self.config.center_init,
                "width_init": self.config.width_init,
                "width_optim_iters": self.config.width_optim_iters,
                "seed": self.config.seed,
            },
            "standardizer": self.standardizer.to_dict(),
            "centers": self.centers.tolist(),
            "sigma": self.sigma.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "fit_info": self.fit_info,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErbfModel":
        cfg = d["config"]
        n_rbf = cfg["n_rbf"]
        return cls(
            config=ErbfConfig(
                n_rbf=n_rbf if n_rbf == "auto" else int(n_rbf),
                alpha=float(cfg["alpha"]),
                center_init=cfg["center_init"],
                width_init=cfg["width_init"],
                width_optim_iters=int(cfg["width_optim_iters"]),
                seed=int(cfg["seed"]),
            ),
            standardizer=Standardizer.from_dict(d["standardizer"]),
            centers=np.asarray(d["centers"], dtype=np.float64),
            sigma=np.asarray(d["sigma"], dtype=np.float64),
            weights=np.asarray(d["weights"], dtype=np.float64),
            bias=float(d["bias"]),
            y_mean=float(d["y_mean"]),
            y_std=float(d["y_std"]),
            fit_info=dict(d.get("fit_info", {})),
        )


def fit_erbf(X: np.ndarray, y: np.ndarray, config: Optional[ErbfConfig] = None) -> ErbfModel:
    """Run the three-stage pipeline and return the fitted network."""
    if config is None:
        config = ErbfConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, d) and y (n,) with matching n")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("fit_erbf requires finite inputs; impute first")
    n, d = X.shape
    K = auto_k(n, d) if config.n_rbf == "auto" else int(config.n_rbf)
    if K > n:
        raise ValueError(f"n_rbf={K} exceeds the number of training rows n={n}")

    std = Standardizer().fit(X)
    Xs = std.apply(X)

    centers = place_centers(Xs, y, K, mode=config.center_init, seed=config.seed)
    sigma0 = init_widths(Xs, y, centers, mode=config.width_init)

    Phi0 = erbf_activations(Xs, centers, sigma0)
    w0, b0 = ridge_solve(Phi0, y, config.alpha, fit_intercept=True)
    r0 = Phi0 @ w0 + b0 - y
    mse_before = float(r0 @ r0) / n

    if config.width_optim_iters > 0:
        def objective(theta):
            try:
                return erbf_loss_and_grad(theta, Xs, y, centers, w0, b0)
            except ValueError:
                # infeasible trial widths (e.g. underflowed to zero on a row
                # that coincides with a centre): let the line search back off
                return np.inf, np.zeros_like(theta)

        res: OptimResult = lbfgs_minimize(
            objective, np.log(sigma0).ravel(), max_iter=config.width_optim_iters
        )
        sigma = np.exp(res.x.reshape(K, d))
        mse_after = res.loss
        iters, converged = res.iterations, res.converged
    else:
        sigma = sigma0
        mse_after = mse_before
        iters, converged = 0, False

    Phi = erbf_activations(Xs, centers, sigma)
    weights, bias = ridge_solve(Phi, y, config.alpha, fit_intercept=True)

    return ErbfModel(
        config=config,
        standardizer=std,
        centers=centers,
        sigma=sigma,
        weights=weights,
        bias=float(bias),
        y_mean=float(y.mean()),
        y_std=float(y.std()),
        fit_info={
            "resolved_k": K,
            "stage3_mse_before": mse_before,
            "stage3_mse_after": float(mse_after),
            "stage3_iterations": int(iters),
            "stage3_converged": bool(converged),
        },
    )
