"""Shared numerical kernels: ridge solves, k-means, kNN queries, L-BFGS.

Everything here is deterministic given its seed arguments and uses plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np


# ---------------------------------------------------------------------------
# Ridge regression via Cholesky-factored normal equations


def ridge_solve(
    Phi: np.ndarray,
    y: np.ndarray,
    alpha: float,
    fit_intercept: bool = True,
) -> Tuple[np.ndarray, float]:
    """Solve min_w ||Phi w - y||^2 + alpha ||w||^2, intercept unpenalised.

    Factors (Phi^T Phi + alpha I) by Cholesky. On a factorisation failure the
    diagonal is jittered once (alpha += 1e-10 * trace / p) and the solve is
    retried; a second failure raises. With fit_intercept the columns and target
    are centred first and the intercept recovered from the means, so it never
    feels the penalty.
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if Phi.ndim != 2 or y.ndim != 1 or Phi.shape[0] != y.shape[0]:
        raise ValueError("Phi must be (n, p) and y must be (n,) with matching n")
    if not np.isfinite(Phi).all() or not np.isfinite(y).all():
        raise ValueError("ridge_solve requires finite inputs")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")

    n, p = Phi.shape
    if fit_intercept:
        col_means = Phi.mean(axis=0)
        y_mean = float(y.mean())
        Xc = Phi - col_means
        yc = y - y_mean
    else:
        Xc, yc = Phi, y

    A = Xc.T @ Xc
    b = Xc.T @ yc
    jitter = 1e-10 * np.trace(A) / p if p else 0.0
    try:
        L = np.linalg.cholesky(A + alpha * np.eye(p))
    except np.linalg.LinAlgError:
        try:
            L = np.linalg.cholesky(A + (alpha + jitter) * np.eye(p))
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                "normal matrix is singular; a positive alpha is required here"
            )
    w = _cho_solve(L, b)
    intercept = y_mean - float(col_means @ w) if fit_intercept else 0.0
    return w, intercept


def _cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L L^T x = b given the lower Cholesky factor L."""
    p = L.shape[0]
    z = np.empty(p)
    for i in range(p):
        z[i] = (b[i] - L[i, :i] @ z[:i]) / L[i, i]
    x = np.empty(p)
    for i in range(p - 1, -1, -1):
        x[i] = (z[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


# ---------------------------------------------------------------------------
# k-means clustering


def kmeans(
    X: np.ndarray,
    n_clusters: int,
    seed: int,
    max_iter: int = 100,
) -> Tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with distance-squared-weighted (k-means++ style) seeding.

    Returns (centroids, labels). Assignment ties go to the lower centroid
    index. A cluster left empty after assignment is re-seeded to the point
    farthest from its own centroid. Deterministic for a given seed.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"need 1 <= n_clusters <= n, got {n_clusters} with n={n}")
    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(X, n_clusters, rng)
    labels = _assign(X, centers)
    for _ in range(max_iter):
        centers = _update_means(X, labels, centers)
        new_labels = _assign(X, centers)
        changed = bool((new_labels != labels).any())
        labels = new_labels
        if not changed:
            break
    return centers, labels


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)  # all remaining points coincide with a centre
        centers[j] = X[idx]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _assign(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = _sq_dists(X, centers)
    labels = d2.argmin(axis=1)
    # rescue empty clusters: move the centre onto the farthest point
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    if (counts == 0).any():
        own = d2[np.arange(X.shape[0]), labels].copy()
        for c in np.flatnonzero(counts == 0):
            far = int(own.argmax())
            centers[c] = X[far]
            labels[far] = c
            own[far] = -1.0
    return labels


def _update_means(X: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    out = centers.copy()
    for c in range(centers.shape[0]):
        members = labels == c
        if members.any():
            out[c] = X[members].mean(axis=0)
    return out


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, (len(A), len(B)), clipped at 0."""
    d2 = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.maximum(d2, 0.0)


# ---------------------------------------------------------------------------
# k-nearest-neighbour queries


def knn_indices(
    X: np.ndarray,
    query: Union[int, np.ndarray],
    k: int,
    exclude_self: bool = False,
) -> np.ndarray:
    """Indices of the k nearest rows of X to the query, nearest first.

    The query is either a row index into X or an explicit point. Distance ties
    break toward the lower row index. exclude_self only makes sense for index
    queries and removes that row from the candidates.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if isinstance(query, (int, np.integer)):
        point = X[int(query)]
    else:
        if exclude_self:
            raise ValueError("exclude_self requires an index query")
        point = np.asarray(query, dtype=np.float64)
    limit = n - 1 if exclude_self else n
    if not 1 <= k <= limit:
        raise ValueError(f"need 1 <= k <= {limit}, got k={k}")
    d2 = ((X - point) ** 2).sum(axis=1)
    if exclude_self:
        d2[int(query)] = np.inf
    order = np.argsort(d2, kind="stable")
    return order[:k]


# ---------------------------------------------------------------------------
# L-BFGS with Armijo backtracking


@dataclass
class OptimResult:
    x: np.ndarray
    loss: float
    iterations: int
    converged: bool


def lbfgs_minimize(
    fun: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    x0: np.ndarray,
    max_iter: int,
    memory: int = 10,
    grad_tol: float = 1e-8,
) -> OptimResult:
    """Limited-memory BFGS with two-loop recursion and Armijo backtracking.

    fun(x) must return (loss, gradient). Line search: initial step 1.0, halved
    until f(x + t d) <= f(x) + 1e-4 t g.d; if no admissible step exists the
    run stops. Stops otherwise at max_iter or when ||grad|| < grad_tol. Always
    returns the best iterate seen, so the reported loss never exceeds the loss
    at x0.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    f, g = _eval(fun, x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the initial point")
    best_x, best_f = x.copy(), f
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    converged = False
    it = 0
    while it < max_iter:
        if np.linalg.norm(g) < grad_tol:
            converged = True
            break
        d = -_two_loop(g, s_hist, y_hist)
        gd = float(g @ d)
        if gd >= 0.0:  # curvature info went bad: fall back to steepest descent
            d = -g
            gd = float(g @ d)
        step = 1.0
        accepted = False
        while step >= 1e-20:
            x_new = x + step * d
            f_new, g_new = _eval(fun, x_new)
            if np.isfinite(f_new) and f_new <= f + 1e-4 * step * gd:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            s_hist.append(s)
            y_hist.append(yv)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = x_new, f_new, g_new
        if f < best_f:
            best_f, best_x = f, x.copy()
        it += 1
    return OptimResult(x=best_x, loss=float(best_f), iterations=it, converged=converged)


def _eval(fun, x):
    f, g = fun(x)
    return float(f), np.asarray(g, dtype=np.float64)


def _two_loop(g: np.ndarray, s_hist: list, y_hist: list) -> np.ndarray:
    """H_k g via the standard two-loop recursion over stored (s, y) pairs.

    With no curvature pairs yet, H_0 = I / max(1, ||g||) keeps the first trial
    point within unit distance of the start instead of jumping by the raw
    gradient magnitude.
    """
    q = g.copy()
    m = len(s_hist)
    if m == 0:
        return q / max(1.0, float(np.linalg.norm(q)))
    alphas = np.empty(m)
    rhos = np.empty(m)
    for i in range(m - 1, -1, -1):
        rhos[i] = 1.0 / float(y_hist[i] @ s_hist[i])
        alphas[i] = rhos[i] * float(s_hist[i] @ q)
        q -= alphas[i] * y_hist[i]
    gamma = float(s_hist[-1] @ y_hist[-1]) / float(y_hist[-1] @ y_hist[-1])
    r = gamma * q
    for i in range(m):
        beta = rhos[i] * float(y_hist[i] @ r)
        r += (alphas[i] - beta) * s_hist[i]
    return r
