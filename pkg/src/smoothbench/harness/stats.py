"""Rank aggregation and the Friedman / Nemenyi post-hoc machinery.

Ranks: 1 is best, ties share the average rank, and a failed (dataset, model)
pair is pinned to the worst rank k. The Friedman test uses the chi-square
approximation with hardcoded 5% critical values for df 1..10; the Nemenyi
critical difference uses the standard two-tailed 5% studentised-range
constants for k = 2..10.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# chi-square upper 5% critical values, df 1..10
CHI2_CRIT_05 = {
    1: 3.841, 2: 5.991, 3: 7.815, 4: 9.488, 5: 11.070,
    6: 12.592, 7: 14.067, 8: 15.507, 9: 16.919, 10: 18.307,
}

# Nemenyi q_alpha at alpha = 0.05 for k = 2..10
NEMENYI_Q_05 = {
    2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850,
    7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164,
}


def average_ranks(scores: Sequence[float], failed: Optional[Sequence[bool]] = None) -> np.ndarray:
    """Ranks for one dataset row: higher score is better, rank 1 is best.

    Ties take the average of the positions they straddle. Entries flagged as
    failed get rank k (the worst), regardless of any recorded score.
    """
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.shape[0]
    if failed is None:
        failed = [False] * k
    failed = np.asarray(failed, dtype=bool)
    ranks = np.empty(k)
    ok = ~failed
    for i in range(k):
        if failed[i]:
            ranks[i] = k
            continue
        higher = int(np.sum(ok & (scores > scores[i])))
        tied = int(np.sum(ok & (scores == scores[i]))) - 1
        ranks[i] = 1.0 + higher + 0.5 * tied
    return ranks


def rank_matrix(
    score_table: np.ndarray,
    failed_table: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Row-wise average_ranks over an (n_datasets, k_models) score table."""
    score_table = np.asarray(score_table, dtype=np.float64)
    n, k = score_table.shape
    out = np.empty((n, k))
    for i in range(n):
        row_failed = failed_table[i] if failed_table is not None else None
        out[i] = average_ranks(score_table[i], row_failed)
    return out


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    df: int
    critical_value: float
    significant: bool


def friedman_test(ranks: np.ndarray, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square test over an (n_datasets, k_models) rank matrix.

    chi2_F = 12n / (k(k+1)) * (sum_j Rbar_j^2 - k(k+1)^2 / 4), compared with
    the df = k-1 critical value. Only alpha = 0.05 is supported.
    """
    if alpha != 0.05:
        raise ValueError("only alpha = 0.05 is supported")
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.ndim != 2:
        raise ValueError("ranks must be (n_datasets, k_models)")
    n, k = ranks.shape
    if n < 1 or k < 2:
        raise ValueError("need at least one dataset and two models")
    df = k - 1
    if df not in CHI2_CRIT_05:
        raise ValueError(f"no critical value for df={df}; supported df 1..10")
    mean_ranks = ranks.mean(axis=0)
    statistic = 12.0 * n / (k * (k + 1)) * (float(np.sum(mean_ranks ** 2)) - k * (k + 1) ** 2 / 4.0)
    critical = CHI2_CRIT_05[df]
    return FriedmanResult(
        statistic=float(statistic),
        df=df,
        critical_value=critical,
        significant=bool(statistic > critical),
    )


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Nemenyi critical difference q_alpha(k) * sqrt(k(k+1) / (6n))."""
    if alpha != 0.05:
        raise ValueError("only alpha = 0.05 is supported")
    if k not in NEMENYI_Q_05:
        raise ValueError(f"unsupported model count k={k}; supported k 2..10")
    if n < 1:
        raise ValueError("need at least one dataset")
    return NEMENYI_Q_05[k] * (k * (k + 1) / (6.0 * n)) ** 0.5


@dataclass
class GapPairSummary:
    smooth: str
    tree: str
    matched: int
    smooth_wins: float  # ties count one half
    fraction: Optional[float]  # None when nothing matched


def matched_gap_wins(
    mean_scores: Dict[str, Dict[str, float]],
    mean_gaps: Dict[str, Dict[str, float]],
    pairs: List[Tuple[str, str]],
    threshold: float = 0.02,
) -> List[GapPairSummary]:
    """Generalisation-gap win counts on accuracy-matched datasets.

    A dataset is matched for a (smooth, tree) pair when their mean adjusted
    R^2 differ by at most the threshold. On matched datasets the model with
    the strictly smaller mean gap wins; exact ties score half a win each.
    mean_scores / mean_gaps map dataset -> model -> value; datasets where
    either side is missing (e.g. failed) are skipped.
    """
    out = []
    for smooth, tree in pairs:
        matched = 0
        wins = 0.0
        for ds_name, row in mean_scores.items():
            if smooth not in row or tree not in row:
                continue
            s_score, t_score = row[smooth], row[tree]
            if s_score is None or t_score is None:
                continue
            if abs(s_score - t_score) > threshold:
                continue
            matched += 1
            s_gap = mean_gaps[ds_name][smooth]
            t_gap = mean_gaps[ds_name][tree]
            if s_gap < t_gap:
                wins += 1.0
            elif s_gap == t_gap:
                wins += 0.5
        out.append(GapPairSummary(
            smooth=smooth, tree=tree, matched=matched, smooth_wins=wins,
            fraction=(wins / matched) if matched else None,
        ))
    return out
