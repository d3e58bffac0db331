"""Tests for the benchmark harness: metrics, random search, rank statistics,
nested cross-validation, and report construction.

Oracles: R^2 is recomputed from sums of squares; the Friedman statistic and
Nemenyi critical differences are checked against hand-computed values and
published anchor points; rank rows are checked against the exact
average-rank sum identity; nested-CV records are checked against their own
definitional identities (gap = train - test) and against full re-runs.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from smoothbench.data import kfold_split
from smoothbench.harness.metrics import FAILURE_SCORE, adjusted_r2, clip_predictions, r2
from smoothbench.harness.nested_cv import (
    BenchRunConfig,
    FoldResult,
    nested_cv_run,
    run_benchmark,
)
from smoothbench.harness.report import (
    SCHEMA_VERSION,
    build_report,
    read_results_jsonl,
    report_model_columns,
    write_report_files,
    write_results_jsonl,
)
from smoothbench.harness.search import (
    Param,
    SearchSpace,
    random_search,
    search_space,
)
from smoothbench.harness.stats import (
    average_ranks,
    friedman_test,
    matched_gap_wins,
    nemenyi_cd,
    rank_matrix,
)
from smoothbench.synth import gen

# ---------------------------------------------------------------------------
# metrics


class TestR2:
    def test_matches_sum_of_squares_definition(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 60))
            y = rng.normal(size=n)
            if np.var(y) == 0.0:  # pragma: no cover - essentially impossible
                continue
            p = y + rng.normal(scale=rng.uniform(0, 2), size=n)
            ss_res = float(np.sum((y - p) ** 2))
            ss_tot = float(np.sum((y - np.mean(y)) ** 2))
            want = 1.0 - ss_res / ss_tot
            assert r2(y, p) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_perfect_and_mean_predictor(self):
        y = np.array([1.0, 2.0, 3.0, 7.0])
        assert r2(y, y.copy()) == 1.0
        assert r2(y, np.full(4, y.mean())) == 0.0

    def test_constant_target_rules(self):
        y = np.full(5, 3.0)
        assert r2(y, np.full(5, 3.0)) == 1.0
        assert r2(y, np.array([3.0, 3.0, 3.0, 3.0, 3.1])) == FAILURE_SCORE

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            r2(np.zeros(3), np.zeros(4))


class TestAdjustedR2:
    def test_formula(self):
        # n=50, d=4, r2=0.9 -> 1 - 0.1 * 49/45
        want = 1.0 - 0.1 * 49.0 / 45.0
        assert adjusted_r2(0.9, 50, 4) == pytest.approx(want, rel=1e-15)

    def test_small_sample_fallback(self):
        # undefined / sign-flipping region returns the raw value unchanged
        for n, d in [(5, 4), (5, 5), (5, 10), (2, 1)]:
            assert adjusted_r2(0.7, n, d) == 0.7

    def test_penalises_dimension(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(10, 200))
            d = int(rng.integers(1, max(2, n - 2)))
            r = float(rng.uniform(-1, 1))
            adj = adjusted_r2(r, n, d)
            if n > d + 1:
                assert adj <= r + 1e-15
                # exact r2 of 1 is never penalised
                assert adjusted_r2(1.0, n, d) == 1.0
            else:
                assert adj == r


class TestClipPredictions:
    def test_bounds_and_idempotence(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(2, 40))
            y = rng.normal(scale=rng.uniform(0.1, 5), size=n)
            preds = rng.normal(scale=20, size=int(rng.integers(1, 50)))
            out = clip_predictions(preds, y)
            lo = y.min() - 3 * y.std()
            hi = y.max() + 3 * y.std()
            assert np.all(out >= lo) and np.all(out <= hi)
            again = clip_predictions(out, y)
            assert np.array_equal(out, again)

    def test_inside_values_pass_through(self):
        y = np.array([0.0, 1.0, 2.0, 3.0])
        preds = np.array([0.5, 2.9, -1.0])
        assert np.array_equal(clip_predictions(preds, y), preds)

    def test_clips_both_sides(self):
        y = np.array([0.0, 2.0])  # std = 1 -> range [-3, 5]
        out = clip_predictions(np.array([-100.0, 100.0, 1.0]), y)
        assert out.tolist() == [-3.0, 5.0, 1.0]


# ---------------------------------------------------------------------------
# random search


class TestParamSampling:
    def test_uniform_bounds(self):
        rng = np.random.default_rng(3)
        p = Param("uniform", lo=2.0, hi=5.0)
        draws = np.array([p.sample(rng) for _ in range(500)])
        assert np.all(draws >= 2.0) and np.all(draws < 5.0)
        assert 3.2 < draws.mean() < 3.8

    def test_log_uniform_bounds_and_scale(self):
        rng = np.random.default_rng(4)
        p = Param("log_uniform", lo=1e-3, hi=1e3)
        draws = np.array([p.sample(rng) for _ in range(500)])
        assert np.all(draws >= 1e-3) and np.all(draws <= 1e3)
        # uniform in log space: about half of the draws below the geometric
        # midpoint 1.0
        frac_below = np.mean(draws < 1.0)
        assert 0.4 < frac_below < 0.6

    def test_int_inclusive_endpoints(self):
        rng = np.random.default_rng(5)
        p = Param("int", lo=1, hi=5)
        draws = [p.sample(rng) for _ in range(500)]
        assert all(isinstance(v, int) for v in draws)
        assert set(draws) == {1, 2, 3, 4, 5}

    def test_categorical_choices(self):
        rng = np.random.default_rng(6)
        p = Param("categorical", choices=("a", "b", "c"))
        draws = [p.sample(rng) for _ in range(300)]
        assert set(draws) == {"a", "b", "c"}

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Param("triangular").sample(np.random.default_rng(0))


class TestConditionalParams:
    def test_inactive_param_not_sampled(self):
        space = SearchSpace("t", {
            "p": Param("categorical", choices=("off",)),
            "q": Param("int", lo=0, hi=100, parent="p", active_when="on"),
            "r": Param("uniform", lo=0.0, hi=1.0),
        }, budget=5)
        rng = np.random.default_rng(7)
        for _ in range(20):
            params = space.sample_trial(rng)
            assert set(params) == {"p", "r"}

    def test_inactive_param_consumes_no_randomness(self):
        # with the gate closed, the downstream draws must line up with a
        # space that does not declare the gated parameter at all
        with_gate = SearchSpace("a", {
            "p": Param("categorical", choices=("off",)),
            "q": Param("int", lo=0, hi=100, parent="p", active_when="on"),
            "r": Param("uniform", lo=0.0, hi=1.0),
        }, budget=5)
        without = SearchSpace("b", {
            "p": Param("categorical", choices=("off",)),
            "r": Param("uniform", lo=0.0, hi=1.0),
        }, budget=5)
        rng_a = np.random.default_rng(99)
        rng_b = np.random.default_rng(99)
        for _ in range(20):
            pa = with_gate.sample_trial(rng_a)
            pb = without.sample_trial(rng_b)
            assert pa == pb

    def test_active_param_sampled(self):
        space = SearchSpace("t", {
            "p": Param("categorical", choices=("on",)),
            "q": Param("int", lo=3, hi=9, parent="p", active_when="on"),
        }, budget=5)
        rng = np.random.default_rng(8)
        for _ in range(50):
            params = space.sample_trial(rng)
            assert 3 <= params["q"] <= 9

    def test_model_space_conditionals(self):
        rng = np.random.default_rng(9)
        erbf = search_space("erbf")
        saw_auto = saw_fixed = False
        for _ in range(200):
            params = erbf.sample_trial(rng)
            if params["n_rbf_mode"] == "auto":
                saw_auto = True
                assert "n_rbf" not in params
            else:
                saw_fixed = True
                assert 10 <= params["n_rbf"] <= 80
        assert saw_auto and saw_fixed

        cheb = search_space("chebypoly")
        saw_on = saw_off = False
        for _ in range(200):
            params = cheb.sample_trial(rng)
            if params["include_interactions"]:
                saw_on = True
                assert params["max_interaction_complexity"] in (1, 2)
            else:
                saw_off = True
                assert "max_interaction_complexity" not in params
        assert saw_on and saw_off


class TestRandomSearch:
    @staticmethod
    def _quadratic(params):
        return -((math.log10(params["alpha"])) ** 2)

    def test_deterministic_given_seed(self):
        space = search_space("ridge")
        a = random_search(self._quadratic, space, seed=7)
        b = random_search(self._quadratic, space, seed=7)
        assert a[0] == b[0] and a[1] == b[1]
        assert [(t.number, t.params, t.score) for t in a[2]] == \
               [(t.number, t.params, t.score) for t in b[2]]
        c = random_search(self._quadratic, space, seed=8)
        assert [t.params for t in c[2]] != [t.params for t in a[2]]

    def test_best_is_running_maximum(self):
        space = search_space("ridge")
        best_params, best_score, trials = random_search(self._quadratic, space, seed=11)
        assert len(trials) == space.budget == 20
        scores = [t.score for t in trials]
        assert best_score == max(scores)
        first_best = trials[scores.index(max(scores))]
        assert best_params == first_best.params

    def test_failures_scored_and_search_continues(self):
        space = SearchSpace("t", {"x": Param("int", lo=0, hi=9)}, budget=40)

        def objective(params):
            x = params["x"]
            if x % 2 == 0:
                raise ValueError("boom")
            if x == 9:
                return math.nan
            return float(x)

        best_params, best_score, trials = random_search(objective, space, seed=12)
        assert len(trials) == 40
        for t in trials:
            if t.params["x"] % 2 == 0 or t.params["x"] == 9:
                assert t.score == FAILURE_SCORE
            else:
                assert t.score == float(t.params["x"])
        finite = [t.score for t in trials if t.score != FAILURE_SCORE]
        assert finite, "expected some odd draws in 40 trials"
        assert best_score == max(finite)
        assert best_params["x"] == int(max(finite))

    def test_all_failures_returns_first_trial(self):
        space = SearchSpace("t", {"x": Param("int", lo=0, hi=9)}, budget=6)

        def objective(params):
            raise RuntimeError("always")

        best_params, best_score, trials = random_search(objective, space, seed=13)
        assert best_score == FAILURE_SCORE
        assert best_params == trials[0].params

    def test_ties_keep_earliest_trial(self):
        space = search_space("ridge")
        best_params, best_score, trials = random_search(lambda p: 0.5, space, seed=14)
        assert best_score == 0.5
        assert best_params == trials[0].params

    def test_budget_override_and_validation(self):
        space = search_space("ridge")
        _, _, trials = random_search(self._quadratic, space, seed=1, budget=4)
        assert len(trials) == 4
        with pytest.raises(ValueError):
            random_search(self._quadratic, space, seed=1, budget=0)

    def test_registered_spaces(self):
        budgets = {"ridge": 20, "dt": 25, "erbf": 30, "chebypoly": 30, "chebytree": 30}
        names = {
            "ridge": {"alpha"},
            "dt": {"max_depth", "min_samples_leaf", "min_samples_split"},
            "erbf": {"n_rbf_mode", "n_rbf", "alpha", "center_init", "width_init"},
            "chebypoly": {"complexity", "alpha", "include_interactions",
                          "max_interaction_complexity"},
            "chebytree": {"complexity", "alpha", "max_depth", "min_samples_leaf"},
        }
        for kind, budget in budgets.items():
            space = search_space(kind)
            assert space.budget == budget
            assert set(space.params) == names[kind]
        with pytest.raises(ValueError):
            search_space("boosted_stump")


# ---------------------------------------------------------------------------
# rank statistics


class TestAverageRanks:
    def test_basic_and_ties(self):
        assert average_ranks([0.9, 0.8, 0.7]).tolist() == [1.0, 2.0, 3.0]
        assert average_ranks([0.7, 0.8, 0.9]).tolist() == [3.0, 2.0, 1.0]
        assert average_ranks([0.9, 0.9, 0.7]).tolist() == [1.5, 1.5, 3.0]
        assert average_ranks([0.5, 0.5, 0.5]).tolist() == [2.0, 2.0, 2.0]
        assert average_ranks([1.0, 2.0, 2.0, 3.0]).tolist() == [4.0, 2.5, 2.5, 1.0]

    def test_failures_pinned_to_worst(self):
        # a failed entry takes rank k even with the best recorded score
        ranks = average_ranks([0.99, 0.5, 0.7], failed=[True, False, False])
        assert ranks.tolist() == [3.0, 2.0, 1.0]
        # multiple failures all take rank k (no averaging among failures)
        ranks = average_ranks([10.0, 20.0, 30.0, 40.0],
                              failed=[False, True, True, False])
        assert ranks.tolist() == [2.0, 4.0, 4.0, 1.0]
        # failed scores are excluded from tie counting
        ranks = average_ranks([0.5, 0.5], failed=[False, True])
        assert ranks.tolist() == [1.0, 2.0]

    def test_rank_sum_identity(self):
        # without failures the ranks of k models always sum to k(k+1)/2,
        # ties or not (average ranks preserve the sum exactly)
        rng = np.random.default_rng(20)
        for _ in range(200):
            k = int(rng.integers(2, 9))
            if rng.random() < 0.5:
                scores = rng.normal(size=k)  # almost surely distinct
            else:
                scores = rng.integers(0, 3, size=k).astype(float)  # many ties
            ranks = average_ranks(scores)
            assert ranks.sum() == k * (k + 1) / 2
            assert np.all(ranks >= 1.0) and np.all(ranks <= k)

    def test_rank_matrix_is_rowwise(self):
        table = np.array([[0.9, 0.8, 0.7], [0.1, 0.3, 0.2]])
        out = rank_matrix(table)
        assert out.tolist() == [[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]]
        failed = np.array([[False, False, True], [False, False, False]])
        out = rank_matrix(table, failed)
        assert out.tolist() == [[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]]


class TestFriedman:
    def test_hand_computed_statistic(self):
        # two datasets, identical rank order (1,2,3):
        # mean ranks (1,2,3), sum of squares 14, k(k+1)^2/4 = 12,
        # chi2 = 12*2/(3*4) * (14 - 12) = 4
        ranks = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        res = friedman_test(ranks)
        assert res.statistic == pytest.approx(4.0, abs=1e-12)
        assert res.df == 2
        assert res.critical_value == 5.991
        assert res.significant is False

    def test_perfect_agreement_many_datasets_significant(self):
        ranks = np.tile([1.0, 2.0, 3.0], (10, 1))
        res = friedman_test(ranks)
        assert res.statistic == pytest.approx(20.0, abs=1e-9)
        assert res.significant is True

    def test_all_tied_scores_zero_statistic(self):
        ranks = rank_matrix(np.full((4, 3), 1.23))
        res = friedman_test(ranks)
        assert res.statistic == pytest.approx(0.0, abs=1e-12)
        assert res.significant is False

    def test_invariant_under_monotone_score_transform(self):
        # ranks depend only on score order, so exp() must not change anything
        rng = np.random.default_rng(21)
        for _ in range(200):
            n = int(rng.integers(2, 8))
            k = int(rng.integers(3, 7))
            scores = rng.normal(size=(n, k))
            if rng.random() < 0.5:
                scores = rng.integers(0, 3, size=(n, k)).astype(float)
            ra = rank_matrix(scores)
            rb = rank_matrix(np.exp(scores))
            assert np.array_equal(ra, rb)
            assert friedman_test(ra).statistic == friedman_test(rb).statistic

    def test_validation(self):
        ranks = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError):
            friedman_test(ranks, alpha=0.01)
        with pytest.raises(ValueError):
            friedman_test(np.ones((3, 1)))
        with pytest.raises(ValueError):
            friedman_test(np.ones(4))
        with pytest.raises(ValueError):
            friedman_test(rank_matrix(np.random.default_rng(0).normal(size=(3, 12))))


class TestNemenyi:
    def test_published_anchor_values(self):
        # standard benchmark-comparison anchors at alpha = 0.05
        assert nemenyi_cd(8, 54) == pytest.approx(1.43, abs=0.01)
        assert nemenyi_cd(7, 55) == pytest.approx(1.21, abs=0.01)
        assert nemenyi_cd(2, 1) == pytest.approx(1.960, abs=1e-12)

    def test_shrinks_with_more_datasets(self):
        cds = [nemenyi_cd(5, n) for n in (2, 5, 20, 100)]
        assert all(a > b for a, b in zip(cds, cds[1:]))
        assert nemenyi_cd(5, 4) == pytest.approx(nemenyi_cd(5, 1) / 2.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            nemenyi_cd(1, 10)
        with pytest.raises(ValueError):
            nemenyi_cd(11, 10)
        with pytest.raises(ValueError):
            nemenyi_cd(3, 0)
        with pytest.raises(ValueError):
            nemenyi_cd(3, 10, alpha=0.01)


class TestMatchedGapWins:
    def test_hand_case(self):
        scores = {
            "A": {"chebypoly": 0.80, "dt": 0.81},   # matched, smooth gap smaller
            "B": {"chebypoly": 0.70, "dt": 0.90},   # score diff too large
            "C": {"chebypoly": 0.50, "dt": 0.51},   # matched, equal gaps -> 0.5
            "D": {"chebypoly": None, "dt": 0.40},   # missing -> skipped
            "E": {"chebypoly": 0.60, "dt": 0.61},   # matched, tree gap smaller
        }
        gaps = {
            "A": {"chebypoly": 0.05, "dt": 0.10},
            "B": {"chebypoly": 0.01, "dt": 0.02},
            "C": {"chebypoly": 0.20, "dt": 0.20},
            "D": {"chebypoly": None, "dt": 0.10},
            "E": {"chebypoly": 0.30, "dt": 0.10},
        }
        (summary,) = matched_gap_wins(scores, gaps, [("chebypoly", "dt")])
        assert summary.smooth == "chebypoly" and summary.tree == "dt"
        assert summary.matched == 3
        assert summary.smooth_wins == 1.5
        assert summary.fraction == 0.5

    def test_threshold_boundary_inclusive(self):
        # |diff| exactly equal to the threshold still counts as matched
        # (values on the 2^-k grid keep the arithmetic exact)
        scores = {"A": {"s": 1.0, "t": 1.25}, "B": {"s": 1.0, "t": 1.3125}}
        gaps = {"A": {"s": 0.0, "t": 1.0}, "B": {"s": 0.0, "t": 1.0}}
        (summary,) = matched_gap_wins(scores, gaps, [("s", "t")], threshold=0.25)
        assert summary.matched == 1
        assert summary.smooth_wins == 1.0

    def test_nothing_matched_gives_none_fraction(self):
        scores = {"A": {"s": 0.1, "t": 0.9}}
        gaps = {"A": {"s": 0.0, "t": 0.0}}
        (summary,) = matched_gap_wins(scores, gaps, [("s", "t")])
        assert summary.matched == 0
        assert summary.smooth_wins == 0.0
        assert summary.fraction is None

    def test_missing_model_key_skipped(self):
        scores = {"A": {"s": 0.5}, "B": {"s": 0.5, "t": 0.5}}
        gaps = {"A": {"s": 0.0}, "B": {"s": 0.1, "t": 0.2}}
        (summary,) = matched_gap_wins(scores, gaps, [("s", "t")])
        assert summary.matched == 1
        assert summary.smooth_wins == 1.0


# ---------------------------------------------------------------------------
# nested cross-validation (small real runs)

SMALL_KINDS = ["ridge", "dt", "chebypoly"]
SMALL_CONFIG = BenchRunConfig(
    outer_k=3, outer_seed=7, search_seed=1,
    trial_budgets={"ridge": 2, "dt": 2, "chebypoly": 2},
)


def _small_datasets():
    return [
        ("zeta", gen("friedman1", n=60, noise_std=0.2, seed=11)),
        ("alpha", gen("synthetic_piecewise", n=60, noise_std=0.2, seed=12)),
    ]


def _strip_timing(fr: FoldResult):
    return (fr.dataset, fr.model, fr.fold, fr.train_r2, fr.test_r2,
            fr.test_r2_adj, fr.gap, tuple(sorted(fr.best_params.items())))


@pytest.fixture(scope="module")
def small_bench():
    datasets = _small_datasets()
    results, failures = run_benchmark(datasets, SMALL_KINDS, SMALL_CONFIG, parallel=1)
    return datasets, results, failures


class TestNestedCV:
    def test_no_failures_and_full_grid(self, small_bench):
        datasets, results, failures = small_bench
        assert failures == {}
        assert len(results) == len(datasets) * len(SMALL_KINDS) * SMALL_CONFIG.outer_k
        cells = {(fr.dataset, fr.model, fr.fold) for fr in results}
        assert len(cells) == len(results)

    def test_gap_is_train_minus_test(self, small_bench):
        _, results, _ = small_bench
        for fr in results:
            assert fr.gap == fr.train_r2 - fr.test_r2

    def test_adjusted_r2_consistent_with_fold_sizes(self, small_bench):
        datasets, results, _ = small_bench
        dims = {name: ds.d for name, ds in datasets}
        plans = {name: kfold_split(ds.n, SMALL_CONFIG.outer_k, SMALL_CONFIG.outer_seed)
                 for name, ds in datasets}
        for fr in results:
            n_test = len(plans[fr.dataset].test_indices(fr.fold))
            assert fr.test_r2_adj == adjusted_r2(fr.test_r2, n_test, dims[fr.dataset])

    def test_results_sorted_by_given_order(self, small_bench):
        datasets, results, _ = small_bench
        ds_order = {name: i for i, (name, _) in enumerate(datasets)}
        kind_order = {k: i for i, k in enumerate(SMALL_KINDS)}
        keys = [(ds_order[fr.dataset], kind_order[fr.model], fr.fold) for fr in results]
        assert keys == sorted(keys)
        # "zeta" was listed before "alpha": given order wins over alphabetical
        assert results[0].dataset == "zeta"

    def test_best_params_come_from_the_search_space(self, small_bench):
        _, results, _ = small_bench
        for fr in results:
            space = search_space(fr.model)
            assert set(fr.best_params) <= set(space.params)
            assert fr.best_params, "search must return a non-empty parameter dict"

    def test_rerun_is_deterministic(self, small_bench):
        datasets, results, failures = small_bench
        again, failures2 = run_benchmark(datasets, SMALL_KINDS, SMALL_CONFIG, parallel=1)
        assert failures2 == failures
        assert [_strip_timing(fr) for fr in again] == [_strip_timing(fr) for fr in results]

    def test_timing_fields_populated(self, small_bench):
        _, results, _ = small_bench
        for fr in results:
            assert fr.tune_seconds >= 0.0
            assert fr.train_seconds >= 0.0
            assert fr.predict_ms_per_1k >= 0.0

    def test_budget_for(self):
        cfg = BenchRunConfig(trial_budgets={"ridge": 3})
        assert cfg.budget_for("ridge") == 3
        assert cfg.budget_for("dt") is None
        assert BenchRunConfig().budget_for("ridge") is None


class TestNestedCVParallel:
    def test_parallel_matches_serial(self):
        datasets = [("p1", gen("friedman1", n=45, noise_std=0.3, seed=3))]
        cfg = BenchRunConfig(outer_k=3, outer_seed=5, search_seed=2,
                             trial_budgets={"ridge": 2, "dt": 2})
        serial, f1 = run_benchmark(datasets, ["ridge", "dt"], cfg, parallel=1)
        para, f2 = run_benchmark(datasets, ["ridge", "dt"], cfg, parallel=2)
        assert f1 == f2 == {}
        assert [_strip_timing(fr) for fr in serial] == [_strip_timing(fr) for fr in para]


class TestNestedCVFailure:
    def test_failing_model_is_marked_not_fatal(self, monkeypatch):
        import smoothbench.harness.nested_cv as ncv
        real_fit = ncv.fit_model

        def flaky_fit(kind, X, y, params, seed=0):
            if kind == "dt":
                raise RuntimeError("synthetic failure")
            return real_fit(kind, X, y, params, seed=seed)

        monkeypatch.setattr(ncv, "fit_model", flaky_fit)
        ds = gen("friedman1", n=45, noise_std=0.3, seed=4)
        cfg = BenchRunConfig(outer_k=3, outer_seed=5, search_seed=2,
                             trial_budgets={"ridge": 2, "dt": 2})

        results, error = nested_cv_run("f1", ds, "dt", cfg)
        assert results == []
        assert error is not None and error.startswith("fold 0:")

        results, failures = run_benchmark([("f1", ds)], ["ridge", "dt"], cfg, parallel=1)
        assert set(failures) == {("f1", "dt")}
        assert failures[("f1", "dt")].startswith("fold 0:")
        assert {fr.model for fr in results} == {"ridge"}
        assert len(results) == cfg.outer_k

        report = build_report(results, failures,
                              dataset_order=["f1"], model_order=["ridge", "dt"])
        assert report["scores"]["f1"]["dt"] is None
        assert report["ranks"]["f1"] == {"ridge": 1.0, "dt": 2.0}
        assert report["failures"] == {"f1/dt": failures[("f1", "dt")]}


# ---------------------------------------------------------------------------
# persistence and report construction


def _fold(ds, model, fold, adj, gap=0.1, train=0.9, test=0.8, params=None):
    return FoldResult(
        dataset=ds, model=model, fold=fold, train_r2=train, test_r2=test,
        test_r2_adj=adj, gap=gap, tune_seconds=0.5, train_seconds=0.25,
        predict_ms_per_1k=2.0, best_params=params or {"alpha": 0.5},
    )


class TestResultsJsonl:
    def test_round_trip_exact(self, tmp_path):
        results = [
            _fold("dsb", "m1", 1, adj=0.1 + 0.2, gap=math.pi, train=1 / 3),
            _fold("dsa", "m2", 0, adj=-1e9, params={"depth": 3, "frac": 0.017}),
            _fold("dsa", "m1", 0, adj=0.75),
        ]
        failures = {("dsb", "m2"): "boom", ("dsa", "m3"): "exploded at fold 2"}
        path = str(tmp_path / "results.jsonl")
        write_results_jsonl(path, results, failures)
        back, back_failures = read_results_jsonl(path)
        assert back == sorted(results, key=lambda fr: (fr.dataset, fr.model, fr.fold))
        assert back_failures == failures

    def test_line_format_and_order(self, tmp_path):
        results = [_fold("b", "m", 0, adj=0.5), _fold("a", "m", 0, adj=0.5)]
        path = str(tmp_path / "results.jsonl")
        write_results_jsonl(path, results, {("a", "z"): "oops"})
        with open(path) as fh:
            lines = [json.loads(line) for line in fh]
        assert [rec["record"] for rec in lines] == ["fold", "fold", "failure"]
        assert [rec["dataset"] for rec in lines] == ["a", "b", "a"]
        assert all(rec["schema_version"] == SCHEMA_VERSION for rec in lines)

    def test_schema_version_guard(self, tmp_path):
        path = str(tmp_path / "bad.jsonl")
        with open(path, "w") as fh:
            fh.write(json.dumps({"record": "fold", "schema_version": 999}) + "\n")
        with pytest.raises(ValueError, match="schema"):
            read_results_jsonl(path)

    def test_unknown_record_guard(self, tmp_path):
        path = str(tmp_path / "bad.jsonl")
        with open(path, "w") as fh:
            fh.write(json.dumps({"record": "mystery",
                                 "schema_version": SCHEMA_VERSION}) + "\n")
        with pytest.raises(ValueError, match="record"):
            read_results_jsonl(path)


def _report_fixture_results():
    """Two datasets x three models x two folds with hand-checkable means."""
    rows = []
    adj = {
        ("d1", "m_a"): (0.8, 0.6),   # mean 0.7
        ("d1", "m_b"): (0.5, 0.5),   # mean 0.5
        ("d1", "m_c"): (0.9, 0.7),   # mean 0.8
        ("d2", "m_a"): (0.5, 0.5),   # mean 0.5
        ("d2", "m_b"): (0.5, 0.5),   # mean 0.5 (tie with m_a)
        ("d2", "m_c"): (0.1, 0.1),   # mean 0.1
    }
    for (ds, m), vals in adj.items():
        for fold, v in enumerate(vals):
            rows.append(_fold(ds, m, fold, adj=v, gap=v / 10))
    return rows


class TestBuildReport:
    def test_aggregation_and_ranks(self):
        report = build_report(_report_fixture_results(), {},
                              dataset_order=["d1", "d2"],
                              model_order=["m_a", "m_b", "m_c"])
        assert report["datasets"] == ["d1", "d2"]
        assert report["models"] == ["m_a", "m_b", "m_c"]
        assert report["scores"]["d1"] == pytest.approx(
            {"m_a": 0.7, "m_b": 0.5, "m_c": 0.8})
        assert report["scores"]["d2"] == pytest.approx(
            {"m_a": 0.5, "m_b": 0.5, "m_c": 0.1})
        assert report["gaps"]["d1"]["m_a"] == pytest.approx(0.07)
        # d1: m_c > m_a > m_b; d2: m_a ties m_b at 1.5, m_c last
        assert report["ranks"]["d1"] == {"m_a": 2.0, "m_b": 3.0, "m_c": 1.0}
        assert report["ranks"]["d2"] == {"m_a": 1.5, "m_b": 1.5, "m_c": 3.0}
        assert report["mean_ranks"] == pytest.approx(
            {"m_a": 1.75, "m_b": 2.25, "m_c": 2.0})
        assert report["rank1_counts"] == {"m_a": 0, "m_b": 0, "m_c": 1}
        assert report["rank2_counts"] == {"m_a": 1, "m_b": 0, "m_c": 0}
        # chi2 = 12*2/(3*4) * ((1.75^2 + 2.25^2 + 2^2) - 12) = 0.25
        assert report["friedman"]["statistic"] == pytest.approx(0.25, abs=1e-12)
        assert report["friedman"]["df"] == 2
        assert report["friedman"]["significant"] is False
        assert report["nemenyi_cd"] == pytest.approx(2.343, abs=1e-12)
        # matched-gap analysis needs >= 3 datasets
        assert report["matched_gap"] is None
        assert report["failures"] == {}
        assert report["timing"]["m_a"]["tune_seconds_mean"] == 0.5

    def test_matched_gap_block(self):
        rows = []
        scores = {
            ("ds1", "chebypoly"): 0.80, ("ds1", "dt"): 0.81,  # matched, smooth wins
            ("ds2", "chebypoly"): 0.70, ("ds2", "dt"): 0.90,  # unmatched
            ("ds3", "chebypoly"): 0.50, ("ds3", "dt"): 0.51,  # matched, tie
        }
        gaps = {
            ("ds1", "chebypoly"): 0.05, ("ds1", "dt"): 0.10,
            ("ds2", "chebypoly"): 0.01, ("ds2", "dt"): 0.02,
            ("ds3", "chebypoly"): 0.20, ("ds3", "dt"): 0.20,
        }
        for (ds, m) in scores:
            rows.append(_fold(ds, m, 0, adj=scores[(ds, m)], gap=gaps[(ds, m)]))
        report = build_report(rows, {}, dataset_order=["ds1", "ds2", "ds3"],
                              model_order=["chebypoly", "dt"])
        block = report["matched_gap"]
        assert block["threshold"] == 0.02
        (pair,) = block["pairs"]
        assert pair["smooth"] == "chebypoly" and pair["tree"] == "dt"
        assert pair["matched"] == 2
        assert pair["smooth_wins"] == 1.5
        assert pair["fraction"] == 0.75
        assert block["matched_total"] == 2
        assert block["smooth_wins_total"] == 1.5
        assert block["fraction_overall"] == 0.75
        # consistency with a direct call on the report's own tables
        direct = matched_gap_wins(report["scores"], report["gaps"],
                                  [("chebypoly", "dt")])
        assert direct[0].matched == pair["matched"]
        assert direct[0].smooth_wins == pair["smooth_wins"]

    def test_first_seen_order_without_explicit_order(self):
        rows = [_fold("zzz", "m2", 0, adj=0.5), _fold("aaa", "m1", 0, adj=0.5)]
        report = build_report(rows, {})
        assert report["datasets"] == ["zzz", "aaa"]
        assert report["models"] == ["m2", "m1"]

    def test_model_columns_sorted_by_mean_rank(self):
        report = build_report(_report_fixture_results(), {},
                              dataset_order=["d1", "d2"],
                              model_order=["m_a", "m_b", "m_c"])
        assert report_model_columns(report) == ["m_a", "m_c", "m_b"]

    def test_model_columns_break_ties_by_name(self):
        rows = [_fold("d", "zed", 0, adj=0.5), _fold("d", "abe", 0, adj=0.5)]
        report = build_report(rows, {})
        assert report["mean_ranks"]["zed"] == report["mean_ranks"]["abe"] == 1.5
        assert report_model_columns(report) == ["abe", "zed"]


class TestWriteReportFiles:
    def test_files_written_and_json_round_trips(self, tmp_path):
        report = build_report(_report_fixture_results(), {},
                              dataset_order=["d1", "d2"],
                              model_order=["m_a", "m_b", "m_c"])
        paths = write_report_files(str(tmp_path), report)
        assert [p.rsplit("/", 1)[1] for p in paths] == \
               ["report.json", "rank_table.csv", "scores_table.csv"]
        with open(paths[0]) as fh:
            assert json.load(fh) == report

    def test_csv_tables(self, tmp_path):
        import csv as csvmod

        report = build_report(_report_fixture_results(), {},
                              dataset_order=["d1", "d2"],
                              model_order=["m_a", "m_b", "m_c"])
        write_report_files(str(tmp_path), report)
        cols = report_model_columns(report)

        with open(tmp_path / "rank_table.csv", newline="") as fh:
            rows = list(csvmod.reader(fh))
        assert rows[0] == ["dataset"] + cols
        for row in rows[1:]:
            ds = row[0]
            for m, cell in zip(cols, row[1:]):
                assert float(cell) == report["ranks"][ds][m]

        with open(tmp_path / "scores_table.csv", newline="") as fh:
            rows = list(csvmod.reader(fh))
        assert rows[0] == ["dataset"] + cols
        for row in rows[1:]:
            ds = row[0]
            for m, cell in zip(cols, row[1:]):
                assert float(cell) == report["scores"][ds][m]

    def test_none_scores_become_empty_cells(self, tmp_path):
        import csv as csvmod

        rows = [_fold("d", "ok", 0, adj=0.5)]
        report = build_report(rows, {("d", "broken"): "err"},
                              dataset_order=["d"], model_order=["ok", "broken"])
        write_report_files(str(tmp_path), report)
        with open(tmp_path / "scores_table.csv", newline="") as fh:
            table = list(csvmod.reader(fh))
        broken_col = table[0].index("broken")
        assert table[1][broken_col] == ""

    def test_end_to_end_with_real_results(self, small_bench, tmp_path):
        datasets, results, failures = small_bench
        path = str(tmp_path / "results.jsonl")
        write_results_jsonl(path, results, failures)
        back, back_failures = read_results_jsonl(path)
        names = [name for name, _ in datasets]
        report_a = build_report(results, failures, names, SMALL_KINDS)
        report_b = build_report(back, back_failures, names, SMALL_KINDS)
        assert report_a == report_b
        write_report_files(str(tmp_path / "out"), report_a)
        with open(tmp_path / "out" / "report.json") as fh:
            assert json.load(fh) == report_a
