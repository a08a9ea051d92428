"""Forward-selection tests.

Search logic is checked two ways: against a nearest-centroid evaluator
on a problem whose informative columns are known by construction, and
against an independent re-implementation of the search driven by a
pre-drawn random error table over every possible subset.
"""

import numpy as np
import pytest

from rampcast import (DataShapeError, FeatureSubset, GreedyFeatureSelector,
                      TrainingError, greedy_select, make_dbn_evaluator, pearson,
                      write_selection_csv)


def centroid_error(X_sub, labels):
    """Misclassification rate of a nearest-class-centroid rule."""
    classes = np.unique(labels)
    cents = np.vstack([X_sub[labels == c].mean(axis=0) for c in classes])
    d = ((X_sub[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    return float((classes[d.argmin(axis=1)] != labels).mean())


def sign_problem(seed, n=300, n_noise=4):
    """Binary labels from the sign of col0 + col1; remaining cols are noise."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2 + n_noise))
    y = np.where(X[:, 0] + X[:, 1] > 0, 1, -1)
    return X, y


class TestPearson:
    def test_exact_extremes(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        assert pearson(x, 3 * x + 1) == pytest.approx(1.0)
        assert pearson(x, -2 * x) == pytest.approx(-1.0)

    def test_exact_zero(self):
        # symmetric bump against a linear ramp
        assert pearson([1, 2, 3], [1, 3, 1]) == pytest.approx(0.0, abs=1e-15)

    def test_matches_corrcoef(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(3, 40))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)

    def test_constant_raises(self):
        with pytest.raises(DataShapeError, match="constant"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(DataShapeError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(DataShapeError, match="2 points"):
            pearson([1.0], [2.0])


class TestGreedySearch:
    def test_finds_informative_columns(self):
        for seed in range(5):
            X, y = sign_problem(seed)
            res = greedy_select(X, y, centroid_error)
            assert set(res.selected[:2]) == {0, 1}, (seed, res.selected)
            diffs = np.diff(res.error_history)
            assert (diffs < 0).all()
            assert res.terminated_by == "no-improvement"

    def test_matches_reference_implementation(self):
        """Random subset-error tables; an independent loop must agree."""
        rng = np.random.default_rng(12)
        for trial in range(20):
            n, d = 64, 6
            X = rng.normal(size=(n, d))
            y = rng.normal(size=n)
            table = {}
            for code in range(1, 2 ** d):
                key = frozenset(j for j in range(d) if code >> j & 1)
                table[key] = float(rng.uniform(0.05, 0.95))

            def by_identity(X_sub, _y, X=X, table=table):
                cols = []
                for col in X_sub.T:
                    matches = [j for j in range(X.shape[1]) if np.array_equal(X[:, j], col)]
                    assert len(matches) == 1
                    cols.append(matches[0])
                return table[frozenset(cols)]

            got = greedy_select(X, y, by_identity)

            # reference: same contract, written straight from its description
            scores = [abs(pearson(X[:, j], y)) for j in range(d)]
            selected = [int(np.argmax(scores))]
            history = [table[frozenset(selected)]]
            remaining = [j for j in range(d) if j != selected[0]]
            terminated = "exhausted"
            while remaining:
                errs = [table[frozenset(selected + [j])] for j in remaining]
                best = int(np.argmin(errs))
                if errs[best] >= history[-1] - 1e-12:
                    terminated = "no-improvement"
                    break
                selected.append(remaining.pop(best))
                history.append(errs[best])

            assert got.selected == selected, trial
            assert got.error_history == pytest.approx(history)
            assert got.terminated_by == terminated

    def test_seeds_at_max_absolute_correlation(self):
        rng = np.random.default_rng(5)
        y = rng.normal(size=100)
        X = rng.normal(size=(100, 4))
        X[:, 2] = -y  # perfectly anticorrelated, |r| = 1
        res = greedy_select(X, y, lambda Xs, ys: 0.3, max_features=1)
        assert res.selected == [2]
        assert res.error_history == [0.3]
        assert res.terminated_by == "exhausted"

    def test_single_candidate(self):
        X, y = sign_problem(1, n_noise=0)
        res = greedy_select(X[:, :1], y, centroid_error)
        assert res.selected == [0]
        assert len(res.error_history) == 1
        assert res.terminated_by == "exhausted"

    def test_max_features_cap(self):
        X, y = sign_problem(0)
        res = greedy_select(X, y, centroid_error, max_features=1)
        assert len(res.selected) == 1

    def test_constant_column_never_chosen(self):
        X, y = sign_problem(2)
        X[:, 3] = 7.5
        res = greedy_select(X, y, centroid_error)
        assert res.selected[0] != 3
        # a constant coordinate shifts every centroid distance equally,
        # so it can never strictly improve the error
        assert 3 not in res.selected

    def test_all_constant_rejected(self):
        with pytest.raises(DataShapeError, match="constant"):
            greedy_select(np.ones((10, 3)), np.arange(10), centroid_error)

    def test_shape_mismatch(self):
        with pytest.raises(DataShapeError):
            greedy_select(np.zeros((10, 2)), np.zeros(9), centroid_error)

    def test_evaluator_exception_is_wrapped(self):
        X, y = sign_problem(0)

        def broken(X_sub, ys):
            raise ValueError("boom")

        with pytest.raises(TrainingError, match="subset"):
            greedy_select(X, y, broken)

    def test_evaluator_range_enforced(self):
        X, y = sign_problem(0)
        with pytest.raises(TrainingError, match="expected"):
            greedy_select(X, y, lambda Xs, ys: 1.5)

    def test_deterministic(self):
        X, y = sign_problem(4)
        a = greedy_select(X, y, centroid_error)
        b = greedy_select(X, y, centroid_error)
        assert a.selected == b.selected and a.error_history == b.error_history


class TestSelectionCsv:
    def test_trace_rows(self, tmp_path):
        subset = FeatureSubset(selected=[4, 1], error_history=[0.4562, 0.0438],
                               terminated_by="no-improvement")
        names = [f"power_lag{i}" for i in range(6)]
        path = write_selection_csv(subset, names, tmp_path / "trace.csv",
                                   comment="seed=0 config_sha256=ab12")
        lines = path.read_text().splitlines()
        assert lines[0] == "# seed=0 config_sha256=ab12"
        assert lines[1] == "num_vars,added_feature,error_pct"
        assert lines[2] == "1,power_lag4,45.62"
        assert lines[3] == "2,power_lag1,4.38"


class TestSelectorEstimator:
    def test_fit_transform(self):
        X, y = sign_problem(0)
        sel = GreedyFeatureSelector(evaluator=centroid_error).fit(X, y)
        assert set(sel.selected_[:2]) == {0, 1}
        kept = sel.transform(X)
        assert kept.shape == (len(X), len(sel.selected_))
        assert (kept[:, 0] == X[:, sel.selected_[0]]).all()

    def test_transform_width_checked(self):
        X, y = sign_problem(0)
        sel = GreedyFeatureSelector(evaluator=centroid_error, max_features=2).fit(X, y)
        with pytest.raises(DataShapeError):
            sel.transform(X[:, :3])

    def test_get_params_round_trip(self):
        sel = GreedyFeatureSelector(max_features=3, tol=1e-9)
        params = sel.get_params()
        assert params["max_features"] == 3 and params["tol"] == 1e-9


class TestNetworkEvaluator:
    def _data(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0.0, 1.0, size=(60, 2))
        y = np.where(X[:, 0] > 0.5, 1, -1)
        return X, y

    def test_returns_fraction_and_is_deterministic(self):
        X, y = self._data()
        ev = make_dbn_evaluator(seed=0, hidden_units=(8,), pretrain_epochs=2,
                                finetune_iters=10)
        first = ev(X, y)
        second = ev(X, y)
        assert 0.0 <= first <= 1.0
        assert first == second

    def test_too_few_rows(self):
        ev = make_dbn_evaluator(val_fraction=0.5)
        with pytest.raises(DataShapeError, match="too few"):
            ev(np.random.default_rng(0).random((3, 2)), np.array([1, -1, 0]))

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            make_dbn_evaluator(val_fraction=1.0)
