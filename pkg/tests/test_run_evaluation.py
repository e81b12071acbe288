import logging
import math

import pandas as pd
import pytest

from core.errors import ParameterError
from core.losses import IndividualLoss
from core.rng_provider import STREAM_CELL, derive_seed
from evaluation.metrics import misclassification_rate
from evaluation.run_evaluation import (
    compare_objectives,
    grid_search,
    k_grid,
    sweep_k,
    train_size,
)
from ingestion.splits import make_split
from ingestion.synthetic import generate_gaussian_case, generate_sinc
from optimization.sgd import TrainConfig, train

HINGE = IndividualLoss("hinge")
TEMPLATE = TrainConfig(k=1, iterations=400, eta0=0.1, record_every=400)


@pytest.fixture(scope="module")
def case4():
    return generate_gaussian_case(4, n_total=60, seed=2)


class TestKGrid:
    @pytest.mark.parametrize("n", [1, 2, 7, 30, 100, 1000])
    def test_endpoints_and_order(self, n):
        grid = k_grid(n)
        assert grid[0] == 1 and grid[-1] == n
        assert all(a < b for a, b in zip(grid, grid[1:]))

    def test_log_spacing(self):
        assert k_grid(100, points=3) == [1, 10, 100]
        assert k_grid(10_000, points=5) == [1, 10, 100, 1000, 10_000]

    def test_invalid(self):
        with pytest.raises(ParameterError):
            k_grid(0)
        with pytest.raises(ParameterError):
            k_grid(10, points=1)


class TestGridSearch:
    def test_single_cell_is_one_train_validate_test_run(self, case4):
        result = grid_search(case4, HINGE, [5], [10.0], repeats=1, seed=3, train_cfg=TEMPLATE)
        train_set, _, test_set = make_split(case4.n, 3).apply(case4)
        config = TrainConfig(k=5, iterations=400, eta0=0.1, seed=derive_seed(3, STREAM_CELL, 0, 5), record_every=400)
        state, _ = train(train_set, HINGE, config, 10.0)
        expected = misclassification_rate(state.predict(test_set.features), test_set.targets)

        assert (result.best_k, result.best_C) == (5, 10.0)
        assert result.test_scores == [expected]
        assert result.std == 0.0

    def test_selection_never_loses_to_the_endpoints(self, case4):
        n_train = train_size(case4.n)
        result = grid_search(case4, HINGE, k_grid(n_train, 6), [1.0, 100.0], repeats=3, seed=0, train_cfg=TEMPLATE)
        cells = result.cells
        for repeat, (k, C) in enumerate(result.selections):
            mine = cells[(cells.repeat == repeat)]
            chosen = mine[(mine.k == k) & (mine.C == C)]["val"].iloc[0]
            endpoints = mine[mine.k.isin([1, n_train])]["val"].min()
            assert chosen <= endpoints
        assert result.best_k in k_grid(n_train, 6)
        assert result.best_C in (1.0, 100.0)
        assert len(result.test_scores) == 3

    def test_ties_prefer_smaller_k_then_smaller_c(self, case4):
        result = grid_search(case4, HINGE, [1, 2, 4], [0.5, 1.0], repeats=2, seed=1, train_cfg=TEMPLATE)
        for repeat, (k, C) in enumerate(result.selections):
            mine = result.cells[result.cells.repeat == repeat]
            best = mine["val"].min()
            winners = mine[mine["val"] == best].sort_values(["k", "C"])
            assert (k, C) == (winners.k.iloc[0], winners.C.iloc[0])

    def test_deterministic_and_parallel_identical(self, case4):
        args = (case4, HINGE, [1, 5, 30], [1.0, 100.0])
        serial = grid_search(*args, repeats=2, seed=4, train_cfg=TEMPLATE)
        again = grid_search(*args, repeats=2, seed=4, train_cfg=TEMPLATE)
        parallel = grid_search(*args, repeats=2, seed=4, train_cfg=TEMPLATE, jobs=2)
        for other in (again, parallel):
            pd.testing.assert_frame_equal(serial.cells, other.cells)
            assert serial.selections == other.selections
            assert serial.test_scores == other.test_scores

    def test_k_outside_training_split(self, case4):
        with pytest.raises(ParameterError):
            grid_search(case4, HINGE, [train_size(case4.n) + 1], [1.0], 1, 0, TEMPLATE)
        with pytest.raises(ParameterError):
            grid_search(case4, HINGE, [0], [1.0], 1, 0, TEMPLATE)
        with pytest.raises(ParameterError):
            grid_search(case4, HINGE, [1], [1.0], 0, 0, TEMPLATE)

    def test_c_grid_extension(self, case4):
        result = grid_search(case4, HINGE, [5], [1.0], 1, 0, TEMPLATE, extend_c_steps=1)
        assert sorted(result.cells.C.unique()) == [0.1, 1.0]

    def test_diverging_cells_are_never_selected(self, case4, caplog):
        config = TrainConfig(k=1, iterations=200, eta0=50.0, record_every=200)
        with caplog.at_level(logging.WARNING, logger="evaluation.run_evaluation"):
            result = grid_search(case4, HINGE, [5], [1e-5, 10.0], 1, 0, config)
        assert result.best_C == 10.0
        assert math.isinf(result.cells[result.cells.C == 1e-5]["val"].iloc[0])
        warnings = [r.getMessage() for r in caplog.records if r.levelno == logging.WARNING]
        assert warnings and warnings[0].startswith("repeat 0, k=5, C=1e-05")

    def test_regression_reports_rmse_and_mae(self):
        data = generate_sinc(n=40, seed=0)
        result = grid_search(data, IndividualLoss("squared"), [1, 20], [1.0], 2, 0, TEMPLATE)
        assert (result.metric, result.secondary_metric) == ("rmse", "mae")
        assert len(result.test_scores) == 2
        assert all(math.isfinite(s) and s >= 0.0 for s in result.test_scores + result.secondary_scores)


class TestSweepK:
    def test_one_row_per_k(self, case4):
        rows = sweep_k(case4, HINGE, [1, 3, 30], 100.0, 2, 0, TEMPLATE)
        assert [k for k, _, _ in rows] == [1, 3, 30]

    def test_endpoints_match_single_cell_grid_searches(self, case4):
        n_train = train_size(case4.n)
        rows = dict((k, (m, s)) for k, m, s in sweep_k(case4, HINGE, [1, n_train], 100.0, 3, 5, TEMPLATE))
        for k in (1, n_train):
            single = grid_search(case4, HINGE, [k], [100.0], 3, 5, TEMPLATE)
            assert rows[k][0] == pytest.approx(single.mean, abs=1e-15)

    def test_rejects_bad_k(self, case4):
        with pytest.raises(ParameterError):
            sweep_k(case4, HINGE, [case4.n], 100.0, 1, 0, TEMPLATE)


class TestCompareObjectives:
    def test_three_objectives(self, case4):
        results = compare_objectives(case4, HINGE, [1.0, 100.0], 2, 0, TEMPLATE, k_points=4)
        assert set(results) == {"maximum", "average", "atk"}
        assert results["maximum"].best_k == 1
        assert results["average"].best_k == train_size(case4.n)
        assert results["atk"].val_score <= min(results["maximum"].val_score, results["average"].val_score) + 1e-12


@pytest.mark.slow
class TestSyntheticReproduction:
    """Qualitative ordering on the frozen synthetic cases (C = 100, 10 splits)."""

    config = TrainConfig(k=1, iterations=3000, eta0=0.1, record_every=3000)

    def sweep(self, case_id, loss):
        data = generate_gaussian_case(case_id, n_total=200, seed=0)
        ks = k_grid(train_size(data.n), 10)
        rows = sweep_k(data, IndividualLoss(loss), ks, 100.0, 10, 0, self.config, jobs=2)
        return {k: mean for k, mean, _ in rows}

    @pytest.mark.parametrize("loss", ["hinge", "logistic"])
    @pytest.mark.parametrize("case_id", [2, 3, 4, 5, 6])
    def test_intermediate_k_beats_both_endpoints(self, case_id, loss):
        errors = self.sweep(case_id, loss)
        ks = sorted(errors)
        best_inner = min(errors[k] for k in ks[1:-1])
        assert best_inner < errors[ks[0]]
        assert best_inner < errors[ks[-1]]

    @pytest.mark.parametrize("loss", ["hinge", "logistic"])
    def test_case2_k_of_three_or_more_beats_k_one(self, loss):
        errors = self.sweep(2, loss)
        assert min(e for k, e in errors.items() if k >= 3) < errors[1]


@pytest.mark.slow
class TestSincReproduction:
    def test_rmse_near_published_level(self):
        data = generate_sinc(n=1000, seed=0)
        config = TrainConfig(k=1, iterations=10_000, eta0=0.5, record_every=10_000)
        C_grid = [10.0**e for e in range(-2, 4)]
        results = compare_objectives(data, IndividualLoss("squared"), C_grid, 10, 0, config, k_points=8, jobs=2)

        average, atk = results["average"], results["atk"]
        assert abs(average.mean - 0.1147) <= 0.015
        assert atk.val_score <= average.val_score + 1e-4
        assert atk.mean <= average.mean + 1e-3
