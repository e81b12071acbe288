import numpy as np
import pytest

from core.aggregate import (
    AggregateSpec,
    aggregate_value,
    all_aggregates,
    hinge_compose,
    top_k_sum_sorted,
    top_k_sum_variational,
    variational_objective,
)
from core.errors import DomainError, ParameterError, ShapeError


def atk(losses, k):
    return aggregate_value(losses, AggregateSpec("atk", k))


def topk(losses, k):
    return aggregate_value(losses, AggregateSpec("topk", k))


class TestTopKSum:
    def test_documented_values(self):
        assert top_k_sum_sorted([3, 1, 2], 2) == 5
        assert top_k_sum_sorted([4, 4, 4], 2) == 8
        assert top_k_sum_sorted([0.7, 0.1, 0.9, 0.3], 3) == pytest.approx(1.9, abs=1e-15)

    def test_variational_documented_values(self):
        assert top_k_sum_variational([3, 1, 2], 2) == (5.0, 2.0)
        assert top_k_sum_variational([5], 1) == (5.0, 5.0)
        assert top_k_sum_variational([0, 0, 0], 2) == (0.0, 0.0)

    def test_errors(self):
        with pytest.raises(ParameterError):
            top_k_sum_sorted([1, 2], 3)
        with pytest.raises(ParameterError):
            top_k_sum_variational([1, 2], 0)
        with pytest.raises(DomainError):
            top_k_sum_sorted([1, -0.5], 1)
        with pytest.raises(ShapeError):
            top_k_sum_sorted([], 1)

    def test_variational_matches_sorted_oracle(self, rng):
        for _ in range(1000):
            x = rng.uniform(0, 10, rng.integers(1, 65))
            ordered = np.sort(x)[::-1]
            for k in range(1, x.size + 1):
                value, lam = top_k_sum_variational(x, k)
                assert abs(value - top_k_sum_sorted(x, k)) <= 1e-9
                assert lam == ordered[k - 1]

    def test_lambda_star_minimises(self, rng):
        x = rng.uniform(0, 10, 30)
        for k in (1, 7, 30):
            value, _ = top_k_sum_variational(x, k)
            for lam in np.r_[0.0, x, rng.uniform(0, 12, 50)]:
                assert variational_objective(x, k, lam) >= value - 1e-9


class TestAggregateValue:
    losses = [4, 2, 0, 1]

    def test_documented_values(self):
        assert atk(self.losses, 2) == 3.0
        assert topk(self.losses, 3) == 1.0
        assert aggregate_value(self.losses, AggregateSpec("abk", 2)) == 0.5
        assert atk(self.losses, 4) == 1.75
        assert aggregate_value(self.losses, AggregateSpec("average")) == 1.75
        assert aggregate_value(self.losses, AggregateSpec("maximum")) == 4.0

    def test_spec_validation(self):
        with pytest.raises(ParameterError):
            AggregateSpec("median")
        with pytest.raises(ParameterError):
            AggregateSpec("atk")
        assert AggregateSpec("average").resolve_k(9) == 9
        assert AggregateSpec("maximum").resolve_k(9) == 1

    def test_reductions(self, rng):
        for _ in range(1000):
            x = rng.uniform(0, 10, rng.integers(1, 40))
            assert abs(atk(x, 1) - x.max()) <= 1e-12
            assert abs(atk(x, x.size) - x.mean()) <= 1e-12

    def test_difference_of_convex_identity(self, rng):
        for _ in range(1000):
            x = rng.uniform(0, 10, rng.integers(2, 40))
            k = int(rng.integers(2, x.size + 1))
            lhs = k * atk(x, k) - (k - 1) * atk(x, k - 1)
            assert lhs == pytest.approx(topk(x, k), abs=1e-12, rel=1e-12)

    def test_upper_bound_on_top_k(self, rng):
        x = rng.uniform(0, 10, 25)
        for k in range(1, 26):
            assert atk(x, k) >= topk(x, k)
        assert atk(np.full(6, 2.5), 4) == topk(np.full(6, 2.5), 4)

    def test_convex_in_losses(self, rng):
        for _ in range(200):
            a, b = rng.uniform(0, 10, (2, 15))
            theta = rng.uniform()
            k = int(rng.integers(1, 16))
            mixed = atk(theta * a + (1 - theta) * b, k)
            assert mixed <= theta * atk(a, k) + (1 - theta) * atk(b, k) + 1e-12

    def test_monotone_in_each_entry(self, rng):
        x = rng.uniform(0, 10, 12)
        for i in range(12):
            bumped = x.copy()
            bumped[i] += 1.0
            for k in (1, 5, 12):
                assert atk(bumped, k) >= atk(x, k)

    def test_all_aggregates(self):
        values = all_aggregates(self.losses, 2)
        assert values == {"average": 1.75, "maximum": 4.0, "topk": 2.0, "atk": 3.0, "abk": 0.5}


class TestHingeCompose:
    def test_documented_values(self):
        assert hinge_compose(2, 0.5, 1) == 0.5
        assert hinge_compose(1, 3, 0) == 0
        assert hinge_compose(0, 0, -2) == 2

    def test_rejects_negative_arguments(self):
        with pytest.raises(DomainError):
            hinge_compose(-1, 0, 0)
        with pytest.raises(DomainError):
            hinge_compose(0, -1, 0)

    def test_identity_on_random_triples(self, rng):
        a = rng.uniform(0, 10, 100_000)
        b = rng.uniform(0, 10, 100_000)
        ell = rng.uniform(-10, 10, 100_000)
        nested = np.maximum(np.maximum(a - ell, 0.0) - b, 0.0)
        composed = np.maximum(a - b - ell, 0.0)
        np.testing.assert_allclose(composed, nested, atol=1e-12, rtol=0)
        for i in range(0, 100_000, 997):
            assert hinge_compose(a[i], b[i], ell[i]) == pytest.approx(nested[i], abs=1e-12)
