import itertools
import json
import math

import numpy as np
import pytest

from ksubmax import (
    FeasibleRegion,
    GroundSet,
    KSet,
    LinearConstraint,
    check_k_submodular,
    check_k_submodular_marginals,
    check_monotone,
    count_exact_feasible,
    count_feasible_upto,
    entropy_oracle,
    exhaustive_max,
    join,
    meet,
    modular_oracle,
    table_oracle,
    ObservationMatrix,
)
from ksubmax.verify import InfeasibleRegionError, iter_feasible_labels

from conftest import signed_count_oracle, square_first_subset_oracle


def random_table(rng, n, k, scale=1.0):
    g = GroundSet(n=n, k=k)
    values = {
        labels: float(rng.normal(scale=scale)) if any(labels) else 0.0
        for labels in itertools.product(range(k + 1), repeat=n)
    }
    return table_oracle(g, values)


class TestMeetJoinChecker:
    def test_modular_passes(self):
        o = modular_oracle([[1.0] * 3, [2.0] * 3])
        rep = check_k_submodular(o)
        assert rep.passed and rep.witness is None
        assert rep.checked_pairs == 27 * 28 // 2

    def test_square_fails_with_witness(self):
        o = square_first_subset_oracle()
        rep = check_k_submodular(o)
        assert not rep.passed
        x = KSet(o.ground, tuple(rep.witness["x"]))
        y = KSet(o.ground, tuple(rep.witness["y"]))
        # the witness re-checks as a genuine violation
        assert o.eval(x) + o.eval(y) < o.eval(meet(x, y)) + o.eval(join(x, y)) - 1e-9

    def test_constant_zero_passes(self):
        g = GroundSet(n=2, k=2)
        values = {labels: 0.0 for labels in itertools.product(range(3), repeat=2)}
        assert check_k_submodular(table_oracle(g, values)).passed

    def test_sampled_fallback(self):
        o = modular_oracle([[1.0] * 9, [1.0] * 9])  # 3^9 > default cap
        rep = check_k_submodular(o, samples=500)
        assert rep.passed and rep.sampled


class TestMarginalsChecker:
    def test_signed_count_passes(self):
        assert check_k_submodular_marginals(signed_count_oracle(3)).passed

    def test_square_fails_at_partition_submodularity(self):
        oracle = square_first_subset_oracle()
        rep = check_k_submodular_marginals(oracle)
        assert not rep.passed
        w = rep.witness
        assert w["kind"] == "partition_submodularity"
        # the witness re-checks: restrict f to the partition and test the
        # two-element exchange at the base set
        part, base = w["partition"], w["base_set"]
        i0, j0 = w["i"] - 1, w["j"] - 1

        def fhat(extra):
            labels = tuple(
                part[e0] if (base[e0] or e0 in extra) else 0
                for e0 in range(oracle.ground.n)
            )
            return oracle.eval(KSet(oracle.ground, labels))

        assert fhat({i0}) + fhat({j0}) < fhat({i0, j0}) + fhat(set()) - 1e-9

    def test_sampled_fallback_covers_both_conditions(self):
        rng = np.random.default_rng(3)
        big = modular_oracle([[1.0] * 9, [1.0] * 9])  # beyond the cap: sampled
        rep = check_k_submodular_marginals(big, samples=400, rng=rng)
        assert rep.passed and rep.sampled
        # a failing case caught through sampling: square bump on 7 elements
        n = 7
        g = GroundSet(n=n, k=2)

        from ksubmax.oracles import ValueOracle

        class BigSquare(ValueOracle):
            def __init__(self):
                super().__init__(g, monotone=True, lower=0.0, upper=float(n * n))

            def _value(self, s):
                return float(sum(1 for lab in s.labels if lab == 1) ** 2)

        rep = check_k_submodular_marginals(
            BigSquare(), cap=100, samples=2000, rng=np.random.default_rng(5)
        )
        assert rep.sampled and not rep.passed

    def test_agreement_with_meet_join_checker(self):
        rng = np.random.default_rng(42)
        agreements = 0
        for _ in range(20):
            n = int(rng.integers(2, 4))
            k = int(rng.integers(2, 4))
            o = random_table(rng, n, k)
            a = check_k_submodular(o).passed
            b = check_k_submodular_marginals(o).passed
            assert a == b
            agreements += 1
        assert agreements == 20

    def test_marginal_pair_witness_recheck(self):
        # f with a strongly negative pairwise sum: w1 + w2 < 0
        g = GroundSet(n=2, k=2)
        o = modular_oracle([[1.0, 1.0], [-2.0, -2.0]])
        rep = check_k_submodular_marginals(o)
        assert not rep.passed
        w = rep.witness
        assert w["kind"] == "marginal_pair"
        s = KSet(g, tuple(w["x"]))
        total = o.marginal(s, w["q"], w["element"]) + o.marginal(
            s, w["q_prime"], w["element"]
        )
        assert total < -1e-9


class TestMonotoneChecker:
    def test_entropy_passes(self):
        rng = np.random.default_rng(8)
        obs = ObservationMatrix(rng.integers(0, 3, size=(2, 4, 7)))
        assert check_monotone(entropy_oracle(obs)).passed

    def test_signed_count_fails_on_second_subset(self):
        rep = check_monotone(signed_count_oracle(2))
        assert not rep.passed
        assert rep.witness["q"] == 2
        o = signed_count_oracle(2)
        s = KSet(o.ground, tuple(rep.witness["x"]))
        assert o.marginal(s, rep.witness["q"], rep.witness["element"]) < -1e-9

    def test_constant_zero_passes(self):
        g = GroundSet(n=2, k=2)
        values = {labels: 0.0 for labels in itertools.product(range(3), repeat=2)}
        assert check_monotone(table_oracle(g, values)).passed

    def test_report_json_round_trip(self):
        rep = check_monotone(signed_count_oracle(2))
        doc = json.loads(rep.to_json())
        assert doc["passed"] is False
        assert doc["witness"]["kind"] == "negative_marginal"


class TestExhaustiveMax:
    def test_modular_with_bounds(self):
        o = modular_oracle([[1.0, 1.0], [2.0, 2.0]])
        res = exhaustive_max(o, FeasibleRegion(per_type_bounds=(1, 1)))
        assert res.value == 3.0
        assert res.evaluations == 7
        assert res.complete
        # ties break to the lexicographically smallest label vector
        assert res.kset.labels == (1, 2)

    def test_unconstrained_constant_zero(self):
        g = GroundSet(n=2, k=2)
        values = {labels: 0.0 for labels in itertools.product(range(3), repeat=2)}
        o = table_oracle(g, values)
        res = exhaustive_max(o, FeasibleRegion())
        assert res.value == 0.0
        assert res.kset.labels == (0, 0)
        assert res.evaluations == 9

    def test_budget_exhaustion_is_partial(self):
        o = modular_oracle([[1.0] * 4, [1.0] * 4])
        res = exhaustive_max(o, FeasibleRegion(), budget=10)
        assert not res.complete
        assert res.evaluations == 10

    def test_infeasible_extras_raise(self):
        o = modular_oracle([[1.0], [1.0]])
        region = FeasibleRegion(
            per_type_bounds=(0, 0),
            extra_linear=(LinearConstraint({(1, 1): 1.0}, ">=", 1.0),),
        )
        with pytest.raises(InfeasibleRegionError):
            exhaustive_max(o, region)

    def test_dominates_random_feasible_points(self):
        rng = np.random.default_rng(10)
        obs = ObservationMatrix(rng.integers(0, 3, size=(2, 5, 9)))
        o = entropy_oracle(obs)
        region = FeasibleRegion(per_type_bounds=(2, 2))
        res = exhaustive_max(o, region)
        feas = list(iter_feasible_labels(o.ground, region))
        for _ in range(1000):
            s = feas[int(rng.integers(0, len(feas)))]
            assert res.value >= o.eval(s) - 1e-12


class TestCounting:
    def test_paper_scale_cell(self):
        got = count_exact_feasible(50, 2, (5, 5))
        assert got == math.comb(50, 5) * math.comb(45, 5)
        # three significant figures of the scientific form
        assert f"{got:.2e}" == "2.59e+12"

    def test_tiny_examples(self):
        assert count_exact_feasible(2, 2, (1, 1)) == 2
        assert count_exact_feasible(3, 3, (1, 1, 1)) == 6

    def test_rejects_oversized_bounds(self):
        with pytest.raises(ValueError):
            count_exact_feasible(3, 2, (2, 2))

    def test_exact_count_matches_enumerator(self):
        for n, k, bounds in [(6, 2, (2, 1)), (5, 3, (1, 1, 1)), (10, 2, (5, 5))]:
            g = GroundSet(n=n, k=k)
            region = FeasibleRegion(per_type_bounds=bounds)
            visits = 0
            for s in iter_feasible_labels(g, region):
                sizes = [len(sub) for sub in s.subsets()]
                if tuple(sizes) == tuple(bounds):
                    visits += 1
            assert visits == count_exact_feasible(n, k, bounds)

    def test_upto_count_matches_enumerator(self):
        g = GroundSet(n=5, k=2)
        region = FeasibleRegion(per_type_bounds=(2, 1))
        visits = sum(1 for _ in iter_feasible_labels(g, region))
        assert visits == count_feasible_upto(5, 2, (2, 1))
