import itertools
import math
from collections import Counter

import numpy as np
import pytest

from ksubmax import (
    GroundSet,
    KSet,
    ObservationMatrix,
    coverage_oracle,
    entropy_oracle,
    modular_oracle,
    table_oracle,
    xi_bound,
    xi_exact,
    xi_exact_all,
)
from ksubmax.oracles import XiEnumerationError

from conftest import signed_count_oracle, table_from_oracle


def plus_two_oracle(n=2):
    """f(S1, S2) = |S1| + 2|S2|."""
    return modular_oracle([[1.0] * n, [2.0] * n])


class TestModular:
    def test_eval_example(self):
        o = plus_two_oracle()
        s = KSet.from_subsets(o.ground, [{1}, {2}])
        assert o.eval(s) == 3.0

    def test_zero_weights(self):
        o = modular_oracle([[0.0, 0.0], [0.0, 0.0]])
        for labels in itertools.product(range(3), repeat=2):
            assert o.eval(KSet(o.ground, labels)) == 0.0

    def test_signed_count_construction(self):
        o = signed_count_oracle(2)
        s = KSet.from_subsets(o.ground, [{1}, {2}])
        assert o.eval(s) == 0.0
        assert not o.monotone

    def test_marginals(self):
        o = plus_two_oracle()
        empty = KSet.empty(o.ground)
        assert o.marginal(empty, 2, 1) == 2.0
        o2 = signed_count_oracle(2)
        assert o2.marginal(KSet.empty(o2.ground), 2, 1) == -1.0

    def test_marginal_rejects_assigned(self):
        o = plus_two_oracle()
        s = KSet.from_subsets(o.ground, [{1}, set()])
        with pytest.raises(ValueError):
            o.marginal(s, 2, 1)

    def test_eval_counter(self):
        o = plus_two_oracle()
        o.eval(KSet.empty(o.ground))
        o.marginal(KSet.empty(o.ground), 1, 1)
        assert o.evaluations == 3


class TestEntropy:
    def test_uniform_two_outcomes(self):
        obs = ObservationMatrix(np.array([[[0, 0, 1, 1]]]))
        o = entropy_oracle(obs)
        s = KSet.from_subsets(o.ground, [{1}])
        assert o.eval(s) == pytest.approx(math.log(2), abs=1e-12)

    def test_empty_placement(self):
        obs = ObservationMatrix(np.array([[[0, 0, 1, 1]]]))
        o = entropy_oracle(obs)
        assert o.eval(KSet.empty(o.ground)) == 0.0

    def test_joint_four_outcomes(self):
        values = np.zeros((2, 2, 4), dtype=np.int64)
        values[0, 0] = [0, 0, 1, 1]  # feature 1 at location 1
        values[1, 1] = [0, 1, 0, 1]  # feature 2 at location 2
        o = entropy_oracle(ObservationMatrix(values))
        s = KSet.from_subsets(o.ground, [{1}, {2}])
        assert o.eval(s) == pytest.approx(math.log(4), abs=1e-12)

    def test_constant_readings(self):
        obs = ObservationMatrix(np.zeros((2, 3, 5), dtype=np.int64))
        o = entropy_oracle(obs)
        for labels in itertools.product(range(3), repeat=3):
            assert o.eval(KSet(o.ground, labels)) == 0.0

    def test_marginal_matches_eval_difference(self):
        obs = ObservationMatrix(np.array([[[0, 0, 1, 1]], [[0, 1, 1, 0]]]))
        o = entropy_oracle(obs)
        empty = KSet.empty(o.ground)
        direct = o.eval(empty.with_element(1, 1)) - o.eval(empty)
        assert o.marginal(empty, 1, 1) == pytest.approx(direct, abs=0)
        assert direct == pytest.approx(math.log(2), abs=1e-12)

    def test_log_base_flag(self):
        obs = ObservationMatrix(np.array([[[0, 0, 1, 1]]]))
        o = entropy_oracle(obs, log_base=2.0)
        s = KSet.from_subsets(o.ground, [{1}])
        assert o.eval(s) == pytest.approx(1.0, abs=1e-12)

    def test_bounds_and_monotone_growth_fuzz(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            k, n, t = int(rng.integers(2, 4)), int(rng.integers(2, 6)), int(rng.integers(2, 30))
            obs = ObservationMatrix(rng.integers(0, 3, size=(k, n, t)))
            o = entropy_oracle(obs)
            for _ in range(20):
                labels = tuple(int(v) for v in rng.integers(0, k + 1, n))
                s = KSet(o.ground, labels)
                val = o.eval(s)
                assert 0.0 <= val <= math.log(t) + 1e-12
                free = s.unassigned()
                if free:
                    e = int(rng.choice(free))
                    q = int(rng.integers(1, k + 1))
                    assert o.marginal(s, q, e) >= -1e-9

    def test_independent_tally(self):
        # frequency tally written with Counter, no shared code with the oracle
        rng = np.random.default_rng(5)
        obs = ObservationMatrix(rng.integers(0, 4, size=(2, 4, 17)))
        o = entropy_oracle(obs)
        for _ in range(50):
            labels = tuple(int(v) for v in rng.integers(0, 3, 4))
            s = KSet(o.ground, labels)
            placed = [(lab - 1, e0) for e0, lab in enumerate(labels) if lab]
            tallies = Counter(
                tuple(int(obs.values[q0, e0, tt]) for q0, e0 in placed)
                for tt in range(obs.t_samples)
            )
            t = obs.t_samples
            expected = -math.fsum(
                (c / t) * math.log(c / t) for c in tallies.values()
            ) if placed else 0.0
            assert o.eval(s) == expected

    def test_large_code_space_fallback(self):
        # force the row-comparison path with huge per-feature bin counts
        rng = np.random.default_rng(9)
        values = rng.integers(0, 2**40, size=(2, 8, 12))
        o = entropy_oracle(ObservationMatrix(values))
        full = KSet(o.ground, tuple([1, 2] * 4))
        assert o.eval(full) == pytest.approx(math.log(12), abs=1e-12)


class TestCoverage:
    def test_symmetric_assignment(self):
        o = coverage_oracle(1, [[[0]], [[0]]])
        g = o.ground
        assert o.eval(KSet.from_subsets(g, [{1}, set()])) == 1.0
        assert o.eval(KSet.from_subsets(g, [set(), {1}])) == 1.0

    def test_full_coverage(self):
        covers = [[[0, 1], [2]], [[3], [4]]]
        o = coverage_oracle(5, covers)
        s = KSet.from_subsets(o.ground, [{1}, {2}])
        # brute-force union of the selected cover sets
        assert o.eval(s) == len({0, 1} | {4})
        full_val = o.eval(KSet.from_subsets(o.ground, [{1, 2}, set()]))
        assert full_val == 3.0

    def test_monotone_flag(self):
        o = coverage_oracle(2, [[[0], [1]]])
        assert o.monotone


class TestTable:
    def test_square_lookup(self):
        g = GroundSet(n=2, k=2)
        values = {
            labels: float(sum(1 for lab in labels if lab == 1) ** 2)
            for labels in itertools.product(range(3), repeat=2)
        }
        o = table_oracle(g, values)
        assert o.eval(KSet.from_subsets(g, [{1, 2}, set()])) == 4.0
        assert o.eval(KSet.empty(g)) == 0.0

    def test_missing_entry_rejected(self):
        g = GroundSet(n=2, k=2)
        with pytest.raises(ValueError):
            table_oracle(g, {(0, 0): 0.0})

    def test_nonzero_empty_rejected(self):
        g = GroundSet(n=1, k=1)
        with pytest.raises(ValueError):
            table_oracle(g, {(0,): 1.0, (1,): 2.0})

    def test_round_trip_with_modular(self):
        base = modular_oracle([[1.0, -0.5], [2.0, 0.25]])
        o = table_oracle(base.ground, table_from_oracle(base))
        for labels in itertools.product(range(3), repeat=2):
            s = KSet(base.ground, labels)
            assert o.eval(s) == base.eval(s)


class TestXi:
    def test_signed_count_exact(self):
        for n in (2, 3, 4):
            o = signed_count_oracle(n)
            for e in range(1, n + 1):
                assert xi_exact(o, 1, e) == pytest.approx(1.0, abs=0)
                assert xi_exact(o, 2, e) == pytest.approx(-1.0, abs=0)

    def test_monotone_oracle_nonnegative(self):
        o = coverage_oracle(4, [[[0], [1]], [[2], [3]]])
        xi = xi_exact_all(o)
        assert (xi >= 0).all()

    def test_bound_definition(self):
        o = modular_oracle([[5.0, 5.0], [0.0, 0.0]])
        assert o.value_lower == 0.0 and o.value_upper == 10.0
        assert xi_bound(o) == pytest.approx(-10.0)

    def test_bound_below_exact(self):
        o = signed_count_oracle(3)
        assert o.value_lower == -3.0 and o.value_upper == 3.0
        zeta = xi_bound(o)
        assert zeta == pytest.approx(-6.0)
        xi = xi_exact_all(o)
        assert (zeta <= xi + 1e-12).all()

    def test_bound_below_exact_on_random_tables(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            g = GroundSet(n=3, k=2)
            values = {
                labels: float(rng.normal()) if any(labels) else 0.0
                for labels in itertools.product(range(3), repeat=3)
            }
            o = table_oracle(g, values)
            zeta = xi_bound(o)
            assert (zeta <= xi_exact_all(o) + 1e-12).all()

    def test_cap_guard(self):
        o = modular_oracle([[1.0] * 20, [1.0] * 20])
        with pytest.raises(XiEnumerationError):
            xi_exact(o, 1, 1, cap=1000)


class TestInvariantFuzz:
    def test_marginal_equals_eval_difference_exhaustive(self):
        # exact agreement for every enumerable (s, q, e) with k*n <= 12
        oracles = [
            plus_two_oracle(3),
            signed_count_oracle(3),
            coverage_oracle(4, [[[0], [1], [2]], [[1], [3], [0]]]),
        ]
        for o in oracles:
            g = o.ground
            for labels in itertools.product(range(g.k + 1), repeat=g.n):
                s = KSet(g, labels)
                for e in s.unassigned():
                    for q in range(1, g.k + 1):
                        direct = o.eval(s.with_element(e, q)) - o.eval(s)
                        assert o.marginal(s, q, e) == direct

    def test_monotone_marginals_fuzz(self):
        rng = np.random.default_rng(3)
        obs = ObservationMatrix(rng.integers(0, 3, size=(2, 5, 12)))
        oracles = [
            plus_two_oracle(5),
            entropy_oracle(obs),
            coverage_oracle(6, [[[0], [1], [2], [3], [4]], [[5], [0], [2], [1], [3]]]),
        ]
        checks = 0
        while checks < 10_000:
            o = oracles[int(rng.integers(0, len(oracles)))]
            g = o.ground
            labels = tuple(int(v) for v in rng.integers(0, g.k + 1, g.n))
            s = KSet(g, labels)
            free = s.unassigned()
            if not free:
                continue
            e = int(rng.choice(free))
            q = int(rng.integers(1, g.k + 1))
            assert o.marginal(s, q, e) >= -1e-9
            checks += 1

    def test_pairwise_marginal_sums_fuzz(self):
        rng = np.random.default_rng(13)
        obs = ObservationMatrix(rng.integers(0, 2, size=(2, 4, 10)))
        oracles = [
            entropy_oracle(obs),
            signed_count_oracle(4),
            coverage_oracle(5, [[[0], [1], [2], [3]], [[4], [2], [0], [1]]]),
        ]
        for o in oracles:
            g = o.ground
            for _ in range(400):
                labels = tuple(int(v) for v in rng.integers(0, g.k + 1, g.n))
                s = KSet(g, labels)
                free = s.unassigned()
                if not free:
                    continue
                e = int(rng.choice(free))
                assert o.marginal(s, 1, e) + o.marginal(s, 2, e) >= -1e-9


class TestObservationCsv:
    def test_round_trip(self):
        rng = np.random.default_rng(2)
        obs = ObservationMatrix(rng.integers(0, 3, size=(3, 4, 5)))
        back = ObservationMatrix.from_csv(obs.to_csv())
        assert (back.values == obs.values).all()

    def test_header_validation(self):
        with pytest.raises(ValueError):
            ObservationMatrix.from_csv("loc,sample,f1\n1,1,0\n")
