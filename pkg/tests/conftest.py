import itertools

import numpy as np
import pytest

from ksubmax import GroundSet, KSet, modular_oracle, table_oracle
from ksubmax._kernels import available_kernels


@pytest.fixture(params=sorted(available_kernels()))
def kernel(request):
    return available_kernels()[request.param]


def table_from_oracle(oracle):
    """Materialize an oracle into a label -> value dict."""
    ground = oracle.ground
    out = {}
    for labels in itertools.product(range(ground.k + 1), repeat=ground.n):
        out[labels] = oracle.eval(KSet(ground, labels))
    return out


def square_first_subset_oracle(n=2):
    """f(S1, S2) = |S1|^2: supermodular in the first component, so it
    fails every k-submodularity check (k=2)."""
    ground = GroundSet(n=n, k=2)
    values = {}
    for labels in itertools.product(range(3), repeat=n):
        values[labels] = float(sum(1 for lab in labels if lab == 1) ** 2)
    return table_oracle(ground, values)


def signed_count_oracle(n):
    """f(S1, S2) = |S1| - |S2|: k-submodular but not monotone."""
    return modular_oracle([[1.0] * n, [-1.0] * n])


def random_nonmonotone_ksub_table(rng, n=3, k=2):
    """Random non-monotone oracle that still passes the meet/join check.

    Starts from a modular oracle with negative weights (pairwise sums kept
    non-negative) and perturbs it with a scaled random coverage component,
    shrinking the perturbation until monotonicity fails while the meet/join
    inequality verifiably holds."""
    from ksubmax import check_k_submodular, check_monotone, coverage_oracle

    ground = GroundSet(n=n, k=k)
    pos = rng.uniform(0.5, 1.5, size=n)
    neg = -rng.uniform(0.3, 0.9, size=n) * pos  # pairwise sums stay >= 0
    weights = np.vstack([pos] + [neg] * (k - 1))
    base = table_from_oracle(modular_oracle(weights.tolist()))

    universe = 6
    covers = [
        [list(np.flatnonzero(rng.random(universe) < 0.4)) for _ in range(n)]
        for _ in range(k)
    ]
    bump = table_from_oracle(coverage_oracle(universe, covers, rng.uniform(0.2, 1.0, universe)))

    scale = 0.5
    while True:
        values = {labels: base[labels] + scale * bump[labels] for labels in base}
        oracle = table_oracle(ground, values)
        if check_monotone(oracle).passed:
            scale *= 0.5  # the bump drowned out the negative marginals
            continue
        assert check_k_submodular(oracle).passed
        return oracle
