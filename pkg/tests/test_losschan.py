import itertools
import math

import numpy as np
import pytest

from conftest import random_state
from mpsmetro.errors import DomainError, EmptyBranchError
from mpsmetro.losschan import (
    LossChannel,
    branch_probabilities,
    branch_probability,
    conditional_distribution,
    iter_branches,
    survival_weight,
)
from mpsmetro.symstate import noon_state, normalize


def test_survival_weight_examples():
    for n in range(6):
        assert survival_weight(n, 5, 0, 0, 0.7) == pytest.approx(0.7 ** 2.5, rel=1e-14)
    assert survival_weight(2, 5, 3, 0, 0.7) == 0.0
    assert survival_weight(2, 2, 1, 0, 0.5) == pytest.approx(math.sqrt(0.5), rel=1e-14)


@pytest.mark.parametrize("N", [1, 5, 30, 200])
@pytest.mark.parametrize("eta", [0.0, 0.13, 0.5, 0.99, 1.0])
def test_beta_completeness(N, eta):
    for n in {0, N // 3, N}:
        total = math.fsum(
            survival_weight(n, N, l0, l1, eta) ** 2
            for l0 in range(n + 1)
            for l1 in range(N - n + 1)
        )
        assert total == pytest.approx(1.0, abs=1e-10)


def _pattern_enumeration(amps, eta):
    # sum over every subset of lost probes, independently of the binomial algebra
    N = len(amps) - 1
    out = {}
    for n, a in enumerate(amps):
        for lost in itertools.product((0, 1), repeat=N):
            l0 = sum(lost[:n])
            l1 = sum(lost[n:])
            w = np.prod([(1 - eta) if x else eta for x in lost])
            out[(l0, l1)] = out.get((l0, l1), 0.0) + abs(a) ** 2 * w
    return out


def test_branch_probability_hand_enumeration():
    s = normalize([1, 1])
    assert branch_probability(s, 0, 0, 0.5) == pytest.approx(0.5)
    assert branch_probability(s, 1, 0, 0.5) == pytest.approx(0.25)
    assert branch_probability(s, 0, 1, 0.5) == pytest.approx(0.25)


def test_branch_probability_matches_subset_enumeration(rng):
    for N in (2, 3, 5):
        s = random_state(rng, N)
        ref = _pattern_enumeration(s.amplitudes, 0.37)
        for (l0, l1), p in ref.items():
            assert branch_probability(s, l0, l1, 0.37) == pytest.approx(p, abs=1e-14)


def test_unit_transmissivity_keeps_everything(rng):
    s = random_state(rng, 6)
    p = branch_probabilities(s, 1.0)
    assert p[0, 0] == pytest.approx(1.0)
    assert np.sum(p) - p[0, 0] == 0.0


def test_probabilities_sum_to_one_on_random_states():
    rng = np.random.default_rng(99)
    for _ in range(100):
        N = int(rng.integers(1, 201))
        eta = float(rng.uniform(0, 1))
        p = branch_probabilities(random_state(rng, N), eta)
        assert np.all(p >= 0)
        assert abs(math.fsum(p.ravel()) - 1.0) <= 1e-10


def test_zero_transmissivity_keeps_only_total_loss(rng):
    N = 7
    p = branch_probabilities(random_state(rng, N), 0.0)
    l0, l1 = np.nonzero(p)
    assert np.all(l0 + l1 == N)


def test_lazy_branches_agree_with_matrix(rng):
    s = random_state(rng, 12)
    p = branch_probabilities(s, 0.6)
    seen = 0
    for b in iter_branches(s, 0.6):
        assert b.probability == pytest.approx(p[b.l0, b.l1], rel=1e-12)
        assert math.fsum(b.conditional_weights) == pytest.approx(1.0, abs=1e-12)
        assert b.n_values[0] == b.l0 and b.n_values[-1] == 12 - b.l1
        seen += 1
    assert seen == 13 * 14 // 2
    assert sum(1 for _ in iter_branches(s, 0.6, cutoff=1e-3)) < seen


def test_conditional_distribution_examples(rng):
    s = random_state(rng, 5)
    b = conditional_distribution(s, 0, 0, 1.0)
    assert np.allclose(b.conditional_weights, s.probabilities)
    b = conditional_distribution(noon_state(2), 1, 0, 0.4)
    assert list(b.n_values) == [1, 2]
    assert np.allclose(b.conditional_weights, [0.0, 1.0])
    b = conditional_distribution(normalize([1, 1]), 0, 0, 0.5)
    assert np.allclose(b.conditional_weights, [0.5, 0.5])


def test_empty_branch_and_bad_eta():
    with pytest.raises(EmptyBranchError):
        conditional_distribution(noon_state(2), 1, 1, 0.5)
    with pytest.raises(DomainError):
        LossChannel(1.5)
    with pytest.raises(DomainError):
        branch_probabilities(noon_state(2), -0.1)
