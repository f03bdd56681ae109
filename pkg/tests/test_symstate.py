import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpsmetro.errors import DegenerateStateError, DomainError
from mpsmetro.symstate import (
    SymmetricState,
    excitation_moments,
    i_power,
    log_binomial,
    log_binomial_array,
    noon_state,
    normalize,
    product_state,
)


def test_log_binomial_small_values():
    assert log_binomial(0, 0) == 0.0
    assert log_binomial(5, 2) == pytest.approx(math.log(10), rel=1e-15)


@pytest.mark.parametrize("n,k", [(500, 250), (1000, 3), (5000, 2500), (200, 0), (77, 77)])
def test_log_binomial_matches_big_integers(n, k):
    # math.comb is exact; math.log of a big int is correctly rounded
    assert log_binomial(n, k) == pytest.approx(math.log(math.comb(n, k)), rel=1e-12, abs=1e-15)


def test_log_binomial_array_agrees_with_scalar():
    n = 300
    k = np.arange(n + 1)
    arr = log_binomial_array(n, k)
    ref = np.array([math.log(math.comb(n, int(j))) for j in k])
    assert np.allclose(arr, ref, rtol=1e-12, atol=1e-12)
    assert np.all(np.isneginf(log_binomial_array(5, np.array([-1, 6]))))


@pytest.mark.parametrize("n,k", [(-1, 0), (3, 4), (3, -1)])
def test_log_binomial_rejects_bad_input(n, k):
    with pytest.raises(DomainError):
        log_binomial(n, k)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ([2, 0, 0], [1, 0, 0]),
        ([1, 1], [1 / math.sqrt(2), 1 / math.sqrt(2)]),
        ([3 + 4j, 0], [(3 + 4j) / 5, 0]),
    ],
)
def test_normalize_examples(raw, expected):
    assert np.allclose(normalize(raw).amplitudes, expected, atol=1e-15)


def test_normalize_handles_huge_and_tiny_scales():
    assert np.allclose(normalize([1e300, 1e300]).amplitudes, [2**-0.5] * 2)
    assert np.allclose(normalize([1e-300, 0.0]).amplitudes, [1.0, 0.0])


@pytest.mark.parametrize("raw", [[0, 0, 0], [np.nan, 1], [np.inf, 1]])
def test_normalize_rejects_degenerate(raw):
    with pytest.raises(DegenerateStateError):
        normalize(raw)


def test_state_validation():
    with pytest.raises(ValueError):
        SymmetricState(2, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        SymmetricState(1, np.array([1.0, 1.0]))
    s = SymmetricState(1, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2.0


@given(st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
                min_size=2, max_size=30).filter(lambda v: max(abs(x) for x in v) > 1e-6))
def test_normalize_idempotent(raw):
    once = normalize(raw)
    assert np.max(np.abs(normalize(once.amplitudes).amplitudes - once.amplitudes)) <= 1e-14


@pytest.mark.parametrize(
    "amps,mean,var",
    [
        ([2**-0.5, 0, 0, 0, 2**-0.5], 2.0, 4.0),
        ([0, 0, 0, 1, 0, 0], 3.0, 0.0),
        ([2**-0.5, 2**-0.5, 0], 0.5, 0.25),
    ],
)
def test_excitation_moment_examples(amps, mean, var):
    m, v = excitation_moments(normalize(amps))
    assert m == pytest.approx(mean, abs=1e-14)
    assert v == pytest.approx(var, abs=1e-14)


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_variance_invariant_under_rephasing(N, seed):
    rng = np.random.default_rng(seed)
    s = normalize(rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1))
    r = normalize(s.amplitudes * np.exp(1j * rng.uniform(0, 2 * np.pi, N + 1)))
    assert excitation_moments(r)[1] == pytest.approx(excitation_moments(s)[1], rel=1e-12, abs=1e-14)


def test_reference_states():
    assert np.allclose(noon_state(2).amplitudes, [2**-0.5, 0, 2**-0.5])
    assert np.allclose(product_state(1, "real").amplitudes, [2**-0.5, 2**-0.5])
    assert np.allclose(product_state(2, "i_power").amplitudes, [0.5, 1j / math.sqrt(2), -0.5])
    assert np.array_equal(i_power(np.arange(5)), np.array([1, 1j, -1, -1j, 1]))
    with pytest.raises(DomainError):
        product_state(3, "bogus")


@pytest.mark.parametrize("N", [1, 2, 7, 50, 123, 200])
@pytest.mark.parametrize("gauge", ["real", "i_power"])
def test_product_state_moments(N, gauge):
    mean, var = excitation_moments(product_state(N, gauge))
    assert mean == pytest.approx(N / 2, abs=1e-12)
    assert var == pytest.approx(N / 4, abs=1e-12)
