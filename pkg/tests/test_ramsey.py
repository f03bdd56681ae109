import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from qubit_oracle import ramsey_moments
from mpsmetro.errors import DomainError, NoSignalError
from mpsmetro.qfi import exact_qfi, precision_from_qfi
from mpsmetro.ramsey import collective_moments, ramsey_operators, ramsey_precision, ramsey_variance
from mpsmetro.symstate import i_power, noon_state, normalize, product_state


def test_moment_examples():
    m = collective_moments(product_state(2, "i_power"))
    assert (m.jx_mean, m.jy_mean, m.jx_var) == pytest.approx((0.0, 1.0, 0.5), abs=1e-14)
    m = collective_moments(noon_state(4))
    assert (m.jx_mean, m.jy_mean, m.jx_var) == pytest.approx((0.0, 0.0, 1.0), abs=1e-14)
    for N in (1, 5, 12):
        top = np.zeros(N + 1)
        top[N] = 1.0
        m = collective_moments(normalize(top))
        assert (m.jx_mean, m.jy_mean, m.jx_var) == pytest.approx((0.0, 0.0, N / 4), abs=1e-13)


def test_moments_match_pauli_construction(rng):
    for N in (1, 2, 3, 5, 7):
        s = random_state(rng, N)
        m = collective_moments(s)
        ex, ey, var = ramsey_moments(s.amplitudes)
        assert m.jx_mean == pytest.approx(ex, abs=1e-12)
        assert m.jy_mean == pytest.approx(ey, abs=1e-12)
        assert m.jx_var == pytest.approx(var, abs=1e-12)


def test_dense_operators_agree(rng):
    s = random_state(rng, 9)
    jx, jy, jx2 = ramsey_operators(9)
    a = s.amplitudes
    m = collective_moments(s)
    assert np.vdot(a, jx @ a).real == pytest.approx(m.jx_mean, abs=1e-13)
    assert np.vdot(a, jy @ a).real == pytest.approx(m.jy_mean, abs=1e-13)
    assert np.vdot(a, jx2 @ a).real == pytest.approx(m.jx_second, abs=1e-12)


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_i_power_gauge_has_no_jx_signal(N, seed):
    r = np.random.default_rng(seed).normal(size=N + 1)
    m = collective_moments(normalize(i_power(np.arange(N + 1)) * r))
    assert abs(m.jx_mean) <= 1e-13


@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_reversal_with_conjugation(N, seed):
    s = random_state(np.random.default_rng(seed), N)
    m = collective_moments(s)
    r = collective_moments(normalize(np.conj(s.amplitudes[::-1])))
    assert abs(r.jx_mean) == pytest.approx(abs(m.jx_mean), abs=1e-12)
    assert abs(r.jy_mean) == pytest.approx(abs(m.jy_mean), abs=1e-12)
    assert r.jx_var == pytest.approx(m.jx_var, abs=1e-12)


def test_product_state_precision():
    assert ramsey_precision(product_state(10, "i_power"), 0.9) == pytest.approx(1 / 3, abs=1e-14)
    assert ramsey_precision(product_state(2, "i_power"), 0.5) == pytest.approx(1.0, abs=1e-14)
    for N in (1, 4, 33, 100):
        assert ramsey_precision(product_state(N, "i_power"), 1.0) == pytest.approx(N**-0.5, rel=1e-13)
        assert ramsey_precision(product_state(N, "i_power"), 0.3) == pytest.approx(
            1 / math.sqrt(0.3 * N), rel=1e-13
        )


def test_variance_helper_handles_scale():
    s = product_state(6, "i_power")
    v = ramsey_variance(7.5 * s.amplitudes, 0.8)
    assert v == pytest.approx(ramsey_precision(s, 0.8) ** 2, rel=1e-13)
    assert ramsey_variance(np.zeros(4), 0.8) == math.inf
    assert ramsey_variance(product_state(4).amplitudes, 0.8) == math.inf


def test_errors():
    with pytest.raises(NoSignalError):
        ramsey_precision(product_state(4, "real"), 0.9)
    with pytest.raises(DomainError):
        ramsey_precision(product_state(4, "i_power"), 0.0)


def test_never_beats_quantum_cramer_rao():
    rng = np.random.default_rng(8)
    for _ in range(30):
        N = int(rng.integers(1, 21))
        eta = float(rng.uniform(0.2, 1.0))
        r = rng.normal(size=N + 1) + 0.8
        s = normalize(i_power(np.arange(N + 1)) * r)
        assert ramsey_precision(s, eta) >= precision_from_qfi(exact_qfi(s, eta)) - 1e-9
