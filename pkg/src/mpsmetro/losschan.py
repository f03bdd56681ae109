"""Independent probe loss acting on a symmetric state.

A loss pattern ``(l0, l1)`` removes ``l0`` probes that were in ``|0>`` and
``l1`` that were in ``|1>``. Conditioned on the pattern the output is pure,
and its excitation distribution is still indexed by the original ``n`` (the
phase ``exp(i n phi)`` carries the pre-loss count).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, EmptyBranchError
from .symstate import SymmetricState, log_binomial, log_binomial_array


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")
    return eta


@dataclass(frozen=True)
class LossChannel:
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", check_eta(self.eta))


@dataclass(frozen=True)
class LossBranch:
    """Loss pattern with its probability and conditional distribution.

    ``conditional_weights[k]`` is ``q(n)`` for ``n = l0 + k``.
    """

    l0: int
    l1: int
    probability: float
    conditional_weights: np.ndarray

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.l0, self.l0 + self.conditional_weights.size)


def _log_bernstein(n, l, eta):
    # ln[ C(n,l) eta^(n-l) (1-eta)^l ], -inf outside 0 <= l <= n
    n = np.asarray(n, dtype=float)
    l = np.asarray(l, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_binomial_array(n, l) + xlogy(n - l, eta) + xlogy(l, 1.0 - eta)
    return np.where(np.isnan(out), -np.inf, out)


def survival_weight(n: int, N: int, l0: int, l1: int, eta: float) -> float:
    """Amplitude factor ``beta`` for losing ``(l0, l1)`` from ``|n, N-n>``."""
    eta = check_eta(eta)
    if not 0 <= n <= N or l0 < 0 or l1 < 0:
        raise DomainError(f"need 0 <= n <= N and l0, l1 >= 0 (n={n}, N={N})")
    if l0 > n or l1 > N - n:
        return 0.0
    log_b = (
        log_binomial(n, l0) + xlogy(n - l0, eta) + xlogy(l0, 1.0 - eta)
        + log_binomial(N - n, l1) + xlogy(N - n - l1, eta) + xlogy(l1, 1.0 - eta)
    )
    return math.exp(0.5 * log_b)


@lru_cache(maxsize=64)
def loss_kernels(N: int, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Squared survival factors as two ``(N+1, N+1)`` matrices.

    ``K0[l0, n] = B^n_{l0}`` and ``K1[l1, n] = B^{N-n}_{l1}``, so the squared
    weight of branch ``(l0, l1)`` on ``n`` is ``K0[l0, n] * K1[l1, n]``.
    The arrays are read-only and shared between callers.
    """
    eta = check_eta(eta)
    n = np.arange(N + 1)
    l = n[:, None]
    k0 = np.exp(_log_bernstein(n[None, :], l, eta))
    k1 = np.exp(_log_bernstein(N - n[None, :], l, eta))
    k0.setflags(write=False)
    k1.setflags(write=False)
    return k0, k1


def branch_probability(state: SymmetricState, l0: int, l1: int, eta: float) -> float:
    weights = _branch_weights(state, l0, l1, eta)
    return math.fsum(weights)


def branch_probabilities(state: SymmetricState, eta: float) -> np.ndarray:
    """Matrix ``p[l0, l1]``; entries with ``l0 + l1 > N`` are zero."""
    k0, k1 = loss_kernels(state.n_probes, float(eta))
    return (k0 * state.probabilities) @ k1.T


def _branch_weights(state, l0, l1, eta):
    eta = check_eta(eta)
    N = state.n_probes
    if l0 < 0 or l1 < 0 or l0 + l1 > N:
        raise DomainError(f"invalid loss pattern ({l0}, {l1}) for N={N}")
    n = np.arange(l0, N - l1 + 1)
    log_beta_sq = _log_bernstein(n, l0, eta) + _log_bernstein(N - n, l1, eta)
    return state.probabilities[l0 : N - l1 + 1] * np.exp(log_beta_sq)


def conditional_distribution(
    state: SymmetricState, l0: int, l1: int, eta: float
) -> LossBranch:
    weights = _branch_weights(state, l0, l1, eta)
    p = math.fsum(weights)
    if p <= 0.0:
        raise EmptyBranchError(f"loss pattern ({l0}, {l1}) has zero probability")
    return LossBranch(l0, l1, p, weights / p)


def iter_branches(
    state: SymmetricState, eta: float, cutoff: float = 0.0
) -> Iterator[LossBranch]:
    """Yield every loss branch with probability above ``cutoff``, lazily."""
    N = state.n_probes
    for l0 in range(N + 1):
        for l1 in range(N - l0 + 1):
            weights = _branch_weights(state, l0, l1, eta)
            p = math.fsum(weights)
            if p > cutoff:
                yield LossBranch(l0, l1, p, weights / p)
