"""Fisher-information figures of merit for lossy phase estimation.

``approx_qfi`` is the loss-branch weighted sum of pure-state QFIs, which
upper-bounds the true QFI by convexity. ``exact_qfi`` diagonalizes the
output state sector by sector and is the small-N oracle for it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError, UndefinedPrecisionError
from .losschan import check_eta, loss_kernels
from .symstate import SymmetricState, excitation_moments

ORACLE_MAX_N = 30
EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class QfiValue:
    value: float
    kind: str  # "pure" | "approximate" | "exact"

    def __post_init__(self):
        if self.kind not in ("pure", "approximate", "exact"):
            raise DomainError(f"unknown QFI kind {self.kind!r}")
        if not self.value >= 0:
            raise DomainError(f"QFI must be nonnegative, got {self.value}")


def pure_qfi(state: SymmetricState) -> float:
    return 4.0 * excitation_moments(state)[1]


def _branch_moments(probs, eta):
    N = probs.size - 1
    k0, k1 = loss_kernels(N, float(eta))
    total = math.fsum(probs)
    n = np.arange(N + 1, dtype=float)
    # shifting by the input mean keeps m2/p - mu^2 well conditioned
    shift = math.fsum(probs * n) / total
    x = n - shift
    weighted = k0 * probs
    p = weighted @ k1.T
    m1 = (weighted * x) @ k1.T
    m2 = (weighted * x * x) @ k1.T
    return x, k0, k1, p, m1, m2


def _branch_variances(p, m1, m2, cutoff):
    keep = p > cutoff
    safe_p = np.where(keep, p, 1.0)
    mu = np.where(keep, m1 / safe_p, 0.0)
    var = np.where(keep, np.maximum(m2 / safe_p - mu * mu, 0.0), 0.0)
    return keep, mu, var


def approx_qfi_from_probabilities(probs, eta: float, cutoff: float = 0.0) -> float:
    """Branch-summed QFI for excitation probabilities ``probs`` (any scale).

    The value is homogeneous of degree one in ``probs``.
    """
    probs = np.asarray(probs, dtype=float)
    _, _, _, p, m1, m2 = _branch_moments(probs, eta)
    keep, _, var = _branch_variances(p, m1, m2, cutoff)
    return 4.0 * math.fsum((p * var)[keep])


def approx_qfi_gradient(probs, eta: float) -> tuple[float, np.ndarray]:
    """Value and gradient of the branch-summed QFI w.r.t. ``probs``.

    The gradient entry for ``n`` is ``4 sum_b K_b(n) (n - mu_b)^2``, the
    expected squared deviation of ``n`` from each branch mean. The value is
    concave in ``probs``, so ``max(grad)`` bounds the optimum over the
    probability simplex from above.
    """
    probs = np.asarray(probs, dtype=float)
    x, k0, k1, p, m1, m2 = _branch_moments(probs, eta)
    keep, mu, var = _branch_variances(p, m1, m2, 0.0)
    value = 4.0 * math.fsum((p * var)[keep])
    mask = keep.astype(float)
    s0 = np.sum(k0 * (mask @ k1), axis=0)
    s1 = np.sum(k0 * (mu @ k1), axis=0)
    s2 = np.sum(k0 * ((mu * mu) @ k1), axis=0)
    grad = 4.0 * (x * x * s0 - 2.0 * x * s1 + s2)
    return value, grad


def approx_qfi(state: SymmetricState, eta: float, cutoff: float = 0.0) -> float:
    """Approximate QFI: sum over loss branches of ``p * 4 Var_q(n)``.

    ``cutoff`` drops branches whose probability does not exceed it; the
    default keeps every nonzero branch.
    """
    check_eta(eta)
    return approx_qfi_from_probabilities(state.probabilities, eta, cutoff)


def approx_qfi_reference(state: SymmetricState, eta: float) -> float:
    """Slow branch-by-branch evaluation used to cross-check ``approx_qfi``."""
    from .losschan import iter_branches
    from .symstate import distribution_moments

    terms = []
    for br in iter_branches(state, eta):
        _, var = distribution_moments(br.conditional_weights)
        terms.append(br.probability * 4.0 * var)
    return math.fsum(terms)


def output_sectors(state: SymmetricState, eta: float):
    """Yield ``(surviving_count, rho)`` blocks of the output state at phi=0.

    Each block is the unnormalized density matrix on the Dicke basis of the
    surviving probes, indexed by ``m = n - l0``.
    """
    eta = check_eta(eta)
    N = state.n_probes
    k0, k1 = loss_kernels(N, eta)
    amps = state.amplitudes
    for survivors in range(N + 1):
        lost = N - survivors
        cols = []
        for l0 in range(lost + 1):
            l1 = lost - l0
            n = np.arange(l0, l0 + survivors + 1)
            beta = np.sqrt(k0[l0, n] * k1[l1, n])
            cols.append(amps[n] * beta)
        v = np.array(cols).T
        yield survivors, v @ v.conj().T


def exact_qfi(
    state: SymmetricState,
    eta: float,
    eps: float = EIG_CUTOFF,
    max_n: int = ORACLE_MAX_N,
) -> float:
    """Mixed-state QFI from the eigen-decomposition of each output sector.

    Sums ``2 |<j|d rho|k>|^2 / (l_j + l_k)`` over eigenpairs with
    ``l_j + l_k > eps``; the trace of the output state is one, so ``eps``
    is relative to it.
    """
    if state.n_probes > max_n:
        raise CapabilityError(
            f"exact QFI limited to N <= {max_n}; use approx_qfi for N={state.n_probes}"
        )
    terms = []
    for survivors, rho in output_sectors(state, eta):
        if survivors == 0:
            continue
        m = np.arange(survivors + 1)
        drho = 1j * (m[:, None] - m[None, :]) * rho
        lam, vecs = np.linalg.eigh(rho)
        lam = np.maximum(lam, 0.0)
        d = vecs.conj().T @ drho @ vecs
        denom = lam[:, None] + lam[None, :]
        keep = denom > eps
        terms.extend((2.0 * np.abs(d[keep]) ** 2 / denom[keep]).tolist())
    return math.fsum(terms)


def precision_from_qfi(F: float, k: int = 1) -> float:
    """Cramer-Rao precision ``1/sqrt(k F)`` for ``k`` repetitions."""
    if k < 1:
        raise DomainError("number of repetitions must be positive")
    if not F > 0:
        raise UndefinedPrecisionError(f"Fisher information must be positive, got {F}")
    return 1.0 / math.sqrt(k * F)


def loss_qfi_bound(N: int, eta: float) -> float:
    """Upper bound ``eta N / (1 - eta)`` on the QFI under independent loss."""
    eta = check_eta(eta)
    return math.inf if eta == 1.0 else eta * N / (1.0 - eta)
