"""Permutation-symmetric N-probe states in the Dicke basis.

Index ``n`` of an amplitude vector counts probes in ``|0>``; the basis vector
is ``|n, N-n>``. Everything binomial is carried as a logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateStateError, DomainError

NORM_TOL = 1e-12

# below this many factors the product form beats log-gamma on cancellation
_SUM_LOG_CUTOFF = 4096


def log_binomial(n: int, k: int) -> float:
    """Return ``ln C(n, k)`` without forming the integer coefficient."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k <= _SUM_LOG_CUTOFF:
        # C(n,k) = prod_{i=1..k} (n-k+i)/i
        m = n - k
        return math.fsum(math.log1p(m / i) for i in range(1, k + 1))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_binomial_array(n, k) -> np.ndarray:
    """Vectorized ``ln C(n, k)``; entries with ``k<0`` or ``k>n`` give ``-inf``."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    n, k = np.broadcast_arrays(n, k)
    out = np.full(n.shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    out[ok] = gammaln(n[ok] + 1) - gammaln(k[ok] + 1) - gammaln(n[ok] - k[ok] + 1)
    return out


@dataclass(frozen=True)
class SymmetricState:
    """Normalized amplitudes ``alpha_n`` of a symmetric N-probe state."""

    n_probes: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if self.n_probes < 1:
            raise DomainError("a symmetric state needs at least one probe")
        if amps.shape != (self.n_probes + 1,):
            raise DomainError(
                f"expected {self.n_probes + 1} amplitudes, got shape {amps.shape}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"amplitudes not normalized (sum |a|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __eq__(self, other):
        if not isinstance(other, SymmetricState):
            return NotImplemented
        return self.n_probes == other.n_probes and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    def __hash__(self):
        return hash((self.n_probes, self.amplitudes.tobytes()))


def normalize(raw_amplitudes) -> SymmetricState:
    """Scale a nonzero amplitude vector to unit norm.

    The vector length fixes ``N = len - 1``.
    """
    raw = np.asarray(raw_amplitudes, dtype=complex)
    if raw.ndim != 1 or raw.size < 2:
        raise DomainError("need a 1-d vector of at least two amplitudes")
    scale = np.max(np.abs(raw))
    if not np.isfinite(scale):
        raise DegenerateStateError("amplitudes contain non-finite entries")
    if scale == 0.0:
        raise DegenerateStateError("all amplitudes are zero")
    # pre-scaling keeps the norm away from under/overflow
    scaled = raw / scale
    return SymmetricState(raw.size - 1, scaled / np.sqrt(np.sum(np.abs(scaled) ** 2)))


def excitation_moments(state: SymmetricState) -> tuple[float, float]:
    """Mean and variance of the excitation number ``n`` in ``state``."""
    return distribution_moments(state.probabilities)


def distribution_moments(weights) -> tuple[float, float]:
    # centred second moment avoids the <n^2> - <n>^2 cancellation
    w = np.asarray(weights, dtype=float)
    total = math.fsum(w)
    n = np.arange(w.size, dtype=float)
    mean = math.fsum(w * n) / total
    var = math.fsum(w * (n - mean) ** 2) / total
    return mean, max(var, 0.0)


def noon_state(n_probes: int) -> SymmetricState:
    if n_probes < 1:
        raise DomainError("N00N state needs N >= 1")
    amps = np.zeros(n_probes + 1, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return SymmetricState(n_probes, amps)


def product_state(n_probes: int, gauge: str = "real") -> SymmetricState:
    """Coherent product state with binomial amplitudes.

    ``gauge="i_power"`` multiplies amplitude ``n`` by ``i**n``, which points
    the collective spin along +y.
    """
    if n_probes < 1:
        raise DomainError("product state needs N >= 1")
    n = np.arange(n_probes + 1)
    mags = np.exp(0.5 * log_binomial_array(n_probes, n) - 0.5 * n_probes * math.log(2))
    if gauge == "real":
        amps = mags.astype(complex)
    elif gauge == "i_power":
        amps = mags * i_power(n)
    else:
        raise DomainError(f"unknown gauge {gauge!r}")
    return normalize(amps)


def i_power(n) -> np.ndarray:
    """Exact ``i**n`` for integer arrays (no trigonometric roundoff)."""
    return np.array([1, 1j, -1, -1j])[np.asarray(n) % 4]
