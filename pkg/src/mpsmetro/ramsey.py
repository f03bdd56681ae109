"""Collective-spin moments and the lossy Ramsey error-propagation precision."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoSignalError
from .losschan import check_eta
from .symstate import SymmetricState

SIGNAL_TOL = 1e-9


@dataclass(frozen=True)
class CollectiveMoments:
    jx_mean: float
    jy_mean: float
    jx_second: float
    jx_var: float


def ladder_coefficients(N: int) -> np.ndarray:
    """``c_n = sqrt((n+1)(N-n))`` coupling ``|n>`` to ``|n+1>``, n = 0..N-1."""
    n = np.arange(N, dtype=float)
    return np.sqrt((n + 1.0) * (N - n))


def _raw_moments(amps: np.ndarray, norm: float):
    N = amps.size - 1
    c = ladder_coefficients(N)
    n = np.arange(N + 1, dtype=float)
    jp = np.sum(np.conj(amps[1:]) * amps[:-1] * c) / norm
    jp2 = np.sum(np.conj(amps[2:]) * amps[:-2] * c[:-1] * c[1:]) / norm
    # (J+J- + J-J+)/4 = (j(j+1) - m^2)/2 with m = n - N/2
    j = N / 2.0
    diag = (j * (j + 1.0) - (n - j) ** 2) / 2.0
    jx_second = 0.5 * jp2.real + float(np.sum(np.abs(amps) ** 2 * diag)) / norm
    # Jy sign chosen so i**n amplitudes give <Jy> = +N/2
    return jp.real, -jp.imag, jx_second


def collective_moments(state: SymmetricState) -> CollectiveMoments:
    jx, jy, jx2 = _raw_moments(state.amplitudes, 1.0)
    jx, jy, jx2 = float(jx), float(jy), float(jx2)
    return CollectiveMoments(jx, jy, jx2, max(jx2 - jx * jx, 0.0))


def ramsey_variance(amps, eta: float) -> float:
    """Squared Ramsey error for (possibly unnormalized) amplitudes ``amps``.

    Returns ``inf`` where the signal slope vanishes; optimizers rely on that.
    """
    amps = np.asarray(amps, dtype=complex)
    norm = float(np.sum(np.abs(amps) ** 2))
    if not norm > 0 or not math.isfinite(norm):
        return math.inf
    jx, jy, jx2 = _raw_moments(amps, norm)
    if abs(jy) <= SIGNAL_TOL:
        return math.inf
    N = amps.size - 1
    var = max(jx2 - jx * jx, 0.0)
    return (var + (1.0 - eta) / eta * N / 4.0) / (jy * jy)


def ramsey_precision(state: SymmetricState, eta: float) -> float:
    """Error-propagation precision of a J_x readout at phi = 0 under loss.

    Moments are taken on the input state; the loss contribution enters
    through the ``(1-eta)/eta * N/4`` term.
    """
    eta = check_eta(eta)
    if eta == 0.0:
        raise DomainError("eta = 0 loses every probe; precision is infinite")
    m = collective_moments(state)
    if abs(m.jy_mean) <= SIGNAL_TOL:
        raise NoSignalError("<J_y> vanishes; J_x carries no phase signal")
    N = state.n_probes
    return math.sqrt(
        m.jx_var / m.jy_mean**2 + (1.0 - eta) / eta * N / (4.0 * m.jy_mean**2)
    )


def ramsey_operators(N: int):
    """Dense ``(J_x, J_y, J_x^2)`` in the Dicke basis, same conventions as above."""
    c = ladder_coefficients(N)
    jp = np.diag(c, -1).astype(complex)  # <n+1|J+|n> = c_n
    jx = (jp + jp.conj().T) / 2.0
    jy = -(jp - jp.conj().T) / 2.0j
    # <J+> = a^H jp a; Im of that is -<Jy>, which matches _raw_moments
    return jx, jy, jx @ jx
