"""High-precision reference computations.

These share no numerical code with the production paths: binomials come from
exact integers, powers and matrix functions from mpmath at raised precision.
They are slow and meant for small problems in tests and ``validate``.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np


def exact_log_binomial(n: int, k: int) -> float:
    with mpmath.workdps(40):
        return float(mpmath.log(mpmath.mpf(math.comb(n, k))))


def mps_amplitudes_mp(n_probes: int, diag0, diag1, dps: int = 50) -> np.ndarray:
    """Direct, unscaled evaluation of the diagonal-MPS amplitudes."""
    N = n_probes
    with mpmath.workdps(dps):
        a = [mpmath.mpc(complex(x)) for x in diag0]
        b = [mpmath.mpc(complex(x)) for x in diag1]
        raw = []
        for n in range(N + 1):
            tr = mpmath.fsum(ad**n * bd ** (N - n) for ad, bd in zip(a, b))
            raw.append(mpmath.sqrt(math.comb(N, n)) * tr)
        norm = mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in raw))
        return np.array([complex(x / norm) for x in raw])


def _sector_blocks(amps, eta, phi):
    # rho_phi restricted to each surviving-probe count, built from scratch
    N = len(amps) - 1
    eta = mpmath.mpf(eta)
    loss = 1 - eta
    blocks = []
    for survivors in range(1, N + 1):
        lost = N - survivors
        rho = mpmath.zeros(survivors + 1, survivors + 1)
        for l0 in range(lost + 1):
            l1 = lost - l0
            v = []
            for m in range(survivors + 1):
                n = m + l0
                w = (
                    math.comb(n, l0) * eta ** (n - l0) * loss**l0
                    * math.comb(N - n, l1) * eta ** (N - n - l1) * loss**l1
                )
                v.append(amps[n] * mpmath.sqrt(w) * mpmath.expjpi(n * phi / mpmath.pi))
            for i in range(survivors + 1):
                for j in range(survivors + 1):
                    rho[i, j] += v[i] * mpmath.conj(v[j])
        blocks.append(rho)
    return blocks


def _psd_sqrt(m):
    lam, u = mpmath.eighe(m)
    d = mpmath.diag([mpmath.sqrt(max(x, 0)) for x in lam])
    return u * d * u.H


def root_fidelity(rho, sigma):
    """``Tr |sqrt(rho) sqrt(sigma)|`` for PSD mpmath matrices."""
    x = _psd_sqrt(rho) * _psd_sqrt(sigma)
    lam, _ = mpmath.eighe(x.H * x)
    return mpmath.fsum(mpmath.sqrt(max(v, 0)) for v in lam)


def fidelity_qfi(amplitudes, eta: float, delta: float = 1e-4, dps: int = 40) -> float:
    """QFI from the Bures metric, ``8 (1 - Fid(rho_0, rho_delta)) / delta^2``.

    The output state is block diagonal in the surviving probe number, so the
    root fidelity is the sum of blockwise root fidelities.
    """
    with mpmath.workdps(dps):
        amps = [mpmath.mpc(complex(x)) for x in amplitudes]
        d = mpmath.mpf(delta)
        r0 = _sector_blocks(amps, eta, mpmath.mpf(0))
        r1 = _sector_blocks(amps, eta, d)
        # the zero-survivor block has trace (1-eta)^N and fidelity equal to it
        fid = (1 - mpmath.mpf(eta)) ** (len(amps) - 1)
        fid += mpmath.fsum(root_fidelity(x, y) for x, y in zip(r0, r1))
        return float(8 * (1 - fid) / d**2)
