"""Brute-force references in the full qubit Hilbert space (small N only).

Nothing here reuses the package's Dicke-basis algebra: symmetric states are
built as explicit superpositions of bit strings, collective spins from Pauli
matrices, and loss as a per-qubit erasure channel.
"""
import itertools
import math
from functools import reduce

import numpy as np

# local basis: index 0 = probe in |0>, 1 = probe in |1>, 2 = erased
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
# |0> is the spin-down state; this fixes the sign of J_y
SY_FLIPPED = -SY


def dicke_embedding(N, amplitudes, local_dim=2):
    psi = np.zeros(local_dim ** N, dtype=complex)
    for bits in itertools.product((0, 1), repeat=N):
        n = bits.count(0)
        idx = int("".join(map(str, bits)), local_dim) if N else 0
        psi[idx] += amplitudes[n] / math.sqrt(math.comb(N, n))
    return psi


def _site_op(op, k, N):
    mats = [np.eye(op.shape[0], dtype=complex)] * N
    mats[k] = op
    return reduce(np.kron, mats)


def collective(op, N):
    return 0.5 * sum(_site_op(op, k, N) for k in range(N))


def ramsey_moments(amplitudes):
    N = len(amplitudes) - 1
    psi = dicke_embedding(N, amplitudes)
    jx, jy = collective(SX, N), collective(SY_FLIPPED, N)
    ex = np.vdot(psi, jx @ psi).real
    ey = np.vdot(psi, jy @ psi).real
    ex2 = np.vdot(psi, jx @ jx @ psi).real
    return ex, ey, ex2 - ex * ex


def lossy_output(amplitudes, eta):
    """Apply independent erasure with probability 1-eta to every qubit."""
    N = len(amplitudes) - 1
    psi = dicke_embedding(N, amplitudes, local_dim=3)
    rho = np.outer(psi, psi.conj())
    keep = math.sqrt(eta) * np.diag([1.0, 1.0, 0.0]).astype(complex)
    lose0 = np.zeros((3, 3), complex)
    lose0[2, 0] = math.sqrt(1 - eta)
    lose1 = np.zeros((3, 3), complex)
    lose1[2, 1] = math.sqrt(1 - eta)
    for k in range(N):
        rho = sum(_site_op(K, k, N) @ rho @ _site_op(K, k, N).conj().T for K in (keep, lose0, lose1))
    return rho


def generator(N):
    """Number of probes in |0> (the phase generator), on the 3-level space."""
    proj0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    return sum(_site_op(proj0, k, N) for k in range(N))


def mixed_qfi(rho, G, cutoff=1e-12):
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    g = vec.conj().T @ G @ vec
    total = 0.0
    for j in range(lam.size):
        for k in range(lam.size):
            s = lam[j] + lam[k]
            if s > cutoff:
                total += 2.0 * (lam[j] - lam[k]) ** 2 / s * abs(g[j, k]) ** 2
    return total
