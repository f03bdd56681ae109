"""Diagonal, site-independent matrix product states of N qubits.

With diagonal ``A0 = diag(a)`` and ``A1 = diag(b)`` the trace reduces to
``sum_d a_d**n * b_d**(N-n)``, so the state is symmetric and

    alpha_n ~ sqrt(C(N, n)) * sum_d a_d**n * b_d**(N-n).

Powers are evaluated as log-magnitude plus phase; ``0**0 == 1``, so a zero
``a_d`` contributes only at ``n = 0`` and a zero ``b_d`` only at ``n = N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import DegenerateStateError, DomainError
from .symstate import SymmetricState, log_binomial_array

TWO_PI = 2.0 * math.pi
_CANCEL_TOL = 1e-13


@dataclass(frozen=True)
class DiagonalMPS:
    n_probes: int
    diag0: np.ndarray
    diag1: np.ndarray

    def __post_init__(self):
        a = np.array(self.diag0, dtype=complex).ravel()
        b = np.array(self.diag1, dtype=complex).ravel()
        if self.n_probes < 1:
            raise DomainError("an MPS needs N >= 1")
        if a.size < 1 or a.size != b.size:
            raise DomainError("diagonals must be non-empty and of equal length")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "diag0", a)
        object.__setattr__(self, "diag1", b)

    @property
    def bond_dim(self) -> int:
        return self.diag0.size

    def embed(self, extra: int = 1) -> "DiagonalMPS":
        """Append ``extra`` zero pairs; the induced state is unchanged."""
        z = np.zeros(extra, dtype=complex)
        return DiagonalMPS(
            self.n_probes, np.concatenate([self.diag0, z]), np.concatenate([self.diag1, z])
        )


def log_amplitudes(mps: DiagonalMPS) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized ``(ln|alpha_n|, arg alpha_n)``; ``-inf`` marks exact zeros."""
    N = mps.n_probes
    n = np.arange(N + 1, dtype=float)
    a, b = mps.diag0, mps.diag1
    with np.errstate(divide="ignore"):
        log_mag = (
            xlogy(n[None, :], np.abs(a)[:, None])
            + xlogy(N - n[None, :], np.abs(b)[:, None])
        )
    phase = np.mod(
        n[None, :] * np.angle(a)[:, None] + (N - n[None, :]) * np.angle(b)[:, None],
        TWO_PI,
    )
    peak = np.max(log_mag, axis=0)
    alive = np.isfinite(peak)
    rel = np.where(alive[None, :], log_mag - np.where(alive, peak, 0.0)[None, :], -np.inf)
    terms = np.exp(rel)
    total = np.sum(terms * np.exp(1j * phase), axis=0)
    # sums that cancel down to roundoff carry no significant digits
    cancelled = np.abs(total) <= _CANCEL_TOL * np.sum(terms, axis=0)
    with np.errstate(divide="ignore"):
        out_mag = np.where(
            alive & ~cancelled,
            0.5 * log_binomial_array(N, n) + np.where(alive, peak, 0.0) + np.log(np.abs(total)),
            -np.inf,
        )
    return out_mag, np.angle(total)


def mps_amplitudes(mps: DiagonalMPS) -> SymmetricState:
    log_mag, phase = log_amplitudes(mps)
    top = np.max(log_mag)
    if not np.isfinite(top):
        raise DegenerateStateError("MPS induces the zero vector")
    return _normalize_logs(log_mag - top, phase)


def _normalize_logs(log_mag, phase) -> SymmetricState:
    mags = np.exp(log_mag)
    amps = mags * np.exp(1j * phase)
    amps /= math.sqrt(math.fsum(mags * mags))
    return SymmetricState(log_mag.size - 1, amps)


def canonical_form(mps: DiagonalMPS) -> DiagonalMPS:
    """Representative of the MPS with the same induced state.

    Pairs are sorted by descending ``|a_d|`` (ties by descending ``|b_d|``)
    and all entries share one rescaling so the largest modulus is 1. Phases
    are fixed with the transformations that leave the state invariant up to
    a global phase: one common rotation making the leading ``a`` real and
    nonnegative, and per-pair rotations by N-th roots of unity bringing each
    other nonzero ``a_d`` as close to the positive real axis as allowed.
    """
    mps_amplitudes(mps)  # raises on degenerate input
    N = mps.n_probes
    a = mps.diag0.copy()
    b = mps.diag1.copy()
    order = sorted(range(a.size), key=lambda d: (-abs(a[d]), -abs(b[d]), d))
    a, b = a[order], b[order]
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    a, b = a / scale, b / scale

    lead = int(np.argmax(np.abs(a) > 0)) if np.any(a != 0) else None
    if lead is not None:
        rot = np.exp(-1j * np.angle(a[lead]))
        a, b = a * rot, b * rot
    step = TWO_PI / N
    for d in range(a.size):
        if d == lead or a[d] == 0:
            continue
        k = round(-np.angle(a[d]) / step)
        root = np.exp(1j * step * k)
        a[d], b[d] = a[d] * root, b[d] * root
    a = _snap_real(a)
    b = _snap_real(b)
    return DiagonalMPS(N, a, b)


def _snap_real(v):
    # drop imaginary roundoff left by the rotations
    out = v.copy()
    tiny = np.abs(out.imag) <= 1e-15 * np.maximum(np.abs(out), 1.0)
    out[tiny] = out.real[tiny]
    return out


def complementary_ordering(mps: DiagonalMPS, rtol: float = 1e-3) -> dict:
    """Diagnostic for the optimal-state structure in the QFI problem.

    Reports whether the moduli of ``a`` and ``b`` hold the same values and
    whether they are paired in opposite order (largest ``|a|`` with smallest
    ``|b|``). Returned as data, not asserted.
    """
    ca = canonical_form(mps)
    ma, mb = np.abs(ca.diag0), np.abs(ca.diag1)
    same_values = bool(np.allclose(np.sort(ma), np.sort(mb), rtol=rtol, atol=rtol))
    complementary = bool(np.all(np.diff(ma) <= rtol) and np.all(np.diff(mb) >= -rtol))
    return {
        "abs_a": ma.tolist(),
        "abs_b": mb.tolist(),
        "same_values": same_values,
        "complementary": complementary,
    }


def to_text(mps: DiagonalMPS) -> str:
    """Plain-text record: ``N D`` then one ``Re a Im a Re b Im b`` line per pair."""
    lines = [f"{mps.n_probes} {mps.bond_dim}"]
    for a, b in zip(mps.diag0, mps.diag1):
        lines.append(" ".join(repr(float(x)) for x in (a.real, a.imag, b.real, b.imag)))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> DiagonalMPS:
    tokens = text.split()
    try:
        N, D = int(tokens[0]), int(tokens[1])
        vals = [float(t) for t in tokens[2:]]
    except (IndexError, ValueError) as exc:
        raise DomainError(f"malformed MPS record: {exc}") from None
    if len(vals) != 4 * D:
        raise DomainError(f"expected {4 * D} numbers for D={D}, got {len(vals)}")
    rows = np.array(vals).reshape(D, 4)
    return DiagonalMPS(N, rows[:, 0] + 1j * rows[:, 1], rows[:, 2] + 1j * rows[:, 3])
