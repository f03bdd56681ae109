"""Invariant checks run by ``mpsmetro validate``.

Each check is small enough for a quick sanity pass on a fresh install. The
full property-based coverage lives in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .losschan import branch_probabilities, iter_branches
from .mps import DiagonalMPS, canonical_form, from_text, mps_amplitudes, to_text
from .optimize import ObjectiveSpec, OptimizerOptions, optimize_direct, optimize_mps
from .oracles import fidelity_qfi, mps_amplitudes_mp
from .qfi import approx_qfi, approx_qfi_reference, exact_qfi, loss_qfi_bound
from .ramsey import ramsey_precision
from .symstate import i_power, noon_state, normalize, product_state
from .sweep import SweepSpec, parse_config, run_sweep, sandwich_violations, serialize_config


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rng(tag: int):
    return np.random.default_rng([20240, tag])


def _random_state(rng, N, phases=True):
    z = rng.normal(size=N + 1)
    if phases:
        z = z + 1j * rng.normal(size=N + 1)
    return normalize(z)


def check_branch_completeness():
    rng = _rng(1)
    worst = 0.0
    for _ in range(10):
        N = int(rng.integers(1, 60))
        eta = float(rng.uniform(0.05, 1.0))
        s = _random_state(rng, N)
        p = branch_probabilities(s, eta)
        lazy = math.fsum(b.probability for b in iter_branches(s, eta))
        worst = max(worst, abs(p.sum() - 1.0), abs(lazy - 1.0))
    return worst <= 1e-10, f"max |sum p - 1| = {worst:.2e}"


def check_qfi_ordering():
    rng = _rng(2)
    worst = -math.inf
    for _ in range(10):
        N = int(rng.integers(1, 12))
        eta = float(rng.choice([0.3, 0.6, 0.9]))
        s = _random_state(rng, N)
        ex = exact_qfi(s, eta)
        worst = max(worst, ex - approx_qfi(s, eta), ex - loss_qfi_bound(N, eta))
    return worst <= 1e-8, f"max excess of exact QFI over its bounds = {worst:.2e}"


def check_fast_vs_reference_qfi():
    rng = _rng(3)
    worst = 0.0
    for _ in range(5):
        N = int(rng.integers(1, 40))
        eta = float(rng.uniform(0.1, 1.0))
        s = _random_state(rng, N)
        a, b = approx_qfi(s, eta), approx_qfi_reference(s, eta)
        worst = max(worst, abs(a - b) / max(b, 1e-300))
    return worst <= 1e-10, f"max relative deviation = {worst:.2e}"


def check_fidelity_oracle():
    rng = _rng(4)
    worst = 0.0
    for _ in range(3):
        N = int(rng.integers(1, 5))
        eta = float(rng.uniform(0.3, 0.95))
        s = _random_state(rng, N)
        ex = exact_qfi(s, eta)
        fo = fidelity_qfi(s.amplitudes, eta)
        worst = max(worst, abs(ex - fo) / ex)
    return worst <= 1e-5, f"max relative deviation = {worst:.2e}"


def check_mps_amplitudes():
    rng = _rng(5)
    worst = 0.0
    for _ in range(5):
        N = int(rng.integers(1, 50))
        D = int(rng.integers(1, 6))
        a = rng.normal(size=D) + 1j * rng.normal(size=D)
        b = rng.normal(size=D) + 1j * rng.normal(size=D)
        fast = mps_amplitudes(DiagonalMPS(N, a, b)).amplitudes
        ref = mps_amplitudes_mp(N, a, b)
        worst = max(worst, float(np.max(np.abs(fast - ref))))
    big = mps_amplitudes(DiagonalMPS(500, rng.normal(size=5), rng.normal(size=5))).amplitudes
    ok = worst <= 1e-10 and bool(np.all(np.isfinite(big)))
    return ok, f"max deviation = {worst:.2e}; N=500 finite: {bool(np.all(np.isfinite(big)))}"


def check_ramsey_vs_qcrb():
    rng = _rng(6)
    worst = -math.inf
    for _ in range(10):
        N = int(rng.integers(2, 14))
        eta = float(rng.uniform(0.3, 1.0))
        r = np.abs(rng.normal(size=N + 1)) + 0.1
        s = normalize(i_power(np.arange(N + 1)) * r)
        worst = max(worst, 1.0 / math.sqrt(exact_qfi(s, eta)) - ramsey_precision(s, eta))
    return worst <= 1e-9, f"max excess of QCRB over Ramsey precision = {worst:.2e}"


def check_reference_states():
    noon = approx_qfi(noon_state(6), 1.0)
    prod = ramsey_precision(product_state(10, "i_power"), 0.9)
    ok = abs(noon - 36.0) <= 1e-9 and abs(prod - 1.0 / 3.0) <= 1e-12
    return ok, f"F~(NOON_6) = {noon!r}, product-state dphi(N=10, eta=0.9) = {prod!r}"


def check_canonical_and_text():
    rng = _rng(7)
    m = DiagonalMPS(9, rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3))
    c = canonical_form(m)
    u, v = mps_amplitudes(m).amplitudes, mps_amplitudes(c).amplitudes
    overlap = abs(np.vdot(u, v))
    again = canonical_form(c)
    same = np.allclose(again.diag0, c.diag0, atol=1e-12) and np.allclose(again.diag1, c.diag1, atol=1e-12)
    back = from_text(to_text(c))
    exact = np.array_equal(back.diag0, c.diag0) and np.array_equal(back.diag1, c.diag1)
    ok = abs(overlap - 1.0) <= 1e-12 and same and exact
    return ok, f"|<psi|psi_canon>| = {overlap:.15f}, idempotent: {same}, text round trip: {exact}"


def check_noon_optimum():
    res = optimize_mps(4, 2, ObjectiveSpec("qfi", 1.0), OptimizerOptions(starts=4, seed=7))
    return abs(res.objective_value - 16.0) <= 1e-6, f"F~ = {res.objective_value!r}"


def check_sandwich_and_monotone():
    opts = OptimizerOptions(starts=4, seed=1)
    spec = SweepSpec((12,), (1, 2, 3), (0.8,), ("qfi", "ramsey"), opts, direct=True, timing=False)
    recs = run_sweep(spec)
    bad = sandwich_violations(recs)
    mono = True
    for kind in ("qfi", "ramsey"):
        dphi = [r.delta_phi for r in recs if r.objective == kind and r.D > 0]
        mono &= all(b <= a + 1e-9 for a, b in zip(dphi, dphi[1:]))
    return not bad and mono, f"sandwich violations: {len(bad)}, monotone in D: {mono}"


def check_direct_certificate():
    res = optimize_direct(12, ObjectiveSpec("qfi", 0.7), OptimizerOptions(starts=2))
    gap = (res.certificate - res.objective_value) / res.objective_value
    return gap <= 1e-6, f"certified relative gap = {gap:.2e}"


def check_config_round_trip():
    text = "n = 10, 20\nd = 1,2\neta = 0.9\nobjective = qfi, ramsey\ndirect = yes\nseed = 3\n"
    once = serialize_config(parse_config(text))
    twice = serialize_config(parse_config(once))
    return once == twice, "serialize(parse(serialize(parse(x)))) == serialize(parse(x))"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "branch probabilities sum to one": check_branch_completeness,
    "exact QFI below approximate QFI and loss bound": check_qfi_ordering,
    "vectorized approximate QFI matches branch loop": check_fast_vs_reference_qfi,
    "exact QFI matches fidelity oracle": check_fidelity_oracle,
    "MPS amplitudes match high-precision oracle": check_mps_amplitudes,
    "Ramsey precision respects the QFI bound": check_ramsey_vs_qcrb,
    "reference states": check_reference_states,
    "canonical form and text serialization": check_canonical_and_text,
    "NOON optimum at D=2": check_noon_optimum,
    "MPS never beats direct; non-worsening in D": check_sandwich_and_monotone,
    "direct QFI optimum certificate": check_direct_certificate,
    "config round trip": check_config_round_trip,
}


def run_checks(names=None) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
