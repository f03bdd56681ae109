"""Seeded multi-start optimization of input states.

Two search spaces share one driver:

* diagonal MPS parameters (``2D`` or ``4D`` reals), searched with L-BFGS on
  analytic gradients or, optionally, restarted Nelder-Mead,
* direct Dicke amplitudes (the brute-force reference): SLSQP on the
  probability simplex for the QFI, L-BFGS for Ramsey.

Objectives are minimized on a log scale (``-ln F`` or ``ln dphi``) so that
the tolerance is relative. Parameters are unnormalized; normalization
happens inside the objective.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .errors import CapabilityError, DegenerateStateError, DomainError, OptimizationFailed
from .mps import DiagonalMPS, canonical_form, mps_amplitudes
from .qfi import approx_qfi, approx_qfi_from_probabilities, approx_qfi_gradient, precision_from_qfi
from .ramsey import SIGNAL_TOL, ramsey_operators, ramsey_precision
from .symstate import SymmetricState, i_power, log_binomial_array, normalize, product_state

log = logging.getLogger(__name__)

KINDS = ("approx_qfi_max", "ramsey_min")
GAUGES = ("real_nonneg", "i_power_real", "full_complex")
KIND_ALIASES = {"qfi": "approx_qfi_max", "ramsey": "ramsey_min"}
DIRECT_MAX_N = 150

# stands in for +inf so line searches stay finite
_BAD = 1e10


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str
    eta: float
    gauge: str | None = None

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise DomainError(f"unknown objective {self.kind!r}")
        if not 0.0 < float(self.eta) <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        gauge = self.gauge
        if gauge is None:
            gauge = "real_nonneg" if kind == "approx_qfi_max" else "i_power_real"
        if gauge not in GAUGES:
            raise DomainError(f"unknown gauge {gauge!r}")
        if kind == "approx_qfi_max" and gauge != "real_nonneg":
            # F~ ignores phases, extra phase parameters are pure redundancy
            raise DomainError("approx_qfi_max requires the real_nonneg gauge")
        if kind == "ramsey_min" and gauge == "real_nonneg":
            raise DomainError("real amplitudes give <J_y> = 0; use i_power_real")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "gauge", gauge)

    @property
    def short_name(self) -> str:
        return "qfi" if self.kind == "approx_qfi_max" else "ramsey"


@dataclass(frozen=True)
class OptimizerOptions:
    starts: int = 16
    max_iters: int = 20000
    rel_tol: float = 1e-10
    seed: int = 0
    init_spread: float = 1.0
    # local search for MPS parameters: "gradient" (L-BFGS) or "simplex"
    method: str = "gradient"

    def __post_init__(self):
        if self.method not in ("gradient", "simplex"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.starts < 1:
            raise DomainError("starts must be >= 1")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")


@dataclass
class StartRecord:
    index: int
    label: str
    loss: float
    iterations: int
    converged: bool
    trajectory: list = field(default_factory=list, repr=False)


@dataclass
class OptimizationResult:
    best_params: DiagonalMPS | SymmetricState
    state: SymmetricState
    objective_value: float
    delta_phi: float
    converged: bool
    iterations: int
    seed: int
    starts: list = field(default_factory=list, repr=False)
    certificate: float | None = None
    # optimizer-gauge parameters before canonicalization; used for warm starts
    raw_params: DiagonalMPS | None = field(default=None, repr=False)

    @property
    def bond_dim(self) -> int:
        """0 for direct optimization, else the MPS bond dimension."""
        return self.best_params.bond_dim if isinstance(self.best_params, DiagonalMPS) else 0


def start_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), index])


# ---------------------------------------------------------------- objectives
#
# Each core maps unnormalized complex amplitudes z to (loss, W) where
# W = dL/dRe(z) + 1j dL/dIm(z), so dL = Re(conj(W) . dz).

def _qfi_core(eta):
    def core(z):
        probs = (z * np.conj(z)).real
        s = math.fsum(probs)
        if not s > 0:
            return _BAD, None
        F, g = approx_qfi_gradient(probs, eta)
        if not F > 0:
            return _BAD, None
        # F is degree-1 homogeneous in probs, so the normalized value is F / s
        return math.log(s) - math.log(F), 2.0 * (1.0 / s - g / F) * z

    return core


def _ramsey_core(N, eta):
    jx, jy, jx2 = ramsey_operators(N)
    kappa = (1.0 - eta) / eta * N / 4.0

    def core(z):
        s = float(np.vdot(z, z).real)
        if not s > 0 or not math.isfinite(s):
            return _BAD, None
        hz = [h @ z for h in (jx, jy, jx2)]
        e1, e2, e3 = (float(np.vdot(z, v).real) / s for v in hz)
        if abs(e2) <= SIGNAL_TOL:
            return _BAD, None
        V = (e3 - e1 * e1 + kappa) / (e2 * e2)
        if not V > 0:
            return _BAD, None
        g1, g2, g3 = (2.0 * (v - e * z) / s for v, e in zip(hz, (e1, e2, e3)))
        dV = (g3 - 2.0 * e1 * g1) / (e2 * e2) - 2.0 * V * g2 / e2
        return 0.5 * math.log(V), 0.5 * dV / V

    return core


def _core(objective, N):
    if objective.kind == "approx_qfi_max":
        return _qfi_core(objective.eta)
    return _ramsey_core(N, objective.eta)


# MPS search coordinates. Pair d is written as
#   a_d = c_d**(1/N) cos(t_d) exp(i p_d),  b_d = c_d**(1/N) sin(t_d),
# so alpha_n ~ sqrt(C(N,n)) sum_d c_d cos(t_d)**n sin(t_d)**(N-n) exp(i n p_d):
# a weighted sum of normalized coherent-state amplitudes. Every term is
# bounded by one, which keeps the search well scaled for large N. Real
# gauges fix p_d (0 or pi/2) and take c_d real; full_complex frees both.

def _fixed_phase(gauge):
    return math.pi / 2 if gauge == "i_power_real" else 0.0


def _split(x, gauge):
    if gauge == "full_complex":
        D = x.size // 4
        return x[:D] + 1j * x[D : 2 * D], x[2 * D : 3 * D], x[3 * D :]
    D = x.size // 2
    return x[:D].astype(complex), x[D:], np.full(D, _fixed_phase(gauge))


def _phase_powers(n, p, gauge):
    if gauge == "i_power_real":
        return np.broadcast_to(i_power(n), (p.size, n.size))
    if gauge == "real_nonneg":
        return np.ones((p.size, n.size))
    return np.exp(1j * np.mod(np.outer(p, n), 2.0 * math.pi))


def _signed_powers(coef, half_binom, n, N, cos, sin, dn_cos, dn_sin):
    # coef * sqrt(C) * cos**(n + dn_cos) * sin**(N - n + dn_sin), rows over d
    pc = n[None, :] + dn_cos
    ps = (N - n)[None, :] + dn_sin
    c, s = cos[:, None], sin[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = half_binom[None, :] + xlogy(pc, np.abs(c)) + xlogy(ps, np.abs(s))
        out = coef[None, :] * np.exp(mag)
    sign = np.where((c < 0) & (pc % 2 == 1), -1.0, 1.0) * np.where((s < 0) & (ps % 2 == 1), -1.0, 1.0)
    return np.where(coef[None, :] == 0, 0.0, np.nan_to_num(out * sign))


def _coherent_terms(N, theta, p, gauge):
    """Terms ``T[d, n]`` and ``dT/dtheta`` of the coherent-sum coordinates."""
    n = np.arange(N + 1, dtype=float)
    half_binom = 0.5 * log_binomial_array(N, n)
    cos, sin = np.cos(theta), np.sin(theta)
    ones = np.ones(N + 1)
    base = _signed_powers(ones, half_binom, n, N, cos, sin, 0, 0)
    d_theta = _signed_powers(n * 1.0, half_binom, n, N, cos, sin, -1, 1) * -1.0
    d_theta = d_theta + _signed_powers(N - n, half_binom, n, N, cos, sin, 1, -1)
    ph = _phase_powers(np.arange(N + 1), p, gauge)
    return base * ph, d_theta * ph


def _mps_from_vector(x, N, gauge):
    c, theta, p = _split(np.asarray(x, dtype=float), gauge)
    root = np.abs(c) ** (1.0 / N) * np.exp(1j * np.angle(c) / N)
    if gauge == "i_power_real":
        pref = 1j * np.ones(c.size)
    else:
        pref = np.exp(1j * p)
    return DiagonalMPS(N, root * np.cos(theta) * pref, root * np.sin(theta))


def _mps_to_vector(mps, gauge):
    """Coherent-sum coordinates of ``mps``; raises if it leaves the gauge."""
    N = mps.n_probes
    a, b = mps.diag0, mps.diag1
    rho = np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)
    top = np.max(rho)
    if top == 0:
        raise DegenerateStateError("MPS induces the zero vector")
    rho = rho / top
    theta = np.arctan2(np.abs(b), np.abs(a))
    default = _fixed_phase(gauge)
    p = np.where((a != 0) & (b != 0), np.angle(a) - np.angle(b), default)
    ref = np.where(b != 0, np.angle(b), np.angle(a) - p)
    c = rho**N * np.exp(1j * N * ref)
    if gauge == "full_complex":
        return np.concatenate([c.real, c.imag, theta, np.mod(p, 2 * math.pi)])
    # real gauges: p must equal the fixed phase up to a sign flip of cos
    delta = np.angle(np.exp(1j * (p - default)))
    flip = np.abs(np.abs(delta) - math.pi) < 1e-9
    if np.any(~flip & (np.abs(delta) > 1e-9)) or np.any(np.abs(c.imag) > 1e-9 * np.maximum(np.abs(c), 1e-300)):
        raise DomainError(f"MPS is not representable in the {gauge} gauge")
    theta = np.where(flip, math.pi - theta, theta)
    return np.concatenate([c.real, theta])


def _mps_loss_and_grad(objective: ObjectiveSpec, N: int):
    core = _core(objective, N)
    gauge = objective.gauge
    n = np.arange(N + 1, dtype=float)

    def fun(x):
        zero = np.zeros_like(x)
        if not np.all(np.isfinite(x)):
            return _BAD, zero
        c, theta, p = _split(x, gauge)
        T, dT = _coherent_terms(N, theta, p, gauge)
        u = c @ T
        val, W = core(u)
        if W is None:
            return _BAD, zero
        wc = np.conj(W)
        g_c = T @ wc
        g_theta = (c * (dT @ wc)).real
        if gauge == "full_complex":
            g_p = (c * ((1j * n * T) @ wc)).real
            return val, np.concatenate([g_c.real, (1j * g_c).real, g_theta, g_p])
        return val, np.concatenate([g_c.real, g_theta])

    return fun


def _gauge_phases(N, gauge):
    return i_power(np.arange(N + 1)) if gauge == "i_power_real" else np.ones(N + 1)


def _direct_amplitudes(x, N, gauge):
    if gauge == "full_complex":
        return x[: N + 1] + 1j * x[N + 1 :]
    return _gauge_phases(N, gauge) * x


def _direct_loss_and_grad(objective: ObjectiveSpec, N: int):
    core = _core(objective, N)
    gauge = objective.gauge
    phases = _gauge_phases(N, gauge)

    def fun(x):
        val, W = core(_direct_amplitudes(x, N, gauge))
        if W is None:
            return _BAD, np.zeros_like(x)
        if gauge == "full_complex":
            return val, np.concatenate([W.real, W.imag])
        return val, (np.conj(phases) * W).real

    return fun


# ------------------------------------------------------------------ searches

class _Recorder:
    """Wraps an objective and keeps every value it returns."""

    def __init__(self, fun):
        self.fun = fun
        self.values = []

    def __call__(self, x):
        out = self.fun(x)
        self.values.append(out[0] if isinstance(out, tuple) else out)
        return out


def _simplex_search(fun, x0, opts: OptimizerOptions):
    """Nelder-Mead restarted from its own optimum until a refresh stops helping."""
    rec = _Recorder(lambda x: fun(x)[0])
    x = np.asarray(x0, dtype=float)
    f = rec(x)
    used = 0
    converged = False
    while used < opts.max_iters:
        res = minimize(
            rec,
            x,
            method="Nelder-Mead",
            options={
                "maxiter": opts.max_iters - used,
                "maxfev": 4 * (opts.max_iters - used),
                "xatol": np.inf,
                "fatol": opts.rel_tol,
                "adaptive": x.size > 4,
            },
        )
        used += max(int(res.nit), 1)
        improved = f - res.fun
        if res.fun <= f:
            x, f = res.x, float(res.fun)
        if f >= _BAD:
            break
        if improved <= opts.rel_tol * max(abs(f), 1.0):
            converged = True
            break
    return x, f, used, converged, rec.values


def _gradient_search(fun, x0, opts: OptimizerOptions):
    rec = _Recorder(fun)
    x0 = np.asarray(x0, dtype=float)
    f0 = rec(x0)[0]
    res = minimize(
        rec,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": opts.max_iters,
            "maxfun": 4 * opts.max_iters,
            "ftol": opts.rel_tol * 1e-2,
            "gtol": 1e-12,
            "maxcor": 30,
        },
    )
    if not res.fun <= f0:
        return x0, f0, int(res.nit), False, rec.values
    converged = bool(res.success) or res.status == 2  # 2: no further progress possible
    return res.x, float(res.fun), int(res.nit), converged, rec.values


def _simplex_qfi_search(eta, P0, opts: OptimizerOptions):
    """SLSQP over the probability simplex; F~ is concave there."""

    def fun(P):
        F, g = approx_qfi_gradient(np.maximum(P, 0.0), eta)
        return -F, -g

    rec = _Recorder(fun)
    P0 = np.asarray(P0, dtype=float)
    P0 = P0 / P0.sum()
    res = minimize(
        rec,
        P0,
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * P0.size,
        constraints=[{"type": "eq", "fun": lambda P: P.sum() - 1.0, "jac": lambda P: np.ones_like(P)}],
        options={"maxiter": opts.max_iters, "ftol": opts.rel_tol * 1e-5},
    )
    P = np.maximum(res.x, 0.0)
    P /= P.sum()
    F = approx_qfi_from_probabilities(P, eta)
    return P, (-math.log(F) if F > 0 else _BAD), int(res.nit), bool(res.success), rec.values


def _run_starts(search, starts):
    records = []
    best = None
    for index, (label, x0) in enumerate(starts):
        x, f, nit, conv, traj = search(x0)
        records.append(StartRecord(index, label, f, nit, conv, traj))
        log.debug("start %d (%s): loss=%.15g iters=%d", index, label, f, nit)
        # strict improvement only, so ties keep the lower start index
        if f < _BAD and (best is None or f < best[1]):
            best = (x, f, nit, conv)
    if best is None:
        raise OptimizationFailed(
            "every start ended on a degenerate point",
            [(r.index, r.label, r.loss, r.iterations) for r in records],
        )
    return best, records


def _mps_starts(N, D, objective, opts, initial):
    gauge = objective.gauge
    starts = []
    for k, mps in enumerate(initial or []):
        if mps.n_probes != N or mps.bond_dim != D:
            raise DomainError("initial MPS does not match (N, D)")
        starts.append((f"initial{k}", _mps_to_vector(mps, gauge)))

    def pack(c, theta):
        if gauge == "full_complex":
            return np.concatenate([c, np.zeros(D), theta, np.full(D, math.pi / 2)])
        return np.concatenate([c, theta])

    # all terms equal: the coherent product state
    starts.append(("equal", pack(np.ones(D), np.full(D, math.pi / 4))))
    if D >= 2:
        # complementary ramp from |N,0> to |0,N>
        starts.append(("noon_like", pack(np.ones(D), np.linspace(0.0, math.pi / 2, D))))
    spread = opts.init_spread
    for i in range(opts.starts):
        rng = start_rng(opts.seed, i)
        if gauge == "full_complex":
            c = rng.uniform(-spread, spread, 2 * D)
            theta = (math.pi / 2) * (1.0 + rng.uniform(-spread, spread, D))
            p = math.pi * (1.0 + rng.uniform(-spread, spread, D))
            x = np.concatenate([c, theta, p])
        else:
            c = rng.uniform(-spread, spread, D)
            theta = (math.pi / 2) * (1.0 + rng.uniform(-spread, spread, D))
            x = np.concatenate([c, theta])
        starts.append((f"random{i}", x))
    return starts


def _direct_starts(N, objective, opts, initial):
    gauge = objective.gauge
    width = 2 * (N + 1) if gauge == "full_complex" else N + 1
    starts = []

    def encode(state):
        amps = state.amplitudes
        if gauge == "full_complex":
            return np.concatenate([amps.real, amps.imag])
        return (np.conj(_gauge_phases(N, gauge)) * amps).real

    for k, st in enumerate(initial or []):
        if st.n_probes != N:
            raise DomainError("initial state does not match N")
        starts.append((f"initial{k}", encode(st)))
    prod = product_state(N, "real" if gauge == "real_nonneg" else "i_power")
    starts.append(("product", encode(prod)))
    if objective.kind == "approx_qfi_max" and N >= 2:
        noon = np.zeros(N + 1)
        noon[0] = noon[-1] = 1.0
        starts.append(("noon", noon))
    for i in range(opts.starts):
        rng = start_rng(opts.seed, i)
        starts.append((f"random{i}", rng.uniform(-opts.init_spread, opts.init_spread, width)))
    return starts


def _finish(best_params, state, objective, converged, iterations, opts, records, cert=None, raw=None):
    if objective.kind == "approx_qfi_max":
        value = approx_qfi(state, objective.eta)
        delta = precision_from_qfi(value)
    else:
        value = ramsey_precision(state, objective.eta)
        delta = value
    return OptimizationResult(
        best_params=best_params,
        state=state,
        objective_value=value,
        delta_phi=delta,
        converged=converged,
        iterations=iterations,
        seed=opts.seed,
        starts=records,
        certificate=cert,
        raw_params=raw,
    )


def _reported_state(amps_state, objective):
    if objective.kind == "approx_qfi_max":
        # F~ depends on |alpha_n| only, so report the nonnegative representative
        return normalize(np.abs(amps_state.amplitudes))
    return amps_state


def optimize_mps(
    N: int,
    D: int,
    objective: ObjectiveSpec,
    opts: OptimizerOptions | None = None,
    initial: Sequence[DiagonalMPS] | None = None,
) -> OptimizationResult:
    """Best diagonal MPS of bond dimension ``D`` for ``objective``.

    Runs a local search (``opts.method``) from each of: ``initial`` (if
    given), an all-equal start, a complementary ramp start (``D >= 2``) and
    ``opts.starts`` seeded uniform starts. The winner is reported in
    canonical form.
    """
    opts = opts or OptimizerOptions()
    if N < 1 or D < 1:
        raise DomainError("need N >= 1 and D >= 1")
    fun = _mps_loss_and_grad(objective, N)
    search = _gradient_search if opts.method == "gradient" else _simplex_search
    starts = _mps_starts(N, D, objective, opts, initial)
    (x, _, nit, conv), records = _run_starts(lambda x0: search(fun, x0, opts), starts)
    mps = _mps_from_vector(x, N, objective.gauge)
    state = _reported_state(mps_amplitudes(mps), objective)
    return _finish(canonical_form(mps), state, objective, conv, nit, opts, records, raw=mps)


def optimize_direct(
    N: int,
    objective: ObjectiveSpec,
    opts: OptimizerOptions | None = None,
    initial: Sequence[SymmetricState] | None = None,
    max_n: int = DIRECT_MAX_N,
) -> OptimizationResult:
    """Best symmetric state over all ``N+1`` amplitudes (brute-force reference).

    The QFI objective is concave in ``p_n = |alpha_n|^2`` and is maximized by
    SLSQP on the probability simplex; ``certificate`` then holds an upper
    bound on the global optimum (the largest gradient entry). The Ramsey
    objective is searched with L-BFGS over the gauge's real parameters.
    """
    opts = opts or OptimizerOptions()
    if N < 1:
        raise DomainError("need N >= 1")
    if N > max_n:
        raise CapabilityError(f"direct optimization capped at N <= {max_n}")
    starts = _direct_starts(N, objective, opts, initial)
    if objective.kind == "approx_qfi_max":
        eta = objective.eta
        (P, _, nit, conv), records = _run_starts(
            lambda x0: _simplex_qfi_search(eta, np.asarray(x0) ** 2, opts), starts
        )
        state = normalize(np.sqrt(P))
        _, g = approx_qfi_gradient(state.probabilities, eta)
        cert = float(np.max(g))
    else:
        fun = _direct_loss_and_grad(objective, N)
        (x, _, nit, conv), records = _run_starts(lambda x0: _gradient_search(fun, x0, opts), starts)
        state = normalize(_direct_amplitudes(x, N, objective.gauge))
        cert = None
    return _finish(state, state, objective, conv, nit, opts, records, cert)


@dataclass
class BondDimensionReport:
    n_probes: int
    objective: ObjectiveSpec
    threshold: float
    d_star: int | None
    direct_delta_phi: float
    mps_delta_phi: dict
    cap_exceeded: bool


def relative_gap(delta_mps: float, delta_direct: float) -> float:
    return (delta_mps - delta_direct) / delta_direct


def minimal_bond_dimension(
    N: int,
    objective: ObjectiveSpec,
    threshold: float = 0.01,
    opts: OptimizerOptions | None = None,
    d_cap: int = 12,
    direct: OptimizationResult | None = None,
) -> BondDimensionReport:
    """Smallest ``D`` whose MPS optimum is within ``threshold`` of the direct one.

    Each ``D+1`` search also starts from the ``D`` optimum padded with a zero
    pair, so the sequence of optima is non-worsening.
    """
    opts = opts or OptimizerOptions()
    if direct is None:
        direct = optimize_direct(N, objective, opts)
    deltas = {}
    previous = None
    for D in range(1, d_cap + 1):
        initial = [previous.embed()] if previous is not None else None
        res = optimize_mps(N, D, objective, opts, initial=initial)
        deltas[D] = res.delta_phi
        previous = res.raw_params
        if relative_gap(res.delta_phi, direct.delta_phi) <= threshold:
            return BondDimensionReport(N, objective, threshold, D, direct.delta_phi, deltas, False)
    return BondDimensionReport(N, objective, threshold, None, direct.delta_phi, deltas, True)


def with_seed(opts: OptimizerOptions, seed: int) -> OptimizerOptions:
    return replace(opts, seed=seed)
