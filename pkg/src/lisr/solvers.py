"""
Incremental quasi-Newton solvers
--------------------------------
LISR-1 / LISR-k (greedy symmetric rank-1 / rank-k estimator updates inside
an incremental aggregated Newton-type iteration), the IQN baseline with
secant BFGS updates, and a damped Newton reference solver.

Two execution modes share one state layout:

``eager``
    reference form: every iterate is a direct Cholesky solve with the summed
    estimators, and all estimators are multiplied by ``omega`` at each cycle
    boundary (``O(n d^2)`` at that step).
``lazy``
    efficient form: the inverse of the summed estimators is maintained with
    low-rank inverse updates, and the per-cycle scaling is applied to an
    estimator only when it is touched again. Aggregates always hold the
    scale-applied values, so the lazy iterates reproduce the eager ones.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from . import linalg, updates
from .errors import MissingConstants, NonConvergence, SingularCorrection, SolverError
from .problems.base import ObjectiveOracle, problem_constants

METHODS = ("lisr1", "lisrk", "iqn")
MODES = ("eager", "lazy")
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ScalingSchedule:
    """Per-cycle inflation ``omega = (1 + alpha_c)^2`` with ``alpha_c = M sqrt(L) r0 rho^c``."""

    M: float = 0.0
    L: float = 1.0
    r0: float = 1.0
    rho: float = 0.5
    enabled: bool = True

    def alpha(self, c: int) -> float:
        if not self.enabled or self.M == 0.0:
            return 0.0
        return self.M * math.sqrt(self.L) * self.r0 * self.rho ** c


def omega(t: int, n: int, s: ScalingSchedule) -> float:
    """Scaling factor applied after iteration ``t`` (``t >= 1``).

    Scaling only happens at cycle boundaries, i.e. when ``t`` is a multiple
    of ``n``; otherwise the factor is 1.
    """
    if t < 1:
        raise ValueError("omega is defined for t >= 1")
    if t % n != 0:
        return 1.0
    return (1.0 + s.alpha(-(-t // n))) ** 2


def default_schedule(oracle: ObjectiveOracle, x0, k: int = 1, scaling: Optional[bool] = None,
                     r0: Optional[float] = None, rho: Optional[float] = None) -> ScalingSchedule:
    """Schedule from the oracle's constants.

    Scaling defaults to on exactly when ``M > 0``. ``r0`` defaults to
    ``||x0|| + 1`` and ``rho`` to ``(1 - k/d) / 2``.
    """
    consts = problem_constants(oracle)
    d = oracle.d
    if rho is None:
        rho = (1.0 - k / d) / 2.0
    if r0 is None:
        r0 = float(np.linalg.norm(x0)) + 1.0
    if scaling is None:
        scaling = bool(consts.M)
    M = consts.M
    if M is None:
        if scaling:
            raise MissingConstants("scaling requested but the oracle has no Hessian Lipschitz bound")
        M = 0.0
    if scaling and not 0.0 < rho < 1.0 - k / d:
        raise ValueError(f"rho must lie in (0, {1 - k / d}), got {rho}")
    return ScalingSchedule(M=M, L=consts.L, r0=r0, rho=rho, enabled=bool(scaling))


@dataclass
class SolverConfig:
    method: str = "lisr1"
    k: int = 1
    mode: str = "lazy"
    max_passes: int = 50
    tolerance: float = 1e-10
    schedule: Optional[ScalingSchedule] = None
    init: str = "upper"  # "upper": E_i = L I, "hessian": E_i = hess_i(x0) + 1e-8 L I
    check: bool = False  # verify estimator dominance after every update (costly)

    def validated(self, d: int) -> "SolverConfig":
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.init not in ("upper", "hessian"):
            raise ValueError(f"unknown init policy {self.init!r}")
        k = 1 if self.method == "lisr1" else self.k
        if self.method == "lisrk" and not 1 <= k < d:
            raise ValueError(f"k must lie in [1, {d}), got {k}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        return replace(self, k=k)

    @property
    def label(self) -> str:
        if self.method == "lisr1":
            return "LISR-1"
        if self.method == "lisrk":
            return f"LISR-k({self.k})"
        return "IQN"


@dataclass
class EstimatorBank:
    """Per-component ``z_i``, stored ``B_i`` and ``grad f_i(z_i)``.

    ``stamp[i]`` is the number of cycle-boundary scalings already folded into
    ``B[i]``; the effective estimator is ``B[i]`` times the product of the
    boundary factors recorded after that.
    """

    z: np.ndarray
    B: np.ndarray
    grads: np.ndarray
    stamp: np.ndarray
    boundary_factors: List[float] = field(default_factory=list)

    @property
    def pending_scale_exponent(self) -> np.ndarray:
        return len(self.boundary_factors) - self.stamp

    def pending_factor(self, i: int) -> float:
        return float(np.prod(self.boundary_factors[self.stamp[i]:]))

    def effective(self, i: int) -> np.ndarray:
        f = self.pending_factor(i)
        return self.B[i] * f if f != 1.0 else self.B[i]

    def effective_all(self) -> np.ndarray:
        return np.stack([self.effective(i) for i in range(self.B.shape[0])])


@dataclass
class Aggregates:
    phi: np.ndarray  # sum_i B_i z_i
    g: np.ndarray  # sum_i grad f_i(z_i)
    bbar_inv: Optional[np.ndarray]  # (sum_i B_i)^{-1}; None in eager mode


@dataclass
class SolverState:
    config: SolverConfig
    bank: EstimatorBank
    agg: Aggregates
    x: np.ndarray
    t: int = 0
    grad_calls: int = 0
    hess_calls: int = 0
    skipped_updates: int = 0
    dominance_violations: int = 0

    @property
    def n(self):
        return self.bank.B.shape[0]

    def copy(self) -> "SolverState":
        bank = EstimatorBank(self.bank.z.copy(), self.bank.B.copy(), self.bank.grads.copy(),
                             self.bank.stamp.copy(), list(self.bank.boundary_factors))
        agg = Aggregates(self.agg.phi.copy(), self.agg.g.copy(),
                         None if self.agg.bbar_inv is None else self.agg.bbar_inv.copy())
        return replace(self, bank=bank, agg=agg, x=self.x.copy())

    def save(self, path):
        """Write a versioned ``.npz`` checkpoint (config is not included)."""
        np.savez(
            path,
            version=CHECKPOINT_VERSION,
            z=self.bank.z, B=self.bank.B, grads=self.bank.grads, stamp=self.bank.stamp,
            boundary_factors=np.asarray(self.bank.boundary_factors, dtype=float),
            phi=self.agg.phi, g=self.agg.g,
            bbar_inv=self.agg.bbar_inv if self.agg.bbar_inv is not None else np.zeros((0, 0)),
            x=self.x,
            counters=np.array([self.t, self.grad_calls, self.hess_calls, self.skipped_updates,
                               self.dominance_violations]),
        )

    @classmethod
    def load(cls, path, config: SolverConfig) -> "SolverState":
        with np.load(Path(path)) as data:
            if int(data["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {int(data['version'])}")
            bank = EstimatorBank(data["z"].copy(), data["B"].copy(), data["grads"].copy(),
                                 data["stamp"].copy(), [float(f) for f in data["boundary_factors"]])
            bbar_inv = data["bbar_inv"].copy()
            agg = Aggregates(data["phi"].copy(), data["g"].copy(), bbar_inv if bbar_inv.size else None)
            t, gc, hc, sk, dv = (int(c) for c in data["counters"])
            return cls(config, bank, agg, data["x"].copy(), t, gc, hc, sk, dv)


def init_bank(oracle: ObjectiveOracle, x0, config: SolverConfig) -> SolverState:
    """Initial state with ``z_i = x0`` and ``B_i = (1 + alpha_0)^2 E_i``.

    ``config.schedule`` must be resolved (not ``None``) for LISR methods.
    Oracle calls made here are not counted.
    """
    n, d = oracle.n, oracle.d
    x0 = np.asarray(x0, dtype=float).copy()
    sched = config.schedule if config.method != "iqn" else None
    scale0 = (1.0 + sched.alpha(0)) ** 2 if sched is not None else 1.0
    if config.init == "upper":
        B = np.broadcast_to(scale0 * oracle.L * np.eye(d), (n, d, d)).copy()
    else:
        eps = 1e-8 * oracle.L
        B = np.stack([scale0 * (oracle.hess_i(i, x0) + eps * np.eye(d)) for i in range(n)])
    z = np.tile(x0, (n, 1))
    grads = np.stack([oracle.grad_i(i, x0) for i in range(n)])
    bank = EstimatorBank(z, B, grads, np.zeros(n, dtype=int))
    Bsum = B.sum(axis=0)
    bbar_inv = linalg.spd_inverse(Bsum) if config.mode == "lazy" else None
    agg = Aggregates(Bsum @ x0, grads.sum(axis=0), bbar_inv)
    return SolverState(config, bank, agg, x0)


def _eager_iterate(state: SolverState) -> np.ndarray:
    bank = state.bank
    Bsum = bank.B.sum(axis=0)
    phi = np.einsum("nij,nj->i", bank.B, bank.z)
    g = bank.grads.sum(axis=0)
    state.agg.phi, state.agg.g = phi, g
    return linalg.spd_solve(Bsum, phi - g)


def _boundary(state: SolverState, sched: Optional[ScalingSchedule]):
    t1 = state.t + 1
    if sched is None or t1 % state.n != 0:
        return
    w = omega(t1, state.n, sched)
    if w == 1.0:
        return
    if state.config.mode == "eager":
        state.bank.B *= w
    else:
        state.bank.boundary_factors.append(w)
        state.agg.phi *= w
        state.agg.bbar_inv /= w


def _check_dominance(state, oracle, i, x, Q):
    A = oracle.hess_i(i, x)
    # relative to |Q|: after heavy scaling, Q - A carries roundoff of order eps * |Q|
    if np.linalg.eigvalsh(Q - A)[0] < -1e-8 * max(oracle.L, float(np.abs(Q).max())):
        state.dominance_violations += 1


def lisr_step_eager(state: SolverState, oracle: ObjectiveOracle) -> np.ndarray:
    cfg = state.config
    i = state.t % state.n
    x = _eager_iterate(state)
    A = oracle.hess_i(i, x)
    gi = oracle.grad_i(i, x)
    state.grad_calls += 1
    state.hess_calls += 1
    G = state.bank.B[i]
    if cfg.k == 1:
        u, exhausted = updates.greedy_direction(G, A)
        Q = G if exhausted else updates.sr1_update(G, A, u)
    else:
        U = updates.greedy_directions_k(G, A, cfg.k)
        j = U.basis_indices[0]
        exhausted = G[j, j] - A[j, j] <= updates.gap_threshold(G, A)
        Q = G if exhausted else updates.srk_update(G, A, U)
    if exhausted or np.array_equal(Q, G):
        state.skipped_updates += 1
    if cfg.check:
        _check_dominance(state, oracle, i, x, Q)
    state.bank.B[i] = Q
    state.bank.z[i] = x
    state.bank.grads[i] = gi
    _boundary(state, cfg.schedule)
    state.t += 1
    state.x = x
    return x


def _lowrank_correction(G, A_cols, idx, k):
    """Return ``(V, W)`` with ``SR-k(G, A, E) = G - V W^{-1} V^T``, or ``None`` if degenerate."""
    V = G[:, idx] - A_cols
    middle = linalg.symmetrize(V[idx, :])
    if k == 1:
        return V, middle
    lam, Qm = np.linalg.eigh(middle)
    keep = np.abs(lam) > linalg.SINGULAR_RTOL * np.abs(lam).max()
    if not keep.any():
        return None
    return V @ Qm[:, keep], np.diag(lam[keep])


def lisr_step_lazy(state: SolverState, oracle: ObjectiveOracle) -> np.ndarray:
    cfg = state.config
    bank, agg = state.bank, state.agg
    i = state.t % state.n
    x = agg.bbar_inv @ (agg.phi - agg.g)
    G = bank.effective(i)
    diagA = oracle.hess_diag_i(i, x)
    gi = oracle.grad_i(i, x)
    state.grad_calls += 1
    state.hess_calls += 1
    gap = np.diag(G) - diagA
    idx = linalg.top_k_indices(gap, cfg.k)
    threshold = updates.DEGENERATE_RTOL * max(np.abs(np.diag(G)).max(), np.abs(diagA).max())
    Q, new_inv = G, None
    if gap[idx[0]] > threshold:
        corr = _lowrank_correction(G, oracle.hess_col_i(i, x, idx), idx, cfg.k)
        if corr is not None:
            V, W = corr
            try:
                new_inv = linalg.update_inverse(agg.bbar_inv, V, V, W)
            except SingularCorrection:
                new_inv = None
            else:
                Q = linalg.symmetrize(G - V @ np.linalg.solve(W, V.T))
    if new_inv is None:
        state.skipped_updates += 1
    else:
        agg.bbar_inv = new_inv
    if cfg.check:
        _check_dominance(state, oracle, i, x, Q)
    agg.phi = agg.phi - G @ bank.z[i] + Q @ x
    agg.g = agg.g - bank.grads[i] + gi
    bank.B[i] = Q
    bank.stamp[i] = len(bank.boundary_factors)
    bank.z[i] = x
    bank.grads[i] = gi
    _boundary(state, cfg.schedule)
    state.t += 1
    state.x = x
    return x


def iqn_step(state: SolverState, oracle: ObjectiveOracle) -> np.ndarray:
    """One IQN iteration: aggregated iterate plus a secant BFGS update of ``B_i``.

    The update is skipped when ``s^T y <= 1e-12 ||s||^2``.
    """
    bank, agg = state.bank, state.agg
    i = state.t % state.n
    if state.config.mode == "eager":
        x = _eager_iterate(state)
    else:
        x = agg.bbar_inv @ (agg.phi - agg.g)
    gi = oracle.grad_i(i, x)
    state.grad_calls += 1
    B = bank.B[i]
    s = x - bank.z[i]
    y = gi - bank.grads[i]
    ys = float(y @ s)
    Q = B
    if np.any(s) and ys > 1e-12 * float(s @ s):
        Bs = B @ s
        sBs = float(s @ Bs)
        Q = linalg.symmetrize(B + np.outer(y, y) / ys - np.outer(Bs, Bs) / sBs)
        if agg.bbar_inv is not None:
            inv = linalg.update_inverse(agg.bbar_inv, y, y, [[-ys]])
            agg.bbar_inv = linalg.update_inverse(inv, Bs, Bs, [[sBs]])
    else:
        state.skipped_updates += 1
    agg.phi = agg.phi - B @ bank.z[i] + Q @ x
    agg.g = agg.g - bank.grads[i] + gi
    bank.B[i] = Q
    bank.z[i] = x
    bank.grads[i] = gi
    state.t += 1
    state.x = x
    return x


def step(state: SolverState, oracle: ObjectiveOracle) -> np.ndarray:
    cfg = state.config
    try:
        if cfg.method == "iqn":
            return iqn_step(state, oracle)
        if cfg.mode == "eager":
            return lisr_step_eager(state, oracle)
        return lisr_step_lazy(state, oracle)
    except Exception as exc:
        raise SolverError(state.t, exc, cfg.label) from exc


def newton_reference(oracle: ObjectiveOracle, x0=None, tol: Optional[float] = None, max_iter: int = 200,
                     full_output: bool = False):
    """Minimizer of the full objective.

    Uses the oracle's closed form when it has one, otherwise damped Newton
    with Armijo backtracking until ``||grad f(x)|| <= tol``. The default
    ``tol`` is ``1e-13 * max(1, ||grad f(x0)||)``. Iteration also stops once
    the Newton step falls to roundoff level.
    """
    closed = oracle.closed_form_minimizer()
    if closed is not None:
        return (closed, 0) if full_output else closed
    x = np.zeros(oracle.d) if x0 is None else np.asarray(x0, dtype=float).copy()
    g = oracle.grad(x)
    if tol is None:
        tol = 1e-13 * max(1.0, float(np.linalg.norm(g)))
    for it in range(max_iter + 1):
        if np.linalg.norm(g) <= tol:
            return (x, it) if full_output else x
        if it == max_iter:
            break
        p = linalg.spd_solve(oracle.hess(x), -g)
        slope = float(g @ p)
        step_size = 1.0
        if -slope > 1e-8:
            f0 = oracle.value(x)
            while oracle.value(x + step_size * p) > f0 + 1e-4 * step_size * slope and step_size > 1e-12:
                step_size *= 0.5
        x = x + step_size * p
        g = oracle.grad(x)
        if np.linalg.norm(step_size * p) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            return (x, it + 1) if full_output else x
    raise NonConvergence(f"Newton did not reach ||grad|| <= {tol:.3e} in {max_iter} iterations")


@dataclass(frozen=True)
class RunRecord:
    method: str
    pass_index: int
    normalized_error: float
    grad_norm: float
    wall_seconds: float
    grad_calls: int
    hess_calls: int
    skipped_updates: int


def run(oracle: ObjectiveOracle, config: SolverConfig, x0=None, x_star=None,
        callback: Optional[Callable[[int, np.ndarray], None]] = None) -> List[RunRecord]:
    """Run a solver and record one :class:`RunRecord` per effective pass.

    Pass 0 records the starting point. The loop stops after the first pass
    whose normalized error is ``<= config.tolerance``, or after
    ``config.max_passes`` passes; a non-finite tolerance disables the early
    stop. ``callback(t, x)`` is called after every iteration with the new
    iterate ``x^t``. Oracle counters exclude initialization.
    """
    x0 = np.zeros(oracle.d) if x0 is None else np.asarray(x0, dtype=float)
    cfg = config.validated(oracle.d)
    if cfg.method != "iqn" and cfg.schedule is None:
        cfg = replace(cfg, schedule=default_schedule(oracle, x0, cfg.k))
    if x_star is None:
        x_star = newton_reference(oracle, x0)
    e0 = float(np.linalg.norm(x0 - x_star))
    start = time.perf_counter()
    try:
        state = init_bank(oracle, x0, cfg)
    except Exception as exc:
        raise SolverError(0, exc, cfg.label) from exc

    def record(p):
        err = float(np.linalg.norm(state.x - x_star)) / e0 if e0 > 0 else 0.0
        return RunRecord(cfg.label, p, err, float(np.linalg.norm(oracle.grad(state.x))),
                         time.perf_counter() - start, state.grad_calls, state.hess_calls,
                         state.skipped_updates)

    records = [record(0)]
    early_stop = math.isfinite(cfg.tolerance)
    for p in range(1, cfg.max_passes + 1):
        if early_stop and records[-1].normalized_error <= cfg.tolerance:
            break
        for _ in range(state.n):
            x = step(state, oracle)
            if callback is not None:
                callback(state.t, x)
        records.append(record(p))
    return records
