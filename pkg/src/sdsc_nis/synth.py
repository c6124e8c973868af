"""Generative models with known ground truth.

Two rational-inattention solvers over joints with a fixed state marginal:

* fixed capacity: maximize expected utility subject to I(a; w) <= C nats.
  Every dataset it produces satisfies NIS.
* elastic (Shannon cost): maximize expected utility - lam * I(a; w).
  Satisfies NIAS and NIAC but fails NIS once incentives move.

Both rest on the same inner problem. For inverse temperature ``beta`` the
optimal choice rule is P(a|w) proportional to p(a) exp(beta u(a,w)), where the
action marginal ``p`` maximizes sum_w mu(w) log sum_a p(a) exp(beta u(a,w)).
That marginal is found by a Blahut-Arimoto fixed point, or by a
one-dimensional root search when there are two actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .core import DecisionProblem, PrizeSpec, SdscDataset, StateSpace, TrialRecord

INNER_TOL = 1e-12
MI_TOL = 1e-12
MAX_INNER = 100_000
MAX_OUTER = 200


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class CapacityModel:
    capacity: float
    prior: NDArray[np.float64]
    prizes: tuple[NDArray[np.float64], ...] = ()

    def __post_init__(self) -> None:
        if not (self.capacity > 0 and math.isfinite(self.capacity)):
            raise ValueError("capacity must be positive and finite (nats)")
        object.__setattr__(self, "prior", _check_prior(self.prior))


@dataclass(frozen=True)
class ElasticModel:
    cost: float  # utility per nat
    prior: NDArray[np.float64]
    prizes: tuple[NDArray[np.float64], ...] = ()

    def __post_init__(self) -> None:
        if not self.cost > 0:
            raise ValueError("marginal cost of information must be positive")
        object.__setattr__(self, "prior", _check_prior(self.prior))


def _check_prior(prior: Sequence[float]) -> NDArray[np.float64]:
    mu = np.asarray(prior, dtype=float)
    if mu.ndim != 1 or np.any(mu < 0) or abs(mu.sum() - 1) > 1e-12:
        raise ValueError("prior must be a probability vector")
    return mu


def mutual_information(joint: NDArray[np.float64], prior: NDArray[np.float64] | None = None) -> float:
    """I(a; w) in nats, with 0 log 0 = 0."""
    joint = np.asarray(joint, dtype=float)
    mu = joint.sum(axis=0) if prior is None else np.asarray(prior, dtype=float)
    pa = joint.sum(axis=1)
    denom = pa[:, None] * mu[None, :]
    mask = joint > 0
    return max(0.0, float(np.sum(joint[mask] * np.log(joint[mask] / denom[mask]))))


def _joint_from_marginal(pa: NDArray, prior: NDArray, u: NDArray, beta: float) -> NDArray:
    logits = np.log(np.where(pa > 0, pa, 1.0))[:, None] + beta * u
    logits = np.where(pa[:, None] > 0, logits, -np.inf)
    logits -= logits.max(axis=0, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=0, keepdims=True) * prior[None, :]


def _binary_marginal(prior: NDArray, u: NDArray, beta: float) -> NDArray:
    # concave in p = P(a1); derivative sum_w mu (e1 - e2) / (p e1 + (1-p) e2)
    z = beta * u
    z = z - z.max(axis=0, keepdims=True)
    e1, e2 = np.exp(z[0]), np.exp(z[1])

    def slope(p: float) -> float:
        return float(np.sum(prior * (e1 - e2) / (p * e1 + (1 - p) * e2)))

    if slope(0.0) <= 0:
        return np.array([0.0, 1.0])
    if slope(1.0) >= 0:
        return np.array([1.0, 0.0])
    p = brentq(slope, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return np.array([p, 1.0 - p])


def _blahut_arimoto(prior: NDArray, e: NDArray, start: NDArray | None = None,
                    tol: float = 1e-10, max_iter: int = 2000) -> NDArray:
    """Blahut-Arimoto updates of the action marginal; used as a warm start.

    ``e`` holds exp(beta * u), column-normalized. Stops early once the
    marginal moves less than ``tol``; the Newton polish finishes the job.
    """
    n_actions = e.shape[0]
    pa = np.full(n_actions, 1.0 / n_actions) if start is None else np.asarray(start, dtype=float).copy()
    pa = np.maximum(pa, 1e-3 / n_actions)
    pa /= pa.sum()
    for _ in range(max_iter):
        ratio = e @ (prior / (pa @ e))
        new_pa = pa * ratio
        new_pa /= new_pa.sum()
        if np.max(np.abs(new_pa - pa)) <= tol:
            return new_pa
        pa = new_pa
    return pa


def _polish_marginal(prior: NDArray, e: NDArray, pa: NDArray) -> NDArray:
    """Active-set Newton ascent of sum_w mu(w) log sum_a p(a) e(a, w) over the simplex.

    At the optimum every action in the support has first-order ratio 1 and
    every action outside it has ratio <= 1.
    """
    pa = np.where(pa > 1e-8 * pa.max(), pa, 0.0)
    pa /= pa.sum()
    active = pa > 0
    for _ in range(MAX_OUTER):
        for _ in range(100):
            idx = np.flatnonzero(active)
            m = pa @ e
            grad = e @ (prior / m)
            hess = -(e[idx] * (prior / m**2)) @ e[idx].T
            k = len(idx)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = hess
            kkt[:k, k] = kkt[k, :k] = 1.0
            rhs = np.append(-grad[idx], 0.0)
            step = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
            shrinking = step < 0
            limits = np.full(k, np.inf)
            limits[shrinking] = -pa[idx][shrinking] / step[shrinking]
            block = int(np.argmin(limits))
            if limits[block] < 1.0:
                # an action hits zero first; drop it and continue on the smaller face
                pa[idx] = pa[idx] + limits[block] * step
                pa[idx[block]] = 0.0
                active[idx[block]] = False
                pa = np.maximum(pa, 0.0)
                pa /= pa.sum()
                continue
            base = float(prior @ np.log(m))
            t = 1.0
            while t > 1e-10:
                trial = pa.copy()
                trial[idx] = np.maximum(trial[idx] + t * step, 0.0)
                trial /= trial.sum()
                if float(prior @ np.log(trial @ e)) >= base - 1e-15:
                    break
                t *= 0.5
            pa = trial
            if t * np.max(np.abs(step)) <= 1e-15:
                break
        ratio = e @ (prior / (pa @ e))
        outside = ~active & (ratio > 1.0 + 1e-13)
        if not np.any(outside):
            return pa
        active[int(np.argmax(np.where(outside, ratio, -np.inf)))] = True
    raise SolverError("active-set Newton did not settle the support",
                      float(np.max(e @ (prior / (pa @ e))) - 1.0))


def shannon_joint(prior: NDArray, utility: NDArray, beta: float, start: NDArray | None = None) -> NDArray:
    """Optimal joint for utility - (1/beta) * mutual information."""
    prior = np.asarray(prior, dtype=float)
    u = np.asarray(utility, dtype=float)
    if beta == 0:
        return _uninformative(prior, u)
    if u.shape[0] == 2:
        pa = _binary_marginal(prior, u, beta)
    else:
        z = beta * u
        e = np.exp(z - z.max(axis=0, keepdims=True))
        pa = _polish_marginal(prior, e, _blahut_arimoto(prior, e, start))
    return _joint_from_marginal(pa, prior, u, beta)


def _uninformative(prior: NDArray, u: NDArray) -> NDArray:
    best = int(np.argmax(u @ prior))
    joint = np.zeros_like(u, dtype=float)
    joint[best] = prior
    return joint


def _full_information(prior: NDArray, u: NDArray) -> NDArray:
    joint = np.zeros_like(u, dtype=float)
    joint[np.argmax(u, axis=0), np.arange(u.shape[1])] = prior
    return joint


def _information_irrelevant(u: NDArray) -> bool:
    # one action is best in every state, so learning cannot change the choice
    best = u.max(axis=0)
    return bool(np.any(np.all(u == best[None, :], axis=1)))


def solve_shannon_elastic(model: ElasticModel, prize: NDArray[np.float64]) -> NDArray[np.float64]:
    """Joint maximizing expected utility minus ``model.cost`` times mutual information."""
    u = np.asarray(prize, dtype=float)
    if _information_irrelevant(u):
        return _uninformative(model.prior, u)
    return shannon_joint(model.prior, u, 1.0 / model.cost)


@dataclass
class FixedCapacitySolution:
    joint: NDArray[np.float64]
    information: float
    beta: float
    binding: bool
    iterations: int = 0
    residual: float = 0.0
    notes: list[str] = field(default_factory=list)


def solve_fixed_capacity_detail(model: CapacityModel, prize: NDArray[np.float64]) -> FixedCapacitySolution:
    """Solve max E[u] s.t. I <= C by bisection on the log inverse temperature.

    The returned joint is on the feasible side: its information never
    exceeds the capacity, and when the constraint binds it falls short by at
    most ``MI_TOL``.
    """
    mu, c = model.prior, model.capacity
    u = np.asarray(prize, dtype=float)
    if _information_irrelevant(u):
        return FixedCapacitySolution(_uninformative(mu, u), 0.0, 0.0, False, notes=["prize makes information worthless"])
    full = _full_information(mu, u)
    full_info = mutual_information(full, mu)
    if full_info <= c:
        return FixedCapacitySolution(full, full_info, math.inf, False, notes=["capacity does not bind"])

    # bracket log(beta): lo feasible (I <= C), hi infeasible
    spread = float(np.max(u.max(axis=0) - u.min(axis=0)))
    start = math.log(1.0 / spread)
    j = shannon_joint(mu, u, math.exp(start))
    if mutual_information(j, mu) > c:
        hi, lo = start, start - 1.0
        while True:
            if lo < -60.0:
                lo, lo_joint = -60.0, _uninformative(mu, u)
                break
            lo_joint = shannon_joint(mu, u, math.exp(lo))
            if mutual_information(lo_joint, mu) <= c:
                break
            hi, lo = lo, lo - 1.0
    else:
        lo, lo_joint, hi = start, j, start + 1.0
        for _ in range(200):
            j = shannon_joint(mu, u, math.exp(hi))
            if mutual_information(j, mu) > c:
                break
            lo, lo_joint = hi, j
            hi += 1.0
        else:
            raise SolverError("could not bracket the capacity", c - mutual_information(lo_joint, mu))
    lo_info = mutual_information(lo_joint, mu)

    it = 0
    for it in range(1, MAX_OUTER + 1):
        if c - lo_info <= MI_TOL or hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        j = shannon_joint(mu, u, math.exp(mid), start=lo_joint.sum(axis=1))
        info = mutual_information(j, mu)
        if info <= c:
            lo, lo_joint, lo_info = mid, j, info
        else:
            hi = mid
    residual = c - lo_info
    if residual > 1e-8:
        raise SolverError("capacity bisection stalled", residual)
    return FixedCapacitySolution(lo_joint, lo_info, math.exp(lo), True, it, residual)


def solve_fixed_capacity(model: CapacityModel, prize: NDArray[np.float64]) -> NDArray[np.float64]:
    return solve_fixed_capacity_detail(model, prize).joint


def sample_trials(
    joint: NDArray[np.float64],
    n_per_state: int | Sequence[int],
    seed: int,
    problem_id: str = "1",
    actions: Sequence[str] | None = None,
    states: Sequence[str] | None = None,
    subject_id: str = "synthetic",
    stream: int = 0,
) -> list[TrialRecord]:
    """Draw choices state by state from P(a|w) by inverse CDF.

    The generator is seeded from ``(seed, stream)``, so each problem can use
    its own stream and results do not depend on call order.
    """
    joint = np.asarray(joint, dtype=float)
    n_a, n_w = joint.shape
    actions = [f"a{k + 1}" for k in range(n_a)] if actions is None else list(actions)
    states = [f"w{k + 1}" for k in range(n_w)] if states is None else list(states)
    ns = [int(n_per_state)] * n_w if np.isscalar(n_per_state) else [int(n) for n in n_per_state]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))
    records = []
    for w in range(n_w):
        col = joint[:, w]
        if ns[w] == 0:
            continue
        cdf = np.cumsum(col / col.sum())
        cdf[-1] = 1.0
        draws = np.searchsorted(cdf, rng.random(ns[w]), side="right")
        records.extend(TrialRecord(str(problem_id), subject_id, states[w], actions[int(a)]) for a in draws)
    return records


def build_dataset(
    prior: Sequence[float],
    prizes: Sequence[NDArray[np.float64]],
    joints: Sequence[NDArray[np.float64]],
    ids: Sequence[str] | None = None,
    n_per_state: int | None = None,
    metadata: dict | None = None,
) -> SdscDataset:
    """Wrap population joints as a dataset (marginal tolerance 1e-9)."""
    mu = np.asarray(prior, dtype=float)
    n_a, n_w = np.asarray(prizes[0]).shape
    actions = tuple(f"a{k + 1}" for k in range(n_a))
    ids = [str(k + 1) for k in range(len(prizes))] if ids is None else list(ids)
    problems = tuple(
        DecisionProblem(pid, actions, PrizeSpec(np.asarray(x, dtype=float)), np.asarray(j, dtype=float),
                        None if n_per_state is None else np.full(n_w, n_per_state, dtype=np.int64))
        for pid, x, j in zip(ids, prizes, joints)
    )
    states = StateSpace(tuple(f"w{k + 1}" for k in range(n_w)), mu)
    return SdscDataset(states, actions, problems, 1e-9, dict(metadata or {}))


def fixed_capacity_dataset(model: CapacityModel, **kwargs) -> SdscDataset:
    joints = [solve_fixed_capacity(model, x) for x in model.prizes]
    return build_dataset(model.prior, model.prizes, joints, **kwargs)


def elastic_dataset(model: ElasticModel, **kwargs) -> SdscDataset:
    joints = [solve_shannon_elastic(model, x) for x in model.prizes]
    return build_dataset(model.prior, model.prizes, joints, **kwargs)


def symmetric_accuracy_joint(accuracy: float, n: int = 2, prior: Sequence[float] | None = None) -> NDArray[np.float64]:
    """Joint with P(a_k|w_k) = accuracy and the error mass spread evenly."""
    mu = np.full(n, 1.0 / n) if prior is None else np.asarray(prior, dtype=float)
    cond = np.full((n, n), (1.0 - accuracy) / (n - 1))
    np.fill_diagonal(cond, accuracy)
    return cond * mu[None, :]


def sample_counts(joint: NDArray[np.float64], n_per_state: int, rng: np.random.Generator) -> NDArray[np.int64]:
    """Multinomial cell counts, state by state; the fast path of sample_trials + aggregation."""
    cond = joint / joint.sum(axis=0, keepdims=True)
    return np.column_stack([rng.multinomial(n_per_state, cond[:, w]) for w in range(joint.shape[1])])
