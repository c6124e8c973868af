"""Exact checks of NIAS, NIAC and NIS on a dataset, plus the IDI and IEI indices.

Notation used throughout: ``lhs[i]`` is the realized value of problem i and
``rhs[i, j]`` the value problem i would reach by adopting the attention
revealed in problem j and re-optimizing actions under problem i's prizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import DecisionProblem, SdscDataset, expected_utility

TAU = 1e-9


@dataclass(frozen=True)
class InequalityResult:
    kind: str  # NIAS | NIS-within | NIS-cross | NIAC-cycle
    problems: tuple[str, ...]
    lhs: float
    rhs: float
    tau: float = TAU
    detail: dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tau

    def to_dict(self) -> dict[str, Any]:
        out = {"kind": self.kind, "problems": list(self.problems), "lhs": self.lhs,
               "rhs": self.rhs, "slack": self.slack, "pass": self.passed}
        out.update(self.detail)
        return out


def switch_value(target: DecisionProblem, source: DecisionProblem) -> tuple[float, NDArray[np.int64]]:
    """Value of source's choice data re-optimized under target's prizes.

    Returns ``sum_a max_ahat sum_w P_source(a,w) u_target(ahat,w)`` and, for
    each source action, the index of the maximizing target action (first on
    ties).
    """
    scores = source.joint @ target.utility.T  # (source actions, target actions)
    best = np.argmax(scores, axis=1)
    return float(scores[np.arange(len(best)), best].sum()), best


def nis_matrices(dataset: SdscDataset) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Vector of realized values and the full matrix of switch values."""
    n = len(dataset)
    lhs = np.array([expected_utility(p) for p in dataset.problems])
    rhs = np.empty((n, n))
    for i, pi in enumerate(dataset.problems):
        for j, pj in enumerate(dataset.problems):
            rhs[i, j] = switch_value(pi, pj)[0]
    return lhs, rhs


def check_nias(dataset: SdscDataset, tau: float = TAU) -> list[InequalityResult]:
    """One row per problem and ordered pair of distinct actions (a, ahat)."""
    rows = []
    for p in dataset.problems:
        u = p.utility
        for k, a in enumerate(p.actions):
            own = float(p.joint[k] @ u[k])
            for m, alt in enumerate(p.actions):
                if m == k:
                    continue
                rows.append(InequalityResult(
                    "NIAS", (p.id,), own, float(p.joint[k] @ u[m]), tau,
                    {"action": a, "switch_to": alt},
                ))
    return rows


def check_nis(dataset: SdscDataset, tau: float = TAU) -> list[InequalityResult]:
    """Every ordered pair (i, j), i = j included, in row-major order."""
    lhs, rhs = nis_matrices(dataset)
    ids = dataset.ids
    rows = []
    for i in range(len(ids)):
        for j in range(len(ids)):
            kind = "NIS-within" if i == j else "NIS-cross"
            rows.append(InequalityResult(kind, (ids[i], ids[j]), float(lhs[i]), float(rhs[i, j]), tau))
    return rows


@dataclass(frozen=True)
class NiacResult:
    passed: bool
    witness: tuple[str, ...] | None
    witness_weight: float | None
    weights: NDArray[np.float64]
    tau: float
    nias_divergence: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "pass": self.passed,
            "witness_cycle": None if self.witness is None else list(self.witness),
            "witness_weight": self.witness_weight,
            "edge_weights": self.weights.tolist(),
            "nias_divergence": self.nias_divergence,
        }


def attention_weights(rhs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Edge weight i -> j: G(Q_i|A_i,x_i) - G(Q_j|A_i,x_i), the loss from borrowing j's attention."""
    return np.diag(rhs)[:, None] - rhs


def has_negative_cycle(weights: NDArray[np.float64], tau: float = 0.0) -> bool:
    """Bellman-Ford from a virtual source on the complete graph.

    Each edge carries an extra ``tau``, so a cycle of k edges counts as
    negative only when its weight is below ``-k * tau``.
    """
    n = weights.shape[0]
    w = weights + tau
    dist = np.zeros(n)
    for _ in range(n):
        changed = False
        for u in range(n):
            cand = dist[u] + w[u]
            cand[u] = np.inf
            better = cand < dist
            if better.any():
                dist = np.where(better, cand, dist)
                changed = True
        if not changed:
            return False
    return True


def shortest_negative_cycle(weights: NDArray[np.float64], tau: float = 0.0) -> list[int] | None:
    """Negative cycle with the fewest edges, under the same per-edge ``tau``.

    Grows closed walks one edge at a time; the first negative closed walk
    found is necessarily a simple cycle, since any shorter negative cycle
    would have been found earlier.
    """
    n = weights.shape[0]
    w = weights + tau
    np.fill_diagonal(w, np.inf)
    walk = w.copy()  # walk[s, v]: lightest s -> v walk with k edges
    parents = []
    for _ in range(2, n + 1):
        cand = walk[:, :, None] + w[None, :, :]  # s, m, v
        par = np.argmin(cand, axis=1)
        walk = np.take_along_axis(cand, par[:, None, :], axis=1)[:, 0, :]
        parents.append(par)
        diag = np.diag(walk)
        if np.any(diag < 0):
            s = int(np.argmin(diag))
            back = []
            v = s
            for par_k in reversed(parents):
                v = int(par_k[s, v])
                back.append(v)
            return [s] + back[::-1]
    return None


def check_niac(dataset: SdscDataset, tau: float = TAU) -> NiacResult:
    lhs, rhs = nis_matrices(dataset)
    weights = attention_weights(rhs)
    nias_gap = bool(np.any(lhs < np.diag(rhs) - tau))
    if len(dataset) < 2 or not has_negative_cycle(weights, tau):
        return NiacResult(True, None, None, weights, tau, nias_gap)
    cycle = shortest_negative_cycle(weights, tau)
    assert cycle is not None
    total = float(sum(weights[cycle[k], cycle[(k + 1) % len(cycle)]] for k in range(len(cycle))))
    return NiacResult(False, tuple(dataset.ids[k] for k in cycle), total, weights, tau, nias_gap)


def cycle_gain(dataset: SdscDataset, cycle: Sequence[int | str]) -> float:
    """Net utility change from rotating attention along ``cycle``.

    Each problem in turn adopts the attention of the next one; positive
    values are improvements, so NIAC asks for every cycle gain to be <= 0.
    """
    idx = [dataset.index_of(k) for k in cycle]
    _, rhs = nis_matrices(dataset)
    weights = attention_weights(rhs)
    return -float(sum(weights[idx[k], idx[(k + 1) % len(idx)]] for k in range(len(idx))))


def _require_nonnegative(dataset: SdscDataset) -> None:
    for p in dataset.problems:
        if np.any(p.utility < 0):
            raise ValueError(f"problem {p.id}: improvability indices need nonnegative utilities")


def full_information_value(problem: DecisionProblem, prior: NDArray[np.float64]) -> float:
    return float(np.sum(prior * problem.utility.max(axis=0)))


def no_information_value(problem: DecisionProblem, prior: NDArray[np.float64]) -> float:
    return float(np.max(problem.utility @ prior))


def improvability_difference_index(dataset: SdscDataset, normalization: str = "full_info") -> float:
    """Largest normalized gain from a switch, floored at zero.

    ``normalization="full_info"`` divides by the full-information value of problem
    i; ``"no_info"`` divides by the value of acting on the prior alone.
    """
    _require_nonnegative(dataset)
    value = {"full_info": full_information_value, "no_info": no_information_value}[normalization]
    lhs, rhs = nis_matrices(dataset)
    best = 0.0
    for i, p in enumerate(dataset.problems):
        den = value(p, dataset.prior)
        if den <= 0:
            raise ZeroDivisionError(f"problem {p.id}: zero normalizing value (all prizes zero?)")
        best = max(best, float(np.max(rhs[i] - lhs[i])) / den)
    return best


def improvability_efficiency_index(dataset: SdscDataset) -> float:
    """Largest eps in [0, 1] with lhs[i] >= eps * rhs[i, j] for all pairs."""
    _require_nonnegative(dataset)
    lhs, rhs = nis_matrices(dataset)
    eps = 1.0
    for i in range(len(lhs)):
        for j in range(len(lhs)):
            if rhs[i, j] > 0:
                eps = min(eps, lhs[i] / rhs[i, j])
    return max(0.0, float(eps))


@dataclass(frozen=True)
class ConditionReport:
    ids: tuple[str, ...]
    nias: tuple[InequalityResult, ...]
    nis: tuple[InequalityResult, ...]
    niac: NiacResult
    idi_full_info: float | None
    idi_no_info: float | None
    iei: float | None
    tau: float

    @property
    def nias_pass(self) -> bool:
        return all(r.passed for r in self.nias)

    @property
    def nis_pass(self) -> bool:
        return all(r.passed for r in self.nis)

    @property
    def niac_pass(self) -> bool:
        return self.niac.passed

    @property
    def worst_violation(self) -> InequalityResult | None:
        rows = [r for r in (*self.nias, *self.nis) if not r.passed]
        return min(rows, key=lambda r: r.slack) if rows else None

    def nis_row(self, i: str, j: str) -> InequalityResult:
        for r in self.nis:
            if r.problems == (str(i), str(j)):
                return r
        raise KeyError((i, j))

    def to_dict(self) -> dict[str, Any]:
        worst = self.worst_violation
        return {
            "problems": list(self.ids),
            "tau": self.tau,
            "nias": {"pass": self.nias_pass, "rows": [r.to_dict() for r in self.nias]},
            "nis": {"pass": self.nis_pass, "rows": [r.to_dict() for r in self.nis]},
            "niac": self.niac.to_dict(),
            "idi": {"full_info": self.idi_full_info, "no_info": self.idi_no_info},
            "iei": self.iei,
            "worst_violation": None if worst is None else worst.to_dict(),
        }


def audit(dataset: SdscDataset, tau: float = TAU) -> ConditionReport:
    """Run all three conditions and both indices."""
    nias = tuple(check_nias(dataset, tau))
    nis = tuple(check_nis(dataset, tau))
    niac = check_niac(dataset, tau)
    try:
        idi_full = improvability_difference_index(dataset, "full_info")
        idi0 = improvability_difference_index(dataset, "no_info")
        iei = improvability_efficiency_index(dataset)
    except (ValueError, ZeroDivisionError):
        idi_full = idi0 = iei = None
    report = ConditionReport(tuple(dataset.ids), nias, nis, niac, idi_full, idi0, iei, tau)
    if report.nis_pass:
        assert report.nias_pass and report.niac_pass, "NIS must imply NIAS and NIAC"
    return report
