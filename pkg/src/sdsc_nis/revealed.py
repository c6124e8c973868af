"""Revealed posteriors, revealed experiments, and indirect expected utility."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import DecisionProblem, PrizeSpec

MERGE_TOL = 1e-9


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class Experiment:
    """Finite-support distribution over posteriors.

    ``support`` is a (k, n_states) array, one posterior per row, and
    ``weights`` the probability Q(gamma) of each row.
    """

    support: NDArray[np.float64]
    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        support = np.atleast_2d(np.array(self.support, dtype=float))
        weights = np.array(self.weights, dtype=float)
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if weights.shape != (support.shape[0],):
            raise StrategyError("one weight per support posterior is required")
        if np.any(weights <= 0):
            raise StrategyError("support weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise StrategyError(f"weights sum to {weights.sum()!r}, not 1")
        if np.any(support < 0) or np.any(np.abs(support.sum(axis=1) - 1.0) > 1e-12):
            raise StrategyError("every posterior must be a probability vector")

    @property
    def mean(self) -> NDArray[np.float64]:
        return self.weights @ self.support

    def is_bayes_plausible(self, prior: NDArray[np.float64], tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.mean - prior) <= tol))

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class ActionStrategy:
    """Mixed action choice q(a|gamma); row k is the distribution at support point k."""

    actions: tuple[str, ...]
    probs: NDArray[np.float64]

    def __post_init__(self) -> None:
        probs = np.atleast_2d(np.array(self.probs, dtype=float))
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "actions", tuple(self.actions))
        if probs.shape[1] != len(self.actions):
            raise StrategyError("strategy columns must match the action list")
        if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-12):
            raise StrategyError("each strategy row must be a probability vector")


def revealed_posteriors(problem: DecisionProblem) -> dict[str, NDArray[np.float64]]:
    """Posterior gamma^a = P(a, .)/P(a) for every action chosen with positive probability."""
    out = {}
    for k, a in enumerate(problem.actions):
        mass = problem.joint[k].sum()
        if mass > 0:
            out[a] = problem.joint[k] / mass
    return out


def revealed_experiment(
    problem: DecisionProblem, merge_tol: float = MERGE_TOL
) -> tuple[Experiment, ActionStrategy]:
    """The least informative experiment generating ``problem.joint``, with its strategy.

    Actions whose posteriors agree cellwise within ``merge_tol`` share one
    support point; the strategy splits that point in proportion to P(a).
    """
    pa = problem.action_marginal
    posts = revealed_posteriors(problem)
    support: list[NDArray[np.float64]] = []
    members: list[list[int]] = []
    for a, gamma in posts.items():
        k = problem.action_index(a)
        for s, point in enumerate(support):
            if np.all(np.abs(point - gamma) <= merge_tol):
                members[s].append(k)
                break
        else:
            support.append(gamma)
            members.append([k])

    weights = np.array([sum(pa[k] for k in m) for m in members])
    probs = np.zeros((len(support), len(problem.actions)))
    for s, m in enumerate(members):
        for k in m:
            probs[s, k] = pa[k] / weights[s]
        # first member's posterior stands for the merged point; re-derive it
        # from the pooled mass so the round trip stays exact
        support[s] = problem.joint[m].sum(axis=0) / weights[s]
    probs /= probs.sum(axis=1, keepdims=True)
    weights = weights / weights.sum()
    return Experiment(np.array(support), weights), ActionStrategy(problem.actions, probs)


def generate_sdsc(
    experiment: Experiment, strategy: ActionStrategy, actions: Sequence[str] | None = None
) -> NDArray[np.float64]:
    """Joint P(a,w) = sum over gamma of q(a|gamma) Q(gamma) gamma(w).

    ``actions`` orders the output rows; it defaults to the strategy's own order.
    """
    if strategy.probs.shape[0] != len(experiment):
        raise StrategyError(
            f"strategy covers {strategy.probs.shape[0]} posteriors, experiment has {len(experiment)}"
        )
    joint = strategy.probs.T @ (experiment.weights[:, None] * experiment.support)
    if actions is None:
        return joint
    out = np.zeros((len(actions), joint.shape[1]))
    for r, a in enumerate(actions):
        if a in strategy.actions:
            out[r] = joint[strategy.actions.index(a)]
    extra = set(strategy.actions) - set(actions)
    if any(joint[strategy.actions.index(a)].sum() > 0 for a in extra):
        raise StrategyError(f"strategy puts mass on actions outside {list(actions)}")
    return out


def posterior_expected_utility(action: int | str, gamma: Any, prize: PrizeSpec,
                               actions: Sequence[str] | None = None) -> float:
    """U(a|gamma, x) = sum_w gamma(w) u(x(a, w)).

    ``action`` is a row index, or a label resolved against ``actions``.
    """
    if isinstance(action, str):
        if actions is None:
            raise StrategyError("action labels need the prize's action list")
        action = list(actions).index(action)
    return float(np.dot(prize.utility[action], np.asarray(gamma, dtype=float)))


def indirect_utility(
    experiment: Experiment, prize: PrizeSpec, actions: Sequence[str] | None = None
) -> tuple[float, ActionStrategy]:
    """Value G(Q|A, x) of an experiment and a maximizing pure strategy.

    Each posterior is paired with its best action; ties go to the action
    declared first. Actions index the prize rows.
    """
    values = experiment.support @ prize.utility.T  # (k, n_actions)
    best = np.argmax(values, axis=1)  # first maximum on ties
    probs = np.zeros_like(values)
    probs[np.arange(len(best)), best] = 1.0
    if actions is None:
        actions = [f"a{k + 1}" for k in range(prize.utility.shape[0])]
    value = float(np.dot(experiment.weights, values[np.arange(len(best)), best]))
    return value, ActionStrategy(tuple(actions), probs)


def mixed_strategy_value(experiment: Experiment, strategy: ActionStrategy, prize: PrizeSpec) -> float:
    """Gross expected utility g(Q, q|x) of a possibly mixed strategy."""
    values = experiment.support @ prize.utility.T
    return float(np.sum(experiment.weights[:, None] * strategy.probs * values))


def garble(experiment: Experiment, first: int, second: int) -> Experiment:
    """Merge two support posteriors into their weighted average (a Blackwell garbling)."""
    if first == second:
        raise StrategyError("garbling needs two distinct support points")
    w = experiment.weights
    merged = (w[first] * experiment.support[first] + w[second] * experiment.support[second])
    merged_w = w[first] + w[second]
    keep = [k for k in range(len(w)) if k not in (first, second)]
    support = np.vstack([experiment.support[keep], merged / merged_w])
    support = support / support.sum(axis=1, keepdims=True)
    return Experiment(support, np.append(w[keep], merged_w))


def experiment_to_dict(experiment: Experiment, strategy: ActionStrategy | None = None) -> dict:
    out: dict[str, Any] = {
        "support": experiment.support.tolist(),
        "weights": experiment.weights.tolist(),
    }
    if strategy is not None:
        out["actions"] = list(strategy.actions)
        out["strategy"] = {str(k): row.tolist() for k, row in enumerate(strategy.probs)}
    return out


def experiment_from_dict(data: dict) -> tuple[Experiment, ActionStrategy | None]:
    exp = Experiment(np.array(data["support"], dtype=float), np.array(data["weights"], dtype=float))
    if "strategy" not in data:
        return exp, None
    rows = [data["strategy"][str(k)] for k in range(len(exp))]
    return exp, ActionStrategy(tuple(data["actions"]), np.array(rows, dtype=float))
