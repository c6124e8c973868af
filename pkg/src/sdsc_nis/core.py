"""Data model for state-dependent stochastic choice (SDSC) data.

A dataset holds one prior over states, a global action set, and a sequence
of decision problems. Each problem carries its action subset, a prize matrix
in probability points (rows follow the problem's action order, columns the
state order) and the observed joint distribution of actions and states.

Utility of ``p`` probability points is ``p``; no other utility family exists.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

PRIOR_TOL = 1e-12
MASS_TOL = 1e-9
PUBLISHED_MARGINAL_TOL = 0.02


class DatasetError(ValueError):
    """Raised when input cannot be turned into a dataset at all."""


def _frozen(values: Any, dtype: Any = float) -> NDArray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    labels: tuple[str, ...]
    prior: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "prior", _frozen(self.prior))
        if len(self.labels) < 2:
            raise DatasetError("at least two states are required")
        if len(set(self.labels)) != len(self.labels):
            raise DatasetError("state labels must be unique")
        if self.prior.shape != (len(self.labels),):
            raise DatasetError("prior length does not match the number of states")
        if np.any(self.prior < 0) or abs(self.prior.sum() - 1.0) > PRIOR_TOL:
            raise DatasetError(f"prior must be a probability vector, got {self.prior.tolist()}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DatasetError(f"unknown state label {label!r}") from None


@dataclass(frozen=True)
class PrizeSpec:
    """Probability-point prizes ``x(a, w)``; rows are actions, columns states."""

    matrix: NDArray[np.float64]
    cash: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        if self.matrix.ndim != 2:
            raise DatasetError("prize matrix must be two-dimensional")

    @property
    def utility(self) -> NDArray[np.float64]:
        # u(p) = p under the 0/100 normalization of the cash prize
        return self.matrix


@dataclass(frozen=True)
class DecisionProblem:
    id: str
    actions: tuple[str, ...]
    prize: PrizeSpec
    joint: NDArray[np.float64]
    counts_per_state: NDArray[np.int64] | None = None
    cell_counts: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "actions", tuple(str(a) for a in self.actions))
        object.__setattr__(self, "joint", _frozen(self.joint))
        if self.counts_per_state is not None:
            object.__setattr__(self, "counts_per_state", _frozen(self.counts_per_state, np.int64))
        if self.cell_counts is not None:
            object.__setattr__(self, "cell_counts", _frozen(self.cell_counts, np.int64))

    @property
    def utility(self) -> NDArray[np.float64]:
        return self.prize.utility

    @property
    def action_marginal(self) -> NDArray[np.float64]:
        return self.joint.sum(axis=1)

    @property
    def state_marginal(self) -> NDArray[np.float64]:
        return self.joint.sum(axis=0)

    def conditionals(self) -> NDArray[np.float64]:
        """Choice probabilities P(a|w); columns with zero mass are left at zero."""
        marg = self.state_marginal
        out = np.zeros_like(self.joint)
        np.divide(self.joint, marg, out=out, where=marg > 0)
        return out

    def action_index(self, label: str) -> int:
        try:
            return self.actions.index(str(label))
        except ValueError:
            raise DatasetError(f"action {label!r} not available in problem {self.id!r}") from None


@dataclass(frozen=True)
class SdscDataset:
    states: StateSpace
    actions: tuple[str, ...]
    problems: tuple[DecisionProblem, ...]
    marginal_tolerance: float = PUBLISHED_MARGINAL_TOL
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(str(a) for a in self.actions))
        object.__setattr__(self, "problems", tuple(self.problems))

    @property
    def prior(self) -> NDArray[np.float64]:
        return self.states.prior

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.problems]

    def __len__(self) -> int:
        return len(self.problems)

    def problem(self, key: int | str) -> DecisionProblem:
        if isinstance(key, (int, np.integer)):
            return self.problems[int(key)]
        for p in self.problems:
            if p.id == str(key):
                return p
        raise DatasetError(f"unknown problem id {key!r}")

    def index_of(self, key: int | str) -> int:
        if isinstance(key, (int, np.integer)):
            return int(key)
        try:
            return self.ids.index(str(key))
        except ValueError:
            raise DatasetError(f"unknown problem id {key!r}") from None

    def subset(self, keys: Iterable[int | str]) -> SdscDataset:
        return replace(self, problems=tuple(self.problem(k) for k in keys))

    @property
    def has_counts(self) -> bool:
        return all(p.counts_per_state is not None for p in self.problems)


@dataclass(frozen=True)
class TrialRecord:
    problem_id: str
    subject_id: str
    state: str
    action: str


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    location: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "location": self.location, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    def to_list(self) -> list[dict[str, str]]:
        return [i.to_dict() for i in self.issues]


def validate_dataset(dataset: SdscDataset, tolerance: float | None = None) -> ValidationReport:
    """Collect every invariant violation of ``dataset``; never raises.

    ``tolerance`` bounds the gap between each problem's state marginal and the
    prior. It defaults to the dataset's own ``marginal_tolerance``.
    """
    tol = dataset.marginal_tolerance if tolerance is None else tolerance
    issues: list[ValidationIssue] = []

    def add(code: str, location: str, message: str) -> None:
        issues.append(ValidationIssue(code, location, message))

    n_states = dataset.states.size
    if not dataset.problems:
        add("no_problems", "dataset", "dataset holds no decision problems")
    if len(set(dataset.actions)) != len(dataset.actions):
        add("duplicate_action", "dataset", "global action labels repeat")
    dup = [k for k, v in Counter(dataset.ids).items() if v > 1]
    for k in dup:
        add("duplicate_id", f"problem {k}", "problem id used more than once")

    for p in dataset.problems:
        loc = f"problem {p.id}"
        if len(p.actions) < 2:
            add("singleton_action_set", loc, f"needs at least 2 actions, has {len(p.actions)}")
        if len(set(p.actions)) != len(p.actions):
            add("duplicate_action", loc, "action labels repeat within problem")
        for a in p.actions:
            if a not in dataset.actions:
                add("unknown_action", loc, f"action {a!r} is not in the global action set")
        shape = (len(p.actions), n_states)
        if p.prize.matrix.shape != shape:
            add("shape_mismatch", f"{loc} prize", f"expected shape {shape}, got {p.prize.matrix.shape}")
        elif not np.all(np.isfinite(p.prize.matrix)):
            add("nonfinite_prize", f"{loc} prize", "prize entries must be finite")
        elif np.any(p.prize.matrix < 0):
            add("negative_prize", f"{loc} prize", "probability points must be nonnegative")
        if p.joint.shape != shape:
            add("shape_mismatch", f"{loc} joint", f"expected shape {shape}, got {p.joint.shape}")
            continue
        if not np.all(np.isfinite(p.joint)):
            add("nonfinite_cell", f"{loc} joint", "joint entries must be finite")
            continue
        for r, c in zip(*np.nonzero(p.joint < 0)):
            add("negative_cell", f"{loc} joint[{p.actions[r]},{dataset.states.labels[c]}]",
                f"cell is {p.joint[r, c]:g}")
        total = float(p.joint.sum())
        if abs(total - 1.0) > MASS_TOL:
            add("total_mass", f"{loc} joint", f"total mass {total:g} != 1")
        gap = np.abs(p.state_marginal - dataset.prior)
        for c in np.nonzero(gap > tol)[0]:
            add("marginal_mismatch", f"{loc} state {dataset.states.labels[c]}",
                f"state marginal {p.state_marginal[c]:.6g} differs from prior "
                f"{dataset.prior[c]:.6g} by more than {tol:g}")
        if p.counts_per_state is not None:
            if p.counts_per_state.shape != (n_states,):
                add("shape_mismatch", f"{loc} counts", "counts_per_state must have one entry per state")
            elif np.any(p.counts_per_state < 0):
                add("negative_count", f"{loc} counts", "counts must be nonnegative")
    return ValidationReport(tuple(issues))


def expected_utility(problem: DecisionProblem) -> float:
    """Value of the observed choices: sum of P(a,w) u(x(a,w)).

    When raw cell counts are attached the sum is taken in rational arithmetic
    and divided once, so it matches the per-trial sample mean exactly.
    """
    if problem.cell_counts is not None:
        total = int(problem.cell_counts.sum())
        num = sum(
            (Fraction(int(n)) * Fraction(float(u))
             for n, u in zip(problem.cell_counts.ravel(), problem.utility.ravel())),
            Fraction(0),
        )
        return float(num / total)
    return float(np.sum(problem.joint * problem.utility))


def aggregate_trials(
    records: Sequence[TrialRecord],
    definitions: SdscDataset,
    prior: Sequence[float] | None = None,
    marginal_tolerance: float = 1e-9,
) -> SdscDataset:
    """Build empirical joints from trial rows.

    ``definitions`` supplies states, actions and prizes; any joints it carries
    are replaced. The prior is the pooled empirical state frequency unless
    ``prior`` overrides it. Designs with unequal state shares across problems
    will not validate at tight tolerance against a single pooled prior.
    """
    if not records:
        raise DatasetError("no trial records to aggregate")
    states = definitions.states
    by_problem = {p.id: p for p in definitions.problems}
    counts = {p.id: np.zeros((len(p.actions), states.size), dtype=np.int64)
              for p in definitions.problems}
    for k, rec in enumerate(records):
        pid = str(rec.problem_id)
        if pid not in by_problem:
            raise DatasetError(f"record {k}: unknown problem id {rec.problem_id!r}")
        prob = by_problem[pid]
        s = states.index(rec.state)
        if str(rec.action) not in prob.actions:
            if str(rec.action) in definitions.actions:
                raise DatasetError(f"record {k}: action {rec.action!r} not offered in problem {pid!r}")
            raise DatasetError(f"record {k}: unknown action label {rec.action!r}")
        counts[pid][prob.action_index(rec.action), s] += 1

    used = [p for p in definitions.problems if counts[p.id].sum() > 0]
    if prior is None:
        pooled = sum(counts[p.id].sum(axis=0) for p in used)
        prior_arr = np.array([Fraction(int(c), int(pooled.sum())) for c in pooled], dtype=float)
    else:
        prior_arr = np.asarray(prior, dtype=float)
    problems = []
    for p in used:
        c = counts[p.id]
        problems.append(DecisionProblem(
            id=p.id,
            actions=p.actions,
            prize=p.prize,
            joint=c / c.sum(),
            counts_per_state=c.sum(axis=0),
            cell_counts=c,
        ))
    return SdscDataset(
        states=StateSpace(states.labels, prior_arr),
        actions=definitions.actions,
        problems=tuple(problems),
        marginal_tolerance=marginal_tolerance,
        metadata=dict(definitions.metadata),
    )


def make_problem(
    id: str,
    joint: Any,
    prize: Any,
    actions: Sequence[str] | None = None,
    counts_per_state: Sequence[int] | None = None,
    cash: float | None = None,
) -> DecisionProblem:
    """Convenience constructor taking plain nested lists."""
    joint = np.asarray(joint, dtype=float)
    if actions is None:
        actions = [f"a{k + 1}" for k in range(joint.shape[0])]
    counts = None if counts_per_state is None else np.asarray(counts_per_state, dtype=np.int64)
    return DecisionProblem(id, tuple(actions), PrizeSpec(np.asarray(prize, dtype=float), cash), joint, counts)


def make_dataset(
    problems: Sequence[DecisionProblem],
    prior: Sequence[float] | None = None,
    state_labels: Sequence[str] | None = None,
    marginal_tolerance: float = PUBLISHED_MARGINAL_TOL,
    metadata: Mapping[str, Any] | None = None,
) -> SdscDataset:
    """Assemble a dataset; labels default to w1..wn and the union of actions."""
    n_states = problems[0].joint.shape[1]
    if state_labels is None:
        state_labels = [f"w{k + 1}" for k in range(n_states)]
    if prior is None:
        prior = np.full(n_states, 1.0 / n_states)
    actions: list[str] = []
    for p in problems:
        actions.extend(a for a in p.actions if a not in actions)
    return SdscDataset(StateSpace(tuple(state_labels), np.asarray(prior, dtype=float)),
                       tuple(actions), tuple(problems), marginal_tolerance, dict(metadata or {}))


def diagonal_prize(points: float, n: int = 2) -> NDArray[np.float64]:
    """Matching-task prize: ``points`` when action k is taken in state k."""
    return np.eye(n) * float(points)
