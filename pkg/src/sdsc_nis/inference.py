"""Finite-sample tests of NIS.

Choice frequencies P(a|w) are estimated from ``n_w`` trials per state, so
each per-state column is a scaled multinomial draw. Every NIS quantity used
here is linear in those conditionals once the maximizing actions on the
switch side are fixed at their point estimates, so Delta-method variances
are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .conditions import TAU, full_information_value, switch_value
from .core import DecisionProblem, SdscDataset, TrialRecord, aggregate_trials, expected_utility
from .special import chi2_sf, norm_sf


class InferenceError(ValueError):
    pass


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    p_value: float | None
    df: int | None = None
    rows: tuple[dict[str, Any], ...] = ()
    notes: tuple[str, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def rejects(self, alpha: float) -> bool:
        return self.p_value is not None and self.p_value <= alpha

    def to_dict(self) -> dict[str, Any]:
        return {
            "test": self.name,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "p_display": format_p(self.p_value),
            "rows": list(self.rows),
            "notes": list(self.notes),
            **self.extra,
        }


def format_p(p: float | None) -> str:
    if p is None:
        return "-"
    return "<0.01" if p < 0.01 else f"{p:.2f}"


def _counts(problem: DecisionProblem) -> NDArray[np.int64]:
    if problem.counts_per_state is None:
        raise InferenceError(f"problem {problem.id} has no trial counts; inference needs counts_per_state")
    return problem.counts_per_state


def cell_covariance(problem: DecisionProblem) -> NDArray[np.float64]:
    """Per-state covariance blocks of the estimated conditionals, shape (states, A, A)."""
    n = _counts(problem)
    cond = problem.conditionals()
    blocks = np.zeros((cond.shape[1], cond.shape[0], cond.shape[0]))
    for w in range(cond.shape[1]):
        if n[w] <= 0:
            continue
        p = cond[:, w]
        blocks[w] = (np.diag(p) - np.outer(p, p)) / n[w]
    return blocks


def delta_covariance(dataset: SdscDataset, coefficients: Mapping[int | str, Any]) -> float:
    """Variance of sum c(i,a,w) * Phat_i(a|w) under the multinomial model.

    ``coefficients`` maps a problem (index or id) to an (actions, states)
    array. Problems and states are independent, so the variance is a sum of
    per-state quadratic forms.
    """
    var = 0.0
    for key, coef in coefficients.items():
        prob = dataset.problem(key)
        coef = np.asarray(coef, dtype=float)
        blocks = cell_covariance(prob)
        for w in range(coef.shape[1]):
            var += float(coef[:, w] @ blocks[w] @ coef[:, w])
    return max(var, 0.0)


def _joint_to_conditional(problem: DecisionProblem, coef_joint: NDArray[np.float64]) -> NDArray[np.float64]:
    # P(a,w) = marg(w) * P(a|w)
    return coef_joint * problem.state_marginal[None, :]


def switch_contrast(dataset: SdscDataset, i: int | str, j: int | str) -> tuple[float, dict[int, NDArray]]:
    """Point estimate and conditional-scale coefficients of rhs[i, j] - lhs[i]."""
    ii, jj = dataset.index_of(i), dataset.index_of(j)
    pi, pj = dataset.problems[ii], dataset.problems[jj]
    rhs, best = switch_value(pi, pj)
    lhs = expected_utility(pi)
    c_j = pi.utility[best]  # row a of P_j scores with target action best[a]
    c_i = -pi.utility
    coefs = {jj: _joint_to_conditional(pj, c_j)}
    coefs[ii] = coefs.get(ii, 0.0) + _joint_to_conditional(pi, c_i)
    return rhs - lhs, coefs


def _near_ties(dataset: SdscDataset, ii: int, jj: int) -> list[dict[str, Any]]:
    pi, pj = dataset.problems[ii], dataset.problems[jj]
    if len(pi.actions) < 2:
        return []
    scores = pj.joint @ pi.utility.T
    flagged = []
    for a in range(len(pj.actions)):
        if pj.joint[a].sum() <= 0:
            continue
        order = np.argsort(-scores[a], kind="stable")
        best, second = order[0], order[1]
        gap = scores[a, best] - scores[a, second]
        coef = np.zeros_like(pj.joint)
        coef[a] = pi.utility[best] - pi.utility[second]
        se = math.sqrt(delta_covariance(dataset, {jj: _joint_to_conditional(pj, coef)}))
        if gap < 2 * se:
            flagged.append({"source_action": pj.actions[a], "best": pi.actions[best],
                            "runner_up": pi.actions[second], "gap": float(gap), "se": se})
    return flagged


def pairwise_switch_test(dataset: SdscDataset, i: int | str, j: int | str) -> TestReport:
    """One-sided z-test of H0: rhs[i, j] <= lhs[i] (the switch does not help)."""
    ii, jj = dataset.index_of(i), dataset.index_of(j)
    delta, coefs = switch_contrast(dataset, ii, jj)
    var = delta_covariance(dataset, coefs)
    pi, pj = dataset.problems[ii], dataset.problems[jj]
    notes = []
    if var <= 0:
        notes.append("zero variance: exact comparison used")
        z = math.inf if delta > 0 else (-math.inf if delta < 0 else 0.0)
        p = 0.0 if delta > 0 else 1.0
    else:
        z = delta / math.sqrt(var)
        p = norm_sf(z)
    ties = _near_ties(dataset, ii, jj)
    if ties:
        notes.append("switch-side argmax within 2 standard errors of a tie")
    row = {"lower": pi.id, "higher": pj.id, "lhs": expected_utility(pi), "rhs": expected_utility(pi) + delta,
           "delta": delta, "se": math.sqrt(var), "z": z, "p_value": p, "fails": delta > TAU,
           "p_display": format_p(p), "near_ties": ties}
    return TestReport("pairwise_switch", z, p, None, (row,), tuple(notes))


def pairwise_table(dataset: SdscDataset, pairs: Sequence[tuple[int | str, int | str]] | None = None) -> list[TestReport]:
    """Switch tests for ``pairs``; by default every i < j in declaration order."""
    if pairs is None:
        n = len(dataset)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return [pairwise_switch_test(dataset, i, j) for i, j in pairs]


def contrast_matrix(n: int) -> NDArray[np.float64]:
    """(n-1) x n differences theta_k - theta_{k+1}."""
    r = np.zeros((n - 1, n))
    for k in range(n - 1):
        r[k, k], r[k, k + 1] = 1.0, -1.0
    return r


def wald_equality(theta: NDArray[np.float64], cov: NDArray[np.float64],
                  contrasts: NDArray[np.float64] | None = None) -> tuple[float, int, float]:
    """Wald statistic, df and p-value for H0: all entries of theta are equal."""
    n = len(theta)
    if n < 2:
        raise InferenceError("equality test needs at least two problems")
    r = contrast_matrix(n) if contrasts is None else np.asarray(contrasts, dtype=float)
    d = r @ theta
    v = r @ cov @ r.T
    if np.linalg.matrix_rank(v) < r.shape[0]:
        raise InferenceError("contrast covariance is singular")
    w = float(d @ np.linalg.solve(v, d))
    df = r.shape[0]
    return w, df, chi2_sf(w, df)


def _functional_cov(dataset: SdscDataset, coefs: list[NDArray]) -> NDArray[np.float64]:
    # problems are independent, so the covariance of per-problem functionals is diagonal
    return np.diag([delta_covariance(dataset, {k: c}) for k, c in enumerate(coefs)])


def accuracy_coefficients(problem: DecisionProblem) -> NDArray[np.float64]:
    """Indicator of the paid action in each state, for binary matching tasks."""
    u = problem.utility
    if u.shape != (2, 2):
        raise InferenceError(
            f"problem {problem.id}: accuracy test needs 2 actions x 2 states; "
            "use pairwise_switch_test or generalized_equality_wald"
        )
    paid = np.argmax(u, axis=0)
    if set(paid.tolist()) != {0, 1} or np.any(u.max(axis=0) == u.min(axis=0)):
        raise InferenceError(f"problem {problem.id}: prizes do not pair each state with one action")
    coef = np.zeros_like(u)
    coef[paid, np.arange(2)] = 1.0
    return coef


def joint_accuracy_wald(dataset: SdscDataset, contrasts: NDArray[np.float64] | None = None) -> TestReport:
    """Equal-accuracy test: P_i(a1|w1) + P_i(a2|w2) identical across problems."""
    coefs = [accuracy_coefficients(p) for p in dataset.problems]
    theta = np.array([float(np.sum(c * p.conditionals())) for c, p in zip(coefs, dataset.problems)])
    cov = _functional_cov(dataset, coefs)
    w, df, p = wald_equality(theta, cov, contrasts)
    rows = tuple({"problem": pr.id, "accuracy_sum": float(t), "se": math.sqrt(cov[k, k])}
                 for k, (pr, t) in enumerate(zip(dataset.problems, theta)))
    notes = ("equality part only; NIAS inequalities are checked separately",)
    return TestReport("joint_accuracy_wald", w, p, df, rows, notes)


def generalized_equality_wald(dataset: SdscDataset, contrasts: NDArray[np.float64] | None = None) -> TestReport:
    """Equality of realized value relative to full-information value across problems.

    Reduces to the accuracy test (up to a common scale) for binary matching
    tasks with a uniform prior, and extends it to any number of actions.
    """
    coefs, theta = [], []
    for p in dataset.problems:
        f = full_information_value(p, dataset.prior)
        if f <= 0:
            raise InferenceError(f"problem {p.id}: zero full-information value")
        c = _joint_to_conditional(p, p.utility / f)
        coefs.append(c)
        theta.append(float(np.sum(c * p.conditionals())))
    theta_arr = np.array(theta)
    cov = _functional_cov(dataset, coefs)
    w, df, pval = wald_equality(theta_arr, cov, contrasts)
    rows = tuple({"problem": pr.id, "normalized_value": float(t), "se": math.sqrt(cov[k, k])}
                 for k, (pr, t) in enumerate(zip(dataset.problems, theta_arr)))
    notes = ("generalized equality test; NIAS inequalities are checked separately",)
    return TestReport("generalized_equality_wald", w, pval, df, rows, notes)


def joint_test(dataset: SdscDataset) -> TestReport:
    """Accuracy test when every problem is a binary matching task, generalized test otherwise."""
    try:
        return joint_accuracy_wald(dataset)
    except InferenceError as err:
        if "singular" in str(err):
            raise
        return generalized_equality_wald(dataset)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream for one replicate; identical at any parallelism level."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate)]))


def records_from_counts(dataset: SdscDataset) -> list[TrialRecord]:
    """Expand cell counts (or joint x counts_per_state, rounded) into trial rows."""
    rows = []
    for p in dataset.problems:
        if p.cell_counts is not None:
            cells = p.cell_counts
        else:
            cells = np.rint(p.conditionals() * _counts(p)[None, :]).astype(np.int64)
        for a, act in enumerate(p.actions):
            for w, state in enumerate(dataset.states.labels):
                rows.extend(TrialRecord(p.id, "pooled", state, act) for _ in range(int(cells[a, w])))
    return rows


def bootstrap_nias(
    records: Sequence[TrialRecord],
    definitions: SdscDataset,
    replications: int = 1000,
    seed: int = 0,
    threshold: float = 0.05,
    tau: float = TAU,
) -> TestReport:
    """Resample trials within each (problem, state) cell and recount NIAS failures.

    Returns one row per (problem, action) with the share of replicates in
    which some switch away from that action would have paid. NIAS is not
    rejected when every share is at most ``threshold``.
    """
    if replications < 1:
        raise InferenceError("need at least one bootstrap replication")
    data = aggregate_trials(records, definitions)
    fails = {}
    for p in data.problems:
        if np.any(p.counts_per_state == 0):
            raise InferenceError(f"problem {p.id}: a state has no trials, cannot resample it")
        fails[p.id] = np.zeros(len(p.actions), dtype=np.int64)
    for b in range(replications):
        rng = replicate_rng(seed, b)
        for p in data.problems:
            cond = p.cell_counts / p.counts_per_state[None, :]
            counts = np.column_stack([rng.multinomial(int(n), cond[:, w])
                                      for w, n in enumerate(p.counts_per_state)])
            total = counts.sum()
            scores = counts @ p.utility.T / total  # (a, ahat)
            own = np.diag(scores)
            fails[p.id] += (scores.max(axis=1) > own + tau).astype(np.int64)
    rows = []
    for p in data.problems:
        for a, act in enumerate(p.actions):
            frac = fails[p.id][a] / replications
            rows.append({"problem": p.id, "action": act, "failure_fraction": float(frac),
                         "rejects": bool(frac > threshold)})
    worst = max(r["failure_fraction"] for r in rows)
    notes = (f"NIAS {'rejected' if worst > threshold else 'not rejected'} at threshold {threshold}",)
    return TestReport("bootstrap_nias", worst, None, None, tuple(rows), notes,
                      {"replications": replications, "seed": seed, "threshold": threshold,
                       "rejected": bool(worst > threshold)})
