"""Hypothesis strategies and plain random generators for datasets."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from sdsc_nis.core import SdscDataset, make_dataset, make_problem


def random_dataset(rng: np.random.Generator, n_problems: int, n_actions: int = 2, n_states: int = 2,
                   max_prize: float = 100.0, sparse: float = 0.0) -> SdscDataset:
    """Valid dataset with arbitrary prizes and joints consistent with one prior."""
    prior = rng.dirichlet(np.ones(n_states))
    problems = []
    for k in range(n_problems):
        cond = rng.dirichlet(np.ones(n_actions), size=n_states).T  # P(a|w)
        if sparse:
            cond = np.where(rng.random(cond.shape) < sparse, 0.0, cond)
            cond[0] += cond.sum(axis=0) == 0
            cond /= cond.sum(axis=0, keepdims=True)
        prize = rng.uniform(0, max_prize, size=(n_actions, n_states))
        problems.append(make_problem(str(k), cond * prior[None, :], prize))
    return make_dataset(problems, prior=prior, marginal_tolerance=1e-9)


@st.composite
def datasets(draw, max_problems: int = 4, max_actions: int = 3, max_states: int = 3) -> SdscDataset:
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_problems))
    a = draw(st.integers(2, max_actions))
    w = draw(st.integers(2, max_states))
    sparse = draw(st.sampled_from([0.0, 0.3]))
    return random_dataset(np.random.default_rng(seed), n, a, w, sparse=sparse)
