"""Fixed-capacity agents pass NIS; elastic Shannon agents fail it.

Draws random binary matching tasks, solves both attention models, audits
the resulting population data and reports the tightest NIS slack seen.

Run:  python scripts/theorem_check.py [--datasets 500] [--seed 1]
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from sdsc_nis.conditions import audit
from sdsc_nis.synth import (
    CapacityModel,
    ElasticModel,
    elastic_dataset,
    fixed_capacity_dataset,
    mutual_information,
    solve_shannon_elastic,
)


@dataclass(frozen=True)
class TheoremConfig:
    datasets: int = 500
    tau: float = 1e-6
    capacity_range: tuple[float, float] = (0.01, 0.5)
    cost_range: tuple[float, float] = (2.0, 20.0)
    max_levels: int = 4
    seed: int = 1


def capacity_case(cfg: TheoremConfig, rng: np.random.Generator):
    p1 = rng.uniform(0.2, 0.8)
    k = int(rng.integers(2, cfg.max_levels + 1))
    points = np.sort(rng.choice(np.arange(1, 101), size=k, replace=False)).astype(float)
    return fixed_capacity_dataset(CapacityModel(float(rng.uniform(*cfg.capacity_range)), np.array([p1, 1 - p1]),
                                                tuple(np.eye(2) * x for x in points)))


def elastic_case(cfg: TheoremConfig, rng: np.random.Generator):
    while True:
        p1 = rng.uniform(0.2, 0.8)
        cost = float(rng.uniform(*cfg.cost_range))
        # above ~15 points per nat of cost both problems are at full information
        points = np.sort(rng.uniform(1, 15 * cost, size=int(rng.integers(2, cfg.max_levels + 1))))
        prior = np.array([p1, 1 - p1])
        if np.min(np.diff(points)) < 1.0:
            continue
        if mutual_information(solve_shannon_elastic(ElasticModel(cost, prior), np.eye(2) * points[-1]), prior) > 1e-4:
            return elastic_dataset(ElasticModel(cost, prior, tuple(np.eye(2) * x for x in points)))


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--datasets", type=int, default=TheoremConfig.datasets)
    parser.add_argument("--seed", type=int, default=TheoremConfig.seed)
    args = parser.parse_args(argv)
    cfg = TheoremConfig(datasets=args.datasets, seed=args.seed)
    rng = np.random.default_rng(cfg.seed)

    slack = []
    for _ in range(cfg.datasets):
        rep = audit(capacity_case(cfg, rng), cfg.tau)
        slack.append(min(r.slack for r in rep.nis))
    print(f"fixed capacity: {sum(s >= -cfg.tau for s in slack)}/{cfg.datasets} pass NIS, "
          f"min slack {min(slack):.2e}")

    outcomes = []
    for _ in range(cfg.datasets):
        rep = audit(elastic_case(cfg, rng), cfg.tau)
        outcomes.append((rep.nias_pass, rep.niac_pass, rep.nis_pass, rep.worst_violation.slack if rep.worst_violation else 0.0))
    only_nis = sum(a and b and not c for a, b, c, _ in outcomes)
    print(f"elastic: {only_nis}/{cfg.datasets} pass NIAS and NIAC but fail NIS, "
          f"median worst slack {np.median([o[3] for o in outcomes]):.3f}")


if __name__ == "__main__":
    main()
