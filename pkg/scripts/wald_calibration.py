"""Size and power of the joint accuracy Wald test under multinomial sampling.

Run:  python scripts/wald_calibration.py [--sims 2000] [--n 1300] [--seed 77]
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from sdsc_nis.core import make_dataset, make_problem
from sdsc_nis.inference import joint_test
from sdsc_nis.synth import sample_counts, symmetric_accuracy_joint


@dataclass(frozen=True)
class CalibrationConfig:
    sims: int = 2000
    n_per_state: int = 1300
    null_accuracy: float = 0.67
    n_problems: int = 4
    alphas: tuple[float, ...] = (0.01, 0.05, 0.10)
    alternatives: tuple[float, ...] = (0.69, 0.71, 0.73, 0.75)
    seed: int = 77


def simulate(accuracies, n: int, sims: int, rng: np.random.Generator) -> np.ndarray:
    joints = [symmetric_accuracy_joint(a) for a in accuracies]
    p = np.empty(sims)
    for s in range(sims):
        problems = [make_problem(str(k), sample_counts(j, n, rng) / n * 0.5, np.eye(2) * 10 * (k + 1),
                                 counts_per_state=[n, n]) for k, j in enumerate(joints)]
        p[s] = joint_test(make_dataset(problems)).p_value
    return p


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sims", type=int, default=CalibrationConfig.sims)
    parser.add_argument("--n", type=int, default=CalibrationConfig.n_per_state, help="trials per state")
    parser.add_argument("--seed", type=int, default=CalibrationConfig.seed)
    args = parser.parse_args(argv)
    cfg = CalibrationConfig(sims=args.sims, n_per_state=args.n, seed=args.seed)
    rng = np.random.default_rng(cfg.seed)

    null = simulate([cfg.null_accuracy] * cfg.n_problems, cfg.n_per_state, cfg.sims, rng)
    mc_se = np.sqrt(np.array(cfg.alphas) * (1 - np.array(cfg.alphas)) / cfg.sims)
    print(f"size, {cfg.n_problems} equal problems, accuracy {cfg.null_accuracy}, n={cfg.n_per_state}")
    for a, se in zip(cfg.alphas, mc_se):
        print(f"  alpha {a:.2f}: rejection rate {np.mean(null < a):.4f}  (MC s.e. {se:.4f})")
    print(f"power at alpha 0.05, two problems, {cfg.null_accuracy} vs:")
    for alt in cfg.alternatives:
        p = simulate([cfg.null_accuracy, alt], cfg.n_per_state, cfg.sims // 4, rng)
        print(f"  {alt:.2f}: {np.mean(p < 0.05):.3f}")


if __name__ == "__main__":
    main()
