"""Rebuild the bundled fixtures under src/sdsc_nis/fixtures/.

DN23 experiment 1.2 ships its four aggregate matrices verbatim. The other
tasks only have published NIS tables (realized value and switch value for
each lower/higher incentive pair), so their matrices are reconstructed:

* each task is a matching task with equally likely states and prize
  ``p_i`` for the correct action, so realized value = p_i * acc_i and the
  switch value of (i, j) = p_i * acc_j for symmetric choice matrices;
* acc_k is the least-squares fit over every published cell it appears in;
* the matrix puts acc_k on the diagonal of P(a|w) and spreads the error
  evenly.

Run:  python scripts/reconstruct_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.stats import norm

from sdsc_nis.inference import pairwise_switch_test
from sdsc_nis.io import dataset_from_dict

ROOT = Path(__file__).resolve().parents[1] / "src" / "sdsc_nis" / "fixtures"

# (lower, higher, realized, switch, fails, p-value) as published
DN23_12 = [
    (5, 40, 3.34, 3.56, True, "0.03"), (5, 70, 3.34, 3.61, True, "0.02"),
    (5, 95, 3.34, 3.77, True, "<0.01"), (40, 70, 28.46, 28.84, True, "0.33"),
    (40, 95, 28.46, 30.12, True, "0.05"), (70, 95, 50.47, 52.72, True, "0.11"),
]
DN23_12_MATRICES = {
    5: [[0.37, 0.20], [0.13, 0.30]],
    40: [[0.38, 0.17], [0.12, 0.33]],
    70: [[0.39, 0.17], [0.11, 0.33]],
    95: [[0.39, 0.14], [0.11, 0.36]],
}
DN23_22 = [(5, 95, 4.13, 4.21, True, "0.19")]

CCLN = {
    "ccln": [
        (1, 2, 0.63, 0.66, True, "<0.01"), (1, 4, 0.63, 0.66, True, "<0.01"),
        (1, 8, 0.63, 0.66, True, "<0.01"), (1, 16, 0.63, 0.69, True, "<0.01"),
        (1, 32, 0.63, 0.68, True, "<0.01"), (2, 4, 1.31, 1.32, True, "0.33"),
        (2, 8, 1.31, 1.32, True, "0.37"), (2, 16, 1.31, 1.38, True, "<0.01"),
        (2, 32, 1.31, 1.36, True, "0.03"), (4, 8, 2.64, 2.64, False, "0.48"),
        (4, 16, 2.64, 2.76, True, "<0.01"), (4, 32, 2.64, 2.72, True, "0.06"),
        (8, 16, 5.27, 5.52, True, "<0.01"), (8, 32, 5.27, 5.44, True, "0.05"),
        (16, 32, 11.05, 10.87, False, "0.21"),
    ],
    "ccln_d1": [
        (1, 2, 0.58, 0.61, True, "0.02"), (1, 4, 0.58, 0.61, True, "0.03"),
        (1, 8, 0.58, 0.63, True, "<0.01"), (1, 16, 0.58, 0.63, True, "<0.01"),
        (1, 32, 0.58, 0.59, True, "0.31"), (2, 4, 1.22, 1.22, True, "0.48"),
        (2, 8, 1.22, 1.25, True, "0.20"), (2, 16, 1.22, 1.26, True, "0.20"),
        (2, 32, 1.22, 1.18, False, "0.22"), (4, 8, 2.45, 2.50, True, "0.22"),
        (4, 16, 2.45, 2.52, True, "0.19"), (4, 32, 2.45, 2.37, True, "0.23"),
        (8, 16, 5.01, 5.03, True, "0.45"), (8, 32, 5.01, 4.73, False, "0.09"),
        (16, 32, 10.06, 9.47, False, "0.08"),
    ],
    "ccln_d2": [
        (1, 2, 0.60, 0.64, True, "<0.01"), (1, 4, 0.60, 0.65, True, "<0.01"),
        (1, 8, 0.60, 0.64, True, "<0.01"), (1, 16, 0.60, 0.68, True, "<0.01"),
        (1, 32, 0.60, 0.66, True, "<0.01"), (2, 4, 1.29, 1.31, True, "0.28"),
        (2, 8, 1.29, 1.29, True, "0.49"), (2, 16, 1.29, 1.35, True, "0.05"),
        (2, 32, 1.29, 1.32, True, "0.22"), (4, 8, 2.61, 2.57, False, "0.29"),
        (4, 16, 2.61, 2.71, True, "0.14"), (4, 32, 2.61, 2.65, True, "0.36"),
        (8, 16, 5.15, 5.41, True, "0.04"), (8, 32, 5.15, 5.29, True, "0.47"),
        (16, 32, 10.82, 10.56, False, "0.24"),
    ],
    "ccln_d3": [
        (1, 2, 0.62, 0.65, True, "0.01"), (1, 4, 0.62, 0.64, True, "0.09"),
        (1, 8, 0.62, 0.65, True, "0.08"), (1, 16, 0.62, 0.68, True, "<0.01"),
        (1, 32, 0.62, 0.69, True, "<0.01"), (2, 4, 1.30, 1.28, True, "0.24"),
        (2, 8, 1.30, 1.29, True, "0.37"), (2, 16, 1.30, 1.37, True, "0.07"),
        (2, 32, 1.30, 1.37, True, "0.10"), (4, 8, 2.56, 2.58, True, "0.42"),
        (4, 16, 2.56, 2.73, True, "0.02"), (4, 32, 2.56, 2.74, True, "0.04"),
        (8, 16, 5.16, 5.46, True, "0.06"), (8, 32, 5.16, 5.48, True, "0.05"),
        (16, 32, 10.93, 10.96, True, "0.47"),
    ],
    "ccln_d6": [
        (1, 2, 0.72, 0.73, True, "0.22"), (1, 4, 0.72, 0.75, True, "0.04"),
        (1, 8, 0.72, 0.73, True, "0.24"), (1, 16, 0.72, 0.79, True, "<0.01"),
        (1, 32, 0.72, 0.80, True, "<0.01"), (2, 4, 1.46, 1.49, True, "0.15"),
        (2, 8, 1.46, 1.46, True, "0.47"), (2, 16, 1.46, 1.57, True, "<0.01"),
        (2, 32, 1.46, 1.59, True, "<0.01"), (4, 8, 2.98, 2.92, False, "0.22"),
        (4, 16, 2.98, 3.14, True, "0.02"), (4, 32, 2.98, 3.19, True, "0.01"),
        (8, 16, 5.84, 6.28, True, "<0.01"), (8, 32, 5.84, 6.37, True, "<0.01"),
        (16, 32, 12.57, 12.75, True, "0.32"),
    ],
}

# incentive quartiles of 1..100 probability points, by their mean
Q = {"1st": 13, "2nd": 38, "3rd": 63, "4th": 88}
DN20 = {
    "dn20_dots": [
        ("1st", "2nd", 6.18, 7.05, True, "<0.01"), ("1st", "3rd", 6.18, 8.27, True, "<0.01"),
        ("1st", "4th", 6.18, 9.25, True, "<0.01"), ("2nd", "3rd", 20.62, 24.16, True, "<0.01"),
        ("2nd", "4th", 20.62, 27.05, True, "<0.01"), ("3rd", "4th", 40.05, 44.84, True, "<0.01"),
    ],
    "dn20_dots_10": [
        ("1st", "2nd", 6.03, 6.94, True, "<0.01"), ("1st", "3rd", 6.03, 7.82, True, "<0.01"),
        ("1st", "4th", 6.03, 8.95, True, "<0.01"), ("2nd", "3rd", 20.28, 22.86, True, "<0.01"),
        ("2nd", "4th", 20.28, 26.16, True, "<0.01"), ("3rd", "4th", 37.89, 43.37, True, "<0.01"),
    ],
    "dn20_dots_20": [
        ("1st", "2nd", 6.33, 7.16, True, "<0.01"), ("1st", "3rd", 6.33, 8.74, True, "<0.01"),
        ("1st", "4th", 6.33, 9.57, True, "<0.01"), ("2nd", "3rd", 20.92, 25.54, True, "<0.01"),
        ("2nd", "4th", 20.92, 27.98, True, "<0.01"), ("3rd", "4th", 42.35, 46.39, True, "<0.01"),
    ],
    "dn20_angles": [
        ("1st", "2nd", 5.84, 5.69, False, "0.22"), ("1st", "3rd", 5.84, 5.94, True, "0.29"),
        ("1st", "4th", 5.84, 5.74, False, "0.32"), ("2nd", "3rd", 16.62, 17.37, True, "0.08"),
        ("2nd", "4th", 16.62, 16.79, True, "0.36"), ("3rd", "4th", 28.80, 27.83, False, "0.16"),
    ],
    "dn20_angles_10": [
        ("1st", "2nd", 5.64, 5.604, False, "0.45"), ("1st", "3rd", 5.64, 5.91, True, "0.18"),
        ("1st", "4th", 5.64, 5.68, True, "0.35"), ("2nd", "3rd", 16.38, 17.27, True, "0.13"),
        ("2nd", "4th", 16.38, 16.62, True, "0.37"), ("3rd", "4th", 28.63, 27.55, False, "0.08"),
    ],
    "dn20_angles_20": [
        ("1st", "2nd", 6.02, 5.80, False, "0.20"), ("1st", "3rd", 6.02, 5.95, False, "0.39"),
        ("1st", "4th", 6.02, 5.99, False, "0.43"), ("2nd", "3rd", 16.94, 17.38, True, "0.27"),
        ("2nd", "4th", 16.94, 17.51, True, "0.24"), ("3rd", "4th", 28.81, 29.02, True, "0.45"),
    ],
}

# summary row: NIAS, NIAC, NIS rejected at 5%, joint p, IDI, IEI
SUMMARY = {
    "dn23_12": ("Pass", "Pass", True, "<0.01", 0.17, 0.89),
    "dn23_22": ("Pass", "Pass", False, "0.38", 0.02, 0.98),
    "ccln": ("Pass", "Fail", True, "<0.01", 0.07, 0.91),
    "ccln_d1": ("Pass", "Fail", True, "<0.01", 0.05, 0.92),
    "ccln_d2": ("Pass", "Fail", True, "<0.01", 0.08, 0.89),
    "ccln_d3": ("Pass", "Fail", True, "<0.01", 0.07, 0.90),
    "ccln_d6": ("Pass", "Fail", True, "<0.01", 0.08, 0.90),
    "dn20_dots": ("Pass", "Pass", True, "<0.01", 0.24, 0.67),
    "dn20_dots_10": ("Pass", "Pass", True, "<0.01", 0.23, 0.67),
    "dn20_dots_20": ("Pass", "Pass", True, "<0.01", 0.25, 0.66),
    "dn20_angles": ("Pass", "Fail", False, "0.54", 0.02, 0.96),
    "dn20_angles_10": ("Fail", "Fail", False, "0.53", 0.03, 0.93),
    "dn20_angles_20": ("Pass", "Fail", False, "0.86", 0.02, 0.96),
}

SOURCES = {
    "dn23": "Dean and Neligh (2023), experimental tests of rational inattention",
    "ccln": "Caplin, Csaba, Leahy and Nov (2020), rational inattention, competitive supply, and psychometrics",
    "dn20": "Dewan and Neligh (2020), estimating information cost functions using incentives",
}

# CCLN rounds per subject at 1, 2, 4, 8, 16, 32 points
CCLN_ROUNDS = {1: 8, 2: 8, 4: 6, 8: 5, 16: 3, 32: 2}


def fit_accuracies(rows, prize_of) -> dict:
    """Least-squares accuracy per level from realized and switch values."""
    num: dict = {}
    den: dict = {}
    for lo, hi, lhs, rhs, *_ in rows:
        p = prize_of(lo)
        for level, value in ((lo, lhs), (hi, rhs)):
            num[level] = num.get(level, 0.0) + p * value
            den[level] = den.get(level, 0.0) + p * p
    return {k: num[k] / den[k] for k in num}


def symmetric(acc: float, n: int) -> list[list[float]]:
    cond = np.full((n, n), (1 - acc) / (n - 1))
    np.fill_diagonal(cond, acc)
    return (cond / n).tolist()


def published(rows) -> list[dict]:
    return [{"lower": str(lo), "higher": str(hi), "lhs": lhs, "rhs": rhs, "fails": fails, "p_value": p}
            for lo, hi, lhs, rhs, fails, p in rows]


def summary(name: str) -> dict:
    nias, niac, rejected, joint_p, idi, iei = SUMMARY[name]
    return {"nias": nias, "niac": niac, "nis_rejected_5pct": rejected, "joint_p_value": joint_p,
            "idi": idi, "iei": iei}


def reproduction_error(rows, acc, prize_of) -> float:
    err = 0.0
    for lo, hi, lhs, rhs, *_ in rows:
        p = prize_of(lo)
        err = max(err, abs(p * acc[lo] - lhs), abs(p * acc[hi] - rhs))
    return round(err, 6)


def calibrate_sample_scale(data: dict) -> float:
    """Factor on all trial counts that best matches the published pairwise p-values.

    z-scores scale with the square root of the counts, so the factor is a
    one-parameter least-squares fit in z. Published p-values refer to the
    observed direction of each difference; rows shown as "<0.01" are skipped.
    """
    ds = dataset_from_dict(data)
    ours, theirs = [], []
    for row in data["metadata"]["published_rows"]:
        if row["p_value"].startswith("<"):
            continue
        z_pub = norm.isf(float(row["p_value"]))
        theirs.append(z_pub if row["fails"] else -z_pub)
        ours.append(pairwise_switch_test(ds, row["lower"], row["higher"]).statistic)
    ours_a, theirs_a = np.array(ours), np.array(theirs)
    return float((ours_a @ theirs_a) / (ours_a @ ours_a)) ** 2


def write(name: str, data: dict) -> None:
    path = ROOT / name / "problems.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(ROOT.parents[2])}")


def dn23_12() -> dict:
    problems = [{"id": str(p), "actions": ["a1", "a2"], "prize_matrix": [[p, 0], [0, p]], "prize_cash": 40,
                 "joint": m, "counts_per_state": [1300, 1300]} for p, m in DN23_12_MATRICES.items()]
    return {
        "metadata": {
            "name": "dn23_12",
            "source": SOURCES["dn23"] + ", experiment 1.2 (49 vs 51 red balls)",
            "reconstruction": "none: aggregate joint matrices as published, rounded to 2 decimals",
            "counts": "52 subjects x 50 repetitions per problem = 2600 trials, 1300 per state",
            "published_rows": published(DN23_12),
            "published_summary": summary("dn23_12"),
        },
        "states": {"labels": ["w1", "w2"], "prior": [0.5, 0.5]},
        "actions": ["a1", "a2"],
        "marginal_tolerance": 0.02,
        "problems": problems,
    }


def binary_reconstruction(name: str, rows, counts: dict, source: str, count_note: str) -> dict:
    acc = fit_accuracies(rows, lambda lv: lv)
    levels = sorted(acc)
    problems = [{"id": str(p), "actions": ["a1", "a2"], "prize_matrix": [[p, 0], [0, p]],
                 "joint": symmetric(acc[p], 2), "counts_per_state": [counts[p], counts[p]]} for p in levels]
    return {
        "metadata": {
            "name": name,
            "source": source,
            "reconstruction": ("symmetric matrices from least-squares accuracies implied by the published "
                               "realized/switch values (value = prize x accuracy, equally likely states)"),
            "accuracies": {str(p): round(acc[p], 6) for p in levels},
            "max_abs_reproduction_error": reproduction_error(rows, acc, lambda lv: lv),
            "counts": count_note,
            "published_rows": published(rows),
            "published_summary": summary(name),
        },
        "states": {"labels": ["w1", "w2"], "prior": [0.5, 0.5]},
        "actions": ["a1", "a2"],
        "marginal_tolerance": 1e-9,
        "problems": problems,
    }


def dn20_reconstruction(name: str, rows, subjects: int) -> dict:
    acc = fit_accuracies(rows, lambda q: Q[q])
    labels = [str(k) for k in range(38, 43)] if "dots" in name else [str(k) for k in (35, 40, 45, 50, 55)]
    actions = [f"say_{s}" for s in labels]
    per_state = subjects * 25 // 5
    problems = [{"id": q, "actions": actions, "prize_matrix": (np.eye(5) * Q[q]).tolist(),
                 "joint": symmetric(acc[q], 5), "counts_per_state": [per_state] * 5} for q in Q]
    task = "dots (38-42 dots)" if "dots" in name else "angles (35-55 degrees)"
    return {
        "metadata": {
            "name": name,
            "source": f"{SOURCES['dn20']}, {task} task",
            "reconstruction": ("symmetric 5x5 matrices from least-squares accuracies implied by the published "
                               "realized/switch values; prize of each incentive quartile is its mean "
                               "(13, 38, 63, 88 points)"),
            "accuracies": {q: round(acc[q], 6) for q in Q},
            "max_abs_reproduction_error": reproduction_error(rows, acc, lambda q: Q[q]),
            "counts": f"{subjects} subjects x 25 trials per incentive quartile, split evenly over 5 states",
            "limitations": "symmetric reconstruction cannot express pointwise NIAS failures",
            "published_rows": published(rows),
            "published_summary": summary(name),
        },
        "states": {"labels": labels, "prior": [0.2] * 5},
        "actions": actions,
        "marginal_tolerance": 1e-9,
        "problems": problems,
    }


def main() -> None:
    write("dn23_12", dn23_12())
    write("dn23_22", binary_reconstruction(
        "dn23_22", DN23_22, {5: 420, 95: 420},
        SOURCES["dn23"] + ", experiment 2.2 (3 vs 4 correct equations)",
        "420 per state: trial counts are not published; 420 reproduces both published p-values "
        "(pairwise 0.19, joint 0.38) under the binomial model",
    ))
    for name, rows in CCLN.items():
        pooled = name == "ccln"
        source = SOURCES["ccln"] + (", pooled over difficulty levels" if pooled else f", difficulty level {name[-1]}")
        base_subjects = 400 if pooled else 100
        counts = {p: base_subjects * r // 2 for p, r in CCLN_ROUNDS.items()}
        draft = binary_reconstruction(name, rows, counts, source, "")
        subjects = int(round(base_subjects * calibrate_sample_scale(draft)))
        counts = {p: subjects * r // 2 for p, r in CCLN_ROUNDS.items()}
        write(name, binary_reconstruction(
            name, rows, counts, source,
            f"{subjects} subjects x rounds per incentive (8, 8, 6, 5, 3, 2), split evenly over the two "
            "states; the subject count is not published and was fitted to the published pairwise p-values",
        ))
    for name, rows in DN20.items():
        subjects = {"dn20_dots": 81, "dn20_angles": 81}.get(name, 41 if name.endswith("_10") else 40)
        write(name, dn20_reconstruction(name, rows, subjects))


if __name__ == "__main__":
    main()
