"""problems.json / trials.csv reading and writing, and bundled fixtures."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .core import (
    PUBLISHED_MARGINAL_TOL,
    DatasetError,
    DecisionProblem,
    PrizeSpec,
    SdscDataset,
    StateSpace,
    TrialRecord,
    aggregate_trials,
)

TRIALS_HEADER = ["problem_id", "subject_id", "state", "action"]


def dataset_from_dict(data: dict[str, Any], require_joint: bool = True) -> SdscDataset:
    """Parse the problems.json structure.

    Problems without a ``joint`` get an all-zero placeholder unless
    ``require_joint`` is set; such definitions are meant for
    :func:`aggregate_trials`.
    """
    try:
        st = data["states"]
        labels = tuple(str(s) for s in st["labels"])
        prior = st.get("prior")
        if prior is None:
            prior = [1.0 / len(labels)] * len(labels)
        states = StateSpace(labels, np.asarray(prior, dtype=float))
        actions = tuple(str(a) for a in data["actions"])
        problems = []
        for raw in data["problems"]:
            pid = str(raw["id"])
            acts = tuple(str(a) for a in raw.get("actions", actions))
            prize = PrizeSpec(np.asarray(raw["prize_matrix"], dtype=float), raw.get("prize_cash"))
            if "joint" in raw and raw["joint"] is not None:
                joint = np.asarray(raw["joint"], dtype=float)
            elif require_joint:
                raise DatasetError(f"problem {pid}: no joint distribution (supply trials instead)")
            else:
                joint = np.zeros((len(acts), len(labels)))
            counts = raw.get("counts_per_state")
            cells = raw.get("cell_counts")
            problems.append(DecisionProblem(
                pid, acts, prize, joint,
                None if counts is None else np.asarray(counts, dtype=np.int64),
                None if cells is None else np.asarray(cells, dtype=np.int64),
            ))
    except (KeyError, TypeError) as err:
        raise DatasetError(f"malformed problems file: missing or invalid field {err}") from err
    return SdscDataset(states, actions, tuple(problems),
                       float(data.get("marginal_tolerance", PUBLISHED_MARGINAL_TOL)),
                       dict(data.get("metadata", {})))


def dataset_to_dict(dataset: SdscDataset) -> dict[str, Any]:
    problems = []
    for p in dataset.problems:
        raw: dict[str, Any] = {"id": p.id, "actions": list(p.actions),
                               "prize_matrix": p.prize.matrix.tolist()}
        if p.prize.cash is not None:
            raw["prize_cash"] = p.prize.cash
        raw["joint"] = p.joint.tolist()
        if p.counts_per_state is not None:
            raw["counts_per_state"] = p.counts_per_state.tolist()
        if p.cell_counts is not None:
            raw["cell_counts"] = p.cell_counts.tolist()
        problems.append(raw)
    out: dict[str, Any] = {}
    if dataset.metadata:
        out["metadata"] = dict(dataset.metadata)
    out.update({
        "states": {"labels": list(dataset.states.labels), "prior": dataset.prior.tolist()},
        "actions": list(dataset.actions),
        "marginal_tolerance": dataset.marginal_tolerance,
        "problems": problems,
    })
    return out


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def load_problems(path: str | Path, require_joint: bool = True) -> SdscDataset:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise DatasetError(f"{path}: invalid JSON ({err})") from err
    return dataset_from_dict(data, require_joint)


def save_problems(dataset: SdscDataset, path: str | Path) -> None:
    atomic_write_text(path, dumps(dataset_to_dict(dataset)))


def read_trials(path: str | Path) -> list[TrialRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRIALS_HEADER:
            raise DatasetError(f"{path}: header must be {','.join(TRIALS_HEADER)}")
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DatasetError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            rows.append(TrialRecord(*(v.strip() for v in row)))
    return rows


def trials_to_csv(records: Iterable[TrialRecord]) -> str:
    lines = [",".join(TRIALS_HEADER)]
    lines.extend(f"{r.problem_id},{r.subject_id},{r.state},{r.action}" for r in records)
    return "\n".join(lines) + "\n"


def write_trials(records: Sequence[TrialRecord], path: str | Path) -> None:
    atomic_write_text(path, trials_to_csv(records))


def fixture_names() -> list[str]:
    root = resources.files("sdsc_nis") / "fixtures"
    return sorted(p.name for p in root.iterdir() if p.is_dir() and (p / "problems.json").is_file())


def fixture_path(name: str) -> Path:
    path = Path(str(resources.files("sdsc_nis") / "fixtures" / name / "problems.json"))
    if not path.is_file():
        raise DatasetError(f"no bundled fixture named {name!r}; available: {', '.join(fixture_names())}")
    return path


def load_fixture(name: str) -> SdscDataset:
    return load_problems(fixture_path(name))


def resolve_input(spec: str | Path) -> tuple[Path, Path | None]:
    """Locate problems.json (and trials.csv, if present) for a CLI input argument.

    Accepts a problems file, a directory holding one, or ``fixtures/<name>``
    for a bundled fixture.
    """
    path = Path(spec)
    if not path.exists():
        parts = path.parts
        if len(parts) == 2 and parts[0] == "fixtures":
            path = fixture_path(parts[1]).parent
        elif len(parts) == 1:
            try:
                path = fixture_path(parts[0]).parent
            except DatasetError:
                raise DatasetError(f"input {spec} does not exist") from None
        else:
            raise DatasetError(f"input {spec} does not exist")
    if path.is_dir():
        problems = path / "problems.json"
        if not problems.is_file():
            raise DatasetError(f"{path} holds no problems.json")
        trials = path / "trials.csv"
        return problems, trials if trials.is_file() else None
    return path, None


def load_input(spec: str | Path, trials: str | Path | None = None,
               use_trials: bool = False) -> tuple[SdscDataset, list[TrialRecord] | None]:
    """Load a dataset for the CLI; with ``use_trials`` joints come from the trial rows."""
    problems, found = resolve_input(spec)
    trials_path = Path(trials) if trials is not None else found
    records = read_trials(trials_path) if trials_path is not None else None
    if use_trials:
        if records is None:
            raise DatasetError("no trials.csv to aggregate")
        with open(problems, encoding="utf-8") as fh:
            raw = json.load(fh)
        defs = dataset_from_dict(raw, require_joint=False)
        if raw["states"].get("prior") is not None:
            # a declared prior wins; sampled marginals only approximate it
            tol = max(defs.marginal_tolerance, PUBLISHED_MARGINAL_TOL)
            return aggregate_trials(records, defs, prior=defs.prior, marginal_tolerance=tol), records
        return aggregate_trials(records, defs), records
    return load_problems(problems), records
