"""Command-line entry point: ``sdsc-nis {validate,audit,infer,synth,report}``.

Exit status: 0 when NIS holds (or the command has nothing to judge),
1 when it fails, 2 on input or validation errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .conditions import TAU, ConditionReport, audit
from .core import DatasetError, SdscDataset, TrialRecord, diagonal_prize, validate_dataset
from .inference import (
    InferenceError,
    TestReport,
    bootstrap_nias,
    format_p,
    joint_test,
    pairwise_table,
    records_from_counts,
)
from .io import atomic_write_text, dataset_to_dict, dumps, load_input, trials_to_csv
from .synth import (
    CapacityModel,
    ElasticModel,
    SolverError,
    build_dataset,
    mutual_information,
    sample_trials,
    solve_fixed_capacity,
    solve_shannon_elastic,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "SDSC_NIS_SEED"
NORMALIZATIONS = ("full_info", "no_info")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    trials: str | None = None
    use_trials: bool = False
    output: str | None = None
    fmt: str = "json"
    alpha: float = 0.05
    seed: int = 0
    bootstrap: int | None = None
    idi_normalization: str = "full_info"
    tau: float = TAU
    marginal_tol: float | None = None
    synth: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.bootstrap is not None and self.bootstrap < 1:
            raise ValueError(f"bootstrap replications must be >= 1, got {self.bootstrap}")
        if self.fmt not in ("json", "table"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.idi_normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown IDI normalization {self.idi_normalization!r}")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.trials is not None and not Path(self.trials).is_file():
            raise DatasetError(f"trials file {self.trials} does not exist")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdsc-nis",
        description="Audit state-dependent stochastic choice data for consistency with "
                    "costly attention (NIAS, NIAC, NIS), test it statistically, or synthesize it.",
        epilog="exit status: 0 = NIS holds, 1 = NIS fails, 2 = input or validation error",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True,
                        help="problems.json, a directory holding it (and optionally trials.csv), "
                             "or fixtures/<name> for a bundled dataset")
    common.add_argument("--trials", help="trials.csv to use instead of the one next to --input")
    common.add_argument("--use-trials", action="store_true",
                        help="build the joint distributions from the trial rows rather than problems.json")
    common.add_argument("--format", "-f", dest="fmt", choices=("json", "table"), default="json",
                        help="json keeps full precision; table rounds to 2 decimals (default: json)")
    common.add_argument("--output", "-o", help="write the result here (atomically) instead of stdout")
    common.add_argument("--tau", type=float, default=TAU,
                        help=f"slack allowed before an inequality counts as violated (default: {TAU:g})")
    common.add_argument("--marginal-tol", type=float, default=None,
                        help="max gap between each problem's state marginal and the prior "
                             "(default: the value stored in problems.json)")

    stats = argparse.ArgumentParser(add_help=False)
    stats.add_argument("--alpha", type=float, default=0.05, help="significance level (default: 0.05)")
    stats.add_argument("--bootstrap", type=int, metavar="B", default=None,
                       help="also run the bootstrap NIAS test with B replications")
    stats.add_argument("--seed", type=int, default=None,
                       help=f"bootstrap seed (default: ${SEED_ENV} or 0)")

    idi = argparse.ArgumentParser(add_help=False)
    idi.add_argument("--idi-normalization", choices=NORMALIZATIONS, default="full_info",
                     help="IDI shown in tables: divide by the full-information value (default) "
                          "or the no-information value; JSON always carries both")

    sub.add_parser("validate", parents=[common], help="check a dataset and list every problem found")
    sub.add_parser("audit", parents=[common, idi], help="exact NIAS/NIAC/NIS checks and indices")
    sub.add_parser("infer", parents=[common, stats], help="pairwise and joint tests (needs trial counts)")
    sub.add_parser("report", parents=[common, stats, idi], help="audit plus inference in one report")

    syn = sub.add_parser("synth", help="simulate a dataset from a rational inattention model")
    syn.add_argument("--model", choices=("fixed", "elastic"), required=True,
                     help="fixed: Shannon capacity constraint; elastic: Shannon cost per nat")
    syn.add_argument("--capacity", type=float, help="capacity in nats (fixed model)")
    syn.add_argument("--lambda", dest="cost", type=float, help="utility cost per nat (elastic model)")
    syn.add_argument("--prizes", type=_floats, required=True,
                     help="comma-separated prize in probability points for each problem, e.g. 5,40,70,95")
    syn.add_argument("--prior", type=_floats, default=[0.5, 0.5],
                     help="comma-separated prior over states (default: 0.5,0.5)")
    syn.add_argument("--n", type=int, default=1300, help="trials per state per problem (default: 1300)")
    syn.add_argument("--seed", type=int, default=None, help=f"sampling seed (default: ${SEED_ENV} or 0)")
    syn.add_argument("--out", "-o", dest="output", default="synth_out",
                     help="directory for problems.json, trials.csv and truth.json (default: synth_out)")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    seed = ns.seed if getattr(ns, "seed", None) is not None else _default_seed()
    if ns.command == "synth":
        return RunConfig("synth", output=ns.output, seed=seed, synth={
            "model": ns.model, "capacity": ns.capacity, "cost": ns.cost,
            "prizes": ns.prizes, "prior": ns.prior, "n": ns.n,
        })
    return RunConfig(
        ns.command, ns.input, ns.trials, ns.use_trials, ns.output, ns.fmt,
        getattr(ns, "alpha", 0.05), seed, getattr(ns, "bootstrap", None),
        getattr(ns, "idi_normalization", "full_info"), ns.tau, ns.marginal_tol,
    )


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        atomic_write_text(cfg.output, text)
    else:
        sys.stdout.write(text)


def _load(cfg: RunConfig) -> tuple[SdscDataset, list[TrialRecord] | None]:
    ds, records = load_input(cfg.input, cfg.trials, cfg.use_trials)
    report = validate_dataset(ds, cfg.marginal_tol)
    if not report.ok:
        lines = [f"  {i.code} at {i.location}: {i.message}" for i in report.issues]
        raise DatasetError("invalid dataset:\n" + "\n".join(lines))
    return ds, records


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h) for k, h in enumerate(header)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    out = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    out.extend(fmt.format(*r) for r in rows)
    return "\n".join(out)


def _f2(x: float | None) -> str:
    return "-" if x is None else f"{x:.2f}"


def _pass(flag: bool) -> str:
    return "Pass" if flag else "Fail"


def _summary_lines(rep: ConditionReport, normalization: str) -> list[str]:
    niac = "Pass" if rep.niac_pass else f"Fail (cycle {' -> '.join(rep.niac.witness or ())})"
    idi = rep.idi_full_info if normalization == "full_info" else rep.idi_no_info
    lines = [f"NIAS: {_pass(rep.nias_pass)}", f"NIAC: {niac}", f"NIS:  {_pass(rep.nis_pass)}",
             f"IDI ({normalization}): {_f2(idi)}", f"IEI: {_f2(rep.iei)}"]
    worst = rep.worst_violation
    if worst is not None:
        lines.append(f"worst violation: {worst.kind} {'/'.join(worst.problems)} slack {worst.slack:.4f}")
    return lines


def _audit_table(rep: ConditionReport, normalization: str, pvalues: dict | None = None) -> str:
    header = ["Lower", "Higher", "LHS", "RHS", "NIS fails"] + (["p-value"] if pvalues is not None else [])
    rows = []
    n = len(rep.ids)
    for i in range(n):
        for j in range(i + 1, n):
            r = rep.nis_row(rep.ids[i], rep.ids[j])
            row = [rep.ids[i], rep.ids[j], _f2(r.lhs), _f2(r.rhs), "N" if r.passed else "Y"]
            if pvalues is not None:
                row.append(pvalues.get((rep.ids[i], rep.ids[j]), "-"))
            rows.append(row)
    reverse = [r for r in rep.nis if r.kind == "NIS-cross" and not r.passed
               and rep.ids.index(r.problems[0]) > rep.ids.index(r.problems[1])]
    parts = [_table(header, rows)]
    if reverse:
        parts.append("decreasing-incentive failures: "
                     + ", ".join(f"{a}->{b} ({_f2(r.lhs)} < {_f2(r.rhs)})"
                                 for r in reverse for a, b in [r.problems]))
    parts.append("\n".join(_summary_lines(rep, normalization)))
    return "\n\n".join(parts) + "\n"


def _inference(cfg: RunConfig, ds: SdscDataset, records: list[TrialRecord] | None) -> dict[str, Any]:
    missing = [p.id for p in ds.problems if p.counts_per_state is None and p.cell_counts is None]
    if missing:
        raise InferenceError(f"trial counts missing for problems {', '.join(missing)}; "
                             "add counts_per_state or supply trials with --use-trials")
    out: dict[str, Any] = {"pairwise": pairwise_table(ds), "joint": joint_test(ds)}
    if cfg.bootstrap is not None:
        recs = records if records is not None else records_from_counts(ds)
        out["bootstrap"] = bootstrap_nias(recs, ds, cfg.bootstrap, cfg.seed, tau=cfg.tau)
    return out


def _inference_json(inf: dict[str, Any], alpha: float) -> dict[str, Any]:
    pair: list[TestReport] = inf["pairwise"]
    out = {
        "alpha": alpha,
        "pairwise": [dict(r.rows[0], rejects=r.rejects(alpha), notes=list(r.notes)) for r in pair],
        "joint": dict(inf["joint"].to_dict(), rejects=inf["joint"].rejects(alpha)),
    }
    if "bootstrap" in inf:
        out["bootstrap"] = inf["bootstrap"].to_dict()
    return out


def _inference_text(inf: dict[str, Any], alpha: float, with_pairs: bool = True) -> str:
    parts = []
    if with_pairs:
        rows = [[r.rows[0]["lower"], r.rows[0]["higher"], _f2(r.rows[0]["lhs"]), _f2(r.rows[0]["rhs"]),
                 "Y" if r.rows[0]["fails"] else "N", format_p(r.p_value)] for r in inf["pairwise"]]
        parts.append(_table(["Lower", "Higher", "LHS", "RHS", "NIS fails", "p-value"], rows))
    j: TestReport = inf["joint"]
    parts.append(f"joint test ({j.name}): W = {j.statistic:.2f}, df = {j.df}, p = {format_p(j.p_value)}, "
                 f"{'reject' if j.rejects(alpha) else 'do not reject'} at alpha = {alpha:g}")
    if "bootstrap" in inf:
        b: TestReport = inf["bootstrap"]
        rows = [[r["problem"], r["action"], _f2(r["failure_fraction"]), "Y" if r["rejects"] else "N"]
                for r in b.rows]
        parts.append(f"bootstrap NIAS, B = {b.extra['replications']}, seed = {b.extra['seed']}\n"
                     + _table(["Problem", "Action", "Fail share", "Rejects"], rows))
    return "\n\n".join(parts) + "\n"


def cmd_validate(cfg: RunConfig) -> int:
    ds, _ = load_input(cfg.input, cfg.trials, cfg.use_trials)
    report = validate_dataset(ds, cfg.marginal_tol)
    if cfg.fmt == "json":
        _emit(cfg, dumps({"ok": report.ok, "problems": list(ds.ids), "issues": report.to_list()}))
    elif report.ok:
        _emit(cfg, f"OK: {len(ds)} problems, {len(ds.states.labels)} states\n")
    else:
        _emit(cfg, "".join(f"{i.code}\t{i.location}\t{i.message}\n" for i in report.issues))
    return EXIT_PASS if report.ok else EXIT_INPUT


def cmd_audit(cfg: RunConfig) -> int:
    ds, _ = _load(cfg)
    rep = audit(ds, cfg.tau)
    if cfg.fmt == "json":
        _emit(cfg, dumps(rep.to_dict()))
    else:
        _emit(cfg, _audit_table(rep, cfg.idi_normalization))
    return EXIT_PASS if rep.nis_pass else EXIT_FAIL


def cmd_infer(cfg: RunConfig) -> int:
    """Statistical verdict: exit 1 when the joint test rejects at alpha."""
    ds, records = _load(cfg)
    inf = _inference(cfg, ds, records)
    if cfg.fmt == "json":
        _emit(cfg, dumps(_inference_json(inf, cfg.alpha)))
    else:
        _emit(cfg, _inference_text(inf, cfg.alpha))
    return EXIT_FAIL if inf["joint"].rejects(cfg.alpha) else EXIT_PASS


def cmd_report(cfg: RunConfig) -> int:
    """Audit plus inference; inference is skipped (and said so) when counts are absent."""
    ds, records = _load(cfg)
    rep = audit(ds, cfg.tau)
    try:
        inf = _inference(cfg, ds, records)
        skipped = None
    except InferenceError as err:
        inf, skipped = None, str(err)
    if cfg.fmt == "json":
        out: dict[str, Any] = {"metadata": ds.metadata, "audit": rep.to_dict()}
        out["inference"] = _inference_json(inf, cfg.alpha) if inf else {"skipped": skipped}
        _emit(cfg, dumps(out))
    else:
        pvals = None
        if inf:
            pvals = {(r.rows[0]["lower"], r.rows[0]["higher"]): format_p(r.p_value) for r in inf["pairwise"]}
        text = _audit_table(rep, cfg.idi_normalization, pvals)
        text += "\n" + (_inference_text(inf, cfg.alpha, with_pairs=False) if inf else f"inference skipped: {skipped}\n")
        _emit(cfg, text)
    return EXIT_PASS if rep.nis_pass else EXIT_FAIL


def cmd_synth(cfg: RunConfig) -> int:
    """Write problems.json (population joints), trials.csv and truth.json; deterministic in (seed, params)."""
    s = cfg.synth
    prior = np.asarray(s["prior"], dtype=float)
    n_states = len(prior)
    if n_states < 2:
        raise ValueError("need at least two states")
    if s["n"] < 1:
        raise ValueError("--n must be at least 1")
    if not s["prizes"] or any(p < 0 for p in s["prizes"]):
        raise ValueError("prizes must be nonnegative and at least one is required")
    prizes = [diagonal_prize(p, n_states) for p in s["prizes"]]
    if s["model"] == "fixed":
        if s["capacity"] is None:
            raise ValueError("--capacity is required for the fixed model")
        model: CapacityModel | ElasticModel = CapacityModel(s["capacity"], prior, tuple(prizes))
        joints = [solve_fixed_capacity(model, x) for x in prizes]
        params = {"capacity_nats": s["capacity"]}
    else:
        if s["cost"] is None:
            raise ValueError("--lambda is required for the elastic model")
        model = ElasticModel(s["cost"], prior, tuple(prizes))
        joints = [solve_shannon_elastic(model, x) for x in prizes]
        params = {"cost_per_nat": s["cost"]}
    ids = [f"{p:g}" for p in s["prizes"]]
    if len(set(ids)) != len(ids):
        raise ValueError("prizes must be distinct")
    meta = {"generator": f"{s['model']} Shannon model", **params, "prior": prior.tolist(),
            "prizes": list(s["prizes"]), "n_per_state": s["n"], "seed": cfg.seed,
            "note": "joints are the model's population distributions; trials.csv is a sample from them"}
    ds = build_dataset(prior, prizes, joints, ids, s["n"], meta)
    records: list[TrialRecord] = []
    for k, (pid, joint) in enumerate(zip(ids, joints)):
        records.extend(sample_trials(joint, s["n"], cfg.seed, pid, ds.actions, ds.states.labels,
                                     stream=k))
    truth = {"model": s["model"], **params, "prior": prior.tolist(), "seed": cfg.seed,
             "problems": [{"id": pid, "prize": p, "joint": j.tolist(),
                           "mutual_information_nats": mutual_information(j, prior)}
                          for pid, p, j in zip(ids, s["prizes"], joints)]}
    out = Path(cfg.output or "synth_out")
    atomic_write_text(out / "problems.json", dumps(dataset_to_dict(ds)))
    atomic_write_text(out / "trials.csv", trials_to_csv(records))
    atomic_write_text(out / "truth.json", dumps(truth))
    print(f"wrote {out}/problems.json, trials.csv ({len(records)} rows), truth.json", file=sys.stderr)
    return EXIT_PASS


COMMANDS = {"validate": cmd_validate, "audit": cmd_audit, "infer": cmd_infer,
            "report": cmd_report, "synth": cmd_synth}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (DatasetError, InferenceError, SolverError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
