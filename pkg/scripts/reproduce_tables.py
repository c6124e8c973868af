"""Audit every bundled dataset and print it next to the published values.

Run:  python scripts/reproduce_tables.py [--fixtures dn23_12 ccln] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field

from sdsc_nis.conditions import audit
from sdsc_nis.inference import format_p, joint_test, pairwise_switch_test
from sdsc_nis.io import fixture_names, load_fixture


@dataclass(frozen=True)
class TableConfig:
    fixtures: tuple[str, ...] = field(default_factory=lambda: tuple(fixture_names()))
    tau: float = 1e-9
    json_path: str | None = None


def compare(name: str, tau: float) -> dict:
    ds = load_fixture(name)
    rep = audit(ds, tau)
    joint = joint_test(ds)
    rows = []
    for pub in ds.metadata["published_rows"]:
        r = rep.nis_row(pub["lower"], pub["higher"])
        p = pairwise_switch_test(ds, pub["lower"], pub["higher"]).p_value
        rows.append({"pair": [pub["lower"], pub["higher"]],
                     "lhs": [r.lhs, pub["lhs"]], "rhs": [r.rhs, pub["rhs"]],
                     "fails": [not r.passed, pub["fails"]], "p": [p, pub["p_value"]]})
    summary = ds.metadata["published_summary"]
    return {
        "name": name,
        "rows": rows,
        "nias": [rep.nias_pass, summary["nias"]],
        "niac": [rep.niac_pass, summary["niac"]],
        "joint_p": [joint.p_value, summary["joint_p_value"]],
        "idi": [rep.idi_full_info, rep.idi_no_info, summary["idi"]],
        "iei": [rep.iei, summary["iei"]],
    }


def show(result: dict) -> None:
    print(f"\n{result['name']}")
    print(f"  {'pair':>10} {'LHS':>15} {'RHS':>15} {'fails':>11} {'p':>12}")
    for r in result["rows"]:
        pair = "/".join(r["pair"])
        print(f"  {pair:>10} {r['lhs'][0]:7.2f}|{r['lhs'][1]:<7.2f} {r['rhs'][0]:7.2f}|{r['rhs'][1]:<7.2f} "
              f"{str(r['fails'][0])[0]}|{str(r['fails'][1])[0]:>9} {format_p(r['p'][0]):>5}|{r['p'][1]:<6}")
    nias, niac = result["nias"], result["niac"]
    print(f"  NIAS {'Pass' if nias[0] else 'Fail'}|{nias[1]}  NIAC {'Pass' if niac[0] else 'Fail'}|{niac[1]}"
          f"  joint p {format_p(result['joint_p'][0])}|{result['joint_p'][1]}"
          f"  IDI {result['idi'][0]:.3f} (no-info {result['idi'][1]:.3f})|{result['idi'][2]}"
          f"  IEI {result['iei'][0]:.3f}|{result['iei'][1]}")


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fixtures", nargs="*", default=None, help="fixture names (default: all)")
    parser.add_argument("--tau", type=float, default=1e-9, help="inequality tolerance")
    parser.add_argument("--json", dest="json_path", default=None, help="also write results here")
    args = parser.parse_args(argv)
    cfg = TableConfig(tuple(args.fixtures) if args.fixtures else TableConfig().fixtures, args.tau, args.json_path)
    print("each cell shows ours|published")
    results = [compare(n, cfg.tau) for n in cfg.fixtures]
    for r in results:
        show(r)
    if cfg.json_path:
        with open(cfg.json_path, "w") as fh:
            json.dump({"config": asdict(cfg), "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()
