"""Command-line harness: generate suites, solve, benchmark, verify, export.

Subcommands
-----------
generate    expand a manifest of generator specs into instance files
solve       solve one instance file, write the solution JSON
bench       run a config matrix over a suite directory, emit a CSV
verify      cross-check solver against the exhaustive oracle (and MILP)
export-milp write the LP formulation of one instance

Exit codes are a stable contract: 0 solved/ok, 2 infeasible, 3 limit hit,
1 any other error (bad usage, I/O, mismatch).

A generate manifest is JSON: {"name": ..., "defaults": {...},
"instances": [{"id": ..., <GenSpec field overrides>}, ...]}.  Every field
of GenSpec may appear in defaults or per instance; each instance needs a
unique id.  The expanded suite directory gets one <id>.json per instance
plus suite.json recording the fully resolved spec of each (rerunning
generate on the same manifest reproduces every file byte for byte).

Benchmark CSVs carry one row per (instance, selection, heuristic) run,
sorted by (family, n_nodes, selection, heuristic, id).  Cost and label
count columns are deterministic for a fixed suite; wall_time and
table_time columns are not.  --aggregate additionally writes per-cell
medians and quartiles, the numbers behind the usual runtime-vs-size
plots.  Solve wall time excludes heuristic table construction, which is
reported separately (the SUP table costs a Dijkstra sweep of its own).

The default output directory for files this tool writes is
$HYBRIDPATH_OUT_DIR when set, else the current directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from . import generators, labeling, verify
from .heuristics import make_table, sup_path
from .instance import (FormatError, InvalidInstanceError, load, save,
                       solution_dumps)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3

_STATUS_EXIT = {
    labeling.STATUS_OPTIMAL: EXIT_OK,
    labeling.STATUS_INFEASIBLE: EXIT_INFEASIBLE,
    labeling.STATUS_LIMIT: EXIT_LIMIT,
}

CSV_FIELDS = [
    "id", "family", "dim", "n_nodes", "n_edges", "noise_fraction",
    "selection", "heuristic", "status", "cost", "sup_lower_bound",
    "wall_time", "table_time", "labels_created", "labels_treated",
    "labels_pruned", "peak_open", "rounds", "note",
]


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; 2 means infeasible here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _out_dir(explicit: Optional[str]) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get("HYBRIDPATH_OUT_DIR", "."))


def _split_choices(value: str, allowed, what: str) -> List[str]:
    items = [tok.strip() for tok in value.split(",") if tok.strip()]
    for tok in items:
        if tok not in allowed:
            raise ValueError(f"unknown {what} {tok!r} (choose from {allowed})")
    if not items:
        raise ValueError(f"empty {what} list")
    return items


def _instance_stats(instance) -> Dict[str, object]:
    meta = instance.meta or {}
    noise = meta.get("noise_fraction")
    if noise is None:
        restricted = sum(1 for e in instance.edges if not e.gen_allowed)
        noise = restricted / len(instance.edges) if instance.edges else 0.0
    return {
        "family": meta.get("family", ""),
        "dim": meta.get("dim", len(instance.nodes[0]) if instance.nodes else ""),
        "n_nodes": instance.n_nodes,
        "n_edges": len(instance.edges),
        "noise_fraction": noise,
    }


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    entries = manifest.get("instances")
    if not entries:
        print("error: manifest has no instances", file=sys.stderr)
        return EXIT_ERROR
    defaults = dict(manifest.get("defaults", {}))
    if args.seed is not None:
        defaults["seed"] = args.seed

    out_dir = _out_dir(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    seen = set()
    for entry in entries:
        entry = dict(entry)
        eid = entry.pop("id", None)
        if not eid or eid in seen:
            print(f"error: missing or duplicate instance id {eid!r}",
                  file=sys.stderr)
            return EXIT_ERROR
        seen.add(eid)
        spec = generators.GenSpec.from_dict({**defaults, **entry})
        instance = generators.generate(spec)
        path = out_dir / f"{eid}.json"
        save(instance, path)
        meta = instance.meta or {}
        records.append({
            "id": eid,
            "file": path.name,
            "spec": spec.to_dict(),
            "n_nodes": instance.n_nodes,
            "n_edges": len(instance.edges),
            "noise_fraction": meta.get("noise_fraction"),
        })
        print(f"{eid}: n={instance.n_nodes} edges={len(instance.edges)} "
              f"noise={meta.get('noise_fraction', 0.0):.3f}")
    suite = {"name": manifest.get("name", out_dir.name), "instances": records}
    with open(out_dir / "suite.json", "w", encoding="utf-8") as fh:
        json.dump(suite, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(records)} instances to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    instance = load(args.instance)
    config = labeling.SolverConfig(
        selection=args.selection, heuristic=args.heuristic,
        max_labels=args.max_labels, max_seconds=args.max_seconds)
    t0 = time.perf_counter()
    table = make_table(instance, config.heuristic)
    table_time = time.perf_counter() - t0
    result = labeling.solve(instance, config, table=table)
    s = result.stats

    try:
        lb = sup_path(instance).cost
    except ValueError:
        lb = None
    parts = [f"status={result.status}"]
    if result.solution is not None:
        parts.append(f"cost={result.solution.cost!r}")
    if lb is not None:
        parts.append(f"sup_lower_bound={lb!r}")
    if result.status == labeling.STATUS_LIMIT and result.lower_bound is not None:
        parts.append(f"open_lower_bound={result.lower_bound!r}")
    parts += [
        f"wall_time={s.wall_time:.6f}", f"table_time={table_time:.6f}",
        f"labels_created={s.labels_created}",
        f"labels_treated={s.labels_treated}",
        f"labels_pruned={s.labels_pruned}", f"peak_open={s.peak_open}",
        f"rounds={s.rounds}",
    ]
    print(" ".join(parts))

    if result.solution is not None:
        if args.out:
            out_path = Path(args.out)
        else:
            stem = Path(args.instance).stem
            out_path = _out_dir(None) / f"{stem}.solution.json"
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(solution_dumps(instance, result.solution))
        print(f"solution written to {out_path}")
    elif result.status == labeling.STATUS_INFEASIBLE:
        print("no feasible path")
    return _STATUS_EXIT[result.status]


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _suite_files(suite_dir: Path) -> List[Path]:
    suite_json = suite_dir / "suite.json"
    if suite_json.exists():
        with open(suite_json, "r", encoding="utf-8") as fh:
            suite = json.load(fh)
        return [suite_dir / rec["file"] for rec in suite["instances"]]
    files = sorted(p for p in suite_dir.glob("*.json")
                   if p.name != "suite.json"
                   and not p.name.endswith(".solution.json"))
    if not files:
        raise FileNotFoundError(f"no instance files in {suite_dir}")
    return files


def _bench_one(path_str: str, selections: List[str], heuristics: List[str],
               max_labels: Optional[int],
               max_seconds: Optional[float]) -> List[Dict[str, object]]:
    """All configured runs for one instance file (table shared per
    heuristic); errors become flagged rows so the sweep continues."""
    path = Path(path_str)
    base: Dict[str, object] = {k: "" for k in CSV_FIELDS}
    base["id"] = path.stem
    try:
        instance = load(path)
        base.update(_instance_stats(instance))
        lb = sup_path(instance).cost
    except (FormatError, InvalidInstanceError, OSError) as exc:
        base.update(status="error", note=str(exc))
        return [dict(base)]
    except ValueError:
        lb = None
    base["sup_lower_bound"] = "" if lb is None else repr(lb)

    rows = []
    for heuristic in heuristics:
        t0 = time.perf_counter()
        table = make_table(instance, heuristic)
        table_time = time.perf_counter() - t0
        for selection in selections:
            row = dict(base)
            row.update(selection=selection, heuristic=heuristic,
                       table_time=f"{table_time:.6f}")
            try:
                result = labeling.solve(
                    instance,
                    labeling.SolverConfig(selection=selection,
                                          heuristic=heuristic,
                                          max_labels=max_labels,
                                          max_seconds=max_seconds),
                    table=table)
            except Exception as exc:  # flag and continue
                row.update(status="error", note=str(exc))
                rows.append(row)
                continue
            s = result.stats
            row.update(
                status=result.status,
                cost="" if result.solution is None
                else repr(result.solution.cost),
                wall_time=f"{s.wall_time:.6f}",
                labels_created=s.labels_created,
                labels_treated=s.labels_treated,
                labels_pruned=s.labels_pruned,
                peak_open=s.peak_open,
                rounds=s.rounds,
            )
            rows.append(row)
    return rows


def _aggregate_rows(rows) -> List[Dict[str, object]]:
    cells: Dict[tuple, List[dict]] = {}
    for row in rows:
        if row["status"] != labeling.STATUS_OPTIMAL:
            continue
        key = (row["family"], row["dim"], row["n_nodes"],
               row["selection"], row["heuristic"])
        cells.setdefault(key, []).append(row)
    out = []
    for key in sorted(cells, key=lambda k: tuple(str(x) for x in k)):
        group = cells[key]
        times = sorted(float(r["wall_time"]) for r in group)
        treated = sorted(int(r["labels_treated"]) for r in group)
        if len(times) >= 2:
            q1, med, q3 = statistics.quantiles(times, n=4)
        else:
            q1 = med = q3 = times[0]
        out.append({
            "family": key[0], "dim": key[1], "n_nodes": key[2],
            "selection": key[3], "heuristic": key[4], "runs": len(group),
            "wall_time_q1": f"{q1:.6f}", "wall_time_median": f"{med:.6f}",
            "wall_time_q3": f"{q3:.6f}",
            "labels_treated_median": statistics.median(treated),
        })
    return out


def cmd_bench(args) -> int:
    suite_dir = Path(args.suite)
    try:
        selections = _split_choices(args.selection,
                                    (labeling.SELECT_LABEL,
                                     labeling.SELECT_NODE), "selection")
        heuristics = _split_choices(args.heuristic, ("sld", "sup", "zero"),
                                    "heuristic")
        files = _suite_files(suite_dir)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    worker_args = [(str(p), selections, heuristics, args.max_labels,
                    args.max_seconds) for p in files]
    rows: List[Dict[str, object]] = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(_bench_one_star, worker_args):
                rows.extend(chunk)
    else:
        for wa in worker_args:
            rows.extend(_bench_one(*wa))

    rows.sort(key=lambda r: (str(r["family"]), str(r["n_nodes"]),
                             str(r["selection"]), str(r["heuristic"]),
                             str(r["id"])))
    out_path = Path(args.out) if args.out else suite_dir / "bench.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    n_bad = sum(1 for r in rows if r["status"] == "error")
    print(f"wrote {len(rows)} rows to {out_path}"
          + (f" ({n_bad} flagged errors)" if n_bad else ""))

    if args.aggregate:
        agg = _aggregate_rows(rows)
        agg_fields = ["family", "dim", "n_nodes", "selection", "heuristic",
                      "runs", "wall_time_q1", "wall_time_median",
                      "wall_time_q3", "labels_treated_median"]
        with open(args.aggregate, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=agg_fields)
            writer.writeheader()
            writer.writerows(agg)
        print(f"wrote {len(agg)} aggregate rows to {args.aggregate}")
    return EXIT_ERROR if n_bad else EXIT_OK


def _bench_one_star(wa):
    return _bench_one(*wa)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_VERIFY_CONFIGS = tuple(
    (sel, heur)
    for sel in (labeling.SELECT_LABEL, labeling.SELECT_NODE)
    for heur in ("sup", "sld"))


def cmd_verify(args) -> int:
    suite_dir = Path(args.suite)
    try:
        files = _suite_files(suite_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    checked = matched = skipped = 0
    for path in files:
        instance = load(path)
        try:
            oracle = verify.oracle_solve(instance)
        except verify.OracleBudgetError as exc:
            print(f"{path.stem}: skipped ({exc})")
            skipped += 1
            continue
        checked += 1
        problems = []
        solved = None
        for selection, heuristic in _VERIFY_CONFIGS:
            result = labeling.solve(
                instance, labeling.SolverConfig(selection=selection,
                                                heuristic=heuristic))
            tag = f"{selection}/{heuristic}"
            if result.status != oracle.status:
                problems.append(f"{tag}: {result.status} vs oracle "
                                f"{oracle.status}")
            elif (oracle.solution is not None
                  and result.solution.cost != oracle.cost):
                problems.append(f"{tag}: cost {result.solution.cost!r} vs "
                                f"oracle {oracle.cost!r}")
            if result.solution is not None:
                solved = result.solution
        if args.export_milp:
            model = verify.build_milp(instance)
            lp_path = path.with_suffix(".lp")
            with open(lp_path, "w", encoding="utf-8") as fh:
                fh.write(model.render())
            if solved is not None:
                assignment = verify.assignment_from_solution(instance, solved)
                problems += verify.check_substitution(model, assignment)
        if problems:
            print(f"{path.stem}: MISMATCH — " + "; ".join(problems))
        else:
            cost = "infeasible" if oracle.solution is None else repr(oracle.cost)
            print(f"{path.stem}: ok ({cost})")
            matched += 1
    print(f"{matched}/{checked} matched, {skipped} skipped")
    return EXIT_OK if matched == checked else EXIT_ERROR


# ---------------------------------------------------------------------------
# export-milp
# ---------------------------------------------------------------------------

def cmd_export_milp(args) -> int:
    instance = load(args.instance)
    text = verify.export_milp(instance, big_m_mode=args.big_m,
                              literal=args.literal_milp)
    if args.out:
        out_path = Path(args.out)
    else:
        out_path = _out_dir(None) / (Path(args.instance).stem + ".lp")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_config_flags(p, limits_only=False):
    if not limits_only:
        p.add_argument("--selection", default=labeling.SELECT_LABEL,
                       help="label or node (bench: comma list)")
        p.add_argument("--heuristic", default="sup",
                       help="sup, sld or zero (bench: comma list)")
    p.add_argument("--max-labels", type=int, default=None,
                   help="stop after this many labels are created")
    p.add_argument("--max-seconds", type=float, default=None,
                   help="stop after this much solve wall time")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridpath",
                     description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="expand a manifest into a suite")
    p.add_argument("manifest", help="manifest JSON path")
    p.add_argument("out_dir", nargs="?", default=None,
                   help="suite directory (default $HYBRIDPATH_OUT_DIR or .)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the default seed for entries without one")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance")
    p.add_argument("--out", default=None, help="solution file path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="benchmark a suite, write CSV")
    p.add_argument("suite", help="suite directory")
    p.add_argument("--out", default=None, help="CSV path (default <suite>/bench.csv)")
    p.add_argument("--aggregate", default=None,
                   help="also write per-cell median/quartile CSV here")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel instances (each solve single-threaded)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="oracle cross-check a small suite")
    p.add_argument("suite", help="suite directory")
    p.add_argument("--export-milp", action="store_true",
                   help="also write LP files and check substitution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-milp", help="write the LP formulation")
    p.add_argument("instance")
    p.add_argument("--out", default=None, help="LP path")
    p.add_argument("--big-m", choices=("auto", "global"), default="auto")
    p.add_argument("--literal-milp", action="store_true",
                   help="reproduce the uncorrected textbook rows")
    p.set_defaults(func=cmd_export_milp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.func(args)
    except (FormatError, InvalidInstanceError, FileNotFoundError,
            ValueError, RuntimeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
