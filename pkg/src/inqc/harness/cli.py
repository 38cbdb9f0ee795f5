"""Command-line front end: ``inqc <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from .. import gardenhose as gh
from ..clifford_t import parse_circuit
from ..ipp import IppInstance, generate_ipp_instance, run_ipp_attack
from ..protocols.hierarchy import BUILTIN, build_hierarchy_unitary, run_clifford_hierarchy
from ..protocols.tcount import run_tcount_protocol
from ..protocols.tdepth import run_tdepth_protocol
from ..statevec import StateVector
from .generators import generate_random_circuit
from .report import build_report, emit_report

OUT_ENV = "INQC_OUT_DIR"


# Trial functions are module-level so worker processes can pickle them.

def _state(n: int, seed: int) -> StateVector:
    return StateVector.random(n, np.random.default_rng([seed, n]))


def trial_tcount(args: tuple) -> dict:
    n, k, seed, tol, circuit_text = args
    c = parse_circuit(circuit_text) if circuit_text else generate_random_circuit(n, k=k, seed=seed)
    return run_tcount_protocol(c, _state(c.n, seed), seed, tol).report.to_dict()


def trial_tdepth(args: tuple) -> dict:
    n, d, seed, tol, circuit_text = args
    c = parse_circuit(circuit_text) if circuit_text else generate_random_circuit(n, d=d, seed=seed)
    return run_tdepth_protocol(c, _state(c.n, seed), seed, tol).report.to_dict()


def trial_hierarchy(args: tuple) -> dict:
    name, seed, tol = args
    u = build_hierarchy_unitary(name)
    return run_clifford_hierarchy(u, _state(u.n, seed), seed, tol).report.to_dict()


def trial_ipp(args: tuple) -> dict:
    t, seed, instance_text = args
    inst = IppInstance.from_json(instance_text) if instance_text else generate_ipp_instance(t, seed)
    x_bit = int(np.random.default_rng([seed, 7]).integers(2))
    return run_ipp_attack(inst, x_bit, seed).report.to_dict()


def _run_batch(fn: Callable, jobs: list, workers: int) -> list[dict]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, jobs))
    else:
        results = [fn(j) for j in jobs]
    return sorted(results, key=lambda r: r["seed"])


def _finish(results: list[dict], args, stem: str) -> int:
    report = build_report(results)
    out = args.out or os.environ.get(OUT_ENV)
    if out:
        jpath, cpath = emit_report(results, out, stem)
        print(f"wrote {jpath} and {cpath}", file=sys.stderr)
    print(json.dumps(report["summary"], sort_keys=True))
    return 0 if report["summary"]["failed"] == 0 else 1


def _seeds(args) -> range:
    if args.trials < 1:
        raise SystemExit("--trials must be at least 1")
    if args.tol <= 0:
        raise SystemExit("--tol must be positive")
    return range(args.seed, args.seed + args.trials)


def cmd_tcount(args) -> int:
    text = Path(args.circuit).read_text() if args.circuit else None
    jobs = [(args.n, args.k, s, args.tol, text) for s in _seeds(args)]
    return _finish(_run_batch(trial_tcount, jobs, args.workers), args, "tcount")


def cmd_tdepth(args) -> int:
    text = Path(args.circuit).read_text() if args.circuit else None
    jobs = [(args.n, args.d, s, args.tol, text) for s in _seeds(args)]
    return _finish(_run_batch(trial_tdepth, jobs, args.workers), args, "tdepth")


def cmd_hierarchy(args) -> int:
    jobs = [(args.unitary, s, args.tol) for s in _seeds(args)]
    return _finish(_run_batch(trial_hierarchy, jobs, args.workers), args, "hierarchy")


def cmd_ipp(args) -> int:
    if args.write_instance:
        Path(args.write_instance).write_text(generate_ipp_instance(args.t, args.seed).to_json())
        print(f"wrote {args.write_instance}", file=sys.stderr)
        return 0
    text = Path(args.instance).read_text() if args.instance else None
    jobs = [(args.t, s, text) for s in _seeds(args)]
    return _finish(_run_batch(trial_ipp, jobs, args.workers), args, "ipp")


def cmd_verify_all(args) -> int:
    trials = args.trials
    results = []
    for n, k in ((2, 0), (2, 2), (4, 3)):
        results += [trial_tcount((n, k, s, args.tol, None)) for s in range(args.seed, args.seed + trials)]
    for n, d in ((2, 1), (3, 2)):
        results += [trial_tdepth((n, d, s, args.tol, None)) for s in range(args.seed, args.seed + trials)]
    for name in ("T", "PT"):
        results += [trial_hierarchy((name, s, 1e-10)) for s in range(args.seed, args.seed + trials)]
    results += [trial_ipp((2, s, None)) for s in range(args.seed, args.seed + trials)]
    return _finish(results, args, "verify-all")


# -- garden-hose subcommands ------------------------------------------------

def _load_protocol(path: str) -> gh.GardenHoseProtocol:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return gh.loads(text)
    return gh.TruthTableProtocol(gh.TruthTable.parse(text))


def _emit_protocol(p: gh.GardenHoseProtocol, out: str | None) -> int:
    text = gh.dumps(p)
    if out:
        Path(out).write_text(text + "\n")
        print(f"wrote {out} ({p.size} pipes)", file=sys.stderr)
    else:
        print(text)
    return 0


def cmd_gh(args) -> int:
    if args.gh_cmd == "eval":
        p = _load_protocol(args.protocol)
        e = gh.gh_evaluate(p, args.x, args.y)
        print(json.dumps({"side": e.side, "pipe": e.pipe, "label": e.label, "output": e.bit}))
        return 0
    if args.gh_cmd == "build":
        return _emit_protocol(gh.gh_from_truth_table(gh.TruthTable.parse(Path(args.table).read_text())),
                              args.out)
    if args.gh_cmd == "xor":
        return _emit_protocol(gh.gh_xor([_load_protocol(p) for p in args.inputs], args.c), args.out)
    if args.gh_cmd == "single-output":
        return _emit_protocol(gh.gh_single_output(_load_protocol(args.input), args.both_alice), args.out)
    if args.gh_cmd == "multi":
        return _emit_protocol(gh.gh_multi_output([_load_protocol(p) for p in args.inputs]), args.out)
    raise SystemExit(f"unknown gh command {args.gh_cmd}")


def _common(p: argparse.ArgumentParser, tol: float = 1e-9) -> None:
    p.add_argument("--seed", type=int, default=0, help="first seed of the batch")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--tol", type=float, default=tol, help="fidelity tolerance")
    p.add_argument("--out", help=f"report directory (default: ${OUT_ENV}, else no files)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inqc", description="Instantaneous non-local computation harness")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run-tcount", help="T-count protocol on random or given circuits")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--circuit", help="circuit file instead of a random circuit")
    _common(p)
    p.set_defaults(func=cmd_tcount)

    p = sub.add_parser("run-tdepth", help="T-depth protocol on random or given circuits")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--circuit", help="circuit file instead of a random circuit")
    _common(p)
    p.set_defaults(func=cmd_tdepth)

    p = sub.add_parser("run-hierarchy", help="Clifford-hierarchy protocol")
    p.add_argument("--unitary", default="T", choices=sorted(BUILTIN))
    _common(p, 1e-10)
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("attack-ipp", help="attack on the interleaved product game")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--instance", help="instance JSON (default: generated per seed)")
    p.add_argument("--write-instance", metavar="PATH", help="write the instance for --t/--seed and exit")
    _common(p)
    p.set_defaults(func=cmd_ipp)

    p = sub.add_parser("verify-all", help="small batch of every protocol")
    _common(p)
    p.set_defaults(func=cmd_verify_all)

    p = sub.add_parser("gh", help="garden-hose protocol tools")
    gsub = p.add_subparsers(dest="gh_cmd", required=True)
    q = gsub.add_parser("eval", help="evaluate a protocol (JSON or truth table) on inputs")
    q.add_argument("protocol")
    q.add_argument("--x", type=int, required=True)
    q.add_argument("--y", type=int, required=True)
    q = gsub.add_parser("build", help="truth table -> protocol JSON")
    q.add_argument("table")
    q.add_argument("--out")
    q = gsub.add_parser("xor", help="XOR of protocols")
    q.add_argument("inputs", nargs="+")
    q.add_argument("--c", type=int, default=0)
    q.add_argument("--out")
    q = gsub.add_parser("single-output", help="single spilling pipe per side")
    q.add_argument("input")
    q.add_argument("--both-alice", action="store_true")
    q.add_argument("--out")
    q = gsub.add_parser("multi", help="multi-output protocol with labeled exits")
    q.add_argument("inputs", nargs="+")
    q.add_argument("--out")
    p.set_defaults(func=cmd_gh)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
