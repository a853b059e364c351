"""Command-line front end.

    avezlab walk --spec specs/c2c3_smooth_a.spec --out out/

Exit codes: 0 ok, 1 violated exact identity, 2 resource cap reached,
3 I/O failure, 4 malformed spec or usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .analysis import (
    Policy,
    classify,
    pick_engine,
    radical_probe,
    ratio_table,
    spectral_estimate,
)
from .chain import rell_verify
from .errors import AvezError, CapExceeded
from .measures import DEFAULT_SUPPORT_CAP, _rat, validate
from .groups import DEFAULT_BALL_CAP, descriptor_to_json
from .speclang import Analysis, SpecError, parse_spec, resolve
from .verify import CHECKS, Context, results_json, run_suite

COMMANDS = ("describe", "walk", "classify", "verify", "probe", "chain")

EXIT_OK, EXIT_VIOLATION, EXIT_CAP, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3, 4

DEFAULTS = {
    "walk": {"n": 10},
    "classify": {"n": 50},
    "verify": {"n": 8, "samples": 20, "radius": 3, "seed": 0},
    "probe": {"n": 40, "radius": 1},
    "chain": {"n": 10, "steps": 10},
}


class UsageError(Exception):
    pass


class Run:
    """Collects the output files of one run and writes them atomically."""

    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, str] = {}
        self.phases: dict[str, float] = {}
        self._t = time.perf_counter()

    def tick(self, phase: str):
        now = time.perf_counter()
        self.phases[phase] = round(now - self._t, 6)
        self._t = now

    def add(self, name: str, text: str):
        self.files[name] = text

    def add_json(self, name: str, doc):
        self.add(name, json.dumps(doc, indent=2) + "\n")

    def flush(self):
        self.out.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            _write_atomic(self.out / name, text)


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _policy(a: Analysis) -> Policy:
    base = Policy()
    return Policy(a.get("window", base.window), a.get("cauchy", base.cauchy_tol),
                  a.get("member", base.member_delta), a.get("nonmember", base.nonmember_delta))


def _param(a: Analysis, name: str):
    return a.get(name, DEFAULTS.get(a.kind, {}).get(name))


def _targets(exp, a: Analysis) -> list:
    value = a.get("targets")
    if value is not None:
        return exp.elements(value)
    G = exp.group
    return [G.identity] + list(G.generators)


def _spectral_points(N: int) -> list[int]:
    """Powers of two up to N together with N, N/2, N/4, ... so doubling pairs exist at both ends."""
    pts = set()
    p = 1
    while p <= N:
        pts.add(p)
        p *= 2
    m = N
    while m >= 1:
        pts.add(m)
        m //= 2
    return sorted(pts)


# ---------------------------------------------------------------------------
# commands


def cmd_describe(exp, a, run: Run, opts) -> int:
    G = exp.group
    doc = {
        "group": G.descriptor.render(),
        "descriptor": descriptor_to_json(G.descriptor),
        "order": G.order,
        "generators": [G.format(s) for s in G.generators],
    }
    if exp.measure is not None:
        mu = exp.measure
        doc["measure"] = {
            "exact": mu.exact,
            "support_size": len(mu),
            "engine": pick_engine(mu),
            "validation": validate(mu).to_json(),
            "digest": mu.digest,
        }
        if len(mu) <= 200:
            doc["measure"]["entries"] = mu.to_json()["entries"]
    run.add_json("describe.json", doc)
    print(f"{doc['group']}: {len(G.generators)} generators, order {G.order or 'infinite'}")
    if exp.measure is not None:
        v = doc["measure"]["validation"]
        print(f"measure: {len(exp.measure)} atoms, symmetric={v['symmetric']}, aperiodic={v['aperiodic']}")
    return EXIT_OK


def _write_series(table: dict, run: Run) -> list[dict]:
    index = []
    for i, s in enumerate(table.values()):
        name = f"ratio_{i}.csv"
        run.add(name, s.to_csv())
        index.append({"target": s.label, "file": name, "engine": s.engine, "exact": s.exact,
                      "entries": len(s.entries), "complete": s.complete, "stop_reason": s.stop_reason})
    return index


def cmd_walk(exp, a, run: Run, opts) -> int:
    N = _param(a, "n")
    targets = _targets(exp, a)
    table = ratio_table(exp.measure, targets, N, cap=opts.cap)
    index = _write_series(table, run)
    run.add_json("series.json", index)
    complete = all(s["complete"] for s in index)
    if a.get("spectral"):
        est = spectral_estimate(exp.measure, N, _spectral_points(N), cap=opts.cap)
        run.add("spectral.csv", est.to_csv())
        run.add_json("spectral.json", {
            "engine": est.engine, "complete": est.complete, "stop_reason": est.stop_reason,
            "doubling_pairs": [[n, ok] for n, ok in est.doubling_pairs],
            "doubling_monotone": est.doubling_monotone,
        })
        complete = complete and est.complete
    for s in index:
        print(f"{s['target']}: {s['entries']} entries ({s['engine']}){'' if s['complete'] else ' [cap]'}")
    return EXIT_OK if complete else EXIT_CAP


def cmd_classify(exp, a, run: Run, opts) -> int:
    N = _param(a, "n")
    policy = _policy(a)
    table = ratio_table(exp.measure, _targets(exp, a), N, cap=opts.cap)
    index = _write_series(table, run)
    run.add_json("series.json", index)
    verdicts = [classify(s, policy).to_json() for s in table.values()]
    run.add_json("verdicts.json", {"policy": policy.to_json(), "verdicts": verdicts})
    for v in verdicts:
        print(f"{v['target']}: {v['verdict']}")
    return EXIT_OK if all(s["complete"] for s in index) else EXIT_CAP


def cmd_verify(exp, a, run: Run, opts) -> int:
    if not exp.measure.exact:
        raise UsageError("verify needs exact arithmetic; drop --float")
    seed = opts.seed if opts.seed is not None else _param(a, "seed")
    F = a.get("F")
    inject = a.get("inject")
    if inject is not None and inject.text not in CHECKS:
        raise UsageError(f"inject names an unknown check {inject.text!r}; choose from {', '.join(CHECKS)}")
    ctx = Context(exp, _param(a, "n"), _param(a, "samples"), seed, _param(a, "radius"), opts.cap,
                  inject.text if inject is not None else None,
                  F=exp.subgroup(F) if F is not None else None, k=a.get("k"), m=a.get("m"))
    results = run_suite(ctx)
    doc = results_json(results)
    doc.update({"seed": seed, "n": ctx.n, "samples": ctx.samples, "inject": ctx.inject})
    run.add_json("verify.json", doc)
    for r in results:
        print(f"{r.status.upper():4} {r.name} ({r.cases} cases){': ' + r.detail if r.detail else ''}")
    return EXIT_OK if doc["passed"] else EXIT_VIOLATION


def cmd_probe(exp, a, run: Run, opts) -> int:
    policy = _policy(a)
    cands = a.get("candidates")
    candidates = exp.elements(cands) if cands is not None else list(exp.group.generators)
    rep = radical_probe(exp.measure, _param(a, "radius"), candidates, _param(a, "n"), policy, cap=opts.cap)
    run.add_json("probe.json", rep.to_json())
    for s in rep.summary():
        print(f"{s['candidate']}: member={s['member']} nonmember={s['nonmember']} undecided={s['undecided']}")
    return EXIT_OK


def cmd_chain(exp, a, run: Run, opts) -> int:
    if not exp.measure.exact:
        raise UsageError("chain needs exact arithmetic; drop --float")
    F_lit = a.get("F")
    if F_lit is None:
        raise UsageError("chain needs F={...}")
    F = exp.subgroup(F_lit)
    start = a.get("start")
    start = exp.group.parse(start.text) if start is not None else None
    rep = rell_verify(exp.measure, F, _param(a, "n"), _param(a, "steps"), start, opts.cap)
    table = rep.series
    index = _write_series(table, run)
    run.add_json("series.json", index)
    run.add_json("chain.json", rep.to_json({s["target"]: s["file"] for s in index}))
    print(f"balanced={rep.balance.balanced} stationary={rep.stationary} stochastic={rep.stochastic}")
    for s in table.values():
        print(f"{s.label}: r_{s.entries[-1].n} = {_rat(s.entries[-1].value)}")
    return EXIT_OK if rep.ok else EXIT_VIOLATION


HANDLERS = {"describe": cmd_describe, "walk": cmd_walk, "classify": cmd_classify,
            "verify": cmd_verify, "probe": cmd_probe, "chain": cmd_chain}


# ---------------------------------------------------------------------------
# orchestration


def _manifest(command, spec, opts, status, code, run: Run, policy=None, exp=None) -> dict:
    mu = exp.measure if exp is not None else None
    return {
        "tool": "avezlab",
        "version": __version__,
        "command": command,
        "spec": spec.render() if spec is not None else None,
        "exact": not opts.float,
        "caps": {"support_entries": opts.cap, "ball_elements": DEFAULT_BALL_CAP},
        "seed": opts.seed,
        "policy": policy,
        "engine": pick_engine(mu) if mu is not None else None,
        "measure_validation": validate(mu).to_json() if mu is not None else None,
        "status": status,
        "exit_code": code,
        "outputs": {name: hashlib.sha256(text.encode()).hexdigest()
                    for name, text in sorted(run.files.items())},
        "timings": "timings.json",
    }


def execute(command: str, spec_path: str, out_dir: str, cap: int = DEFAULT_SUPPORT_CAP,
            floating: bool = False, seed: int | None = None) -> int:
    """Run one command end to end; returns the exit code."""
    opts = argparse.Namespace(cap=cap, float=floating, seed=seed)
    out = Path(out_dir)
    run = Run(out)
    try:
        text = Path(spec_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_IO
    spec = None
    exp = None
    policy = None
    status, code = "ok", EXIT_OK
    try:
        spec = parse_spec(text, Path(spec_path).parent)
        a = spec.analysis
        if command == "describe":
            a = Analysis("describe")
        elif a is not None and a.kind != command:
            raise UsageError(f"spec requests '{a.kind}' but the command is '{command}'")
        if a is None:
            a = Analysis(command)
        if command != "describe" and spec.measure is None:
            raise UsageError(f"{command} needs a measure statement")
        if command in ("classify", "probe"):
            policy = _policy(a).to_json()
        run.tick("parse")
        exp = resolve(spec, cap, floating)
        run.tick("resolve")
        if exp.measure is not None:
            for note in validate(exp.measure).notes:
                print(f"warning: {note}", file=sys.stderr)
        code = HANDLERS[command](exp, a, run, opts)
        run.tick(command)
        status = {EXIT_OK: "ok", EXIT_VIOLATION: "violation", EXIT_CAP: "cap"}[code]
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        run.add_json("error.json", exc.to_json())
        status, code = "spec_error", EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        run.add_json("error.json", {"message": str(exc)})
        status, code = "usage_error", EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap reached: {exc}", file=sys.stderr)
        status, code = "cap", EXIT_CAP
    except AvezError as exc:
        print(f"error: {exc}", file=sys.stderr)
        run.add_json("error.json", {"message": str(exc), "type": type(exc).__name__})
        status, code = "error", EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        # e.g. a zero return probability under a zero-laziness measure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        run.add_json("error.json", {"message": str(exc), "type": type(exc).__name__})
        status, code = "error", EXIT_USAGE
    run.add_json("manifest.json", _manifest(command, spec, opts, status, code, run, policy, exp))
    timings = {"phases_seconds": run.phases}
    try:
        run.flush()
        _write_atomic(out / "timings.json", json.dumps(timings, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="avezlab", description="Exact Avez ratio experiments.")
    p.add_argument("--version", action="version", version=f"avezlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--spec", required=True, metavar="FILE")
        c.add_argument("--out", default="out", metavar="DIR")
        c.add_argument("--cap", type=int, default=DEFAULT_SUPPORT_CAP, metavar="ENTRIES")
        c.add_argument("--float", action="store_true", help="use floating weights; outputs are marked non-exact")
        c.add_argument("--seed", type=int, default=None, help="seed for sampled verify checks")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.cap < 1:
        print("error: --cap must be positive", file=sys.stderr)
        return EXIT_USAGE
    return execute(args.command, args.spec, args.out, args.cap, args.float, args.seed)


if __name__ == "__main__":
    sys.exit(main())
