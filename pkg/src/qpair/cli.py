"""Command-line front end: run scenario files and verify the shipped catalog.

``qpair run FILE`` executes the commands of a scenario and prints a text
report (or JSON with ``--json``).  ``qpair catalog list|verify|freeze``
manages the built-in scenarios and their golden outputs.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .currents import commutator_table, current_commutator, render_classical
from .dsl import load
from .errors import QPError, TwistDivergence
from .graded_poly import reduce
from .qp import DEFAULT_MAX_ORDER, check_canonical, check_master, twist, twist_preserves_qp

SCHEMA = "qpair.run-report"
SCHEMA_VERSION = 1


@dataclass
class Entry:
    """One polynomial-valued output line of a command."""

    label: str
    value: str
    zero: bool


@dataclass
class CommandResult:
    index: int
    kind: str
    text: str
    line: int
    entries: list[Entry] = field(default_factory=list)
    expect: str | None = None
    passed: bool = True
    error: str | None = None
    seconds: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "CommandResult":
        d = dict(d)
        d["entries"] = [Entry(**e) for e in d.get("entries", [])]
        return cls(**d)


@dataclass
class RunReport:
    source: str
    results: list[CommandResult] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    seconds: float | None = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics and all(r.passed and r.error is None for r in self.results)

    def to_dict(self) -> dict:
        d = {"schema": SCHEMA, "version": SCHEMA_VERSION, "ok": self.ok}
        d.update(asdict(self))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        if d.get("schema") != SCHEMA or d.get("version") != SCHEMA_VERSION:
            raise ValueError(f"not a {SCHEMA} v{SCHEMA_VERSION} payload")
        return cls(
            source=d["source"],
            results=[CommandResult.from_dict(r) for r in d["results"]],
            diagnostics=list(d["diagnostics"]),
            seconds=d.get("seconds"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"error: {d}" for d in self.diagnostics]
        for r in self.results:
            head = f"[{r.index}] {r.text}"
            if r.seconds is not None:
                head += f"  ({r.seconds:.3f}s)"
            lines.append(head)
            for e in r.entries:
                lines.append(f"  {e.label}: {e.value}" if e.label else f"  {e.value}")
            if r.error is not None:
                lines.append(f"  error: {r.error}")
            if r.expect is not None:
                lines.append(f"  expect {r.expect}: {'ok' if r.passed else 'FAILED'}")
        if self.seconds is not None:
            lines.append(f"total: {self.seconds:.3f}s")
        return "".join(line + "\n" for line in lines)


@dataclass
class RunOptions:
    max_order: int = DEFAULT_MAX_ORDER
    reduce: bool = True
    jobs: int = 1
    timing: bool = False
    method: str = "closed"


def _entry(label: str, p) -> Entry:
    return Entry(label, p.render(), not p)


def _commutator_entries(label: str, c) -> list[Entry]:
    # unrestricted parts are listed only when restriction changed something
    prefix = label + " " if label else ""
    out = [_entry(prefix + "algebraic", c.algebraic), _entry(prefix + "anomaly", c.anomaly)]
    if c.algebraic_full != c.algebraic:
        out.append(_entry(prefix + "algebraic (unrestricted)", c.algebraic_full))
    if c.anomaly_full != c.anomaly:
        out.append(_entry(prefix + "anomaly (unrestricted)", c.anomaly_full))
    return out


def _execute(plan, cmd, opts: RunOptions) -> tuple[list[Entry], list]:
    """Entries plus the commutators computed (for the anomaly-free check)."""
    M = plan.manifold
    P = plan.pair
    rel = plan.relations if opts.reduce else None
    raw = not opts.reduce
    k = cmd.kind
    if k == "master":
        return [_entry("{theta, theta}", check_master(M, raw=raw))], []
    if k == "canonical":
        return [_entry("obstruction", check_canonical(P, opts.max_order, raw=raw))], []
    if k == "preserve":
        return [_entry("{theta', theta'}", twist_preserves_qp(M, plan.alpha, opts.max_order, raw=raw))], []
    if k == "show":
        return [_entry("", reduce(cmd.args[0], rel))], []
    if k == "bracket":
        return [_entry("", reduce(plan.structure.bracket(*cmd.args), rel))], []
    if k == "derived":
        f, g = cmd.args
        return [_entry("", reduce(M.bracket(M.bracket(f, M.theta), g), rel))], []
    if k == "twist":
        return [_entry("", reduce(twist(plan.structure, cmd.args[0], cmd.args[1], opts.max_order), rel))], []
    if k == "render":
        return [Entry("", render_classical(cmd.args[0], P), not cmd.args[0])], []
    if k == "commutator":
        c = current_commutator(P, cmd.args[0], cmd.args[1], reduced=opts.reduce)
        return _commutator_entries("", c), [c]
    if k == "table":
        currents = [plan.currents[name] for name in cmd.names]
        rows = commutator_table(P, currents, reduced=opts.reduce, jobs=opts.jobs)
        entries, comms = [], []
        for a, row in zip(cmd.names, rows):
            for b, c in zip(cmd.names, row):
                entries.extend(_commutator_entries(f"{{{a}, {b}}}", c))
                comms.append(c)
        return entries, comms
    raise ValueError(f"unknown command {k}")


def _expectation(expect: str, entries: list[Entry], comms: list) -> bool:
    if expect == "anomaly-free":
        return all(c.anomaly_free for c in comms)
    # zero / nonzero look at the primary value(s): restricted parts for commutators
    vals = [e for e in entries if "(unrestricted)" not in e.label]
    allzero = all(e.zero for e in vals)
    return allzero if expect == "zero" else not allzero


def run_text(text: str, source: str = "<string>", opts: RunOptions | None = None) -> RunReport:
    opts = opts or RunOptions()
    t0 = time.perf_counter()
    report = RunReport(source)
    res = load(text, opts.max_order, validate=True, method=opts.method)
    if not res.ok:
        report.diagnostics = [str(d) for d in res.diagnostics]
        return report
    for i, cmd in enumerate(res.plan.commands, 1):
        t1 = time.perf_counter()
        r = CommandResult(i, cmd.kind, cmd.text, cmd.span.line, expect=cmd.expect)
        try:
            entries, comms = _execute(res.plan, cmd, opts)
            r.entries = entries
            if cmd.expect is not None:
                r.passed = _expectation(cmd.expect, entries, comms)
        except TwistDivergence as e:
            r.error = str(e)
            r.passed = False
        except QPError as e:
            r.error = str(e)
            r.passed = False
        if opts.timing:
            r.seconds = time.perf_counter() - t1
        report.results.append(r)
    if opts.timing:
        report.seconds = time.perf_counter() - t0
    return report


def run_file(path: str | Path, opts: RunOptions | None = None) -> RunReport:
    path = Path(path)
    return run_text(path.read_text(encoding="utf-8"), path.name, opts)


def first_diff(expected: str, actual: str) -> str | None:
    """A short description of the first differing line, or None if identical."""
    if expected == actual:
        return None
    exp, act = expected.splitlines(), actual.splitlines()
    for i, (a, b) in enumerate(zip(exp, act), 1):
        if a != b:
            col = next((k for k, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
            return f"line {i} col {col + 1}: expected {_window(a, col)!r}, got {_window(b, col)!r}"
    i = min(len(exp), len(act)) + 1
    if len(exp) > len(act):
        return f"line {i}: expected {_window(exp[i - 1], 0)!r}, got end of output"
    if len(act) > len(exp):
        return f"line {i}: unexpected extra line {_window(act[i - 1], 0)!r}"
    return "outputs differ in trailing whitespace"


def _window(line: str, col: int, width: int = 60) -> str:
    lo = max(0, col - 20)
    text = line[lo:lo + width]
    return ("..." if lo else "") + text + ("..." if lo + width < len(line) else "")


# -- argparse front end -----------------------------------------------------------

def _cmd_run(args) -> int:
    opts = RunOptions(args.max_twist_order, not args.no_reduce, args.jobs, args.timing)
    try:
        report = run_file(args.file, opts)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for d in report.diagnostics:
        print(f"{args.file}:{d}", file=sys.stderr)
    out = report.to_json() if args.json else report.to_text()
    sys.stdout.write(out)
    status = 0 if report.ok else 1
    if args.expect:
        golden = Path(args.expect).read_text(encoding="utf-8")
        diff = list(difflib.unified_diff(golden.splitlines(True), out.splitlines(True), args.expect, "output"))
        if diff:
            sys.stderr.writelines(diff)
            status = 1
    return status


def _cmd_catalog(args) -> int:
    from . import catalog

    if args.action == "list":
        for name in catalog.names():
            print(name)
        return 0
    if args.action == "freeze":
        for name, path in catalog.freeze(args.goldens).items():
            print(f"wrote {path}")
        return 0
    report = catalog.verify(args.goldens, jobs=args.jobs)
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(report.to_text())
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpair", description="QP-manifold current algebra calculator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a .qp scenario file")
    run.add_argument("file")
    run.add_argument("--json", action="store_true", help="emit the versioned JSON report")
    run.add_argument("--expect", metavar="FILE", help="compare the output bit-exactly with FILE")
    run.add_argument("--max-twist-order", type=int, default=DEFAULT_MAX_ORDER, metavar="K")
    run.add_argument("--no-reduce", action="store_true", help="do not reduce modulo declared relations")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for table entries")
    run.add_argument("--timing", action="store_true", help="include wall-clock timings")
    run.set_defaults(func=_cmd_run)

    cat = sub.add_parser("catalog", help="list, verify or re-freeze the shipped scenarios")
    cat.add_argument("action", choices=("list", "verify", "freeze"))
    cat.add_argument("--goldens", metavar="DIR", help="golden directory (default: the shipped v1 goldens)")
    cat.add_argument("--json", action="store_true")
    cat.add_argument("--jobs", type=int, default=1)
    cat.set_defaults(func=_cmd_catalog)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
