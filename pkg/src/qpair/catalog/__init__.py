"""The shipped scenario catalog and its frozen golden outputs.

Goldens are produced with the structural Leibniz-recursion bracket
(``method="leibniz"``) and verified with the closed-form bracket, so a
verification pass is also a cross-check of the two implementations.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..cli import RunOptions, first_diff, run_file

HERE = Path(__file__).resolve().parent
SCENARIOS = HERE / "scenarios"
GOLDENS = HERE / "goldens" / "v1"

SCHEMA = "qpair.catalog-report"
SCHEMA_VERSION = 1


def names() -> list[str]:
    return sorted(p.stem for p in SCENARIOS.glob("*.qp"))


def scenario_path(name: str) -> Path:
    return SCENARIOS / f"{name}.qp"


def golden_path(name: str, goldens: str | Path | None = None) -> Path:
    return Path(goldens or GOLDENS) / f"{name}.out"


def render(name: str, method: str = "closed") -> str:
    """Text report of one scenario, the format stored in the goldens."""
    return run_file(scenario_path(name), RunOptions(method=method)).to_text()


@dataclass
class ScenarioCheck:
    name: str
    passed: bool
    diff: str | None = None


@dataclass
class CatalogReport:
    checks: list[ScenarioCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": SCHEMA_VERSION, "ok": self.ok,
                "checks": [asdict(c) for c in self.checks]}

    @classmethod
    def from_dict(cls, d: dict) -> "CatalogReport":
        if d.get("schema") != SCHEMA or d.get("version") != SCHEMA_VERSION:
            raise ValueError(f"not a {SCHEMA} v{SCHEMA_VERSION} payload")
        return cls([ScenarioCheck(**c) for c in d["checks"]])

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}")
            if c.diff:
                lines.append(f"  first diff: {c.diff}")
        n_ok = sum(c.passed for c in self.checks)
        lines.append(f"{n_ok}/{len(self.checks)} scenarios match their goldens")
        return "".join(line + "\n" for line in lines)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def check(name: str, goldens: str | Path | None = None) -> ScenarioCheck:
    path = golden_path(name, goldens)
    if not path.exists():
        return ScenarioCheck(name, False, f"missing golden {path.name}")
    diff = first_diff(path.read_text(encoding="utf-8"), render(name))
    return ScenarioCheck(name, diff is None, diff)


def verify(goldens: str | Path | None = None, only=None, jobs: int = 1) -> CatalogReport:
    todo = [n for n in names() if only is None or n in only]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            checks = list(pool.map(check, todo, [goldens] * len(todo)))
    else:
        checks = [check(n, goldens) for n in todo]
    return CatalogReport(checks)


def freeze(goldens: str | Path | None = None) -> dict[str, Path]:
    """Regenerate every golden with the Leibniz-recursion oracle bracket."""
    out_dir = Path(goldens or GOLDENS)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for name in names():
        path = golden_path(name, out_dir)
        path.write_text(render(name, method="leibniz"), encoding="utf-8")
        written[name] = path
    return written
