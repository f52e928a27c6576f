"""Command-line front end: tables, verification reports, inventories and the W(S_2) pipeline."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .families import FamilyConstraintError, FamilySpec, SpecSyntaxError, parse_spec
from .matrep import DEFAULT_CAP, ClosureOverflowError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SPEC = 2
EXIT_OUTPUT = 3
EXIT_CAP = 4

STATUSES = ("pass", "fail", "undetermined")


class OutputError(OSError):
    pass


@dataclass
class RunConfig:
    command: str
    target: str = ""
    stage: str = "crude"
    specs: list = field(default_factory=list)
    full: bool = False
    format: str = "json"
    out: str | None = None
    cache: str | None = None
    cap: int = DEFAULT_CAP
    threads: int = 0
    seed: int = 0

    def echo(self) -> list[str]:
        words = [self.command] + ([self.target] if self.target else [])
        if self.command == "tables" and self.target == "open":
            words += ["--stage", self.stage]
        if self.specs:
            words += ["--spec", *self.specs]
        if self.full:
            words.append("--full")
        return words


@dataclass
class Report:
    command: list
    items: list
    extra: dict = field(default_factory=dict)
    columns: tuple = ()

    @property
    def failed(self) -> int:
        return sum(1 for it in self.items if it.get("status") == "fail")

    def to_dict(self) -> dict:
        counts = {s: sum(1 for it in self.items if it.get("status") == s) for s in STATUSES}
        return {"version": __version__, "command": self.command, "items": self.items,
                "summary": counts, **self.extra}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _check_cap(order: int, cap: int) -> None:
    if order > cap:
        raise ClosureOverflowError(f"group of order {order} exceeds the element cap {cap}")


def _tables_reflections(cfg: RunConfig) -> Report:
    from .verdict import reflection_table
    items = []
    for row in reflection_table():
        item = row.to_dict()
        item.update(d=row.minimal_d, status="pass", certificates=[f"N={row.n_reflections} by exhaustive scan"])
        items.append(item)
    return Report(cfg.echo(), items, columns=("group", "N", "minimal_d"))


def _tables_open(cfg: RunConfig) -> Report:
    from .verdict import G0_SPECS, open_after_crude, open_after_refined
    if cfg.stage == "crude":
        cases = [c for g0 in G0_SPECS for c in open_after_crude(g0)]
    else:
        cases = open_after_refined()
    items = []
    rank = {g: i for i, g in enumerate(G0_SPECS)}
    for c in sorted((c for c in cases if c.is_open), key=lambda c: (rank[c.g0], c.d)):
        item = c.to_dict()
        item["stage"] = item.pop("status")
        item["status"] = "pass"
        items.append(item)
    return Report(cfg.echo(), items, extra={"open_cases": len(items)}, columns=("G_0", "open_d"))


def _verify_subgroups(cfg: RunConfig) -> Report:
    from .verdict import verify_subgroup_relations
    items = []
    for pair in verify_subgroup_relations():
        item = pair.to_dict()
        item["relation"] = item.pop("status")
        item["status"] = {"contained": "pass", "absent": "pass"}.get(item["relation"], item["relation"])
        items.append(item)
    return Report(cfg.echo(), items)


def _resolve_specs(cfg: RunConfig) -> list[FamilySpec]:
    specs = []
    for text in cfg.specs:
        if text.lower() in ("open",):
            from .verdict import G0_SPECS, open_after_crude
            specs += [FamilySpec(c.g0.kind, c.d) for g0 in G0_SPECS for c in open_after_crude(g0) if c.is_open]
        else:
            specs.append(parse_spec(text).base)
    if not specs:
        raise SpecSyntaxError("no --spec given")
    for s in specs:
        _check_cap(2 * s.order, cfg.cap)
    return sorted(set(specs))


def _verify_lemmas(cfg: RunConfig) -> Report:
    from .reflect import verify_lemmas
    items = []
    for spec in _resolve_specs(cfg):
        for res in verify_lemmas(spec):
            items.append({"g0": spec.label(), "kind": spec.kind, "d": spec.d, "check": res.name,
                          "status": "pass" if res.passed else "fail",
                          "certificates": [res.detail] if res.detail else []})
    return Report(cfg.echo(), items)


def _inventory(cfg: RunConfig) -> Report:
    from .reflect import inventory
    items = []
    for spec in _resolve_specs(cfg):
        inv = inventory(spec)
        summary = inv.summary()
        ok = all(inv.checks.values()) and inv.fusion_consistent
        items.append({"g0": spec.label(), "kind": spec.kind, "d": spec.d,
                      "status": "pass" if ok else "fail",
                      "certificates": [k for k, v in summary["checks"].items() if v],
                      "inventory": summary})
    return Report(cfg.echo(), items)


def _ws2(cfg: RunConfig) -> Report:
    from .ws2 import WS2_ORDER, stabilizer_pipeline
    _check_cap(WS2_ORDER, cfg.cap)
    rep = stabilizer_pipeline(full=cfg.full, cache_dir=cfg.cache)
    items = []
    for key, val in sorted(rep.to_dict().items()):
        if isinstance(val, bool) or val is None:
            status = "undetermined" if val is None else ("pass" if val else "fail")
            items.append({"check": key, "status": status, "certificates": []})
    items.append({"check": "passed", "status": "pass" if rep.passed else "fail", "certificates": []})
    return Report(cfg.echo(), items, extra={"ws2": rep.to_dict()})


def run(cfg: RunConfig) -> Report:
    if cfg.command == "tables":
        if cfg.target == "reflections":
            return _tables_reflections(cfg)
        return _tables_open(cfg)
    if cfg.command == "verify":
        if cfg.target == "subgroups":
            return _verify_subgroups(cfg)
        return _verify_lemmas(cfg)
    if cfg.command == "inventory":
        return _inventory(cfg)
    if cfg.command == "ws2":
        return _ws2(cfg)
    raise ValueError(f"unknown command {cfg.command!r}")


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(report)
    return _render_text(report)


def _render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.columns == ("group", "N", "minimal_d"):
        w.writerow(report.columns)
        for it in report.items:
            w.writerow([it["g0"], it["N"], it["minimal_d"]])
    elif report.columns == ("G_0", "open_d"):
        w.writerow(report.columns)
        rows: dict[str, list] = {}
        for it in report.items:
            rows.setdefault(it["g0"], []).append(it["d"])
        for g0, ds in rows.items():
            w.writerow([g0, " ".join(str(d) for d in ds)])
    else:
        keys = sorted({k for it in report.items for k, v in it.items() if not isinstance(v, (dict, list))})
        w.writerow(keys)
        for it in report.items:
            w.writerow([it.get(k, "") for k in keys])
    return buf.getvalue()


def _render_text(report: Report) -> str:
    lines = [f"srgroups {__version__}: {' '.join(report.command)}"]
    for it in report.items:
        head = it.get("g0") or it.get("check", "")
        parts = [str(head)]
        for key in ("d", "N", "minimal_d", "group", "check", "relation", "stage"):
            if key in it and it[key] != head:
                parts.append(f"{key}={it[key]}")
        parts.append(it["status"])
        lines.append("  ".join(parts))
    s = report.to_dict()["summary"]
    lines.append(f"pass={s['pass']} fail={s['fail']} undetermined={s['undetermined']}")
    return "\n".join(lines) + "\n"


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path) or not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise OutputError(f"cannot write to {path}")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise OutputError(f"cannot write to {path}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--cache", default=None, help="element-set cache directory (SRG_CACHE wins)")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest group that may be enumerated")
    common.add_argument("--threads", type=int, default=0, help="worker threads (0 = available cores)")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="srgroups", description=__doc__)
    p.add_argument("--version", action="version", version=f"srgroups {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    tables = sub.add_parser("tables", help="reflection counts and open cases")
    tsub = tables.add_subparsers(dest="target", required=True)
    tsub.add_parser("reflections", parents=[common])
    op = tsub.add_parser("open", parents=[common])
    op.add_argument("--stage", choices=("crude", "refined"), default="crude")

    verify = sub.add_parser("verify", help="subgroup relations and per-group lemma checks")
    vsub = verify.add_subparsers(dest="target", required=True)
    vsub.add_parser("subgroups", parents=[common])
    lem = vsub.add_parser("lemmas", parents=[common])
    lem.add_argument("--spec", nargs="+", required=True, help="e.g. muT:18, or 'open' for every crude open case")

    inv = sub.add_parser("inventory", parents=[common], help="symplectic reflections of E(G) and their classes")
    inv.add_argument("--spec", nargs="+", required=True)

    ws = sub.add_parser("ws2", parents=[common], help="the W(S_2) stabilizer pipeline")
    ws.add_argument("--full", action="store_true", help="also recompute the stabilizer by filtering")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.cap <= 0:
        raise SpecSyntaxError("--cap must be positive")
    cache = os.environ.get("SRG_CACHE") or ns.cache
    return RunConfig(command=ns.command, target=getattr(ns, "target", "") or "",
                     stage=getattr(ns, "stage", "crude"), specs=list(getattr(ns, "spec", None) or []),
                     full=getattr(ns, "full", False), format=ns.format, out=ns.out, cache=cache,
                     cap=ns.cap, threads=ns.threads or (os.cpu_count() or 1), seed=ns.seed)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if cfg.out:
            _check_writable(cfg.out)
        report = run(cfg)
        text = render(report, cfg.format)
        if cfg.out:
            try:
                with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise OutputError(str(exc)) from exc
        else:
            sys.stdout.write(text)
    except (SpecSyntaxError, FamilyConstraintError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except ClosureOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_FAIL if report.failed else EXIT_OK
