"""End-to-end acceptance checks, one printed PASS/FAIL line per criterion.

Run under pytest, or directly with `python tests/test_acceptance.py`.
"""
from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from reference_tables import (  # noqa: E402
    CRUDE_OPEN,
    LOWER_BOUNDS,
    NO_DATA,
    REFINED_OPEN,
    REFLECTIONS,
    SHEPHARD_TODD_ROWS,
    diff,
)

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(HERE)


def _fmt_diff(d: dict) -> str:
    return "; ".join(f"{g0.label()} extra={a} missing={b}" for g0, (a, b) in d.items())


def criterion_1():
    from srgroups import families, verdict
    families._build_cached.cache_clear()
    verdict.reflection_number.cache_clear()
    t = time.perf_counter()
    got = {r.g0: (r.n_reflections, r.minimal_d) for r in verdict.reflection_table()}
    dt = time.perf_counter() - t
    bad = {g.label(): (got.get(g), v) for g, v in REFLECTIONS.items() if got.get(g) != v}
    ok = not bad and len(got) == 17 and dt < 60
    return ok, f"17 rows, {len(REFLECTIONS) - len(bad)} exact, {dt:.1f} s" + (f", mismatches {bad}" if bad else "")


def criterion_2():
    from srgroups.verdict import open_table
    table = open_table("crude")
    count = sum(map(len, table.values()))
    d = diff(table, CRUDE_OPEN)
    ok = count == 73 and not d
    return ok, f"{count} open cases (expected 73)" + (f"; differences: {_fmt_diff(d)}" if d else "")


def criterion_3():
    from srgroups.verdict import open_table
    table = open_table("refined")
    crude = open_table("crude")
    count = sum(map(len, table.values()))
    d = diff(table, REFINED_OPEN)
    passthrough = all(table[g0] == crude[g0] for g0 in NO_DATA)
    ok = count == 39 and not d and passthrough
    return ok, (f"{count} open cases (expected 39), no-data rows unchanged: {passthrough}"
                + (f"; differences: {_fmt_diff(d)}" if d else ""))


def criterion_4():
    from srgroups.verdict import CHAMP_DATA, refined_lower_bound
    got = {r.g0: refined_lower_bound(r) for r in CHAMP_DATA if r.has_data}
    bad = {g0.label(): (got.get(g0), v) for g0, v in LOWER_BOUNDS.items() if got.get(g0) != v}
    ok = len(got) == 12 and not bad
    detail = f"{12 - len(bad)}/12 rows match"
    if bad:
        detail += "; computed vs tabulated: " + ", ".join(f"{k} {a} vs {b}" for k, (a, b) in bad.items())
    return ok, detail


def criterion_5():
    from srgroups.cli import main
    from srgroups.families import format_spec, FamilySpec
    specs = [format_spec(FamilySpec(g0.kind, d)) for g0, ds in CRUDE_OPEN.items() for d in ds]
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "lemmas.json")
        t = time.perf_counter()
        code = main(["verify", "lemmas", "--spec", *specs, "--out", out])
        dt = time.perf_counter() - t
        with open(out, encoding="utf-8") as fh:
            rep = json.load(fh)
    groups = len({(it["kind"], it["d"]) for it in rep["items"]})
    fails = rep["summary"]["fail"]
    ok = code == 0 and groups == 73 and fails == 0 and dt < 900
    return ok, f"{groups} groups, {len(rep['items'])} checks, {fails} failed, exit {code}, {dt:.0f} s"


def criterion_6():
    from srgroups.families import build
    from srgroups.reflect import is_reflection_generated
    parts, ok = [], True
    for st, g0, order in SHEPHARD_TODD_ROWS:
        G = build(g0)
        gen = is_reflection_generated(G)
        ok &= G.order == order and gen
        parts.append(f"G{st}={g0.label()}:{G.order}{'' if gen else ' (not reflection generated)'}")
    return ok, ", ".join(parts)


def criterion_7():
    from srgroups.verdict import SUBGROUP_RELATIONS, verify_subgroup_relations
    pairs = verify_subgroup_relations()
    positives = [p for p in pairs if p.expected]
    pos_ok = all(p.status == "contained" for p in positives)
    pos_ok &= len(positives) == sum(len(v) for v in SUBGROUP_RELATIONS.values())
    neg = [p for p in pairs if not p.expected]
    uncertified = [p for p in neg if p.status == "absent" and not p.certificates]
    failed = [p for p in neg if p.status == "fail"]
    undetermined = sum(p.status == "undetermined" for p in neg)

    def lemma_key(p):
        a, b = p.sub.kind, p.group.kind
        if a in ("MuO", "MuI") and b == "MuT":
            return "centre quotient"
        if a == "MuO" and b == "OT":
            return "SL2 part"
        if a == "OT" and b == "OT":
            return "OT divisibility"
        return None

    lemma_pairs = [p for p in neg if lemma_key(p)]
    lemma_missing = [p for p in lemma_pairs if not any(c.startswith(lemma_key(p)) for c in p.certificates)]
    ok = pos_ok and not uncertified and not failed and not lemma_missing
    return ok, (f"{len(positives)} contained literally, {len(neg) - undetermined} absent with certificates, "
                f"{undetermined} undetermined, {len(lemma_pairs) - len(lemma_missing)}/{len(lemma_pairs)} "
                f"lemma-level certificates")


_WS2_SCRIPT = """
import json, resource, sys, time
from srgroups.ws2 import stabilizer_pipeline
t = time.perf_counter()
rep = stabilizer_pipeline(full=True, cache_dir=sys.argv[1])
dt = time.perf_counter() - t
# VmHWM is per address space; ru_maxrss would carry over the parent's peak across fork/exec
try:
    with open("/proc/self/status") as fh:
        rss = next(int(l.split()[1]) for l in fh if l.startswith("VmHWM:"))
except (OSError, StopIteration):
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
print(json.dumps({"report": rep.to_dict(), "passed": rep.passed, "seconds": dt, "rss_kb": rss}))
"""


def criterion_8():
    with tempfile.TemporaryDirectory() as cache:
        t = time.perf_counter()
        first = subprocess.run([sys.executable, "-c", _WS2_SCRIPT, cache], capture_output=True, text=True)
        cold = time.perf_counter() - t
        if first.returncode:
            return False, f"pipeline crashed: {first.stderr.strip().splitlines()[-1:]}"
        res = json.loads(first.stdout)
        t = time.perf_counter()
        again = subprocess.run([sys.executable, "-m", "srgroups", "ws2", "--cache", cache],
                               capture_output=True, text=True, env={**os.environ, "SRG_CACHE": ""})
        warm = time.perf_counter() - t
    rep = res["report"]
    warm_ok = again.returncode == 0 and json.loads(again.stdout)["ws2"]["identified"]
    gb = res["rss_kb"] / 2 ** 20
    ok = res["passed"] and cold < 600 and gb < 4 and warm < 10 and warm_ok
    return ok, (f"|W|={rep['group_order']}, |H|={rep['stabilizer_order']} (word group equal: "
                f"{rep['stabilizer_matches_word']}), dim V^H={rep['fixed_dim']}, Lagrangian invariant: "
                f"{rep['lagrangian_preserved']}, degrees {rep['molien_num_degrees']}, identified: "
                f"{rep['identified']}; {cold:.1f} s, {gb:.2f} GB, cached rerun {warm:.1f} s")


PROPERTY_SELECTION = [
    "tests/test_matrep.py::test_orbit_stabilizer_product_law",
    "tests/test_matrep.py::test_orbit_stabilizer_property",
    "tests/test_matrep.py::test_projector_and_complement",
    "tests/test_cyclo.py::test_embed_round_trip",
    "tests/test_cyclo.py::test_conj_round_trip",
    "tests/test_cyclo.py::test_serialize_round_trip",
    "tests/test_cyclo.py::test_galois_moves_roots",
    "tests/test_rigidity.py::test_label_and_restriction_rules_agree",
    "tests/test_rigidity.py::test_exceptions_written_out",
    "tests/test_verdict.py::test_refined_monotone",
    "tests/test_verdict.py::test_refined_exclusion_monotone",
]


def criterion_9():
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SELECTION]
    r = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)
    last = (r.stdout.strip().splitlines() or ["no output"])[-1]
    return r.returncode == 0, f"standalone property run: {last}"


CRITERIA = [
    (1, "reflection numbers and minimal d", criterion_1),
    (2, "open cases after the crude bound", criterion_2),
    (3, "open cases after the refined bound", criterion_3),
    (4, "refined lower bounds", criterion_4),
    (5, "lemma suite over the crude open cases", criterion_5),
    (6, "Shephard-Todd identification", criterion_6),
    (7, "subgroup relations among the G_0", criterion_7),
    (8, "W(S_2) stabilizer pipeline", criterion_8),
    (9, "property suites", criterion_9),
]


def _line(num: int, title: str, ok: bool, detail: str) -> str:
    return f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        failures += not ok
        print(_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
