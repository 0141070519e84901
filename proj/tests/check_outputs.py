"""End-to-end checks of the plap executable against the published schemas.

usage: check_outputs.py <plap executable> <source dir>
"""

import copy
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

PLAP = sys.argv[1]
ROOT = pathlib.Path(sys.argv[2])
SCHEMAS = {p.name.split(".")[0]: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.schema.json")}
CONFIGS = sorted((ROOT / "configs").glob("*.json"))

failures = []


def check(cond, what):
    print(("ok    " if cond else "FAIL  ") + what)
    if not cond:
        failures.append(what)


def plap(*args):
    return subprocess.run([PLAP, *args], capture_output=True)


def valid(schema, doc):
    return jsonschema.Draft202012Validator(SCHEMAS[schema]).is_valid(doc)


for cfg in CONFIGS:
    check(valid("config", json.loads(cfg.read_text())), f"config {cfg.name} validates")

for suite in ["superpose", "concave", "comparison", "evolution", "all"]:
    first = plap("verify", "--suite", suite)
    second = plap("verify", "--suite", suite)
    check(first.returncode == 0, f"verify {suite} exits 0")
    check(valid("verify_report", json.loads(first.stdout)), f"verify {suite} report validates")
    check(first.stdout == second.stdout, f"verify {suite} is byte-identical across runs")

check(plap("verify", "--suite", "foo").returncode == 2, "unknown suite exits 2")

for name in ["compare_concave", "compare_shifted", "compare_fundamental"]:
    with tempfile.TemporaryDirectory() as tmp:
        grids = []
        outs = []
        for i in range(2):
            path = pathlib.Path(tmp) / f"grid{i}.csv"
            r = plap("compare", "--config", str(ROOT / "configs" / f"{name}.json"), "--out", str(path))
            outs.append(r.stdout)
            grids.append(path.read_bytes())
        check(r.returncode == 0, f"{name} exits 0")
        check(valid("compare_summary", json.loads(outs[0])), f"{name} summary validates")
        check(outs[0] == outs[1] and grids[0] == grids[1], f"{name} is byte-identical across runs")
        check(grids[0].startswith(b"x1,x2,kind,W,h,gap\n"), f"{name} grid has a header")

for cfg in CONFIGS:
    stem = cfg.stem
    if stem.startswith("eval"):
        cmd = "eval"
    elif stem.startswith("sweep"):
        cmd = "evolution-sweep"
    elif stem.startswith("sign_map"):
        cmd = "sign-map"
    else:
        continue
    a = plap(cmd, "--config", str(cfg))
    b = plap(cmd, "--config", str(cfg))
    check(a.returncode == 0 and a.stdout == b.stdout, f"{cmd} {cfg.name} exits 0 and is byte-identical")
    header = a.stdout.split(b"\n", 1)[0].split(b",")
    check(all(h and not h[:1].isdigit() and h[:1] != b"-" for h in header), f"{cmd} {cfg.name} has a header row")

# The C++ validator and the reference implementation agree on mutated configurations.
base = json.loads((ROOT / "configs" / "eval_concave.json").read_text())
mutations = [
    ("unknown top-level key", lambda d: d.update(extra=1)),
    ("unknown nested key", lambda d: d["params"].update(q=1)),
    ("wrong schema version", lambda d: d.update(schema_version=2)),
    ("string for number", lambda d: d["params"].update(p="3")),
    ("non-integer dimension", lambda d: d["params"].update(n=2.5)),
    ("integral float dimension", lambda d: d["params"].update(n=2.0)),
    ("negative weight", lambda d: d["poles"][0].update(weight=-1)),
    ("missing location", lambda d: d["poles"][0].pop("location")),
    ("bad concave type", lambda d: d["concave"].update(type="convex")),
    ("empty points", lambda d: d.update(points=[])),
    ("zero fd step", lambda d: d.update(fd_step=0)),
    ("grid with too few nodes", lambda d: d.update(grid={"lower": [-1, -1], "upper": [1, 1], "nodes": [5, 5]})),
    ("valid seed", lambda d: d.update(seed=18446744073709551615)),
    ("negative seed", lambda d: d.update(seed=-1)),
    ("no change", lambda d: None),
]
with tempfile.TemporaryDirectory() as tmp:
    for label, mutate in mutations:
        doc = copy.deepcopy(base)
        mutate(doc)
        path = pathlib.Path(tmp) / "cfg.json"
        path.write_text(json.dumps(doc, indent=2))
        ok_ref = valid("config", doc)
        r = plap("eval", "--config", str(path))
        check((r.returncode == 0) == ok_ref, f"validators agree: {label} (reference {'valid' if ok_ref else 'invalid'})")
        if not ok_ref:
            check(r.returncode == 2 and b"cfg.json:" in r.stderr, f"{label} is diagnosed with a location")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
