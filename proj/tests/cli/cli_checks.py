#!/usr/bin/env python3
"""CLI checks: exit codes, schema validity, determinism and golden results.

usage: cli_checks.py WML_BINARY GROUP [--update-golden]
"""

import json
import math
import os
import subprocess
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent.parent
GOLDEN = HERE.parent / "golden"
SCHEMA = ROOT / "docs" / "report-schema.json"

WML = None
failures = []


def run(args, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    p = subprocess.run([WML] + args, capture_output=True, text=True, env=full_env, timeout=600)
    return p.returncode, p.stdout, p.stderr


def expect(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def report(args, env=None):
    code, out, err = run(args, env)
    if code != 0:
        raise RuntimeError(f"{args} exited {code}: {err}")
    return json.loads(out)


def group_exit_codes():
    cases = [
        (["spectrum", "--preset", "euclidean-3", "--ball", "-1"], 2),
        (["classify", "--manifold", "/nonexistent/hyperbolic2.toml"], 2),
        (["classify", "--preset", "no-such-model-3"], 2),
        (["classify", "--spec", "dimension = 3; g = r +"], 2),
        (["reproduce", "bogus"], 2),
        (["simulate", "--preset", "euclidean-3", "--paths", "10"], 2),
        (["simulate", "--preset", "euclidean-3", "--dt", "0.01"], 2),
        (["spectrum", "--preset", "euclidean-3"], 2),
        (["spectrum", "--preset", "euclidean-3", "--ball", "1", "--exterior", "1"], 2),
        (["spectrum", "--preset", "euclidean-3", "--ess", "2,1"], 2),
        ([], 2),
        (["frobnicate"], 2),
        (["--help"], 0),
        (["--version"], 0),
        (["presets"], 0),
        (["heat", "--preset", "exp-growth-2", "--max-doublings", "0"], 3),
        (["spectrum", "--preset", "euclidean-3", "--ball", "1"], 0),
    ]
    for args, want in cases:
        code, _, err = run(args)
        expect(code == want, f"exit {want} for {' '.join(args) or '(no arguments)'} (got {code})")
        if want == 2 and args:
            expect(err.strip() != "", f"message on stderr for {' '.join(args)}")


def group_schema():
    import jsonschema

    schema = json.loads(SCHEMA.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    with tempfile.TemporaryDirectory() as tmp:
        spec = Path(tmp) / "hyperbolic2.toml"
        spec.write_text("dimension = 2\ng = sinh(r)\nlabel = hyperbolic plane\n")
        commands = [
            ["classify", "--manifold", str(spec)],
            ["classify", "--preset", "exp-alpha-2-3"],
            ["spectrum", "--preset", "euclidean-3", "--ball", "1"],
            ["spectrum", "--preset", "euclidean-3", "--interval", "1,3"],
            ["spectrum", "--preset", "hyperbolic-2", "--exterior", "2"],
            ["spectrum", "--preset", "hyperbolic-2", "--ess", "1,2,4,8"],
            ["simulate", "--preset", "exp-growth-2", "--paths", "200", "--seed", "3"],
            ["simulate", "--preset", "euclidean-3", "--paths", "200", "--hitting-radius", "1", "--starts", "1,2",
             "--t-max", "2", "--outer", "10"],
            ["profile", "--preset", "euclidean-3"],
            ["heat", "--preset", "hyperbolic-2", "--t", "0.2", "--max-doublings", "1"],
            ["audit", "--preset", "gaussian-shrinker-3-1"],
            ["reproduce", "feller-alpha-table"],
        ]
        for args in commands:
            rep = report(args)
            errors = sorted(validator.iter_errors(rep), key=lambda e: list(e.path))
            expect(not errors, f"schema-valid: {' '.join(args)}" + (f" ({errors[0].message})" if errors else ""))
            # serialize -> validate -> parse is lossless
            text = json.dumps(rep)
            expect(json.loads(text) == rep, f"round trip: {' '.join(args)}")
        # Reports with tampered fields must be rejected.
        rep = report(["spectrum", "--preset", "euclidean-3", "--ball", "1"])
        bad = dict(rep, schema_version="0.9.0")
        expect(not validator.is_valid(bad), "schema rejects a wrong version")
        bad = dict(rep, extra=1)
        expect(not validator.is_valid(bad), "schema rejects unknown top-level keys")


def group_determinism():
    args = ["simulate", "--preset", "exp-growth-2", "--paths", "2000", "--t-max", "1", "--seed", "7",
            "--results-only", "--compact"]
    outs = []
    for threads in ["1", "1", "2", "4"]:
        code, out, _ = run(args, {"WML_THREADS": threads})
        expect(code == 0, f"simulate with WML_THREADS={threads} exits 0")
        outs.append(out)
    expect(len(set(outs)) == 1, "simulate results payload byte-identical across runs and worker counts")
    code, out, _ = run(args + ["--threads", "3"])
    expect(out == outs[0], "explicit --threads gives the same payload")
    code, other, _ = run(args[:-4] + ["--seed", "8", "--results-only", "--compact"])
    expect(other != outs[0], "a different seed changes the payload")
    full = report(args[:-2] + [], {"WML_THREADS": "2"})
    expect(full["runtime"]["threads"] == 2, "worker count reported under runtime")
    a = run(["classify", "--preset", "exp-alpha-2-3", "--results-only", "--compact"])[1]
    b = run(["classify", "--preset", "exp-alpha-2-3", "--results-only", "--compact"])[1]
    expect(a == b, "classify results payload byte-identical")


GOLDEN_CASES = {
    "classify_exp_alpha_2_3": ["classify", "--preset", "exp-alpha-2-3"],
    "spectrum_ball_euclidean_3": ["spectrum", "--preset", "euclidean-3", "--ball", "1"],
    "spectrum_ess_hyperbolic_2": ["spectrum", "--preset", "hyperbolic-2", "--ess", "1,2,4,8"],
    "simulate_exp_growth_2": ["simulate", "--preset", "exp-growth-2", "--paths", "1000", "--seed", "7"],
    "reproduce_feller_alpha_table": ["reproduce", "feller-alpha-table"],
}


def close(a, b, path="$"):
    """Structural equality; floats to 1e-9 relative so libm differences do not break goldens."""
    if isinstance(a, float) or isinstance(b, float):
        if not (isinstance(a, (int, float)) and isinstance(b, (int, float))):
            return f"{path}: {a!r} != {b!r}"
        if a == b or math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12):
            return None
        return f"{path}: {a!r} != {b!r}"
    if isinstance(a, dict) and isinstance(b, dict):
        if list(a.keys()) != list(b.keys()):
            return f"{path}: keys {list(a.keys())} != {list(b.keys())}"
        for k in a:
            d = close(a[k], b[k], f"{path}.{k}")
            if d:
                return d
        return None
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return f"{path}: length {len(a)} != {len(b)}"
        for i, (x, y) in enumerate(zip(a, b)):
            d = close(x, y, f"{path}[{i}]")
            if d:
                return d
        return None
    return None if a == b else f"{path}: {a!r} != {b!r}"


def group_golden(update):
    GOLDEN.mkdir(exist_ok=True)
    for name, args in GOLDEN_CASES.items():
        results = report(args + ["--results-only"])
        path = GOLDEN / f"{name}.json"
        if update:
            path.write_text(json.dumps(results, indent=1) + "\n")
            print(f"wrote {path}")
            continue
        expect(path.exists(), f"golden file {path.name} present")
        if path.exists():
            diff = close(json.loads(path.read_text()), results)
            expect(diff is None, f"golden {name}" + (f": {diff}" if diff else ""))


def group_examples():
    with tempfile.TemporaryDirectory() as tmp:
        spec = Path(tmp) / "hyperbolic2.toml"
        spec.write_text("dimension = 2\ng = sinh(r)\n")
        r = report(["classify", "--manifold", str(spec)])["results"]["verdicts"]
        expect(r == {"SC": "Yes", "Feller": "Yes"}, f"classify hyperbolic2.toml -> {r}")
    r = report(["classify", "--preset", "exp-alpha-2-3"])["results"]["verdicts"]
    expect(r == {"SC": "Yes", "Feller": "No"}, f"classify exp-alpha-2-3 -> {r}")
    r = report(["spectrum", "--preset", "hyperbolic-2", "--ess", "1,2,4,8"])["results"]
    expect(r["bottom"] is not None and abs(r["bottom"] - 0.25) <= 1e-3, f"ess bottom of hyperbolic-2 = {r['bottom']}")
    r = report(["spectrum", "--preset", "euclidean-3", "--ball", "1"])["results"]
    expect(abs(r["lambda1"] - math.pi ** 2) < 1e-6, f"ball eigenvalue of euclidean-3 = {r['lambda1']}")
    r = report(["simulate", "--preset", "exp-growth-2", "--paths", "10000", "--t-max", "1", "--seed", "7"])["results"]
    expect(r["explosion_fraction"] > 0.1 and r["ci95_halfwidth"] > 0,
           f"explosion fraction {r['explosion_fraction']} +/- {r['ci95_halfwidth']}")
    r = report(["reproduce", "soliton-audit"])["results"]
    expect(r["all_pass"], "reproduce soliton-audit passes")


def group_csv():
    with tempfile.TemporaryDirectory() as tmp:
        csv = Path(tmp) / "ess.csv"
        code, _, _ = run(["spectrum", "--preset", "hyperbolic-2", "--ess", "1,2,4", "--csv", str(csv)])
        expect(code == 0, "spectrum sweep with --csv exits 0")
        lines = csv.read_text().splitlines()
        expect(lines[0] == "R,lambda1" and len(lines) == 4, "sweep CSV has a header and one row per radius")
        gp = csv.with_suffix(".gp").read_text()
        expect(str(csv) in gp and "plot" in gp, "gnuplot script references the CSV")
        trace = Path(tmp) / "paths.csv"
        code, _, _ = run(["simulate", "--preset", "euclidean-2", "--paths", "100", "--t-max", "0.05", "--trace",
                          str(trace), "--trace-paths", "3"])
        expect(code == 0 and trace.read_text().startswith("path,t,r\n"), "trace CSV written")
        code, _, _ = run(["spectrum", "--preset", "euclidean-3", "--ball", "1", "--csv", str(csv)])
        expect(code == 2, "--csv without a sweep is a usage error")
        prof = Path(tmp) / "h.csv"
        # stdout closed immediately: the table must still be written
        p = subprocess.Popen([WML, "profile", "--preset", "euclidean-3", "--csv", str(prof)], stdout=subprocess.PIPE)
        p.stdout.close()
        p.wait(timeout=600)
        expect(prof.exists() and prof.read_text().startswith("r,h,dh\n"), "profile CSV written with stdout closed")


def main():
    global WML
    if len(sys.argv) < 3:
        print(__doc__)
        return 2
    WML = sys.argv[1]
    group = sys.argv[2]
    update = "--update-golden" in sys.argv
    groups = {
        "exit_codes": group_exit_codes,
        "schema": group_schema,
        "determinism": group_determinism,
        "golden": lambda: group_golden(update),
        "examples": group_examples,
        "csv": group_csv,
    }
    if group not in groups:
        print(f"unknown group {group}")
        return 2
    groups[group]()
    if failures:
        print(f"{len(failures)} check(s) failed")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
