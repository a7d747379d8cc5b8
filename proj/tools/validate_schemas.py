#!/usr/bin/env python3
"""Run the CLI, validate every JSON output against schemas/, check determinism.

usage: validate_schemas.py <spt-snr binary> <repo root>
"""
import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    exe, root = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {p.name: json.loads(p.read_text()) for p in (root / "schemas").glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items()
    )

    def validator(name):
        return jsonschema.Draft202012Validator(schemas[name], registry=registry)

    failures = 0

    for path in sorted((root / "scenarios").glob("*.json")):
        errs = list(validator("scenario.schema.json").iter_errors(json.loads(path.read_text())))
        print(f"{'ok  ' if not errs else 'FAIL'} scenario {path.name}")
        for e in errs:
            print("   ", e.message)
        failures += bool(errs)

    runs = [
        ("solve.schema.json", ["solve", "--n", "320", "--m", "1000", "--eps", "1e-5"]),
        ("solve.schema.json", ["solve", "--n", "100", "--m", "100", "--eps", "0.5", "--method", "bisection"]),
        ("solve.schema.json", ["solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--method", "reference"]),
        ("compare.schema.json", ["compare", "--format", "json"]),
        ("analyze.schema.json", ["analyze", "--m", "1000", "--eps", "1e-5"]),
        ("analyze.schema.json", ["analyze", "--m", "2000", "--eps", "1e-9", "--n", "500"]),
        ("sweep.schema.json", ["sweep", "--n", "0,320", "--m", "100,1000", "--eps", "1e-9,0.5", "--threads", "3"]),
        ("app.schema.json", ["app", "--scenario", str(root / "scenarios/power_min_two_hops.json"), "--oracle", "--grid-steps", "100"]),
        ("app.schema.json", ["app", "--scenario", str(root / "scenarios/wsr_two_users.json")]),
        ("app.schema.json", ["app", "--scenario", str(root / "scenarios/ee_max_two_hops.json")]),
    ]
    for schema, args in runs:
        first = subprocess.run([exe, *args], capture_output=True, text=True)
        second = subprocess.run([exe, *args], capture_output=True, text=True)
        label = " ".join(args)
        if first.returncode != 0:
            print(f"FAIL {label}: exit {first.returncode}: {first.stderr.strip()}")
            failures += 1
            continue
        errs = list(validator(schema).iter_errors(json.loads(first.stdout)))
        same = first.stdout == second.stdout
        print(f"{'ok  ' if not errs and same else 'FAIL'} {schema} <- {label}")
        for e in errs:
            print("   ", list(e.absolute_path), e.message)
        if not same:
            print("    output differs between identical runs")
        failures += bool(errs) or not same

    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
