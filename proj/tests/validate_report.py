#!/usr/bin/env python3
"""Validate an evaluation report against the report JSON schema."""

import json
import sys

import jsonschema


def main(argv):
    if len(argv) != 3:
        print(f"usage: {argv[0]} SCHEMA REPORT", file=sys.stderr)
        return 2
    with open(argv[1], encoding="utf-8") as f:
        schema = json.load(f)
    with open(argv[2], encoding="utf-8") as f:
        report = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print(f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}", file=sys.stderr)
    if errors:
        return 1
    print(f"{argv[2]}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
