#!/usr/bin/env python3
"""Check NDJSON files against the schemas in schema/.

RawFrame streams (first record has type "header") also get the checks a
schema cannot express: the header comes first and every patch holds P*P values.
Everything else is read as a neutral sequence file.
"""
import argparse
import json
import pathlib
import sys

import jsonschema

SCHEMA_DIR = pathlib.Path(__file__).resolve().parent.parent / "schema"


def load(name):
    schema = json.loads((SCHEMA_DIR / name).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def records(path):
    with open(path) as f:
        for no, line in enumerate(f, 1):
            if line.strip():
                yield no, json.loads(line)


def check_raw(path, v):
    errors = []
    patch_cells = None
    for no, rec in records(path):
        if patch_cells is None:
            errors += [f"{path}:{no}: {e.message}" for e in v["header"].iter_errors(rec)]
            patch_cells = rec.get("patch_size", 0) ** 2
            continue
        errors += [f"{path}:{no}: {e.message}" for e in v["frame"].iter_errors(rec)]
        for i, p in enumerate(rec.get("patches", [])):
            if len(p) != patch_cells:
                errors.append(f"{path}:{no}: patch {i} has {len(p)} values, header says {patch_cells}")
    return errors


def check_neutral(path, v):
    errors = []
    frames = 0
    for no, rec in records(path):
        if rec.get("type") == "sequence":
            if frames:
                errors.append(f"{path}:{no}: sequence record after frames")
            errors += [f"{path}:{no}: {e.message}" for e in v["sequence"].iter_errors(rec)]
        else:
            frames += 1
            errors += [f"{path}:{no}: {e.message}" for e in v["pose"].iter_errors(rec)]
    if frames == 0:
        errors.append(f"{path}: no frames")
    return errors


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="+", type=pathlib.Path)
    args = ap.parse_args()

    v = {
        "header": load("raw_frame_header.schema.json"),
        "frame": load("raw_frame.schema.json"),
        "pose": load("neutral_frame.schema.json"),
        "sequence": load("neutral_sequence.schema.json"),
    }
    errors = []
    for path in args.files:
        first = next(records(path), (0, {}))[1]
        errors += (check_raw if first.get("type") == "header" else check_neutral)(path, v)
    for e in errors[:50]:
        print(e, file=sys.stderr)
    print(f"{len(args.files)} file(s), {len(errors)} error(s)")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
