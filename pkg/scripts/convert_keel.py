#!/usr/bin/env python3
"""One-off conversion of the KEEL copies of the UCI benchmarks into the
canonical CSV format read by ``ncsvm.dataset.load_csv``.

The source is the ``keel_ds`` wheel on PyPI, which ships the raw KEEL
``.dat`` bodies (header stripped)::

    pip download --no-deps keel-ds -d /tmp/keel
    python scripts/convert_keel.py /tmp/keel/keel_ds-*.whl data/

Output rows are ``label,feature_1,...,feature_d`` with label ``+1``/``-1``.
Glass is rebuilt from the one-vs-rest KEEL files: float-processed window
glass (classes 1 and 3) is positive, non-float building glass (class 2)
negative, every other class dropped. House-votes answers map y=1, n=0.
"""

import sys
import zipfile
from pathlib import Path

RAW = "keel_ds/data/{group}/raw/{name}.dat"

# name -> (keel group, keel file, positive label token)
SIMPLE = {
    "votes": ("balanced", "housevotes", "republican"),
    "breastw": ("balanced", "wisconsin", "4"),
    "pima": ("balanced", "pima", "tested_positive"),
    "bupa": ("balanced", "bupa", "1"),
    "ionosphere": ("balanced", "ionosphere", "g"),
    # KEEL marks the survivors (UCI class 1) as "negative"; they are the
    # majority class and become +1 here.
    "haberman": ("imbalanced", "haberman", "negative"),
}

# glass2 (class 3 vs rest) carries differently perturbed feature values, so
# class 3 is recovered as the rows claimed by none of the other files.
GLASS_CLASSES = {"glass0": 1, "glass1": 2, "glass4": 5, "glass5": 6, "glass6": 7}


def read_rows(archive, group, name):
    text = archive.read(RAW.format(group=group, name=name)).decode()
    return [[t.strip() for t in line.split(",")] for line in text.splitlines() if line.strip()]


def encode(token):
    return {"y": "1", "n": "0"}.get(token, token)


def write_csv(path, rows):
    with open(path, "w") as fh:
        for label, feats in rows:
            fh.write(",".join([label] + feats) + "\n")


def convert_glass(archive):
    tables = {cls: read_rows(archive, "imbalanced", f) for f, cls in GLASS_CLASSES.items()}
    owner = {}
    for cls, table in tables.items():
        for row in table:
            if row[-1] == "positive":
                owner[tuple(row[:-1])] = cls
    rows = []
    for row in tables[1]:
        cls = owner.get(tuple(row[:-1]), 3)
        if cls in (1, 3):
            rows.append(("+1", row[:-1]))
        elif cls == 2:
            rows.append(("-1", row[:-1]))
    return rows


def main(argv):
    if len(argv) != 3:
        sys.exit(f"usage: {argv[0]} KEEL_DS_WHEEL OUT_DIR")
    out = Path(argv[2])
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(argv[1]) as archive:
        for name, (group, keel_name, positive) in SIMPLE.items():
            rows = [("+1" if r[-1] == positive else "-1", [encode(t) for t in r[:-1]])
                    for r in read_rows(archive, group, keel_name)]
            write_csv(out / f"{name}.csv", rows)
            print(f"{name}: {len(rows)} rows")
        rows = convert_glass(archive)
        write_csv(out / "glass.csv", rows)
        print(f"glass: {len(rows)} rows")


if __name__ == "__main__":
    main(sys.argv)
