"""Convert the raw benchmark sources in data/raw/ to sparse text files.

Sources
-------
agaricus-lepiota.data
    The UCI mushroom file (8124 rows, 22 nominal attributes). Copied from
    the xgboost demo directory shipped inside the ``xgboost-sys`` crate.
    Converted the same way as the LIBSVM ``mushrooms`` file: every nominal
    attribute is expanded into one binary feature per observed value and
    attribute 11 (stalk-root, the only one with missing values) is dropped,
    giving 112 features. Labels: poisonous -> 1, edible -> 2.

spambase.dat
    The UCI spambase table (57 real features, last column 0/1) as bundled
    by the ``keel-ds`` package. KEEL removed 4 of the 4601 UCI rows, so
    the file has 4597 instances. Zero entries are omitted on output.

Usage::

    python scripts/make_datasets.py            # writes data/mushrooms, data/spambase
"""

import argparse
from pathlib import Path

# value codes per attribute, in the order the UCI .names file lists them
MUSHROOM_VALUES = [
    "bcxfks", "fgys", "nbcgrpuewy", "tf", "alcyfmnps", "adfn", "cwd", "bn",
    "knbhgropuewy", "et", "bcuezr?", "fyks", "fyks", "nbcgopewy", "nbcgopewy",
    "pu", "nowy", "not", "cefjlnpsz", "knbhrouwy", "acnsvy", "glmpuwd",
]
DROPPED_ATTRIBUTE = 10  # stalk-root


def convert_mushrooms(src, dst):
    rows = [line.strip().split(",") for line in src.read_text().splitlines() if line.strip()]
    observed = [set() for _ in MUSHROOM_VALUES]
    for row in rows:
        for j, v in enumerate(row[1:]):
            observed[j].add(v)

    column = {}
    for j, codes in enumerate(MUSHROOM_VALUES):
        if j == DROPPED_ATTRIBUTE:
            continue
        for code in codes:
            if code in observed[j]:
                column[j, code] = len(column) + 1

    with dst.open("w") as out:
        for row in rows:
            label = "1" if row[0] == "p" else "2"
            idx = sorted(column[j, v] for j, v in enumerate(row[1:]) if j != DROPPED_ATTRIBUTE)
            out.write(label + "".join(f" {i}:1" for i in idx) + "\n")
    return len(rows), len(column)


def convert_spambase(src, dst):
    n = 0
    with dst.open("w") as out:
        for line in src.read_text().splitlines():
            if not line.strip() or line.startswith("@"):
                continue
            fields = [f.strip() for f in line.split(",")]
            feats = fields[:-1]
            label = "1" if float(fields[-1]) > 0 else "-1"
            entries = [f"{i}:{v}" for i, v in enumerate(feats, start=1) if float(v) != 0.0]
            out.write(" ".join([label] + entries) + "\n")
            n += 1
    return n, 57


def main():
    root = Path(__file__).resolve().parent.parent / "data"
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", type=Path, default=root)
    args = parser.parse_args()
    raw = args.data_dir / "raw"

    n, d = convert_mushrooms(raw / "agaricus-lepiota.data", args.data_dir / "mushrooms")
    print(f"mushrooms: {n} instances, {d} features")
    n, d = convert_spambase(raw / "spambase.dat", args.data_dir / "spambase")
    print(f"spambase: {n} instances, {d} features")


if __name__ == "__main__":
    main()
