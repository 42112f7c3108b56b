#!/usr/bin/env python3
"""Convert a raw village-survey release into the canonical corpus layout.

Expected raw layout (override the patterns if yours differs):

  raw/
    adj_<layer>_vilno_<K>.csv      0/1 adjacency matrix, one per relation layer
    key_vilno_<K>.csv              one person id per line; row i of every
                                   adjacency matrix for village K is key line i
    individual_characteristics.csv survey answers, one row per respondent

Character file defaults (every one has an override flag): the village column is
``village``, the person id column is ``pid``, sex is ``resp_gend`` coded 1=male
2=female, age is ``age``, religion is ``religion`` with values like HINDUISM,
caste is ``caste`` with values like OBC or SCHEDULED CASTE, education is
``educ``, and the binary columns ``workflag`` and ``savings`` are coded 1=yes
with 0 or 2 meaning no.  Unknown or blank cells become missing values.

Output: <out>/<village>/  with one CSV per layer (source,target pairs),
nodes.csv fixing the node universe to the key file, and attributes.csv.

Example:
  python scripts/adapt_karnataka.py --raw ~/data/raw --out corpus \
      --layers visitgo visitcome kerorice borrowmoney lendmoney \
      helpdecision keroricego keroricecome templecompany socialise
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from collections import defaultdict
from pathlib import Path

from segnet.attributes import CATEGORICAL_ATTRIBUTES
from segnet.ingest import adapt_adjacency_matrix

SEX_CODES = {"1": "male", "2": "female"}
BINARY_CODES = {"1": "1", "0": "0", "2": "0"}  # some releases code "no" as 2


def normalize_category(attr: str, raw: str) -> str:
    value = raw.strip().lower()
    if not value:
        return ""
    return value if value in CATEGORICAL_ATTRIBUTES[attr] else ""


def load_characteristics(path: Path, args: argparse.Namespace) -> dict[str, dict[str, dict[str, str]]]:
    """villages -> person id -> canonical attribute row."""
    by_village: dict[str, dict[str, dict[str, str]]] = defaultdict(dict)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            village = row.get(args.col_village, "").strip()
            pid = row.get(args.col_person, "").strip()
            if not village or not pid:
                continue
            sex = SEX_CODES.get(row.get(args.col_sex, "").strip(), "")
            record = {
                "sex": sex,
                "age": row.get(args.col_age, "").strip(),
                "religion": normalize_category("religion", row.get(args.col_religion, "")),
                "caste": normalize_category("caste", row.get(args.col_caste, "")),
                "education": row.get(args.col_education, "").strip(),
                "workflag": BINARY_CODES.get(row.get(args.col_workflag, "").strip(), ""),
                "savings": BINARY_CODES.get(row.get(args.col_savings, "").strip(), ""),
            }
            by_village[village][pid] = record
    return by_village


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--raw", type=Path, required=True, help="raw release directory")
    parser.add_argument("--out", type=Path, required=True, help="corpus directory to create")
    parser.add_argument("--layers", nargs="*", default=None, help="layer names to keep (default: all found)")
    parser.add_argument("--villages", nargs="*", default=None, help="village numbers to keep (default: all found)")
    parser.add_argument("--characteristics", type=Path, default=None,
                        help="characteristics CSV (default <raw>/individual_characteristics.csv)")
    parser.add_argument("--adj-pattern", default=r"adj_(?P<layer>[A-Za-z0-9]+)_vilno_(?P<village>\d+)\.csv")
    parser.add_argument("--key-pattern", default="key_vilno_{village}.csv")
    parser.add_argument("--col-village", default="village")
    parser.add_argument("--col-person", default="pid")
    parser.add_argument("--col-sex", default="resp_gend")
    parser.add_argument("--col-age", default="age")
    parser.add_argument("--col-religion", default="religion")
    parser.add_argument("--col-caste", default="caste")
    parser.add_argument("--col-education", default="educ")
    parser.add_argument("--col-workflag", default="workflag")
    parser.add_argument("--col-savings", default="savings")
    args = parser.parse_args()

    adj_re = re.compile(args.adj_pattern)
    matrices: dict[str, dict[str, Path]] = defaultdict(dict)  # village -> layer -> path
    for path in sorted(args.raw.iterdir()):
        match = adj_re.fullmatch(path.name)
        if not match:
            continue
        layer, village = match.group("layer"), match.group("village")
        if args.layers and layer not in args.layers:
            continue
        if args.villages and village not in args.villages:
            continue
        matrices[village][layer] = path
    if not matrices:
        sys.exit(f"no adjacency matrices matching {args.adj_pattern!r} under {args.raw}")

    characteristics_path = args.characteristics or args.raw / "individual_characteristics.csv"
    people = load_characteristics(characteristics_path, args)

    for village, layers in sorted(matrices.items()):
        key_path = args.raw / args.key_pattern.format(village=village)
        if not key_path.is_file():
            print(f"skipping village {village}: missing {key_path.name}", file=sys.stderr)
            continue
        pids = [line.strip() for line in key_path.read_text(encoding="utf-8-sig").splitlines() if line.strip()]
        village_dir = args.out / f"vil{int(village):03d}"
        village_dir.mkdir(parents=True, exist_ok=True)

        for layer, matrix_path in sorted(layers.items()):
            pairs = adapt_adjacency_matrix(matrix_path)
            with open(village_dir / f"{layer}.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["source", "target"])
                for i, j in pairs:
                    if i >= len(pids) or j >= len(pids):
                        sys.exit(f"village {village} layer {layer}: matrix larger than key file")
                    writer.writerow([pids[i], pids[j]])

        with open(village_dir / "nodes.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node_id"])
            for pid in pids:
                writer.writerow([pid])

        rows = people.get(village, {})
        with open(village_dir / "attributes.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node_id", "sex", "age", "religion", "caste", "education", "workflag", "savings"])
            for pid in pids:
                record = rows.get(pid)
                if record is None:
                    continue
                writer.writerow([pid] + [record[c] for c in
                                         ("sex", "age", "religion", "caste", "education", "workflag", "savings")])
        print(f"village {village}: {len(layers)} layer(s), {len(pids)} node(s), "
              f"{sum(1 for p in pids if p in rows)} respondent(s)")


if __name__ == "__main__":
    main()
