#!/usr/bin/env python3
"""Convert raw Adult / German / Compas files into the cleaned CSVs under data/.

The raw files are the UCI / ProPublica originals, e.g. as shipped inside the
`responsibly` wheel (responsibly/dataset/{adult,german,compas}).

    python3 tools/prepare_datasets.py --raw <dir with adult/ german/ compas/> --out data
"""
import argparse
import csv
import os
from datetime import datetime

GERMAN_COLUMNS = [
    ("checking.status", "cat"), ("duration", "num"), ("credit.history", "cat"),
    ("purpose", "cat"), ("credit.amount", "num"), ("savings", "cat"),
    ("employment.since", "cat"), ("installment.rate", "num"),
    ("personal.status.sex", "cat"), ("other.debtors", "cat"),
    ("residence.since", "num"), ("property", "cat"), ("age", "num"),
    ("other.installment.plans", "cat"), ("housing", "cat"),
    ("existing.credits", "num"), ("job", "cat"), ("people.liable", "num"),
    ("telephone", "cat"), ("foreign.worker", "cat"),
]


def german(raw, out):
    rows = []
    with open(os.path.join(raw, "german", "german.data")) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            label = "good" if parts[-1] == "1" else "bad"
            rows.append(parts[:-1] + [label])
    write(out, "german.csv", [c for c, _ in GERMAN_COLUMNS] + ["credit.risk"], rows)


ADULT_KEEP = [
    ("age", 0), ("education.num", 4), ("capital.gain", 10), ("capital.loss", 11),
    ("hours.per.week", 12), ("workclass", 1), ("marital.status", 5),
    ("occupation", 6), ("race", 8), ("sex", 9), ("native.country", 13),
]


def adult(raw, out):
    rows = []
    with open(os.path.join(raw, "adult", "adult.data")) as f:
        for line in f:
            parts = [p.strip() for p in line.strip().split(",")]
            if len(parts) < 15:
                continue
            # '?' marks an unrecorded value; kept as its own category token.
            values = [parts[i] if parts[i] != "?" else "unknown" for _, i in ADULT_KEEP]
            rows.append(values + [parts[14]])
    write(out, "adult.csv", [c for c, _ in ADULT_KEEP] + ["income"], rows)


def compas(raw, out):
    rows = []
    with open(os.path.join(raw, "compas", "compas-scores-two-years.csv")) as f:
        for r in csv.DictReader(f):
            stay = 0
            if r["c_jail_in"] and r["c_jail_out"]:
                fmt = "%Y-%m-%d %H:%M:%S"
                delta = datetime.strptime(r["c_jail_out"], fmt) - datetime.strptime(r["c_jail_in"], fmt)
                stay = max(0, delta.days)
            rows.append([
                r["age"], r["juv_fel_count"], r["juv_misd_count"], r["juv_other_count"],
                r["priors_count"], r["decile_score"], str(stay),
                r["sex"], r["race"].replace(" ", "-"), r["c_charge_degree"],
                "recid" if r["two_year_recid"] == "1" else "no-recid",
            ])
    header = ["age", "juv.fel.count", "juv.misd.count", "juv.other.count",
              "priors.count", "decile.score", "length.of.stay", "sex", "race",
              "charge.degree", "two.year.recid"]
    write(out, "compas.csv", header, rows)


def write(out, name, header, rows):
    path = os.path.join(out, name)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--raw", required=True)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    german(args.raw, args.out)
    adult(args.raw, args.out)
    compas(args.raw, args.out)
