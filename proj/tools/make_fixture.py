#!/usr/bin/env python3
"""Regenerates data/social_network_ads.csv, the bundled 400-user fixture.

Columns: User ID, Gender, Age, EstimatedSalary, Purchased. Purchase propensity
rises with age, and with salary for middle-aged users; labels are Bernoulli
draws so the classes overlap. Output is fully determined by --seed.
"""
import argparse
import csv
import math
import random


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240417)
    ap.add_argument("--rows", type=int, default=400)
    ap.add_argument("--out", default="data/social_network_ads.csv")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    ids = rng.sample(range(15_560_000, 15_820_000), args.rows)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["User ID", "Gender", "Age", "EstimatedSalary", "Purchased"])
        for uid in ids:
            gender = rng.choice(["Male", "Female"])
            age = min(60, max(18, int(round(rng.gauss(37.5, 10.5)))))
            salary = 1000 * min(150, max(15, int(round(rng.gauss(70, 34)))))
            older = (age - 45.0) / 2.5
            affluent = min((age - 30.0) / 4.0, (salary - 88_000.0) / 8_000.0)
            p = 1.0 / (1.0 + math.exp(-1.6 * max(older, affluent)))
            w.writerow([uid, gender, age, salary, 1 if rng.random() < p else 0])


if __name__ == "__main__":
    main()
