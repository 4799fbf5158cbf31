#!/usr/bin/env python3
"""Derive the closed-form disk eigenvalue table and Bessel reference values.

Writes crates/core/tests/data/disk_oracle.csv and bessel_values.csv.
The values come from scipy.special, independently of the Rust Bessel code.

DBS:       q = (2k + 2) / R     (b ~ (r^{k+2}/R^2 - r^k) trig(k theta))
Steklov:   delta = k / R        (s ~ r^k trig(k theta), classical DtN)
Dirichlet: lambda = (j_{k,m} / R)^2
"""
import csv
import os

from scipy import special

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "crates", "core", "tests", "data")


def parities(k):
    return ["cos"] if k == 0 else ["cos", "sin"]


def main():
    rows = []
    for radius in (1.0, 2.0, 0.5):
        for k in range(0, 8):
            for p in parities(k):
                rows.append(("dbs", k, 0, p, radius, (2 * k + 2) / radius))
        for k in range(0, 8):
            for p in parities(k):
                rows.append(("steklov", k, 0, p, radius, k / radius))
        for k in range(0, 6):
            zeros = special.jn_zeros(k, 3)
            for m, z in enumerate(zeros, start=1):
                for p in parities(k):
                    rows.append(("dirichlet", k, m, p, radius, (z / radius) ** 2))
    with open(os.path.join(OUT, "disk_oracle.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "k", "m", "parity", "R", "eigenvalue"])
        for fam, k, m, p, radius, ev in rows:
            w.writerow([fam, k, m, p, repr(radius), repr(float(ev))])

    with open(os.path.join(OUT, "bessel_values.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["order", "x", "value"])
        for order in (0, 1, 2, 3, 5, 8, 12):
            for x in (0.0, 1e-3, 0.5, 1.0, 2.404825557695773, 3.7, 7.5, 12.25, 19.9, 25.0, 30.0):
                w.writerow([order, repr(x), repr(float(special.jv(order, x)))])


if __name__ == "__main__":
    main()
