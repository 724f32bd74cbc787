#!/usr/bin/env python3
"""Exhaustive DIMACS solver for small instances; prints competition-style output."""

import itertools
import sys


def read(path):
    nvars, clauses, cur = 0, [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line[0] in "c%":
                continue
            if line[0] == "p":
                nvars = int(line.split()[2])
                continue
            for tok in line.split():
                lit = int(tok)
                if lit == 0:
                    clauses.append(cur)
                    cur = []
                else:
                    cur.append(lit)
    return nvars, clauses


def main():
    nvars, clauses = read(sys.argv[1])
    if nvars > 22:
        print("s UNKNOWN")
        return
    for bits in itertools.product((False, True), repeat=nvars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            print("s SATISFIABLE")
            print("v " + " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(bits)) + " 0")
            return
    print("s UNSATISFIABLE")


if __name__ == "__main__":
    main()
