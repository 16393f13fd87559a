#!/usr/bin/env python3
# Copyright 2026 The stratprice Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Solves an exported LP file with scipy.optimize.milp.

Reads the subset of CPLEX LP that `stratprice export-milp` writes (linear
objective, <= / = / >= rows, Binary section). Prints the optimal objective.
Exit status: 0 ok, 1 mismatch with --expect, 77 when scipy is missing.
"""

import argparse
import re
import sys

SKIP = 77
TERM = re.compile(r"([+-]?)\s*(\d[\d.eE+-]*)?\s*([A-Za-z_][\w.]*)")


def parse_expr(text):
    coeffs = {}
    for sign, num, name in TERM.findall(text):
        c = float(num) if num else 1.0
        if sign == "-":
            c = -c
        coeffs[name] = coeffs.get(name, 0.0) + c
    return coeffs


def parse_lp(path):
    section = None
    objective = {}
    rows = []
    binaries = []
    sense = 1
    for raw in open(path, encoding="ascii"):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("maximize", "minimize"):
            sense = -1 if low == "maximize" else 1
            section = "obj"
            continue
        if low in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if low in ("binary", "binaries"):
            section = "bin"
            continue
        if low == "end":
            break
        body = line.split(":", 1)[1] if ":" in line else line
        if section == "obj":
            for k, v in parse_expr(body).items():
                objective[k] = objective.get(k, 0.0) + v
        elif section == "rows":
            m = re.match(r"(.*?)(<=|>=|=)\s*([-+]?[\d.eE+-]+)$", body)
            if not m:
                raise ValueError("cannot parse row: " + line)
            rows.append((parse_expr(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "bin":
            binaries.extend(line.split())
    return sense, objective, rows, binaries


def solve(path):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp

    sense, objective, rows, binaries = parse_lp(path)
    names = sorted(set(objective) | set(binaries) |
                   {k for r in rows for k in r[0]})
    index = {n: i for i, n in enumerate(names)}
    c = np.zeros(len(names))
    for k, v in objective.items():
        c[index[k]] = sense * v
    a = np.zeros((len(rows), len(names)))
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for r, (expr, op, rhs) in enumerate(rows):
        for k, v in expr.items():
            a[r, index[k]] = v
        if op in ("<=", "="):
            hi[r] = rhs
        if op in (">=", "="):
            lo[r] = rhs
    integrality = np.ones(len(names))
    result = milp(c, constraints=LinearConstraint(a, lo, hi) if rows else None,
                  integrality=integrality, bounds=Bounds(0, 1))
    if not result.success:
        raise RuntimeError("milp failed: " + str(result.message))
    return sense * result.fun


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("lp")
    parser.add_argument("--expect", type=float)
    parser.add_argument("--tol", type=float, default=1e-6)
    args = parser.parse_args()
    try:
        import scipy.optimize  # noqa: F401
    except ImportError:
        print("scipy not available; skipping")
        return SKIP
    value = solve(args.lp)
    print(repr(value))
    if args.expect is not None and abs(value - args.expect) > args.tol:
        print("expected %r" % args.expect, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
