"""Regenerate data/special_golden.csv by direct mpmath quadrature on straight paths.

Points are drawn so that no partial sum lies on the segment [0, s_n]; the
iterated integral then needs no detours and is an independent oracle for
the contour quadrature in hallstokes.special.
"""
import csv
import random
import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 25
OUT = Path(__file__).resolve().parents[1] / "src" / "hallstokes" / "data" / "special_golden.csv"


def partial(z):
    out, acc = [], 0
    for v in z:
        acc += v
        out.append(acc)
    return out


def clear_of_segment(s, margin=0.15):
    sn = s[-1]
    for p in s[:-1]:
        u = (p / sn)
        if abs(u.imag) < margin and -margin < u.real < 1 + margin:
            return False
    return True


def m_value(z):
    s = [mp.mpc(v) for v in partial(z)]
    sn = s[-1]
    om = [lambda u, i=i: sn / (u * sn - s[i]) for i in range(len(z) - 1)]
    if len(z) == 1:
        return 2j * mp.pi
    if len(z) == 2:
        return 2j * mp.pi * mp.quad(om[0], [0, 1])
    # first form innermost
    return 2j * mp.pi * mp.quad(lambda u: om[1](u) * mp.quad(om[0], [0, u]), [0, 1])


def main(seed=20240601, count=12):
    rng = random.Random(seed)
    rows = []
    for n in (2, 3):
        made = 0
        while made < count:
            z = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
            if abs(sum(z)) < 0.3 or not clear_of_segment(partial(z)):
                continue
            v = complex(m_value(z))
            rows.append([n] + [x for c in z for x in (repr(c.real), repr(c.imag))]
                        + [repr(v.real), repr(v.imag)])
            made += 1
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "z1_re", "z1_im", "z2_re", "z2_im", "z3_re", "z3_im", "M_re", "M_im"])
        for r in rows:
            n = r[0]
            pad = ["", ""] * (3 - n)
            w.writerow(r[:1 + 2 * n] + pad + r[1 + 2 * n:])
    print(f"wrote {len(rows)} rows to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
