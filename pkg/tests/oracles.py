"""Independent brute-force oracles used by several test modules."""
from itertools import product

import numpy as np

from hallstokes.quiver import IsoClass


def gf2_subspaces(k):
    """All subspaces of GF(2)^k, each as a frozenset of vectors."""
    vecs = list(product((0, 1), repeat=k))
    seen = set()
    out = []
    frontier = [frozenset([tuple([0] * k)])]
    seen.add(frontier[0])
    while frontier:
        nxt = []
        for sp in frontier:
            out.append(sp)
            for v in vecs:
                if v in sp:
                    continue
                new = frozenset(sp | {tuple(a ^ b for a, b in zip(v, u)) for u in sp})
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    return out


def representation(M: IsoClass):
    """Vertex dimensions and arrow matrices (GF(2)) for a direct sum of intervals."""
    N = M.N
    basis = {i: [] for i in range(1, N + 1)}
    for k, (a, b) in enumerate(M.intervals):
        for i in range(a, b + 1):
            basis[i].append((k, i))
    maps = {}
    for i in range(1, N):
        src, dst = basis[i], basis[i + 1]
        A = np.zeros((len(dst), len(src)), dtype=int)
        for c, (k, v) in enumerate(src):
            if (k, v + 1) in dst:
                A[dst.index((k, v + 1)), c] = 1
        maps[i] = A
    return {i: len(basis[i]) for i in basis}, maps


def all_subrep_classes(M: IsoClass) -> set:
    """Classes of all GF(2) subrepresentations, by exhaustive subspace search."""
    dims, maps = representation(M)
    N = M.N
    subs = {i: gf2_subspaces(dims[i]) for i in dims}
    out = set()

    def rec(i, chosen):
        if i > N:
            out.add(tuple(_dim(chosen[j]) for j in range(1, N + 1)))
            return
        for U in subs[i]:
            if i > 1:
                A = maps[i - 1]
                ok = all(tuple(int(x) % 2 for x in A @ np.array(u)) in U for u in chosen[i - 1]) \
                    if A.size else True
                if not ok:
                    continue
            chosen[i] = U
            rec(i + 1, chosen)

    rec(1, {})
    return out


def _dim(space) -> int:
    return len(space).bit_length() - 1


def flag_product_value(factors, M: IsoClass):
    """(f1 * ... * fn)(M) by enumerating coordinate flags interval by interval."""
    n = len(factors)
    per_interval = []
    for a, b in M.intervals:
        # cut points b+1 = c_0 >= c_1 >= ... >= c_n = a
        choices = []
        for cuts in product(range(a, b + 2), repeat=n - 1):
            if all(x >= y for x, y in zip(cuts, cuts[1:])):
                choices.append((b + 1,) + cuts + (a,))
        per_interval.append(choices)
    total = 0
    for pick in product(*per_interval):
        pieces = [[] for _ in range(n)]
        for (a, b), cuts in zip(M.intervals, pick):
            for k in range(n):
                lo, hi = cuts[k + 1], cuts[k] - 1
                if lo <= hi:
                    pieces[k].append((lo, hi))
        val = 1
        for k in range(n):
            val *= factors[k](IsoClass(M.N, tuple(pieces[k])))
            if val == 0:
                break
        total += val
    return total
