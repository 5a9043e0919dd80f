"""Iterated-integral functions M_n, their cut-line extensions L_n, and J_n.

M_n(z) = 2 pi i * int_{0 < t_1 < ... < t_{n-1} < s_n} prod dt_j / (t_j - s_j)
along the segment [0, s_n], s_j = z_1 + ... + z_j, with the first form
innermost.  Points s_j lying on the segment are avoided by small semicircles
on a chosen side ("clockwise": the point is passed on the right).

The integral is the solution of the nilpotent linear ODE
F_j' = omega_j F_{j-1}, which we integrate with Gauss-Legendre panels graded
towards the singular points.

The word-coefficient functions used by the Stokes map (``delta_coefficient``,
``epsilon_coefficient`` and ``eval_J``) are the ones reproduced by direct
integration of the connection: the weight attached to a word with letter
charges z_1..z_n is M_n with anticlockwise arcs at the reversed charges.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DomainError

TWO_PI_I = 2j * math.pi
CUT_TOL = 1e-12
ARC_FRACTION = 1e-3
PANEL_NODES = 16
CLOCKWISE = "clockwise"
ANTICLOCKWISE = "anticlockwise"


def _gauss_tableau(s):
    x, w = np.polynomial.legendre.leggauss(s)
    c = (x + 1) / 2
    b = w / 2
    # integration matrix a_ik = int_0^{c_i} l_k via the Legendre-Vandermonde system
    V = np.polynomial.legendre.legvander(x, s - 1)
    Vi = np.linalg.inv(V)
    A = np.zeros((s, s))
    for k in range(s):
        coef = Vi[:, k]
        integ = np.polynomial.legendre.legint(coef, lbnd=-1)
        A[:, k] = np.polynomial.legendre.legval(x, integ) / 2
    return c, b, A


_TABLEAUX = {}


def _tableau(s):
    if s not in _TABLEAUX:
        _TABLEAUX[s] = _gauss_tableau(s)
    return _TABLEAUX[s]


@dataclass
class SpecialFnValue:
    value: complex
    estimated_error: float
    branch_notes: list = field(default_factory=list)


@dataclass(frozen=True)
class ContourSpec:
    """Segment [0, s_n] with semicircular detours of radius ``radius`` around ``detours``."""

    end: complex
    detours: tuple
    radius: float
    orientation: str


def partial_sums(z):
    out, acc = [], 0j
    for v in z:
        acc += v
        out.append(acc)
    return out


def on_segment(p: complex, end: complex, tol: float = CUT_TOL) -> float | None:
    """Parameter lam in (0, 1) with p = lam * end, or None."""
    if end == 0 or p == 0:
        return None
    v = p * end.conjugate()
    if abs(v.imag) > tol * abs(p) * abs(end):
        return None
    lam = v.real / abs(end) ** 2
    return lam if 0 < lam < 1 else None


def contour(z, orientation: str = CLOCKWISE, arc_fraction: float = ARC_FRACTION) -> ContourSpec:
    s = partial_sums(z)
    end = s[-1]
    lams = sorted({round(lam, 14) for p in s[:-1]
                   if (lam := on_segment(p, end)) is not None})
    L = abs(end)
    radius = arc_fraction * L
    pts = [0.0] + lams + [1.0]
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    if lams:
        radius = min(radius, min(gaps) * L / 3)
    return ContourSpec(end, tuple(lam * end for lam in lams), radius, orientation)


def _pieces(cs: ContourSpec):
    """Path pieces as (kind, data): ("seg", a, b) or ("arc", centre, phi0, phi1)."""
    u = cs.end / abs(cs.end)
    theta = cmath.phase(u)
    out = []
    cur = 0j
    for c in cs.detours:
        a = c - cs.radius * u
        out.append(("seg", cur, a))
        if cs.orientation == CLOCKWISE:
            out.append(("arc", c, theta + math.pi, theta))
        else:
            out.append(("arc", c, theta + math.pi, theta + 2 * math.pi))
        cur = c + cs.radius * u
    out.append(("seg", cur, cs.end))
    return out


def _dist(points, sing):
    if not sing:
        return np.full(points.shape, np.inf)
    return np.min(np.abs(points[..., None] - np.asarray(sing)[None, :]), axis=-1)


def _panels(cs: ContourSpec, sing, s_nodes: int, split: int):
    """Graded panels: (param start, param end, piece) with length <= distance/2."""
    c, _, _ = _tableau(s_nodes)
    panels = []
    for piece in _pieces(cs):
        if piece[0] == "seg":
            _, a, b = piece
            if abs(b - a) == 0:
                continue
            stack = [(0.0, 1.0)]
            length = abs(b - a)
            done = []
            while stack:
                t0, t1 = stack.pop()
                p0, p1 = a + t0 * (b - a), a + t1 * (b - a)
                # distance from the segment piece to the singular set
                d = _seg_dist(p0, p1, sing)
                if (t1 - t0) * length > d / 2:
                    if (t1 - t0) * length < 1e-15 * max(length, 1.0):
                        raise DomainError("integration path passes through a singular point")
                    m = (t0 + t1) / 2
                    stack.append((m, t1))
                    stack.append((t0, m))
                else:
                    done.append((t0, t1))
            done.sort()
            for t0, t1 in done:
                panels.append(("seg", a, b, t0, t1))
        else:
            _, ctr, phi0, phi1 = piece
            n = 8
            for k in range(n):
                panels.append(("arc", ctr, cs.radius, phi0 + (phi1 - phi0) * k / n,
                               phi0 + (phi1 - phi0) * (k + 1) / n))
    if split > 1:
        refined = []
        for p in panels:
            lo, hi = p[-2], p[-1]
            for k in range(split):
                refined.append(p[:-2] + (lo + (hi - lo) * k / split, lo + (hi - lo) * (k + 1) / split))
        panels = refined
    # nodes, dt/dparam at nodes, panel widths in param
    P = len(panels)
    nodes = np.empty((P, s_nodes), dtype=complex)
    deriv = np.empty((P, s_nodes), dtype=complex)
    h = np.empty(P)
    for i, p in enumerate(panels):
        lo, hi = p[-2], p[-1]
        tau = lo + (hi - lo) * c
        h[i] = hi - lo
        if p[0] == "seg":
            a, b = p[1], p[2]
            nodes[i] = a + tau * (b - a)
            deriv[i] = b - a
        else:
            ctr, r = p[1], p[2]
            e = np.exp(1j * tau)
            nodes[i] = ctr + r * e
            deriv[i] = 1j * r * e
    return nodes, deriv, h


def _seg_dist(p0, p1, sing):
    best = math.inf
    d = p1 - p0
    L2 = abs(d) ** 2
    for s in sing:
        t = ((s - p0) * d.conjugate()).real / L2 if L2 else 0.0
        t = min(1.0, max(0.0, t))
        best = min(best, abs(p0 + t * d - s))
    return best


def _iterated(z, cs: ContourSpec, s_nodes: int, split: int) -> complex:
    s = partial_sums(z)
    forms = s[:-1]
    _, b, A = _tableau(s_nodes)
    nodes, deriv, h = _panels(cs, forms, s_nodes, split)
    F = np.ones(nodes.shape, dtype=complex)
    end_val = 1.0 + 0j
    for sj in forms:
        G = F * deriv / (nodes - sj)
        integ = h * (G @ b)
        starts = np.concatenate(([0j], np.cumsum(integ)[:-1]))
        F = starts[:, None] + h[:, None] * (G @ A.T)
        end_val = starts[-1] + integ[-1]
    return end_val


def _validate(z):
    z = tuple(complex(v) for v in z)
    if not z:
        raise DomainError("need at least one argument")
    if any(v == 0 for v in z):
        raise DomainError("arguments must be nonzero")
    return z


def _singular_check(z):
    s = partial_sums(z)
    scale = max(abs(v) for v in z)
    end = s[-1]
    for p in s[:-1]:
        if abs(p) <= 1e-14 * scale:
            raise DomainError("a partial sum vanishes: M_n is singular here")
        if abs(p - end) <= 1e-14 * scale:
            raise DomainError("a partial sum equals the total: M_n is singular here")


@lru_cache(maxsize=200_000)
def _M_cached(z: tuple, orientation: str, arc_fraction: float, s_nodes: int, split: int) -> complex:
    n = len(z)
    if n == 1:
        return TWO_PI_I
    s = partial_sums(z)
    if abs(s[-1]) <= 1e-14 * max(abs(v) for v in z):
        return 0j
    _singular_check(z)
    cs = contour(z, orientation, arc_fraction)
    return TWO_PI_I * _iterated(z, cs, s_nodes, split)


def set_arc_fraction(x: float) -> None:
    """Radius of the detour arcs relative to |s_n|; values do not depend on it off quadrature error."""
    global ARC_FRACTION
    if not 0 < x < 0.5:
        raise DomainError("arc fraction must lie in (0, 0.5)")
    ARC_FRACTION = float(x)
    _L_cached.cache_clear()
    _J_cached.cache_clear()


def on_cut(z) -> bool:
    """True when some partial sum lies on the straight path from 0 to s_n."""
    z = _validate(z)
    return len(z) > 1 and bool(contour(z).detours)


def M_value(z, orientation: str = CLOCKWISE) -> complex:
    """M_n(z) without an error estimate (cached)."""
    return _M_cached(_validate(z), orientation, ARC_FRACTION, PANEL_NODES, 1)


def eval_M(z, orientation: str = CLOCKWISE) -> SpecialFnValue:
    z = _validate(z)
    v = _M_cached(z, orientation, ARC_FRACTION, PANEL_NODES, 1)
    v2 = _M_cached(z, orientation, ARC_FRACTION, PANEL_NODES, 2)
    notes = []
    if len(z) > 1 and contour(z, orientation).detours:
        notes.append(f"{len(contour(z, orientation).detours)} point(s) on the path, "
                     f"{orientation} detours")
    if len(z) > 1 and abs(partial_sums(z)[-1]) <= 1e-14 * max(abs(x) for x in z):
        notes.append("zero-length path")
    return SpecialFnValue(v, 10 * abs(v2 - v) + 1e-13 * (1 + abs(v)), notes)


def _ray_subdivisions(z):
    """Compositions of range(n) into blocks whose sums all lie on the ray of s_n."""
    n = len(z)
    s = [0j] + partial_sums(z)
    end = s[-1]
    for k in range(1, n + 1):
        for cuts in combinations(range(1, n), k - 1):
            idx = (0,) + cuts + (n,)
            ok = True
            for a, b in zip(idx, idx[1:]):
                d = s[b] - s[a]
                v = d * end.conjugate()
                if not (abs(v.imag) <= CUT_TOL * abs(d) * abs(end) and v.real > 0):
                    ok = False
                    break
            if ok:
                yield idx


@lru_cache(maxsize=200_000)
def _L_cached(z: tuple, orientation: str) -> complex:
    n = len(z)
    if n == 1:
        return TWO_PI_I
    if abs(sum(z)) <= 1e-14 * max(abs(v) for v in z):
        return 0j
    total = 0j
    for idx in _ray_subdivisions(z):
        k = len(idx) - 1
        prod = 1 + 0j
        for a, b in zip(idx, idx[1:]):
            prod *= M_value(z[a:b], orientation)
        total += (-1) ** (k - 1) / k * prod
    return total


def L_value(z, orientation: str = CLOCKWISE) -> complex:
    return _L_cached(_validate(z), orientation)


def eval_L(z, orientation: str = CLOCKWISE) -> SpecialFnValue:
    z = _validate(z)
    v = _L_cached(z, orientation)
    err = 0.0
    notes = []
    for idx in _ray_subdivisions(z):
        prod_err = 0.0
        for a, b in zip(idx, idx[1:]):
            prod_err += eval_M(z[a:b], orientation).estimated_error
        err += prod_err * max(1.0, abs(v))
        if len(idx) > 2:
            notes.append(f"subdivision {idx}")
    return SpecialFnValue(v, err + 1e-13 * (1 + abs(v)), notes)


# -- word coefficients of the Stokes map ---------------------------------------

def delta_coefficient(z) -> complex:
    """Coefficient of the word with letter charges z in a Stokes factor."""
    z = _validate(z)
    return M_value(z[::-1], ANTICLOCKWISE)


def epsilon_coefficient(z) -> complex:
    """Coefficient of the word with letter charges z in the logarithm of a Stokes factor."""
    z = _validate(z)
    return L_value(z[::-1], ANTICLOCKWISE)


@lru_cache(maxsize=200_000)
def _J_cached(z: tuple) -> complex:
    n = len(z)
    if n == 1:
        return 1 / TWO_PI_I
    if abs(sum(z)) <= 1e-14 * max(abs(v) for v in z):
        return 0j
    total = 0j
    for k in range(2, n + 1):
        for cuts in combinations(range(1, n), k - 1):
            idx = (0,) + cuts + (n,)
            blocks = [z[a:b] for a, b in zip(idx, idx[1:])]
            prod = epsilon_coefficient(tuple(sum(bl) for bl in blocks))
            for bl in blocks:
                prod *= _J_cached(bl)
                if prod == 0:
                    break
            total += prod
    return -total / TWO_PI_I


def J_value(z) -> complex:
    return _J_cached(_validate(z))


def eval_J(z) -> SpecialFnValue:
    """Coefficient J_n of the word eps_1...eps_n in the inverse Stokes series."""
    z = _validate(z)
    v = _J_cached(z)
    if len(z) == 1:
        return SpecialFnValue(v, 0.0, ["exact"])
    if v == 0:
        return SpecialFnValue(v, 0.0, ["sum of arguments vanishes"])
    return SpecialFnValue(v, 1e-12 * (1 + abs(v)) * len(z), [])


def j3_tree_formula(z) -> complex:
    """J_3 from plane rooted trees, with each L normalised by 1/(2 pi i)."""
    z1, z2, z3 = _validate(z)

    def Lt(*a):
        return L_value(a) / TWO_PI_I

    return (Lt(z1, z2) * Lt(z1 + z2, z3) - Lt(z1, z2, z3)
            + Lt(z1, z2 + z3) * Lt(z2, z3)) / TWO_PI_I ** 3


def _pde_rhs(z, k: int) -> complex:
    """Coefficient of dz_k in sum_i J_i J_{n-i} dlog(right sum / left sum)."""
    n = len(z)
    total = 0j
    for i in range(1, n):
        left, right = sum(z[:i]), sum(z[i:])
        dlog = (1 / right if k >= i else 0) - (1 / left if k < i else 0)
        total += J_value(z[:i]) * J_value(z[i:]) * dlog
    return total


def jn_pde_residual(z, h: float = 1e-4) -> float:
    """Max over coordinate directions of |central difference of J_n - PDE right side|."""
    z = _validate(z)
    worst = 0.0
    for k in range(len(z)):
        for step in (h, 1j * h):
            zp = list(z)
            zm = list(z)
            zp[k] += step
            zm[k] -= step
            fd = (J_value(zp) - J_value(zm)) / (2 * step)
            worst = max(worst, abs(fd - _pde_rhs(z, k)))
    return worst
