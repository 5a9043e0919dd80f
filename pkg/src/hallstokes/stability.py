"""Semistability, HN filtrations and the kappa/delta/epsilon calculus in the Hall algebra."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache

import numpy as np

from .charges import CentralCharge, RaySpec, StabilityCondition
from .errors import DomainError, TruncationError
from .graded import dv_le, dv_sub, dv_total, dvs_up_to
from .quiver import (HallAlgebra, HallElement, IsoClass, coordinate_subreps, dense_product_int,
                     hall_algebra, hall_log)


@lru_cache(maxsize=None)
def _subreps(M: IsoClass):
    return tuple(coordinate_subreps(M))


@lru_cache(maxsize=None)
def submodule_classes(M: IsoClass) -> frozenset:
    """Classes of the nonzero submodules of M (coordinate submodules suffice)."""
    return frozenset(s.cls for s, _ in _subreps(M) if not s.is_zero())


def phase(Z: CentralCharge, gamma) -> float:
    if not any(gamma):
        raise DomainError("phase of the zero class")
    return Z.phase(tuple(gamma))


def is_semistable(Z: CentralCharge, M: IsoClass) -> bool:
    if M.is_zero():
        raise DomainError("semistability of the zero module")
    g = M.cls
    return all(Z.cross_sign(a, g) <= 0 for a in submodule_classes(M))


def _semistable_flags(Z: CentralCharge, alg: HallAlgebra) -> np.ndarray:
    key = (id(alg), _z_key(Z))
    out = _SS_CACHE.get(key)
    if out is None:
        out = np.array([0 if m.is_zero() else int(is_semistable(Z, m)) for m in alg.iso],
                       dtype=np.int64)
        if len(_SS_CACHE) > 256:
            _SS_CACHE.clear()
        _SS_CACHE[key] = out
    return out


_SS_CACHE: dict = {}


def _z_key(Z: CentralCharge):
    return (Z.exact, Z.z) if Z.exact is not None else Z.z


def _alg(spec) -> HallAlgebra:
    return spec if isinstance(spec, HallAlgebra) else hall_algebra(spec.N, spec.d)


def delta(Z: CentralCharge, gamma, spec) -> HallElement:
    """Indicator of the semistable iso-classes of class gamma."""
    alg = _alg(spec)
    gamma = _check_class(alg, gamma)
    flags = _semistable_flags(Z, alg)
    return HallElement(alg, {alg.iso[i]: Fraction(1) for i in alg.by_class[gamma] if flags[i]})


def _check_class(alg: HallAlgebra, gamma) -> tuple:
    gamma = tuple(int(x) for x in gamma)
    if len(gamma) != alg.spec.N or any(x < 0 for x in gamma) or not any(gamma):
        raise DomainError(f"expected a positive class, got {gamma}")
    if dv_total(gamma) > alg.spec.d:
        raise TruncationError(f"class {gamma} exceeds truncation {alg.spec.d}")
    return gamma


def hn_filtration(Z: CentralCharge, M: IsoClass, choose=None) -> list[IsoClass]:
    """HN subquotients of M as iso-classes, in decreasing phase.

    ``choose`` picks among coordinate submodules realising the maximal
    destabilising class; the result does not depend on it.
    """
    if M.is_zero():
        raise DomainError("HN filtration of the zero module")
    out = []
    while not M.is_zero():
        subs = [(s, q) for s, q in _subreps(M) if not s.is_zero()]
        best = None
        for s, _ in subs:
            c = s.cls
            if best is None:
                best = c
                continue
            sgn = Z.cross_sign(c, best)
            if sgn > 0 or (sgn == 0 and dv_total(c) > dv_total(best)):
                best = c
        cands = [(s, q) for s, q in subs if s.cls == best]
        s, q = (choose or (lambda xs: xs[0]))(cands)
        out.append(s)
        M = q
    return out


def hn_classes(Z: CentralCharge, M: IsoClass, choose=None) -> list[tuple]:
    return [s.cls for s in hn_filtration(Z, M, choose)]


# -- rays ------------------------------------------------------------------------

def sort_by_phase(Z: CentralCharge, classes) -> list[tuple]:
    """Classes in decreasing phase (clockwise order)."""
    return sorted(classes, key=cmp_to_key(lambda a, b: -Z.cross_sign(a, b)))


def group_rays(Z: CentralCharge, classes) -> list[list[tuple]]:
    """Group classes by the ray of Z, rays in decreasing phase."""
    groups: list[list[tuple]] = []
    for c in sort_by_phase(Z, classes):
        if groups and Z.same_ray(groups[-1][0], c):
            groups[-1].append(c)
        else:
            groups.append([c])
    return groups


def stokes_rays(Z: CentralCharge, spec) -> list[list[tuple]]:
    """Rays carrying a semistable class of total <= d, clockwise, with their classes."""
    alg = _alg(spec)
    flags = _semistable_flags(Z, alg)
    live = [g for g in alg.classes if any(g) and any(flags[i] for i in alg.by_class[g])]
    return group_rays(Z, live)


def ray_classes(Z: CentralCharge, ray: RaySpec, spec) -> list[tuple]:
    alg = _alg(spec)
    return [g for g in alg.classes if any(g) and ray.contains(Z(g))]


def _ss_dense(Z, alg: HallAlgebra, classes) -> np.ndarray:
    flags = _semistable_flags(Z, alg)
    v = np.zeros(alg.size, dtype=np.int64)
    v[alg.zero_index()] = 1
    for g in classes:
        for i in alg.by_class[g]:
            v[i] = flags[i]
    return v


def ss_ell(Z: CentralCharge, ray: RaySpec | list, spec) -> HallElement:
    """1 on the zero module and on semistables with Z on the ray, else 0."""
    alg = _alg(spec)
    classes = ray if isinstance(ray, list) else ray_classes(Z, ray, alg)
    return HallElement.from_dense(alg, _ss_dense(Z, alg, classes))


def clockwise_product(Z: CentralCharge, spec) -> HallElement:
    """Product of SS_l over all Stokes rays in decreasing phase."""
    alg = _alg(spec)
    acc = np.zeros(alg.size, dtype=np.int64)
    acc[alg.zero_index()] = 1
    for group in stokes_rays(Z, alg):
        acc = dense_product_int(alg, acc, _ss_dense(Z, alg, group))
    return HallElement.from_dense(alg, acc)


def reineke_kappa_check(Z: CentralCharge, gamma, spec) -> HallElement:
    """Sum over HN types of class gamma of the delta products."""
    alg = _alg(spec)
    gamma = _check_class(alg, gamma)
    return clockwise_product(Z, alg).component(gamma)


def clockwise_identity_check(Z: CentralCharge, spec) -> bool:
    from .quiver import splus
    alg = _alg(spec)
    return clockwise_product(Z, alg) == splus(alg)


def _kappa_dense(alg: HallAlgebra, beta) -> np.ndarray:
    v = np.zeros(alg.size, dtype=np.int64)
    v[alg.by_class[beta]] = 1
    return v


def delta_from_kappa(Z: CentralCharge, gamma, spec) -> HallElement:
    """Alternating sum of kappa products whose partial sums have phase above gamma."""
    alg = _alg(spec)
    gamma = _check_class(alg, gamma)
    upper = [b for b in alg.classes if any(b) and b != gamma and dv_le(b, gamma)
             and Z.cross_sign(b, gamma) > 0]
    upper.sort(key=lambda b: (dv_total(b), b))
    zero = alg.classes[0]
    P = {zero: None}
    out = _kappa_dense(alg, gamma)
    for b in upper:
        acc = -_kappa_dense(alg, b)
        for c, pc in P.items():
            if pc is None or not dv_le(c, b) or c == b:
                continue
            acc = acc - dense_product_int(alg, pc, _kappa_dense(alg, dv_sub(b, c)),
                                          f_classes=[c], g_classes=[dv_sub(b, c)])
        P[b] = acc
        out = out + dense_product_int(alg, acc, _kappa_dense(alg, dv_sub(gamma, b)),
                                      f_classes=[b], g_classes=[dv_sub(gamma, b)])
    return HallElement.from_dense(alg, out)


def epsilon(Z: CentralCharge, alpha, spec) -> HallElement:
    """Component alpha of log SS_l on the ray of Z(alpha)."""
    alg = _alg(spec)
    alpha = _check_class(alg, alpha)
    classes = [g for g in alg.classes if any(g) and dv_le(g, alpha) and Z.same_ray(g, alpha)]
    return hall_log(ss_ell(Z, classes, alg)).component(alpha)


def epsilon_all(Z: CentralCharge, spec) -> dict:
    """epsilon_alpha for every positive class of total <= d, keyed by class."""
    alg = _alg(spec)
    out = {}
    for group in stokes_rays(Z, alg):
        lg = hall_log(ss_ell(Z, group, alg))
        for g in group:
            out[g] = lg.component(g)
    for g in alg.classes:
        if any(g) and g not in out:
            out[g] = HallElement(alg)
    return out


# -- walls -----------------------------------------------------------------------

@dataclass(frozen=True)
class Wall:
    beta: tuple
    gamma: tuple

    def to_json(self):
        return [list(self.beta), list(self.gamma)]


def _proportional(a, b) -> bool:
    return all(a[i] * b[j] == a[j] * b[i] for i in range(len(a)) for j in range(len(a)))


def walls_for(alpha) -> list[Wall]:
    alpha = tuple(alpha)
    out = []
    for b in dvs_up_to(len(alpha), dv_total(alpha)):
        if not dv_le(b, alpha) or b == alpha:
            continue
        c = dv_sub(alpha, b)
        if b < c and not _proportional(b, c):
            out.append(Wall(b, c))
    return out


def chamber_signature(Z: CentralCharge, alpha) -> tuple:
    return tuple(Z.cross_sign(w.beta, w.gamma) for w in walls_for(alpha))


def chamber_label(Z: CentralCharge, d: int, N: int) -> tuple:
    """Signature over all walls for all classes of total <= d."""
    return tuple(chamber_signature(Z, a) for a in dvs_up_to(N, d))


def _iso_text(M: IsoClass) -> str:
    return ";".join(f"[{a}-{b}]" for a, b in M.intervals)


def chamber_report_rows(Zs, spec) -> list[str]:
    """CSV rows: Z, wall signature and the semistable support of each class."""
    alg = _alg(spec)
    pos = [g for g in alg.classes if any(g)]
    sign = {1: "+", -1: "-", 0: "0"}
    head = ["Z", "signature"] + ["ss " + "/".join(map(str, g)) for g in pos]
    rows = [",".join(head)]
    for Z in Zs:
        zs = " ".join(f"{z.real!r}{z.imag:+}i" for z in Z.z)
        sig = " ".join("".join(sign[x] for x in chamber_signature(Z, g)) or "."
                       for g in pos)
        flags = _semistable_flags(Z, alg)
        supp = [" ".join(_iso_text(alg.iso[i]) for i in alg.by_class[g] if flags[i]) for g in pos]
        rows.append(",".join([zs, sig] + supp))
    return rows


# -- random stability conditions ---------------------------------------------------

def _rand_q(rng: random.Random, lo: float, hi: float, den: int = 64) -> Fraction:
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


def random_stability(N: int, rng: random.Random, wall: Wall | None = None,
                     exact: bool = True) -> StabilityCondition:
    """Random Z with Gaussian rational simple values; on the given wall if requested."""
    while True:
        vals = [(_rand_q(rng, -1, 1), _rand_q(rng, 0.1, 1)) for _ in range(N)]
        if wall is not None:
            vals = _force_wall(vals, wall, rng)
            if vals is None:
                continue
        if all(v[1] > 0 for v in vals):
            if exact:
                return StabilityCondition((), exact=vals)
            return StabilityCondition([complex(float(a), float(b)) for a, b in vals])


def _force_wall(vals, wall: Wall, rng: random.Random):
    b, g = wall.beta, wall.gamma
    n = len(vals)
    pairs = [(j, k) for j in range(n) for k in range(n) if j != k and b[j] * g[k] - b[k] * g[j]]
    if not pairs:
        return None
    j, k = rng.choice(pairs)
    u = (_rand_q(rng, -1, 1), _rand_q(rng, 0.2, 1))
    lb, lg = _rand_q(rng, 0.2, 2), _rand_q(rng, 0.2, 2)
    out = list(vals)
    det = b[j] * g[k] - b[k] * g[j]
    for part in (0, 1):
        rb = lb * u[part] - sum(b[i] * out[i][part] for i in range(n) if i not in (j, k))
        rg = lg * u[part] - sum(g[i] * out[i][part] for i in range(n) if i not in (j, k))
        xj = Fraction(rb * g[k] - rg * b[k], det)
        xk = Fraction(b[j] * rg - g[j] * rb, det)
        oj, ok = list(out[j]), list(out[k])
        oj[part], ok[part] = xj, xk
        out[j], out[k] = tuple(oj), tuple(ok)
    return out
