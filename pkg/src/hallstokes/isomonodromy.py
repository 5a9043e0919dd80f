"""Z -> f(Z) from stability data, the isomonodromy PDE and wall-crossing studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charges import CentralCharge, StabilityCondition
from .errors import ExperimentError, WallProximityError
from .graded import GradedLieElement, bracket, dv_le, dv_sub, dv_total, dvs_up_to
from .quiver import (HallElement, QuiverSpec, dense_product_int, hall_algebra, hall_lie_spec,
                     hall_to_lie)
from .stability import (_ss_dense, delta, epsilon_all, stokes_rays, walls_for)
from .stokes import Provenance, stokes_inverse


def epsilon_lie(qspec: QuiverSpec, Z: CentralCharge) -> GradedLieElement:
    """Sum of the Joyce elements epsilon_alpha as an element of the Hall Lie algebra."""
    lspec = hall_lie_spec(qspec.N, qspec.d)
    out = GradedLieElement(lspec)
    for g, e in epsilon_all(Z, hall_algebra(qspec.N, qspec.d)).items():
        if e.values:
            out = out + GradedLieElement(lspec, hall_to_lie(e).coeffs)
    return out


def f_of_Z(qspec: QuiverSpec, Z: CentralCharge, prov: Provenance | None = None) -> GradedLieElement:
    """The isomonodromic f attached to the stability data of Z."""
    return stokes_inverse(Z, epsilon_lie(qspec, Z), prov)


# -- PDE -------------------------------------------------------------------------

def wall_distance(Z: CentralCharge, d: int) -> float:
    """Smallest sine of the angle between Z(beta) and Z(gamma) over walls up to total d."""
    best = math.inf
    for a in dvs_up_to(Z.rank, d):
        for w in walls_for(a):
            zb, zg = Z(w.beta), Z(w.gamma)
            best = min(best, abs((zb * zg.conjugate()).imag) / (abs(zb) * abs(zg)))
    return best


def _directions(N: int):
    for i in range(N):
        for unit in (1.0, 1j):
            e = [0j] * N
            e[i] = unit
            yield f"{'Re' if unit == 1.0 else 'Im'} z{i + 1}", e


def pde_rhs(f: GradedLieElement, Z: CentralCharge, dz, alpha) -> GradedLieElement:
    """sum over beta + gamma = alpha of [f_beta, f_gamma] dZ(gamma)/Z(gamma)."""
    spec = f.spec
    alpha = tuple(alpha)
    dZ = CentralCharge(dz)
    out = GradedLieElement(spec)
    for b in dvs_up_to(spec.rank, dv_total(alpha)):
        if not dv_le(b, alpha) or b == alpha:
            continue
        g = dv_sub(alpha, b)
        fb, fg = f.component(b), f.component(g)
        if fb.coeffs and fg.coeffs:
            out = out + bracket(fb, fg) * (dZ(g) / Z(g))
    return out.component(alpha)


def _shift(Z: CentralCharge, dz, s: float) -> StabilityCondition:
    return StabilityCondition([z + s * e for z, e in zip(Z.z, dz)])


def pde_residual(qspec: QuiverSpec, Z: CentralCharge, h: float = 1e-4, alphas=None,
                 detail: bool = False):
    """Max residual of the isomonodromy PDE per class, by central differences."""
    if wall_distance(Z, qspec.d) <= 10 * h:
        raise WallProximityError("Z is within 10h of a wall")
    if alphas is None:
        alphas = dvs_up_to(qspec.N, qspec.d)
    f0 = f_of_Z(qspec, Z)
    out = {tuple(a): 0.0 for a in alphas}
    rows = []
    for name, dz in _directions(qspec.N):
        fp = f_of_Z(qspec, _shift(Z, dz, h))
        fm = f_of_Z(qspec, _shift(Z, dz, -h))
        diff = (fp - fm) * (1.0 / (2 * h))
        for a in out:
            r = (diff.component(a) - pde_rhs(f0, Z, dz, a)).norm()
            out[a] = max(out[a], r)
            rows.append((name, a, r))
    return (out, rows) if detail else out


def pde_slope(qspec: QuiverSpec, Z: CentralCharge, hs=(4e-3, 2e-3, 1e-3), alphas=None) -> float:
    """Empirical order of the PDE residual in h (log-log least squares)."""
    res = [max(pde_residual(qspec, Z, h, alphas).values()) for h in hs]
    return float(np.polyfit(np.log(hs), np.log(res), 1)[0]), res


def chamber_data(qspec: QuiverSpec, Z: CentralCharge) -> dict:
    """delta and epsilon for every class, for exact chamber comparisons."""
    alg = hall_algebra(qspec.N, qspec.d)
    eps = epsilon_all(Z, alg)
    return {g: (delta(Z, g, alg), eps[g]) for g in alg.classes if any(g)}


# -- wall crossing -------------------------------------------------------------------

@dataclass
class IsomonodromyReport:
    quiver: dict
    alpha: tuple
    z_wall: list
    direction: list
    etas: list
    tolerances: dict
    delta_sides: dict = field(default_factory=dict)
    epsilon_sides: dict = field(default_factory=dict)
    delta_jump: float = 0.0
    epsilon_jump: float = 0.0
    sector_products_equal: bool = False
    gaps: list = field(default_factory=list)
    order: float = float("nan")
    pairwise_orders: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "quiver": self.quiver,
            "alpha": list(self.alpha),
            "z_wall": [[z.real, z.imag] for z in self.z_wall],
            "direction": [[z.real, z.imag] for z in self.direction],
            "etas": self.etas,
            "tolerances": self.tolerances,
            "delta": self.delta_sides,
            "epsilon": self.epsilon_sides,
            "delta_jump": self.delta_jump,
            "epsilon_jump": self.epsilon_jump,
            "sector_products_equal": self.sector_products_equal,
            "gaps": self.gaps,
            "order": self.order,
            "pairwise_orders": self.pairwise_orders,
        }

    def csv_rows(self) -> list[str]:
        lines = ["s,label,re,im"]
        for s, lab, v in self.samples:
            lines.append(f"{s!r},{lab},{v.real!r},{v.imag!r}")
        return lines


def _crossed_walls(Z0: CentralCharge, v, alpha, eta: float):
    """Walls of classes <= alpha whose sign differs between the two ends of the path."""
    flips, stray = [], []
    zm, zp = _shift(Z0, v, -eta), _shift(Z0, v, eta)
    for a in dvs_up_to(Z0.rank, dv_total(alpha)):
        if not dv_le(a, alpha):
            continue
        for w in walls_for(a):
            sm, sp = zm.cross_sign(w.beta, w.gamma), zp.cross_sign(w.beta, w.gamma)
            if sm != sp:
                (flips if Z0.cross_sign(w.beta, w.gamma) == 0 else stray).append(w)
    return flips, stray


def _sector_product(Z: CentralCharge, alg, classes) -> HallElement:
    acc = np.zeros(alg.size, dtype=np.int64)
    acc[alg.zero_index()] = 1
    for group in stokes_rays(Z, alg):
        if set(group) <= classes:
            acc = dense_product_int(alg, acc, _ss_dense(Z, alg, group))
    return HallElement.from_dense(alg, acc)


def wallcross_experiment(qspec: QuiverSpec, alpha, Z_wall: CentralCharge, v,
                         etas=(1e-2, 1e-3, 1e-4), samples: int = 0) -> IsomonodromyReport:
    """Compare delta, epsilon and f_alpha on the two sides of one wall."""
    alpha = tuple(alpha)
    v = [complex(x) for x in v]
    etas = sorted(etas, reverse=True)
    alg = hall_algebra(qspec.N, qspec.d)
    flips, stray = _crossed_walls(Z_wall, v, alpha, etas[0])
    if stray or not flips:
        raise ExperimentError("path must cross exactly one wall, through Z_wall")
    if len({round(Z_wall.phase(w.beta), 9) for w in flips}) != 1:
        raise ExperimentError("path crosses several walls")
    rep = IsomonodromyReport({"N": qspec.N, "d": qspec.d}, alpha, list(Z_wall.z), v, list(etas),
                             {"ray": 1e-12, "wall_detection": 1e-10})
    # a) delta and epsilon on both sides
    eta0 = etas[0]
    sides = {"minus": _shift(Z_wall, v, -eta0), "wall": Z_wall, "plus": _shift(Z_wall, v, eta0)}
    for name, Zs in sides.items():
        rep.delta_sides[name] = delta(Zs, alpha, alg).to_json()
        rep.epsilon_sides[name] = epsilon_all(Zs, alg)[alpha].to_json()
    dm, dp = delta(sides["minus"], alpha, alg), delta(sides["plus"], alpha, alg)
    em, ep = epsilon_all(sides["minus"], alg)[alpha], epsilon_all(sides["plus"], alg)[alpha]
    rep.delta_jump = dm.distance(dp)
    rep.epsilon_jump = em.distance(ep)
    # b) product over the rays that merge at the wall
    ray_cls = {g for g in alg.classes if any(g) and Z_wall.same_ray(g, alpha)}
    prods = [_sector_product(Zs, alg, ray_cls) for Zs in sides.values()]
    rep.sector_products_equal = prods[0] == prods[1] == prods[2]
    # c) continuity of f_alpha
    for eta in etas:
        fm = f_of_Z(qspec, _shift(Z_wall, v, -eta)).component(alpha)
        fp = f_of_Z(qspec, _shift(Z_wall, v, eta)).component(alpha)
        rep.gaps.append((fm - fp).norm())
    rep.order = _order(etas, rep.gaps)
    rep.pairwise_orders = [math.log(g0 / g1) / math.log(e0 / e1) if g0 > 0 and g1 > 0 else math.inf
                           for (e0, g0), (e1, g1) in zip(zip(etas, rep.gaps), zip(etas[1:], rep.gaps[1:]))]
    if samples:
        for s in np.linspace(-etas[0], etas[0], samples):
            if s == 0:
                continue
            fa = f_of_Z(qspec, _shift(Z_wall, v, float(s))).component(alpha)
            for lab, c in sorted(fa.coeffs.items()):
                rep.samples.append((float(s), str(lab).replace(",", ";"), complex(c)))
    return rep


def _order(etas, gaps) -> float:
    if any(g <= 0 for g in gaps):
        return math.inf
    return float(np.polyfit(np.log(etas), np.log(gaps), 1)[0])
