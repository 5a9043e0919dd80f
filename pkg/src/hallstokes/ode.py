"""Numerical oracle: Stokes data of dY/dt = (Z/t^2 + f/t) Y by direct integration.

The connection acts on the truncated word envelope: f by left
multiplication, Z by the grading.  We work in the coordinate w = 1/t,
where the canonical solution H(w) = Y e^{Zw} satisfies

    dH/dw = -(D + F/w) H,   H -> 1 as w -> infinity in the sector.

The system is lower triangular with respect to the word degree, so each
component is a scalar linear ODE forced by lower components.  Every
component is integrated along a ray in the direction in which its own
homogeneous mode decays; values are carried between rays by transport
along circular arcs of fixed radius, which is well conditioned.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .charges import CentralCharge, RaySpec
from .errors import (ExtractionError, RayError, ResourceError, SingularConfigurationError,
                     StiffnessError)
from .graded import EnvelopeElement, GradedLieElement, LieAlgebraSpec, dv_total, inverse_envelope

NODES = 10
SERIES_TERMS = 80
SERIES_TOL = 1e-16
MAX_DIM = 4000
LEAK_FAIL = 1e-6


def _tableau(s):
    x, wts = np.polynomial.legendre.leggauss(s)
    c = (x + 1) / 2
    b = wts / 2
    A = np.zeros((s, s))
    for j in range(s):
        others = np.delete(c, j)
        poly = np.poly1d(np.poly(others)) / np.prod(c[j] - others)
        integ = poly.integ()
        A[:, j] = integ(c) - integ(0.0)
    return c, A, b


_C, _A, _B = _tableau(NODES)


def _wrap(a: float) -> float:
    """Angle reduced to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2 * math.pi)
    if a <= 0:
        a += 2 * math.pi
    return a - math.pi


# -- representation ----------------------------------------------------------

@dataclass
class MatrixRep:
    """Truncated word envelope with f acting by left multiplication."""

    spec: LieAlgebraSpec
    Z: CentralCharge
    f: GradedLieElement
    words: list
    index: dict
    weights: list
    totals: np.ndarray
    zdiag: np.ndarray
    F: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.words)

    def vector(self, el: EnvelopeElement) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        for w, c in el.terms.items():
            v[self.index[w]] += complex(c)
        return v

    def element(self, vec) -> EnvelopeElement:
        return EnvelopeElement(self.spec, {w: complex(vec[i]) for i, w in enumerate(self.words)
                                           if vec[i] != 0}, check=False)

    def left_mult(self, vec) -> np.ndarray:
        """Matrix of left multiplication by the element with coordinates vec."""
        M = np.zeros((self.dim, self.dim), dtype=complex)
        d = self.spec.truncation
        for i, u in enumerate(self.words):
            if vec[i] == 0:
                continue
            tu = self.totals[i]
            for j, v in enumerate(self.words):
                if tu + self.totals[j] <= d:
                    M[self.index[u + v], j] += vec[i]
        return M

    def connection(self, t: complex) -> np.ndarray:
        return np.diag(self.zdiag) / t**2 + self.F / t


def build_rep(spec: LieAlgebraSpec, Z: CentralCharge, f: GradedLieElement) -> MatrixRep:
    if f.spec != spec:
        raise SingularConfigurationError("f does not belong to the given Lie algebra spec")
    words = spec.words()
    if len(words) > MAX_DIM:
        raise ResourceError(f"representation of dimension {len(words)} exceeds {MAX_DIM}")
    index = {w: i for i, w in enumerate(words)}
    weights = [spec.word_degree(w) for w in words]
    totals = np.array([dv_total(g) for g in weights])
    zdiag = np.array([Z(g) for g in weights], dtype=complex)
    scale = max(abs(Z(spec.degree(lab))) for lab in spec.labels)
    for g, z in zip(weights, zdiag):
        if any(g) and abs(z) <= 1e-14 * scale:
            raise SingularConfigurationError(f"Z vanishes on weight {g}")
    n = len(words)
    F = np.zeros((n, n), dtype=complex)
    for lab, c in f.coeffs.items():
        for j, w in enumerate(words):
            i = index.get((lab,) + w)
            if i is not None:
                F[i, j] += complex(c)
    return MatrixRep(spec, Z, f, words, index, weights, totals, zdiag, F)


def formal_series_vectors(rep: MatrixRep, m: int) -> list[np.ndarray]:
    """Coefficients H_0..H_m of the formal solution H = sum_k H_k t^k."""
    H = [np.zeros(rep.dim, dtype=complex)]
    H[0][0] = 1.0
    nz = rep.totals > 0
    for k in range(m):
        rhs = k * H[k] - rep.F @ H[k]
        if abs(rhs[0]) > 1e-12:
            raise SingularConfigurationError("formal series has no solution (weight-zero part)")
        nxt = np.zeros(rep.dim, dtype=complex)
        nxt[nz] = rhs[nz] / rep.zdiag[nz]
        H.append(nxt)
    return H


def formal_series(rep: MatrixRep, m: int = 12) -> list[np.ndarray]:
    """Matrices H_1..H_m (left multiplication) of the formal solution."""
    return [rep.left_mult(v) for v in formal_series_vectors(rep, m)[1:]]


# -- paths and the triangular solver -----------------------------------------

@dataclass
class _Path:
    w: np.ndarray      # (n, s) nodes
    dw: np.ndarray     # (n, s) dw/ds at nodes
    delta: np.ndarray  # (n,)
    ends: np.ndarray   # (n+1,) w at interval ends
    kind: str
    params: tuple
    s0: np.ndarray | None = None

    def at(self, i: int, tau: float) -> tuple[complex, complex]:
        if self.kind == "radial":
            psi, = self.params
            u = cmath.exp(1j * psi)
            s = abs(self.ends[i]) + tau * self.delta[i]
            return s * u, u
        rho, phi0, sign = self.params
        phi = phi0 + sign * (self.s0[i] + tau * self.delta[i])
        w = rho * cmath.exp(1j * phi)
        return w, 1j * sign * w


def _radial_path(psi: float, s0: float, s1: float, lam: float, refine: float) -> _Path:
    grid = [s0]
    while grid[-1] < s1:
        s = grid[-1]
        h = refine * min(0.25 / max(lam, 1e-300), 0.2 * s)
        grid.append(min(s + h, s1))
        if len(grid) > 2_000_000:
            raise StiffnessError("radial mesh too fine")
    grid = np.array(grid)
    delta = np.diff(grid)
    svals = grid[:-1, None] + delta[:, None] * _C[None, :]
    u = cmath.exp(1j * psi)
    return _Path(svals * u, np.full(svals.shape, u), delta, grid * u, "radial", (psi,))


def _arc_path(rho: float, phi0: float, phi1: float, lam: float, refine: float) -> _Path:
    total = abs(phi1 - phi0)
    sign = 1.0 if phi1 >= phi0 else -1.0
    n = max(1, int(math.ceil(total / (refine * min(0.25 / max(rho * lam, 1e-300), 0.1)))))
    delta = np.full(n, total / n)
    s0 = np.arange(n) * (total / n)
    svals = s0[:, None] + delta[:, None] * _C[None, :]
    w = rho * np.exp(1j * (phi0 + sign * svals))
    ends = rho * np.exp(1j * (phi0 + sign * np.append(s0, total)))
    return _Path(w, 1j * sign * w, delta, ends, "arc", (rho, phi0, sign), s0)


def _solve_path(rep: MatrixRep, path: _Path, comps, plan: dict) -> dict:
    """Solve the listed components (sorted by degree) along a path.

    plan[k] = (reverse, start_value).  Returns {k: (U, K, E)}.
    """
    out = {}
    fac = -(path.dw / path.w)
    for k in comps:
        coef = -rep.zdiag[k] * path.dw
        g = np.zeros(path.w.shape, dtype=complex)
        row = rep.F[k]
        for j in np.nonzero(row)[0]:
            if j not in out:
                raise ExtractionError("component solved before its forcing terms")
            g += row[j] * out[j][0]
        g *= fac
        rev, start = plan[k]
        out[k] = _kernels.collocation_sweep(np.ascontiguousarray(coef), np.ascontiguousarray(g),
                                            path.delta, complex(start), bool(rev), _A, _B)
    return out


# -- canonical solutions -------------------------------------------------------

@dataclass
class _Setup:
    rep: MatrixRep
    series: list
    R: float
    rho: float
    lam: float


def _setup(rep: MatrixRep, rho: float | None = None) -> _Setup:
    nz = rep.totals > 0
    if not nz.any():
        return _Setup(rep, [np.eye(rep.dim)[0]], 1.0, 1.0, 1.0)
    mags = np.abs(rep.zdiag[nz])
    lam, zmin = mags.max(), mags.min()
    series = formal_series_vectors(rep, SERIES_TERMS)
    norms = np.array([np.abs(h).max() for h in series])
    R = 4.0 / zmin
    while True:
        k = np.arange(len(series))
        with np.errstate(divide="ignore", over="ignore"):
            terms = norms * float(R) ** (-k.astype(float))
        if terms[1:].min() <= SERIES_TOL or norms[1:].max() == 0:
            break
        R *= 1.25
        if R * zmin > 400:
            raise StiffnessError("asymptotic series does not reach the target accuracy")
    if rho is None:
        rho = 1.0 / lam
    # the inward legs must start outside the anchor circle
    R = max(R, 1.25 * rho)
    return _Setup(rep, series, float(R), float(rho), float(lam))


def _series_value(st: _Setup, w: complex) -> np.ndarray:
    norms = np.array([np.abs(h).max() for h in st.series])
    k = np.arange(len(st.series))
    terms = norms * abs(w) ** (-k.astype(float))
    if norms[1:].max() == 0:
        stop = 1
    else:
        stop = 1 + int(np.argmin(terms[1:]))
    v = np.zeros(st.rep.dim, dtype=complex)
    for j in range(stop):
        v += st.series[j] * w ** (-j)
    return v


def _leg_direction(z: complex, psi_r: float) -> float:
    """Direction of the ray on which the weight with charge z is integrated inwards.

    The leg stays as close to the centre of the sector as the stability of
    the mode allows; exponentially small corrections to the asymptotic
    series grow as the leg approaches the edge of the sector.
    """
    c = math.pi - cmath.phase(z)
    d = _wrap(c - psi_r)
    if abs(d) >= math.pi - 1e-9:
        raise RayError("ray is a Stokes ray for this connection")
    m = (math.pi - abs(d)) / 4
    x = max(0.0, abs(d) - math.pi / 2 + m)
    return psi_r + math.copysign(x, d)


def _leg_radius(st: _Setup, psi: float, psi_r: float) -> float:
    return st.R / max(math.cos(psi - psi_r), 0.02)


def _radial_plan(st: _Setup, psi: float, R: float, lower, top, lower_at: dict):
    rep = st.rep
    start = _series_value(st, R * cmath.exp(1j * psi))
    u = cmath.exp(1j * psi)
    plan = {}
    for k in lower:
        rate = (rep.zdiag[k] * u).real
        if rate * (R - st.rho) < 2.0:
            plan[k] = (True, start[k])
        else:
            plan[k] = (False, lower_at[k])
    for k in top:
        plan[k] = (True, start[k])
    return plan


def _canonical_at(st: _Setup, psi_r: float, psi_a: float, refine: float = 1.0) -> np.ndarray:
    rep = st.rep
    if abs(_wrap(psi_a - psi_r)) >= math.pi / 2:
        raise RayError("anchor point is outside the half plane of the ray")
    psi_a = psi_r + _wrap(psi_a - psi_r)
    val = np.zeros(rep.dim, dtype=complex)
    val[0] = 1.0
    groups: dict = {}
    for i, g in enumerate(rep.weights):
        if any(g):
            groups.setdefault(g, []).append(i)
    order = sorted(groups, key=lambda g: (dv_total(g), g))
    for g in order:
        top = groups[g]
        tot = dv_total(g)
        lower = [i for i in range(rep.dim) if rep.totals[i] < tot]
        lower.sort(key=lambda i: rep.totals[i])
        psi = _leg_direction(rep.zdiag[top[0]], psi_r)
        lam = np.abs(rep.zdiag[lower + top]).max()
        arc1 = _arc_path(st.rho, psi_a, psi, lam, refine)
        sol1 = _solve_path(rep, arc1, lower, {k: (False, val[k]) for k in lower})
        lower_at = {k: sol1[k][2][-1] for k in lower}
        R = _leg_radius(st, psi, psi_r)
        leg = _radial_path(psi, st.rho, R, lam, refine)
        sol = _solve_path(rep, leg, lower + top, _radial_plan(st, psi, R, lower, top, lower_at))
        arc2 = _arc_path(st.rho, psi, psi_a, lam, refine)
        plan = {k: (False, lower_at[k]) for k in lower}
        plan.update({k: (False, sol[k][2][0]) for k in top})
        sol2 = _solve_path(rep, arc2, lower + top, plan)
        for k in top:
            val[k] = sol2[k][2][-1]
    return val


def _t_to_psi(theta: float) -> float:
    return -theta


@dataclass
class CanonicalSolution:
    """Canonical solution H_r sampled along the ray r (as t = 1/w)."""

    ray: RaySpec
    t: np.ndarray            # sample points on the ray (interval ends)
    H: np.ndarray            # (len(t), dim) values of H_r at the samples
    anchor_t: complex
    anchor_value: np.ndarray
    rep: MatrixRep = field(repr=False)
    info: dict = field(default_factory=dict)
    _path: _Path | None = field(default=None, repr=False)
    _sol: dict | None = field(default=None, repr=False)

    def gauge_residual(self) -> float:
        """Max |H' + (D + F/w) H| at interval midpoints, from the collocation polynomials."""
        path, sol, rep = self._path, self._sol, self.rep
        tau = 0.5
        lag = np.zeros(NODES)
        integ = np.zeros(NODES)
        for j in range(NODES):
            others = np.delete(_C, j)
            poly = np.poly1d(np.poly(others)) / np.prod(_C[j] - others)
            lag[j] = poly(tau)
            integ[j] = poly.integ()(tau) - poly.integ()(0.0)
        worst = 0.0
        n = len(path.delta)
        for i in range(n):
            w, dw = path.at(i, tau)
            vals = {}
            ders = {}
            for k, (U, K, E) in sol.items():
                vals[k] = E[i] + path.delta[i] * (K[i] @ integ)
                ders[k] = K[i] @ lag
            for k in sol:
                rhs = -rep.zdiag[k] * vals[k] - sum(rep.F[k, j] * vals[j] for j in sol
                                                    if rep.F[k, j] != 0) / w
                scale = max(1.0, abs(vals[k]))
                worst = max(worst, abs(ders[k] - dw * rhs) / scale)
        return worst


def integrate_ray(rep: MatrixRep, r: RaySpec, t0: float | None = None, t1: float | None = None,
                  refine: float = 1.0) -> CanonicalSolution:
    """Canonical solution along the ray r between |t| = t0 and |t| = t1."""
    theta = math.pi * r.phase
    psi_r = _t_to_psi(theta)
    st = _setup(rep, None if t1 is None else 1.0 / t1)
    if t0 is not None:
        st.R = max(st.R, 1.0 / t0)
    anchor = _canonical_at(st, psi_r, psi_r, refine)
    comps = sorted(range(rep.dim), key=lambda i: rep.totals[i])
    lam = np.abs(rep.zdiag).max() if rep.dim > 1 else 1.0
    leg = _radial_path(psi_r, st.rho, st.R, lam, refine)
    start = _series_value(st, st.R * cmath.exp(1j * psi_r))
    u = cmath.exp(1j * psi_r)
    plan = {}
    for k in comps:
        rate = (rep.zdiag[k] * u).real
        if k == 0:
            plan[k] = (False, 1.0)
        elif rate * (st.R - st.rho) < 2.0:
            plan[k] = (True, start[k])
        else:
            plan[k] = (False, anchor[k])
    sol = _solve_path(rep, leg, comps, plan)
    H = np.array([sol[k][2] for k in range(rep.dim)]).T
    t = 1.0 / leg.ends
    return CanonicalSolution(r, t, H, 1.0 / (st.rho * u), anchor, rep,
                             {"R": st.R, "rho": st.rho, "intervals": len(leg.delta)}, leg, sol)


def canonical_value(rep: MatrixRep, r: RaySpec, t: complex, refine: float = 1.0) -> np.ndarray:
    """H_r(t) for t in the half plane of r."""
    st = _setup(rep)
    w = 1.0 / t
    if abs(_wrap(cmath.phase(w) - _t_to_psi(math.pi * r.phase))) >= math.pi / 2:
        raise RayError("t is outside the half plane of the ray")
    if abs(w) >= st.R:
        # arcs this far out are exponentially ill conditioned; the series is already exact
        return _series_value(st, w)
    st = _setup(rep, abs(w))
    return _canonical_at(st, _t_to_psi(math.pi * r.phase), -cmath.phase(t), refine)


def transport(rep: MatrixRep, h0: np.ndarray, t_start: complex, t_end: complex,
              refine: float = 1.0) -> np.ndarray:
    """Integrate the full system along a radial segment or a circular arc in t."""
    comps = sorted(range(rep.dim), key=lambda i: rep.totals[i])
    lam = max(np.abs(rep.zdiag).max(), 1e-300)
    w0, w1 = 1 / t_start, 1 / t_end
    if abs(abs(w0) - abs(w1)) < 1e-14 * abs(w0):
        phi0 = cmath.phase(w0)
        phi1 = phi0 + _wrap(cmath.phase(w1) - phi0)
        path = _arc_path(abs(w0), phi0, phi1, lam, refine)
    elif abs(_wrap(cmath.phase(w0) - cmath.phase(w1))) < 1e-14:
        lo, hi = sorted((abs(w0), abs(w1)))
        path = _radial_path(cmath.phase(w0), lo, hi, lam, refine)
        rev = abs(w0) > abs(w1)
        sol = _solve_path(rep, path, comps, {k: (rev, h0[k]) for k in comps})
        return np.array([sol[k][2][0 if rev else -1] for k in range(rep.dim)])
    else:
        raise RayError("transport supports radial segments and arcs only")
    sol = _solve_path(rep, path, comps, {k: (False, h0[k]) for k in comps})
    return np.array([sol[k][2][-1] for k in range(rep.dim)])


def _arc_transport(st: _Setup, h0, psi0: float, psi1: float, refine: float) -> np.ndarray:
    rep = st.rep
    comps = sorted(range(rep.dim), key=lambda i: rep.totals[i])
    path = _arc_path(st.rho, psi0, psi1, st.lam, refine)
    sol = _solve_path(rep, path, comps, {k: (False, h0[k]) for k in comps})
    return np.array([sol[k][2][-1] for k in range(rep.dim)])


# -- Stokes data -----------------------------------------------------------------

def stokes_directions(rep: MatrixRep) -> list[float]:
    """Arguments (in radians) of Z on all nonzero weights of the representation."""
    out = []
    for g, z in zip(rep.weights, rep.zdiag):
        if any(g):
            a = cmath.phase(z)
            if not any(abs(_wrap(a - b)) < 1e-12 for b in out):
                out.append(a)
    return sorted(out)


def _conjugated(rep: MatrixRep, vec: np.ndarray, w: complex) -> np.ndarray:
    return vec * np.exp(rep.zdiag * w)


def _product(rep: MatrixRep, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return rep.left_mult(a) @ b


def _inverse(rep: MatrixRep, a: np.ndarray) -> np.ndarray:
    return rep.vector(inverse_envelope(rep.element(a)))


@dataclass
class StokesExtraction:
    factor: EnvelopeElement
    leakage: float
    error_estimate: float
    rays: tuple


def _factor_once(rep, theta_l, d_minus, d_plus, refine):
    st = _setup(rep)
    psi_a = _t_to_psi(theta_l)
    hp = _canonical_at(st, _t_to_psi(theta_l - d_plus), psi_a, refine)
    hm = _canonical_at(st, _t_to_psi(theta_l + d_minus), psi_a, refine)
    w = st.rho * cmath.exp(1j * psi_a)
    return _conjugated(rep, _product(rep, _inverse(rep, hm), hp), w)


def extract_stokes_factor(rep: MatrixRep, ray: RaySpec, estimate_error: bool = True
                          ) -> StokesExtraction:
    """S_l with Y_{r+} = Y_{r-} S_l, r+ (r-) a clockwise (anticlockwise) perturbation of l."""
    theta = math.pi * ray.phase
    dirs = stokes_directions(rep)
    others = [_wrap(a - theta) for a in dirs if abs(_wrap(a - theta)) > 1e-12]
    gap_plus = min([-x for x in others if x < 0] + [math.pi / 2])
    gap_minus = min([x for x in others if x > 0] + [math.pi / 2])
    d_plus, d_minus = gap_plus / 2, gap_minus / 2
    vec = _factor_once(rep, theta, d_minus, d_plus, 1.0)
    err = 0.0
    if estimate_error:
        vec2 = _factor_once(rep, theta, d_minus, d_plus, 0.5)
        err = float(np.abs(vec2 - vec).max())
    leak = 0.0
    clean = np.zeros_like(vec)
    clean[0] = vec[0]
    for i, z in enumerate(rep.zdiag):
        if i == 0:
            continue
        if ray.contains(z, 1e-9):
            clean[i] = vec[i]
        else:
            leak = max(leak, abs(vec[i]))
    if abs(vec[0] - 1) > 1e-8:
        leak = max(leak, abs(vec[0] - 1))
    if leak > LEAK_FAIL:
        raise ExtractionError(f"off-ray components of size {leak:.2e} on the ray of phase "
                              f"{ray.phase} (sector {theta - d_plus:.4f}..{theta + d_minus:.4f})")
    return StokesExtraction(rep.element(clean), leak, err, (theta - d_plus, theta + d_minus))


def extract_stokes_multipliers(rep: MatrixRep, r: RaySpec, refine: float = 1.0
                               ) -> tuple[EnvelopeElement, EnvelopeElement]:
    """(S+, S-) defined by Y_{r,+-} = Y_{-r} S_+-, continuation anticlockwise (+) or clockwise (-)."""
    theta = math.pi * r.phase
    st = _setup(rep)
    psi_r = _t_to_psi(theta)
    psi_m = _t_to_psi(theta + math.pi)
    h = _canonical_at(st, psi_r, psi_r, refine)
    h_plus = _arc_transport(st, h, psi_r, psi_r - math.pi, refine)
    h_minus = _arc_transport(st, h, psi_r, psi_r + math.pi, refine)
    hm = _canonical_at(st, psi_m, psi_m, refine)
    w = st.rho * cmath.exp(1j * psi_m)
    inv = _inverse(rep, hm)
    sp = _conjugated(rep, _product(rep, inv, h_plus), w)
    sm = _conjugated(rep, _product(rep, inv, h_minus), w)
    return rep.element(sp), rep.element(sm)
