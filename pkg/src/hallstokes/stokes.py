"""The transforms between f, epsilon, delta and kappa in the truncated envelope.

Word coefficients follow the ordering convention fixed by the ODE oracle:
a word f_{a1}...f_{an} carries delta_coefficient / epsilon_coefficient of
(Z(a1), ..., Z(an)).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .charges import CentralCharge, RaySpec
from .errors import ConfigurationError, DomainError, OrderingError, SingularConfigurationError
from .graded import (EnvelopeElement, GradedLieElement, LieAlgebraSpec, dv_le, dv_sub,
                     dv_total, exp_envelope, lie_projection, log_grouplike)
from .special import TWO_PI_I, J_value, delta_coefficient, epsilon_coefficient
from .stability import group_rays


@dataclass
class RayFactor:
    """Stokes factor 1 + sum of delta_gamma over the classes on one ray."""

    ray: RaySpec
    classes: list
    element: EnvelopeElement

    def delta(self, gamma) -> EnvelopeElement:
        return self.element.component(tuple(gamma))


@dataclass
class Provenance:
    """Which special-function evaluations entered each degree."""

    by_degree: dict = field(default_factory=dict)

    def record(self, gamma, fn: str, n: int):
        key = ",".join(map(str, gamma))
        self.by_degree.setdefault(key, Counter())[f"{fn}_{n}"] += 1

    def to_json(self) -> dict:
        return {k: dict(sorted(v.items())) for k, v in sorted(self.by_degree.items())}


def _label_z(Z: CentralCharge, spec: LieAlgebraSpec, labels) -> dict:
    out = {}
    for lab in labels:
        z = Z(spec.degree(lab))
        if z == 0:
            raise SingularConfigurationError(f"Z vanishes on the degree of {lab!r}")
        out[lab] = z
    return out


def _words(spec: LieAlgebraSpec, labels, max_total: int, exact_total=None):
    """Words over labels with total degree <= max_total (or == exact_total)."""
    tot = {lab: dv_total(spec.degree(lab)) for lab in labels}
    out = []

    def rec(prefix, t):
        if prefix and (exact_total is None or t == exact_total):
            out.append(tuple(prefix))
        for lab in labels:
            if t + tot[lab] <= max_total:
                rec(prefix + [lab], t + tot[lab])

    rec([], 0)
    return out


def word_series(Z: CentralCharge, x: GradedLieElement, coeff, fn_name: str = "L",
                exact_total=None, prov: Provenance | None = None) -> EnvelopeElement:
    """Sum over words w of coeff(Z(w)) * x_{w1} ... x_{wn}."""
    spec = x.spec
    labels = sorted(x.coeffs, key=spec.index)
    zs = _label_z(Z, spec, labels)
    d = spec.truncation if exact_total is None else exact_total
    terms = {}
    for w in _words(spec, labels, d, exact_total):
        c = 1
        for lab in w:
            c = c * x.coeffs[lab]
        c = complex(c) * coeff(tuple(zs[lab] for lab in w))
        terms[w] = terms.get(w, 0) + c
        if prov is not None:
            prov.record(spec.word_degree(w), fn_name, len(w))
    return EnvelopeElement(spec, terms, check=False)


def stokes_forward(Z: CentralCharge, f: GradedLieElement,
                   prov: Provenance | None = None) -> GradedLieElement:
    """epsilon = sum of L_n(Z(a1..an)) f_{a1}...f_{an}, as a Lie element."""
    return lie_projection(word_series(Z, f, epsilon_coefficient, "L", prov=prov))


def delta_from_f(Z: CentralCharge, f: GradedLieElement,
                 prov: Provenance | None = None) -> list[RayFactor]:
    """Stokes factors 1 + sum delta_gamma grouped by ray, clockwise order."""
    series = word_series(Z, f, delta_coefficient, "M", prov=prov)
    return _group_factors(Z, f.spec, series)


def _group_factors(Z: CentralCharge, spec: LieAlgebraSpec, series: EnvelopeElement) -> list[RayFactor]:
    comps = {g: c for g, c in series.by_degree().items() if any(g) and c.terms}
    out = []
    for group in group_rays(Z, list(comps)):
        el = EnvelopeElement.one(spec)
        for g in group:
            el = el + comps[g]
        out.append(RayFactor(RaySpec.through(Z(group[0])), sorted(group), el))
    return out


def stokes_inverse(Z: CentralCharge, eps: GradedLieElement,
                   prov: Provenance | None = None) -> GradedLieElement:
    """The f with stokes_forward(Z, f) = eps, solved degree by degree."""
    spec = eps.spec
    f = GradedLieElement(spec)
    for k in range(1, spec.truncation + 1):
        eps_k = {lab: c for lab, c in eps.coeffs.items() if dv_total(spec.degree(lab)) == k}
        corr = GradedLieElement(spec)
        if k > 1 and f.coeffs:
            corr = lie_projection(word_series(Z, f, epsilon_coefficient, "L", exact_total=k,
                                              prov=prov))
        new = {}
        for lab in set(eps_k) | {l for l in corr.coeffs}:
            v = (complex(eps_k.get(lab, 0)) - complex(corr.coeffs.get(lab, 0))) / TWO_PI_I
            if v != 0:
                new[lab] = v
        if prov is not None:
            for lab in new:
                prov.record(spec.degree(lab), "L", 1)
        f = f + GradedLieElement(spec, new)
    return f


def stokes_inverse_j(Z: CentralCharge, eps: GradedLieElement,
                     prov: Provenance | None = None) -> GradedLieElement:
    """The same inverse summed as a J-series in eps."""
    return lie_projection(word_series(Z, eps, J_value, "J", prov=prov))


# -- per-ray exp / log -----------------------------------------------------------

def _check_ray(Z: CentralCharge, factor: RayFactor):
    for g in factor.element.by_degree():
        if any(g) and not factor.ray.contains(Z(g), tol=1e-9):
            raise ConfigurationError(f"class {g} is not on the ray of phase {factor.ray.phase}")


def exp_per_ray(Z: CentralCharge, eps: GradedLieElement) -> list[RayFactor]:
    spec = eps.spec
    by_class: dict = {}
    for lab, c in eps.coeffs.items():
        by_class.setdefault(spec.degree(lab), {})[lab] = c
    out = []
    for group in group_rays(Z, list(by_class)):
        x = GradedLieElement(spec, {lab: c for g in group for lab, c in by_class[g].items()})
        out.append(RayFactor(RaySpec.through(Z(group[0])), sorted(group),
                             exp_envelope(EnvelopeElement.from_lie(x))))
    return out


def log_per_ray(Z: CentralCharge, factors: list[RayFactor]) -> GradedLieElement:
    if not factors:
        raise DomainError("log_per_ray needs at least one factor")
    spec = factors[0].element.spec
    out = GradedLieElement(spec)
    for fac in factors:
        _check_ray(Z, fac)
        out = out + log_grouplike(fac.element)
    return out


# -- kappa <-> delta ---------------------------------------------------------------

def clockwise_product(factors: list, Z: CentralCharge | None = None) -> EnvelopeElement:
    """Ordered product of (ray, element) pairs, which must be in strictly decreasing phase."""
    if not factors:
        raise DomainError("empty product")
    pairs = [(f.ray, f.element) if isinstance(f, RayFactor) else tuple(f) for f in factors]
    for (r1, _), (r2, _) in zip(pairs, pairs[1:]):
        if not r1.phase > r2.phase + 1e-12:
            raise OrderingError(f"rays not in clockwise order: {r1.phase} then {r2.phase}")
    acc = pairs[0][1]
    for _, el in pairs[1:]:
        acc = acc * el
    return acc


def kappa_from_delta(Z: CentralCharge, factors: list[RayFactor]) -> EnvelopeElement:
    return clockwise_product(factors, Z)


def delta_from_kappa_envelope(Z: CentralCharge, kappa: EnvelopeElement) -> list[RayFactor]:
    """Invert the clockwise product class by class."""
    spec = kappa.spec
    comps = {g: c for g, c in kappa.by_degree().items() if any(g) and c.terms}
    zero_cls = (0,) * spec.rank
    deltas = {}
    for gamma in sorted(comps, key=lambda g: (dv_total(g), g)):
        upper = sorted((b for b in comps if b != gamma and dv_le(b, gamma)
                        and Z.cross_sign(b, gamma) > 0), key=lambda b: (dv_total(b), b))
        P = {zero_cls: EnvelopeElement.one(spec)}
        out = comps[gamma]
        for b in upper:
            acc = EnvelopeElement(spec)
            for c, pc in P.items():
                if dv_le(c, b) and c != b and dv_sub(b, c) in comps:
                    acc = acc - pc * comps[dv_sub(b, c)]
            P[b] = acc
            rest = dv_sub(gamma, b)
            if rest in comps:
                out = out + acc * comps[rest]
        deltas[gamma] = out
    series = EnvelopeElement(spec)
    for el in deltas.values():
        series = series + el
    return _group_factors(Z, spec, series)
