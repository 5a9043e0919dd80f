"""Hall algebra of the equioriented A_N quiver, truncated at total dimension d.

Modules are multisets of intervals [a, b].  The Hall product is the
Euler-characteristic count of flags; by torus localisation it equals the
count of coordinate flags, i.e. flags spanned by subsets of the interval
bases.  The coordinate submodules of [a, b] are the suffixes [c, b].
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, TruncationError
from .graded import (EnvelopeElement, GradedLieElement, LieAlgebraSpec, dv_add, dv_total,
                     dvs_up_to, dump_coeff, parse_coeff)

Interval = tuple


@dataclass(frozen=True)
class QuiverSpec:
    N: int
    d: int

    def __post_init__(self):
        if self.N < 1 or self.d < 1:
            raise ConfigurationError("QuiverSpec needs N >= 1 and d >= 1")


def intervals(N: int) -> list[Interval]:
    return [(a, b) for a in range(1, N + 1) for b in range(a, N + 1)]


def interval_class(iv: Interval, N: int) -> tuple:
    a, b = iv
    return tuple(1 if a <= i <= b else 0 for i in range(1, N + 1))


@dataclass(frozen=True, order=True)
class IsoClass:
    """Direct sum of interval modules, stored as a sorted tuple of intervals."""

    N: int
    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple(sorted(tuple(iv) for iv in self.intervals))
        for a, b in ivs:
            if not 1 <= a <= b <= self.N:
                raise DomainError(f"bad interval [{a},{b}] for N={self.N}")
        object.__setattr__(self, "intervals", ivs)

    @property
    def cls(self) -> tuple:
        v = [0] * self.N
        for a, b in self.intervals:
            for i in range(a - 1, b):
                v[i] += 1
        return tuple(v)

    @property
    def dim(self) -> int:
        return sum(b - a + 1 for a, b in self.intervals)

    def is_zero(self) -> bool:
        return not self.intervals

    def is_indecomposable(self) -> bool:
        return len(self.intervals) == 1

    def __add__(self, other: "IsoClass") -> "IsoClass":
        return IsoClass(self.N, self.intervals + other.intervals)

    def __str__(self):
        if not self.intervals:
            return "0"
        return "+".join(f"[{a},{b}]" for a, b in self.intervals)

    def to_json(self):
        return [list(iv) for iv in self.intervals]

    @classmethod
    def parse(cls, N: int, data) -> "IsoClass":
        return cls(N, tuple(tuple(iv) for iv in data))


def enumerate_iso_classes(N: int, gamma: tuple, d: int | None = None) -> list[IsoClass]:
    """All multisets of intervals with class gamma, in lexicographic order."""
    gamma = tuple(gamma)
    if len(gamma) != N or any(x < 0 for x in gamma):
        raise DomainError(f"bad class {gamma}")
    if d is not None and dv_total(gamma) > d:
        raise TruncationError(f"class {gamma} exceeds truncation {d}")
    ivs = intervals(N)
    out = []

    def rec(i, rest, chosen):
        if not any(rest):
            out.append(IsoClass(N, tuple(chosen)))
            return
        if i == len(ivs):
            return
        a, b = ivs[i]
        cap = min(rest[a - 1:b])
        for k in range(cap, -1, -1):
            nxt = list(rest)
            for j in range(a - 1, b):
                nxt[j] -= k
            rec(i + 1, nxt, chosen + [ivs[i]] * k)

    rec(0, list(gamma), [])
    return sorted(out, key=lambda m: m.intervals)


def coordinate_subreps(M: IsoClass) -> list[tuple[IsoClass, IsoClass]]:
    """All coordinate submodules with their quotients, with multiplicity."""
    choices = []
    for a, b in M.intervals:
        choices.append([((c, b) if c <= b else None, (a, c - 1) if c > a else None)
                        for c in range(a, b + 2)])
    out = []
    for pick in iproduct(*choices):
        sub = tuple(s for s, _ in pick if s is not None)
        quo = tuple(q for _, q in pick if q is not None)
        out.append((IsoClass(M.N, sub), IsoClass(M.N, quo)))
    return out


# -- precomputed algebra -------------------------------------------------------

class HallAlgebra:
    """Iso-classes up to dimension d and the structure constants of the product."""

    def __init__(self, spec: QuiverSpec):
        self.spec = spec
        N, d = spec.N, spec.d
        self.classes = dvs_up_to(N, d, include_zero=True)
        self.iso: list[IsoClass] = []
        self.by_class: dict = {}
        for g in self.classes:
            ms = enumerate_iso_classes(N, g)
            self.by_class[g] = list(range(len(self.iso), len(self.iso) + len(ms)))
            self.iso.extend(ms)
        self.index = {m: i for i, m in enumerate(self.iso)}
        self.class_of = [m.cls for m in self.iso]
        self.size = len(self.iso)
        # tables[gamma][beta_sub] = (m, a, b, mult) arrays
        self.tables: dict = {}
        for g in self.classes:
            per: dict = {}
            for mi in self.by_class[g]:
                cnt = Counter((self.index[s], self.index[q]) for s, q in coordinate_subreps(self.iso[mi]))
                for (a, b), k in cnt.items():
                    per.setdefault(self.class_of[a], []).append((mi, a, b, k))
            self.tables[g] = {beta: tuple(np.array(col, dtype=np.int64) for col in zip(*rows))
                              for beta, rows in per.items()}
        self.max_mult = max((int(t[3].max()) for tb in self.tables.values() for t in tb.values()),
                            default=1)
        self.max_terms = max((sum(len(t[0]) for t in tb.values()) for tb in self.tables.values()),
                             default=1)

    def zero_index(self) -> int:
        return self.by_class[self.classes[0]][0]


@lru_cache(maxsize=None)
def hall_algebra(N: int, d: int) -> HallAlgebra:
    return HallAlgebra(QuiverSpec(N, d))


def _algebra_of(spec) -> HallAlgebra:
    if isinstance(spec, HallAlgebra):
        return spec
    return hall_algebra(spec.N, spec.d)


# -- dense products --------------------------------------------------------------

_INT_LIMIT = 2 ** 62


def dense_product_int(alg: HallAlgebra, f: np.ndarray, g: np.ndarray,
                      f_classes=None, g_classes=None, out_filter=None) -> np.ndarray:
    """Hall product of two integer vectors over all iso-classes (int64, bounds checked)."""
    out = np.zeros(alg.size, dtype=np.int64)
    fmax = int(np.abs(f).max()) if f.size else 0
    gmax = int(np.abs(g).max()) if g.size else 0
    if fmax == 0 or gmax == 0:
        return out
    if fmax * gmax * alg.max_mult * alg.max_terms >= _INT_LIMIT:
        raise OverflowError("integer Hall product may overflow int64")
    fc = f_classes if f_classes is not None else _support_classes(alg, f)
    gc = set(g_classes if g_classes is not None else _support_classes(alg, g))
    d = alg.spec.d
    for ba in fc:
        for bb in gc:
            gamma = dv_add(ba, bb)
            if dv_total(gamma) > d or (out_filter is not None and gamma not in out_filter):
                continue
            t = alg.tables[gamma].get(ba)
            if t is not None:
                _kernels.hall_accumulate_int(t[0], t[1], t[2], t[3], f, g, out)
    return out


def dense_product_complex(alg: HallAlgebra, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = np.zeros(alg.size, dtype=complex)
    fc = _support_classes(alg, f)
    gc = set(_support_classes(alg, g))
    d = alg.spec.d
    for ba in fc:
        for bb in gc:
            gamma = dv_add(ba, bb)
            if dv_total(gamma) > d:
                continue
            t = alg.tables[gamma].get(ba)
            if t is not None:
                _kernels.hall_accumulate_complex(t[0], t[1], t[2], t[3], f, g, out)
    return out


def dense_product_object(alg: HallAlgebra, f: list, g: list) -> list:
    """Arbitrary-precision fallback (Python ints or Fractions)."""
    out = [0] * alg.size
    d = alg.spec.d
    fc = {alg.class_of[i] for i, v in enumerate(f) if v}
    gc = {alg.class_of[i] for i, v in enumerate(g) if v}
    for ba in fc:
        for bb in gc:
            gamma = dv_add(ba, bb)
            if dv_total(gamma) > d:
                continue
            t = alg.tables[gamma].get(ba)
            if t is None:
                continue
            for m, a, b, k in zip(*(col.tolist() for col in t)):
                if f[a] and g[b]:
                    out[m] += k * f[a] * g[b]
    return out


def _support_classes(alg: HallAlgebra, v: np.ndarray) -> list:
    return sorted({alg.class_of[i] for i in np.nonzero(v)[0]})


# -- Hall elements ---------------------------------------------------------------

class HallElement:
    """Finitely supported function on iso-classes of dimension <= d."""

    __slots__ = ("alg", "values")

    def __init__(self, spec, values: Mapping | None = None):
        self.alg = _algebra_of(spec)
        self.values = {}
        for m, v in (values or {}).items():
            if m.N != self.alg.spec.N:
                raise DomainError("iso-class has the wrong rank")
            if m.dim > self.alg.spec.d:
                continue
            if v != 0:
                self.values[m] = v

    @property
    def spec(self) -> QuiverSpec:
        return self.alg.spec

    def __call__(self, M: IsoClass):
        return self.values.get(M, 0)

    def _check(self, other):
        if self.alg.spec != other.alg.spec:
            raise DomainError("Hall elements over different quiver specs")

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values.values())

    def support(self) -> list[IsoClass]:
        return sorted(self.values, key=lambda m: (m.dim, m.cls, m.intervals))

    def support_classes(self) -> list:
        return sorted({m.cls for m in self.values}, key=lambda g: (sum(g), g))

    def component(self, gamma) -> "HallElement":
        gamma = tuple(gamma)
        return HallElement(self.alg, {m: v for m, v in self.values.items() if m.cls == gamma})

    def truncate(self, d: int) -> "HallElement":
        if d > self.spec.d:
            raise TruncationError(f"cannot raise truncation {self.spec.d} -> {d}")
        return HallElement(self.alg, {m: v for m, v in self.values.items() if m.dim <= d})

    def map(self, fn) -> "HallElement":
        return HallElement(self.alg, {m: fn(v) for m, v in self.values.items()})

    def __add__(self, other):
        if not isinstance(other, HallElement):
            other = one(self.alg) * other
        self._check(other)
        out = dict(self.values)
        for m, v in other.values.items():
            out[m] = out.get(m, 0) + v
        return HallElement(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HallElement):
            return hall_product([self, other])
        return self.map(lambda v: v * other)

    def __rmul__(self, s):
        return self.map(lambda v: s * v)

    def __eq__(self, other):
        return isinstance(other, HallElement) and self.spec == other.spec \
            and self.values == other.values

    def __repr__(self):
        items = ", ".join(f"{m}: {v}" for m, v in
                          sorted(self.values.items(), key=lambda kv: (kv[0].dim, kv[0].intervals)))
        return f"HallElement({{{items}}})"

    def distance(self, other: "HallElement") -> float:
        return max((abs(complex(v)) for v in (self - other).values.values()), default=0.0)

    # dense conversion
    def dense_int(self) -> tuple[np.ndarray, int] | None:
        """(numerators, common denominator) when values are rational and fit in int64."""
        if not self.is_exact():
            return None
        den = lcm(*(Fraction(v).denominator for v in self.values.values())) if self.values else 1
        nums = [0] * self.alg.size
        for m, v in self.values.items():
            nums[self.alg.index[m]] = int(Fraction(v) * den)
        if max((abs(x) for x in nums), default=0) >= 2 ** 62:
            return None
        return np.array(nums, dtype=np.int64), den

    def dense_complex(self) -> np.ndarray:
        v = np.zeros(self.alg.size, dtype=complex)
        for m, c in self.values.items():
            v[self.alg.index[m]] = complex(c)
        return v

    @classmethod
    def from_dense(cls, alg, vec, den=1) -> "HallElement":
        alg = _algebra_of(alg)
        vals = {}
        for i in np.nonzero(vec)[0] if isinstance(vec, np.ndarray) else \
                [i for i, x in enumerate(vec) if x]:
            x = vec[i]
            if isinstance(x, (np.integer, int)):
                vals[alg.iso[i]] = Fraction(int(x), den)
            elif isinstance(x, Fraction):
                vals[alg.iso[i]] = x / den
            else:
                vals[alg.iso[i]] = complex(x) / den
        return cls(alg, vals)

    def to_json(self) -> dict:
        graded: dict = {}
        for m in self.support():
            key = ",".join(str(x) for x in m.cls)
            graded.setdefault(key, []).append([m.to_json(), dump_coeff(self.values[m])])
        return {"class-graded": graded}

    @classmethod
    def from_json(cls, spec, data) -> "HallElement":
        alg = _algebra_of(spec)
        vals = {}
        for rows in data["class-graded"].values():
            for m, v in rows:
                vals[IsoClass.parse(alg.spec.N, m)] = parse_coeff(v)
        return cls(alg, vals)


def _binary(f: HallElement, g: HallElement) -> HallElement:
    f._check(g)
    alg = f.alg
    if not f.values or not g.values:
        return HallElement(alg)
    fi, gi = f.dense_int(), g.dense_int()
    if fi is not None and gi is not None:
        try:
            out = dense_product_int(alg, fi[0], gi[0])
            return HallElement.from_dense(alg, out, fi[1] * gi[1])
        except OverflowError:
            pass
    if f.is_exact() and g.is_exact():
        fv = [0] * alg.size
        gv = [0] * alg.size
        for m, v in f.values.items():
            fv[alg.index[m]] = Fraction(v)
        for m, v in g.values.items():
            gv[alg.index[m]] = Fraction(v)
        out = dense_product_object(alg, fv, gv)
        return HallElement(alg, {alg.iso[i]: x for i, x in enumerate(out) if x})
    out = dense_product_complex(alg, f.dense_complex(), g.dense_complex())
    return HallElement.from_dense(alg, out)


def hall_product(factors: Iterable[HallElement]) -> HallElement:
    """Iterated Hall product f1 * f2 * ... * fn (1_0 for the empty product)."""
    factors = list(factors)
    if not factors:
        raise DomainError("hall_product needs at least one factor")
    acc = factors[0]
    for f in factors[1:]:
        acc = _binary(acc, f)
    return acc


def zero_module(N: int) -> IsoClass:
    return IsoClass(N, ())


def one(spec) -> HallElement:
    alg = _algebra_of(spec)
    return HallElement(alg, {zero_module(alg.spec.N): Fraction(1)})


def indicator(spec, M: IsoClass) -> HallElement:
    return HallElement(spec, {M: Fraction(1)})


def kappa(spec, gamma) -> HallElement:
    alg = _algebra_of(spec)
    gamma = tuple(gamma)
    if dv_total(gamma) > alg.spec.d:
        raise TruncationError(f"class {gamma} exceeds truncation")
    return HallElement(alg, {alg.iso[i]: Fraction(1) for i in alg.by_class[gamma]})


def splus(spec) -> HallElement:
    """The function with value 1 on every module of dimension <= d."""
    alg = _algebra_of(spec)
    return HallElement(alg, {m: Fraction(1) for m in alg.iso})


def coproduct_eval(f: HallElement, M: IsoClass, N: IsoClass):
    return f(M + N)


def is_primitive(f: HallElement) -> bool:
    return all(m.is_indecomposable() for m in f.values)


def is_grouplike(f: HallElement) -> bool:
    if f(zero_module(f.spec.N)) != 1:
        return False
    alg = f.alg
    d = alg.spec.d
    for M in alg.iso:
        fm = f(M)
        for N in alg.iso:
            if M.dim + N.dim > d:
                continue
            if f(M + N) != fm * f(N):
                return False
    return True


def hall_exp(x: HallElement) -> HallElement:
    if x(zero_module(x.spec.N)) != 0:
        raise DomainError("exp needs an element vanishing on the zero module")
    exact = x.is_exact()
    result = one(x.alg)
    term = one(x.alg)
    for n in range(1, x.spec.d + 1):
        term = term * x
        if not term.values:
            break
        result = result + term * (Fraction(1, _fact(n)) if exact else 1.0 / _fact(n))
    return result


def hall_log(g: HallElement) -> HallElement:
    z = zero_module(g.spec.N)
    if g(z) != 1 and abs(complex(g(z)) - 1) > 1e-12:
        raise DomainError("log needs value 1 on the zero module")
    y = g - one(g.alg) * g(z)
    exact = y.is_exact()
    result = HallElement(g.alg)
    term = one(g.alg)
    for n in range(1, g.spec.d + 1):
        term = term * y
        if not term.values:
            break
        c = Fraction((-1) ** (n - 1), n) if exact else (-1) ** (n - 1) / n
        result = result + term * c
    return result


def _fact(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


# -- the Lie algebra of primitive elements -----------------------------------------

def interval_label(iv: Interval) -> Interval:
    return tuple(iv)


@lru_cache(maxsize=None)
def hall_lie_spec(N: int, d: int) -> LieAlgebraSpec:
    """Primitive part of the Hall algebra: basis the indicators of indecomposables."""
    alg = hall_algebra(N, d)
    labs = [iv for iv in intervals(N) if interval_class(iv, N) and
            dv_total(interval_class(iv, N)) <= d]
    degrees = {iv: interval_class(iv, N) for iv in labs}
    brackets = {}
    for i, p in enumerate(labs):
        for q in labs[i + 1:]:
            if dv_total(degrees[p]) + dv_total(degrees[q]) > d:
                continue
            x, y = indicator(alg, IsoClass(N, (p,))), indicator(alg, IsoClass(N, (q,)))
            c = x * y - y * x
            if not is_primitive(c):
                raise ConfigurationError("Hall commutator is not primitive")
            res = {m.intervals[0]: v for m, v in c.values.items()}
            if res:
                brackets[(p, q)] = res
    return LieAlgebraSpec(N, d, degrees, brackets, name=f"hall-A{N}")


def lie_to_hall(x: GradedLieElement, spec=None) -> HallElement:
    N, d = x.spec.rank, x.spec.truncation
    alg = _algebra_of(spec) if spec is not None else hall_algebra(N, d)
    return HallElement(alg, {IsoClass(N, (lab,)): c for lab, c in x.coeffs.items()})


def hall_to_lie(f: HallElement) -> GradedLieElement:
    if not is_primitive(f):
        raise DomainError("only primitive Hall elements lie in the Lie algebra")
    spec = hall_lie_spec(f.spec.N, f.spec.d)
    return GradedLieElement(spec, {m.intervals[0]: v for m, v in f.values.items()})


def realize(el: EnvelopeElement, spec=None) -> HallElement:
    """Image of a word-basis element under letters -> indicators of indecomposables."""
    lspec = el.spec
    alg = _algebra_of(spec) if spec is not None else hall_algebra(lspec.rank, lspec.truncation)
    N = alg.spec.N
    cache: dict = {(): one(alg)}

    def word_value(w):
        if w not in cache:
            cache[w] = word_value(w[:-1]) * indicator(alg, IsoClass(N, (w[-1],)))
        return cache[w]

    out = HallElement(alg)
    for w, c in sorted(el.terms.items(), key=lambda kv: len(kv[0])):
        out = out + word_value(w) * c
    return out
