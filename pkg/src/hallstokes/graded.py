"""Truncated graded Lie algebras, their word envelopes, and exp/log.

Elements of the envelope are kept in the word basis: a word is a tuple of
basis labels and its degree is the sum of the label degrees.  Everything is
truncated at a fixed total degree ``d``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .errors import ConfigurationError, DomainError, TruncationError

Label = Hashable
Word = tuple
DimVector = tuple


# -- dimension vectors -------------------------------------------------------

def dv_total(v: DimVector) -> int:
    return sum(v)


def dv_add(a: DimVector, b: DimVector) -> DimVector:
    if len(a) != len(b):
        raise DomainError(f"rank mismatch: {a} vs {b}")
    return tuple(x + y for x, y in zip(a, b))


def dv_sub(a: DimVector, b: DimVector) -> DimVector:
    return tuple(x - y for x, y in zip(a, b))


def dv_le(a: DimVector, b: DimVector) -> bool:
    return all(x <= y for x, y in zip(a, b))


def dv_zero(rank: int) -> DimVector:
    return (0,) * rank


def dv_is_positive(v: DimVector) -> bool:
    return all(x >= 0 for x in v) and any(v)


def dvs_up_to(rank: int, d: int, include_zero: bool = False) -> list[DimVector]:
    """All nonnegative vectors of total <= d, sorted by (total, lex)."""
    out = []

    def rec(prefix, left):
        if len(prefix) == rank:
            out.append(tuple(prefix))
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k)

    rec([], d)
    out = [v for v in out if include_zero or any(v)]
    out.sort(key=lambda v: (sum(v), v))
    return out


# -- coefficient helpers -----------------------------------------------------

def parse_coeff(x) -> Fraction | complex:
    """Rationals are ``"p/q"`` strings, complex numbers are ``[re, im]``."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool):
        raise ConfigurationError(f"bad coefficient {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator() if x == int(x) else complex(x)
    raise ConfigurationError(f"bad coefficient {x!r}")


def dump_coeff(c):
    if isinstance(c, (Fraction, int)):
        c = Fraction(c)
        return f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
    c = complex(c)
    return [c.real, c.imag]


def encode_label(label) -> str:
    if isinstance(label, tuple):
        return json.dumps(list(label))
    return str(label)


def decode_label(s: str):
    if s.startswith("["):
        return tuple(json.loads(s))
    return s


def _is_zero(c) -> bool:
    return c == 0


# -- Lie algebra spec --------------------------------------------------------

class LieAlgebraSpec:
    """A graded nilpotent Lie algebra truncated at total degree ``d``.

    ``degrees`` maps each basis label to its degree; ``brackets`` maps
    ordered label pairs to ``{label: coefficient}``.  Missing pairs are
    zero; antisymmetric partners are filled in automatically.
    """

    def __init__(self, rank: int, truncation: int, degrees: Mapping[Label, DimVector],
                 brackets: Mapping[tuple, Mapping[Label, object]] | None = None,
                 name: str = ""):
        if rank < 1 or truncation < 1:
            raise ConfigurationError("rank and truncation must be positive")
        self.rank = rank
        self.truncation = truncation
        self.name = name
        self.degrees: dict = {}
        for lab, deg in degrees.items():
            deg = tuple(int(x) for x in deg)
            if len(deg) != rank or not dv_is_positive(deg):
                raise ConfigurationError(f"bad degree {deg} for {lab!r}")
            if dv_total(deg) > truncation:
                raise ConfigurationError(f"label {lab!r} exceeds truncation")
            self.degrees[lab] = deg
        self.labels = list(self.degrees)
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self.brackets: dict = {}
        for (a, b), res in (brackets or {}).items():
            if a not in self.degrees or b not in self.degrees:
                raise ConfigurationError(f"unknown labels in bracket {a!r},{b!r}")
            res = {k: v for k, v in res.items() if not _is_zero(v)}
            want = dv_add(self.degrees[a], self.degrees[b])
            for k in res:
                if k not in self.degrees:
                    raise ConfigurationError(f"unknown label {k!r}")
                if self.degrees[k] != want:
                    raise ConfigurationError(f"bracket [{a!r},{b!r}] is not graded")
            if a == b and res:
                raise ConfigurationError(f"[{a!r},{a!r}] must vanish")
            neg = {k: -v for k, v in res.items()}
            if (b, a) in self.brackets and self.brackets[(b, a)] != neg:
                raise ConfigurationError(f"bracket [{a!r},{b!r}] is not antisymmetric")
            if res:
                self.brackets[(a, b)] = res
                self.brackets[(b, a)] = neg
        self._by_degree: dict = {}
        for lab, deg in self.degrees.items():
            self._by_degree.setdefault(deg, []).append(lab)
        self._word_cache: dict = {}
        self._dynkin_cache: dict = {}

    # structure ---------------------------------------------------------
    @property
    def roots(self) -> list[DimVector]:
        return sorted(self._by_degree, key=lambda v: (sum(v), v))

    def basis(self, alpha: DimVector) -> list:
        return list(self._by_degree.get(tuple(alpha), []))

    def degree(self, label) -> DimVector:
        return self.degrees[label]

    def index(self, label) -> int:
        return self._index[label]

    def bracket_labels(self, a, b) -> dict:
        return self.brackets.get((a, b), {})

    def key(self):
        br = tuple(sorted(((repr(k), tuple(sorted((repr(a), v) for a, v in r.items())))
                           for k, r in self.brackets.items())))
        return (self.rank, self.truncation, tuple(self.degrees.items()), br)

    def __eq__(self, other):
        return isinstance(other, LieAlgebraSpec) and (
            self is other or self.key() == other.key())

    def __hash__(self):
        return hash((self.rank, self.truncation, tuple(self.degrees.items())))

    def __repr__(self):
        return f"LieAlgebraSpec(rank={self.rank}, d={self.truncation}, dim={len(self.labels)})"

    def jacobi_defect(self) -> dict:
        """Nonzero Jacobiator components over all label triples."""
        bad = {}
        labs = self.labels
        for i, a in enumerate(labs):
            for j in range(i + 1, len(labs)):
                b = labs[j]
                for k in range(j + 1, len(labs)):
                    c = labs[k]
                    tot = {}
                    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
                        for m, u in self.bracket_labels(y, z).items():
                            for n, v in self.bracket_labels(x, m).items():
                                tot[n] = tot.get(n, 0) + u * v
                    tot = {n: v for n, v in tot.items() if not _is_zero(v)}
                    if tot:
                        bad[(a, b, c)] = tot
        return bad

    def check_jacobi(self) -> bool:
        return not self.jacobi_defect()

    def word_degree(self, word: Word) -> DimVector:
        deg = self._word_cache.get(word)
        if deg is None:
            deg = dv_zero(self.rank)
            for lab in word:
                deg = dv_add(deg, self.degrees[lab])
            self._word_cache[word] = deg
        return deg

    def words(self, max_total: int | None = None) -> list[Word]:
        """All words with total degree <= max_total, sorted by (total, length, word)."""
        d = self.truncation if max_total is None else max_total
        out = [()]
        frontier = [()]
        while frontier:
            nxt = []
            for w in frontier:
                tot = dv_total(self.word_degree(w))
                for lab in self.labels:
                    if tot + dv_total(self.degrees[lab]) <= d:
                        nxt.append(w + (lab,))
            out.extend(nxt)
            frontier = nxt
        return sorted(out, key=lambda w: (dv_total(self.word_degree(w)), len(w),
                                          [self._index[x] for x in w]))

    def dynkin_bracket(self, word: Word) -> dict:
        """Left-normed bracket [[..[w1,w2],..],wk] as {label: coefficient}."""
        res = self._dynkin_cache.get(word)
        if res is not None:
            return res
        if len(word) == 1:
            res = {word[0]: 1}
        else:
            res = {}
            for m, u in self.dynkin_bracket(word[:-1]).items():
                for n, v in self.bracket_labels(m, word[-1]).items():
                    res[n] = res.get(n, 0) + u * v
            res = {k: v for k, v in res.items() if not _is_zero(v)}
        self._dynkin_cache[word] = res
        return res

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "truncation": self.truncation,
            "name": self.name,
            "roots": [list(r) for r in self.roots],
            "basis": [[encode_label(k), list(v)] for k, v in self.degrees.items()],
            "brackets": [[encode_label(a), encode_label(b),
                          {encode_label(k): dump_coeff(v) for k, v in r.items()}]
                         for (a, b), r in self.brackets.items()
                         if self._index[a] < self._index[b]],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LieAlgebraSpec":
        try:
            degrees = {decode_label(k): tuple(v) for k, v in data["basis"]}
            brackets = {}
            for a, b, r in data.get("brackets", []):
                brackets[(decode_label(a), decode_label(b))] = {
                    decode_label(k): parse_coeff(v) for k, v in r.items()}
            return cls(int(data["rank"]), int(data["truncation"]), degrees, brackets,
                       name=data.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"malformed Lie algebra spec: {exc}") from exc


def free_abelian_letters(degrees: Mapping[Label, DimVector], truncation: int) -> LieAlgebraSpec:
    """Spec with the given letters and zero brackets (only the word envelope is used)."""
    rank = len(next(iter(degrees.values())))
    return LieAlgebraSpec(rank, truncation, degrees, {})


def _check_same(a, b):
    if a is not b and a != b:
        raise DomainError("elements belong to different Lie algebra specs")


# -- Lie elements ------------------------------------------------------------

class GradedLieElement:
    """Finite combination of basis labels of a :class:`LieAlgebraSpec`."""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: LieAlgebraSpec, coeffs: Mapping | None = None):
        self.spec = spec
        self.coeffs = {}
        for lab, c in (coeffs or {}).items():
            if lab not in spec.degrees:
                raise DomainError(f"unknown label {lab!r}")
            if not _is_zero(c):
                self.coeffs[lab] = c

    @classmethod
    def basis_vector(cls, spec, label, coeff=1):
        return cls(spec, {label: coeff})

    def component(self, alpha: DimVector) -> "GradedLieElement":
        alpha = tuple(alpha)
        return GradedLieElement(self.spec, {k: v for k, v in self.coeffs.items()
                                            if self.spec.degrees[k] == alpha})

    def support(self) -> list[DimVector]:
        return sorted({self.spec.degrees[k] for k in self.coeffs}, key=lambda v: (sum(v), v))

    def truncate(self, d: int) -> "GradedLieElement":
        if d > self.spec.truncation:
            raise TruncationError(f"cannot raise truncation {self.spec.truncation} -> {d}")
        return GradedLieElement(self.spec, {k: v for k, v in self.coeffs.items()
                                            if dv_total(self.spec.degrees[k]) <= d})

    def map(self, fn: Callable) -> "GradedLieElement":
        return GradedLieElement(self.spec, {k: fn(v) for k, v in self.coeffs.items()})

    def to_complex(self) -> "GradedLieElement":
        return self.map(complex)

    def norm(self) -> float:
        return max((abs(complex(v)) for v in self.coeffs.values()), default=0.0)

    def __add__(self, other):
        _check_same(self.spec, other.spec)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return GradedLieElement(self.spec, out)

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return self.map(lambda v: v * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, GradedLieElement) and self.spec == other.spec \
            and self.coeffs == other.coeffs

    def __repr__(self):
        return f"GradedLieElement({self.coeffs})"

    def to_json(self) -> dict:
        return {encode_label(k): dump_coeff(v) for k, v in self.coeffs.items()}

    @classmethod
    def from_json(cls, spec, data: Mapping) -> "GradedLieElement":
        return cls(spec, {decode_label(k): parse_coeff(v) for k, v in data.items()})


def bracket(x: GradedLieElement, y: GradedLieElement) -> GradedLieElement:
    _check_same(x.spec, y.spec)
    out: dict = {}
    for a, u in x.coeffs.items():
        for b, v in y.coeffs.items():
            for c, w in x.spec.bracket_labels(a, b).items():
                out[c] = out.get(c, 0) + u * v * w
    return GradedLieElement(x.spec, out)


def degree_action(Z: Callable[[DimVector], complex], x: GradedLieElement) -> GradedLieElement:
    """[Z, x]: multiply each homogeneous piece by Z(degree)."""
    return GradedLieElement(x.spec, {k: Z(x.spec.degrees[k]) * v for k, v in x.coeffs.items()})


# -- envelope ----------------------------------------------------------------

class EnvelopeElement:
    """Element of the truncated tensor envelope in the word basis."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: LieAlgebraSpec, terms: Mapping | None = None, check: bool = True):
        self.spec = spec
        d = spec.truncation
        self.terms = {}
        for w, c in (terms or {}).items():
            if _is_zero(c):
                continue
            w = tuple(w)
            if check and dv_total(spec.word_degree(w)) > d:
                continue
            self.terms[w] = c

    @classmethod
    def one(cls, spec, coeff=1):
        return cls(spec, {(): coeff})

    @classmethod
    def from_lie(cls, x: GradedLieElement) -> "EnvelopeElement":
        return cls(x.spec, {(k,): v for k, v in x.coeffs.items()})

    @property
    def scalar(self):
        return self.terms.get((), 0)

    def component(self, gamma: DimVector) -> "EnvelopeElement":
        gamma = tuple(gamma)
        return EnvelopeElement(self.spec, {w: c for w, c in self.terms.items()
                                           if self.spec.word_degree(w) == gamma}, check=False)

    def by_degree(self) -> dict:
        out: dict = {}
        for w, c in self.terms.items():
            out.setdefault(self.spec.word_degree(w), {})[w] = c
        return {g: EnvelopeElement(self.spec, t, check=False) for g, t in out.items()}

    def truncate(self, d: int) -> "EnvelopeElement":
        if d > self.spec.truncation:
            raise TruncationError(f"cannot raise truncation {self.spec.truncation} -> {d}")
        return EnvelopeElement(self.spec, {w: c for w, c in self.terms.items()
                                           if dv_total(self.spec.word_degree(w)) <= d},
                               check=False)

    def map(self, fn: Callable) -> "EnvelopeElement":
        return EnvelopeElement(self.spec, {w: fn(c) for w, c in self.terms.items()}, check=False)

    def norm(self) -> float:
        return max((abs(complex(v)) for v in self.terms.values()), default=0.0)

    def __add__(self, other):
        if not isinstance(other, EnvelopeElement):
            other = EnvelopeElement.one(self.spec, other)
        _check_same(self.spec, other.spec)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return EnvelopeElement(self.spec, out, check=False)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, EnvelopeElement):
            return self.map(lambda v: v * other)
        _check_same(self.spec, other.spec)
        spec = self.spec
        d = spec.truncation
        out: dict = {}
        right = [(w, c, dv_total(spec.word_degree(w))) for w, c in other.terms.items()]
        for u, a in self.terms.items():
            tu = dv_total(spec.word_degree(u))
            for v, b, tv in right:
                if tu + tv <= d:
                    w = u + v
                    out[w] = out.get(w, 0) + a * b
        return EnvelopeElement(spec, out, check=False)

    def __rmul__(self, s):
        return self.map(lambda v: s * v)

    def __eq__(self, other):
        return isinstance(other, EnvelopeElement) and self.spec == other.spec \
            and self.terms == other.terms

    def __repr__(self):
        return f"EnvelopeElement({self.terms})"

    def distance(self, other: "EnvelopeElement") -> float:
        return (self - other).norm()

    def to_json(self) -> list:
        return [[[encode_label(x) for x in w], dump_coeff(c)] for w, c in self.terms.items()]

    @classmethod
    def from_json(cls, spec, data) -> "EnvelopeElement":
        return cls(spec, {tuple(decode_label(x) for x in w): parse_coeff(c) for w, c in data})


def power_series(x: EnvelopeElement, coeffs: Iterable) -> EnvelopeElement:
    """sum_n c_n x^n for a nilpotent x (no scalar part)."""
    result = EnvelopeElement(x.spec)
    term = EnvelopeElement.one(x.spec)
    for n, c in enumerate(coeffs):
        if n > 0:
            term = term * x
            if not term.terms:
                break
        if c:
            result = result + term * c
    return result


def _exp_coeffs(d, exact):
    c = Fraction(1) if exact else 1.0
    yield c
    for n in range(1, d + 1):
        c = c / n
        yield c


def _log_coeffs(d, exact):
    yield 0
    for n in range(1, d + 1):
        yield (Fraction((-1) ** (n - 1), n) if exact else (-1) ** (n - 1) / n)


def _exact(el) -> bool:
    vals = el.coeffs.values() if isinstance(el, GradedLieElement) else el.terms.values()
    return all(isinstance(v, (int, Fraction)) for v in vals)


def exp_envelope(x: EnvelopeElement) -> EnvelopeElement:
    if x.scalar != 0:
        raise DomainError("exp needs an element without scalar part")
    return power_series(x, _exp_coeffs(x.spec.truncation, _exact(x)))


def log_envelope(g: EnvelopeElement, tol: float = 1e-12) -> EnvelopeElement:
    s = g.scalar
    if (isinstance(s, (int, Fraction)) and s != 1) or abs(complex(s) - 1) > tol:
        raise DomainError(f"log needs scalar part 1, got {s}")
    y = g - EnvelopeElement.one(g.spec, s)
    return power_series(y, _log_coeffs(g.spec.truncation, _exact(y)))


def exp_primitive(x: GradedLieElement) -> EnvelopeElement:
    return exp_envelope(EnvelopeElement.from_lie(x))


def dynkin_operator(p: EnvelopeElement) -> EnvelopeElement:
    """Words w of length k mapped to the left-normed bracket, divided by k, as words."""
    out = EnvelopeElement(p.spec)
    for w, c in p.terms.items():
        if not w:
            continue
        out = out + c * _bracket_word(p.spec, w) * Fraction(1, len(w))
    return out


def _bracket_word(spec, word) -> EnvelopeElement:
    """Left-normed commutator of letters in the free envelope."""
    e = EnvelopeElement(spec, {(word[0],): 1}, check=False)
    for lab in word[1:]:
        x = EnvelopeElement(spec, {(lab,): 1}, check=False)
        e = e * x - x * e
    return e


def lie_projection(p: EnvelopeElement) -> GradedLieElement:
    """Evaluate a Lie polynomial in the letters inside the Lie algebra.

    Uses the Dynkin operator: for a Lie polynomial of word length k the
    left-normed bracketing of its words reproduces it k times.
    """
    spec = p.spec
    out: dict = {}
    for w, c in p.terms.items():
        if not w:
            if not _is_zero(c):
                raise DomainError("Lie projection of an element with scalar part")
            continue
        k = len(w)
        scale = Fraction(1, k) if isinstance(c, (int, Fraction)) else 1.0 / k
        for lab, v in spec.dynkin_bracket(w).items():
            out[lab] = out.get(lab, 0) + c * v * scale
    return GradedLieElement(spec, out)


def lie_residual(p: EnvelopeElement) -> float:
    """Distance of p from the free Lie polynomials (zero iff p is Lie)."""
    return (dynkin_operator(p) - p).norm()


def log_grouplike(g: EnvelopeElement) -> GradedLieElement:
    return lie_projection(log_envelope(g))


def is_primitive_words(p: EnvelopeElement, tol: float = 0.0) -> bool:
    """Primitivity under the deshuffle coproduct, checked term by term."""
    acc: dict = {}
    for w, c in p.terms.items():
        n = len(w)
        if n == 0:
            if abs(complex(c)) > tol:
                return False
            continue
        for mask in range(1, (1 << n) - 1):
            left = tuple(w[i] for i in range(n) if mask >> i & 1)
            right = tuple(w[i] for i in range(n) if not mask >> i & 1)
            acc[(left, right)] = acc.get((left, right), 0) + c
    return all(abs(complex(v)) <= tol for v in acc.values())


def inverse_envelope(g: EnvelopeElement) -> EnvelopeElement:
    s = g.scalar
    if s == 0:
        raise DomainError("element with zero scalar part is not invertible")
    y = g * (1 / s if not isinstance(s, (int, Fraction)) else Fraction(1) / s) - 1
    d = g.spec.truncation
    inv = power_series(y, [(-1) ** n for n in range(d + 1)])
    return inv * (1 / s if not isinstance(s, (int, Fraction)) else Fraction(1) / s)
