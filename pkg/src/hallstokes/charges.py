"""Central charges, stability conditions and rays."""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ConfigurationError, DomainError
from .graded import DimVector

RAY_TOL = 1e-12

_NUM = r"[+-]?\d+(?:/\d+)?"
_EXACT_RE = re.compile(rf"^\s*(?:({_NUM})\s*)?(?:([+-])\s*(\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$")
_PURE_IM_RE = re.compile(rf"^\s*({_NUM})?\s*\*?\s*i\s*$")


def parse_exact_complex(s: str) -> tuple[Fraction, Fraction]:
    """Parse a Gaussian rational such as "1/2+3/4i", "-2i" or "3"."""
    s = s.replace(" ", "")
    m = _PURE_IM_RE.match(s)
    if m:
        im = m.group(1)
        if im in (None, "+"):
            return Fraction(0), Fraction(1)
        return Fraction(0), (Fraction(-1) if im == "-" else Fraction(im))
    m = _EXACT_RE.match(s)
    if not m or not s:
        raise ConfigurationError(f"cannot parse exact complex number {s!r}")
    re_part = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    im_part = Fraction(0)
    if m.group(2):
        im_part = Fraction(m.group(3)) if m.group(3) else Fraction(1)
        if m.group(2) == "-":
            im_part = -im_part
    return re_part, im_part


def format_exact_complex(v: tuple[Fraction, Fraction]) -> str:
    re_part, im_part = v
    sign = "-" if im_part < 0 else "+"
    return f"{re_part}{sign}{abs(im_part)}i"


class CentralCharge:
    """Additive map Z from dimension vectors to C, fixed by its simple values.

    If ``exact`` is given (pairs of Fractions), ray and phase comparisons
    are decided exactly; otherwise a relative tolerance of 1e-12 is used.
    """

    def __init__(self, z: Sequence, exact: Sequence | None = None):
        if exact is not None:
            exact = tuple((Fraction(re), Fraction(im)) for re, im in exact)
            z = tuple(complex(float(re), float(im)) for re, im in exact)
        self.z = tuple(complex(v) for v in z)
        self.exact = exact
        self.rank = len(self.z)
        if self.rank == 0:
            raise ConfigurationError("empty central charge")

    def __call__(self, gamma: DimVector) -> complex:
        if len(gamma) != self.rank:
            raise DomainError(f"class {gamma} has wrong rank")
        return sum((k * v for k, v in zip(gamma, self.z)), 0j)

    def exact_value(self, gamma):
        re = sum((k * v[0] for k, v in zip(gamma, self.exact)), Fraction(0))
        im = sum((k * v[1] for k, v in zip(gamma, self.exact)), Fraction(0))
        return re, im

    def cross_sign(self, beta, gamma) -> int:
        """Sign of Im(Z(beta) * conj(Z(gamma)))."""
        if self.exact is not None:
            a, b = self.exact_value(beta), self.exact_value(gamma)
            v = a[1] * b[0] - a[0] * b[1]
            return (v > 0) - (v < 0)
        zb, zg = self(beta), self(gamma)
        v = (zb * zg.conjugate()).imag
        if abs(v) <= RAY_TOL * abs(zb) * abs(zg):
            return 0
        return 1 if v > 0 else -1

    def same_ray(self, beta, gamma) -> bool:
        if self.cross_sign(beta, gamma) != 0:
            return False
        if self.exact is not None:
            a, b = self.exact_value(beta), self.exact_value(gamma)
            return a[0] * b[0] + a[1] * b[1] > 0
        return (self(beta) * self(gamma).conjugate()).real > 0

    def phase(self, gamma) -> float:
        return cmath.phase(self(gamma)) / math.pi

    def phase_cmp(self, beta, gamma) -> int:
        """+1 if phase(beta) > phase(gamma), for classes in the upper half plane."""
        return self.cross_sign(beta, gamma)

    def to_json(self):
        if self.exact is not None:
            return {"exact": [format_exact_complex(v) for v in self.exact]}
        return {"z": [[v.real, v.imag] for v in self.z]}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, dict) and "exact" in data:
            vals = [parse_exact_complex(v) if isinstance(v, str) else (Fraction(v[0]), Fraction(v[1]))
                    for v in data["exact"]]
            return cls((), exact=vals)
        if isinstance(data, list) and data and all(isinstance(v, str) for v in data):
            return cls((), exact=[parse_exact_complex(v) for v in data])
        vals = data["z"] if isinstance(data, dict) else data
        return cls([complex(float(a), float(b)) for a, b in vals])

    def __repr__(self):
        return f"{type(self).__name__}({list(self.z)})"


class StabilityCondition(CentralCharge):
    """Central charge with all simple values in the open upper half plane."""

    def __init__(self, z: Sequence, exact: Sequence | None = None):
        super().__init__(z, exact)
        for v in (self.exact or ()):
            if v[1] <= 0:
                raise ConfigurationError(f"Z(S_i) must lie in the upper half plane, got {v}")
        if self.exact is None:
            for v in self.z:
                if not v.imag > 0:
                    raise ConfigurationError(f"Z(S_i) must lie in the upper half plane, got {v}")


@dataclass(frozen=True)
class RaySpec:
    """The ray R_{>0} exp(i pi phase)."""

    phase: float

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * math.pi * self.phase)

    def contains(self, z: complex, tol: float = RAY_TOL) -> bool:
        u = self.direction
        v = z * u.conjugate()
        return abs(v.imag) <= tol * abs(z) and v.real > 0

    def opposite(self) -> "RaySpec":
        return RaySpec(self.phase + 1.0 if self.phase <= 0 else self.phase - 1.0)

    @classmethod
    def through(cls, z: complex) -> "RaySpec":
        return cls(cmath.phase(z) / math.pi)
