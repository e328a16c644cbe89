"""Exact truncated arithmetic: graded polynomial classes and q^(1/2)-series.

Every coefficient is a :class:`fractions.Fraction`.  Two containers are
provided:

``GradedClass``
    a truncated polynomial in Pontryagin generators ``p1..ps`` (internal
    degree ``2i``) and an optional Euler-class variable ``u`` (internal
    degree 1).  One internal degree is two real cohomological degrees, so the
    top component of a ``dim``-manifold lives in internal degree ``dim // 2``.

``HalfQSeries``
    a dense list ``a_0, a_1, ..., a_J`` standing for ``sum a_j q^(j/2)``;
    coefficients are Fractions or GradedClasses.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence, Union

Rational = Fraction

__all__ = [
    "Rational",
    "SeriesError",
    "StructuralError",
    "SeriesDomainError",
    "TruncationError",
    "GradedRing",
    "GradedClass",
    "HalfQSeries",
    "extract_degree",
    "extract_q",
    "series_exp",
    "series_log",
    "qseries_inv",
    "qseries_pow",
    "format_rational",
]


class SeriesError(Exception):
    pass


class StructuralError(SeriesError):
    """Operands live in different rings or carry different truncations."""


class SeriesDomainError(SeriesError, ValueError):
    """exp/log/inverse requested outside its domain."""


class TruncationError(SeriesError, IndexError):
    """Index requested beyond the stored truncation."""


_BITS = 6
_MASK = (1 << _BITS) - 1


def format_rational(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class GradedRing:
    """Generator signature plus truncation degree.

    Monomials are packed into a single int, 6 bits per exponent, which keeps
    multiplication to one integer addition per term pair.
    """

    degree: int
    n_pont: int | None = None
    with_u: bool = False

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("truncation degree must be non-negative")
        if self.degree >= 1 << (_BITS - 1):
            raise ValueError(f"truncation degree {self.degree} too large")
        if self.n_pont is None:
            object.__setattr__(self, "n_pont", self.degree // 2)

    @classmethod
    def for_dim(cls, dim: int, twisted: bool = False, degree: int | None = None) -> "GradedRing":
        D = dim // 2 if degree is None else degree
        return cls(D, D // 2, twisted)

    @property
    def nvars(self) -> int:
        return self.n_pont + (1 if self.with_u else 0)

    @cached_property
    def weights(self) -> tuple[int, ...]:
        w = tuple(2 * (i + 1) for i in range(self.n_pont))
        return w + ((1,) if self.with_u else ())

    @cached_property
    def names(self) -> tuple[str, ...]:
        n = tuple(f"p{i + 1}" for i in range(self.n_pont))
        return n + (("u",) if self.with_u else ())

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.nvars:
            raise StructuralError(f"expected {self.nvars} exponents, got {len(exps)}")
        key = 0
        for i, e in enumerate(exps):
            if e < 0:
                raise ValueError("negative exponent")
            key |= e << (_BITS * i)
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> (_BITS * i)) & _MASK for i in range(self.nvars))

    def weight(self, key: int) -> int:
        return sum(w * e for w, e in zip(self.weights, self.unpack(key)))

    # -- element constructors -------------------------------------------
    def zero(self) -> "GradedClass":
        return GradedClass(self, {})

    def one(self) -> "GradedClass":
        return self.const(1)

    def const(self, c) -> "GradedClass":
        c = Fraction(c)
        return GradedClass(self, {0: c} if c else {})

    def p(self, i: int) -> "GradedClass":
        if not 1 <= i <= self.n_pont:
            if i >= 1 and 2 * i > self.degree:
                return self.zero()
            raise StructuralError(f"ring has no generator p{i}")
        exps = [0] * self.nvars
        exps[i - 1] = 1
        return self.monomial(exps)

    def u(self) -> "GradedClass":
        if not self.with_u:
            raise StructuralError("ring has no Euler-class variable u")
        exps = [0] * self.nvars
        exps[-1] = 1
        return self.monomial(exps)

    def monomial(self, exps: Sequence[int], coeff=1) -> "GradedClass":
        key = self.pack(exps)
        c = Fraction(coeff)
        if self.weight(key) > self.degree or not c:
            return self.zero()
        return GradedClass(self, {key: c})

    def from_dict(self, terms: dict) -> "GradedClass":
        """Build from ``{exponent tuple: coefficient}``; over-degree terms are dropped."""
        out = {}
        for exps, c in terms.items():
            c = Fraction(c)
            key = self.pack(exps)
            if c and self.weight(key) <= self.degree:
                out[key] = out.get(key, 0) + c
        return GradedClass(self, {k: v for k, v in out.items() if v})

    def from_u_series(self, coeffs: Sequence) -> "GradedClass":
        """``sum coeffs[b] * u^b``."""
        exps = [0] * self.nvars
        terms = {}
        for b, c in enumerate(coeffs):
            if b > self.degree:
                break
            exps[-1] = b
            terms[tuple(exps)] = c
        if not self.with_u:
            raise StructuralError("ring has no Euler-class variable u")
        return self.from_dict(terms)


_Scalar = Union[int, Fraction]


class GradedClass:
    """Immutable truncated polynomial over a :class:`GradedRing`."""

    __slots__ = ("ring", "_terms", "_by_weight")

    def __init__(self, ring: GradedRing, terms: dict[int, Fraction]):
        self.ring = ring
        self._terms = terms
        self._by_weight = None

    # -- introspection ------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return {self.ring.unpack(k): c for k, c in self._terms.items()}

    def _weighted(self):
        if self._by_weight is None:
            w = self.ring.weight
            self._by_weight = sorted(((w(k), k, c) for k, c in self._terms.items()))
        return self._by_weight

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    @property
    def constant(self) -> Fraction:
        return self._terms.get(0, Fraction(0))

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(self.ring.pack(exps), Fraction(0))

    def homogeneous(self, d: int) -> "GradedClass":
        return extract_degree(self, d)

    def components(self) -> list["GradedClass"]:
        parts: list[dict] = [dict() for _ in range(self.ring.degree + 1)]
        for w, k, c in self._weighted():
            parts[w][k] = c
        return [GradedClass(self.ring, t) for t in parts]

    def max_weight(self) -> int:
        ws = self._weighted()
        return ws[-1][0] if ws else -1

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "GradedClass"):
        if other.ring != self.ring:
            raise StructuralError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other):
        if isinstance(other, GradedClass):
            self._check(other)
            out = dict(self._terms)
            for k, c in other._terms.items():
                v = out.get(k, 0) + c
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
            return GradedClass(self.ring, out)
        if isinstance(other, (int, _RationalABC)):
            return self + self.ring.const(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GradedClass(self.ring, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (GradedClass, int, _RationalABC)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: _Scalar) -> "GradedClass":
        c = Fraction(c)
        if not c:
            return self.ring.zero()
        return GradedClass(self.ring, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, GradedClass):
            self._check(other)
            return _mul(self, other)
        if isinstance(other, (int, _RationalABC)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, _RationalABC)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, GradedClass):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise SeriesDomainError("only non-negative integer powers")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, GradedClass):
            return self.ring == other.ring and self._terms == other._terms
        if isinstance(other, (int, _RationalABC)):
            return self._terms == self.ring.const(other)._terms
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self._terms.items())))

    def inverse(self) -> "GradedClass":
        c0 = self.constant
        if not c0:
            raise SeriesDomainError("class with zero constant term is not invertible")
        comps = self.components()
        inv0 = 1 / c0
        h = [self.ring.const(inv0)]
        for d in range(1, self.ring.degree + 1):
            acc = self.ring.zero()
            for i in range(1, d + 1):
                if comps[i]:
                    acc = acc + comps[i] * h[d - i]
            h.append(acc.scale(-inv0))
        return _sum(self.ring, h)

    def exp(self) -> "GradedClass":
        return series_exp(self)

    def log(self) -> "GradedClass":
        return series_log(self)

    # -- change of ring -------------------------------------------------------
    def truncate(self, degree: int) -> "GradedClass":
        """Drop every term above ``degree`` (generator signature unchanged)."""
        if degree > self.ring.degree:
            raise TruncationError(f"cannot raise truncation {self.ring.degree} -> {degree}")
        ring = GradedRing(degree, self.ring.n_pont, self.ring.with_u)
        w = self.ring.weight
        return GradedClass(ring, {k: c for k, c in self._terms.items() if w(k) <= degree})

    def embed(self, ring: GradedRing) -> "GradedClass":
        """Re-express in a ring with at least these generators; extra ones get exponent 0."""
        src = self.ring
        if ring.n_pont < src.n_pont and any(e for ex in self.terms for e in ex[: src.n_pont][ring.n_pont:]):
            raise StructuralError("target ring lacks generators used by this class")
        if src.with_u and not ring.with_u and any(ex[-1] for ex in self.terms):
            raise StructuralError("target ring has no u")
        out = {}
        for exps, c in self.terms.items():
            ps = list(exps[: src.n_pont])[: ring.n_pont]
            ps += [0] * (ring.n_pont - len(ps))
            if ring.with_u:
                ps.append(exps[-1] if src.with_u else 0)
            out[tuple(ps)] = c
        return ring.from_dict(out)

    def at_u_zero(self, ring: GradedRing | None = None) -> "GradedClass":
        """Specialise u = 0; result lives in the u-free ring of the same degree."""
        if not self.ring.with_u:
            return self if ring is None else self.embed(ring)
        target = ring or GradedRing(self.ring.degree, self.ring.n_pont, False)
        out = {exps[:-1]: c for exps, c in self.terms.items() if exps[-1] == 0}
        return target.from_dict(out)

    # -- output ---------------------------------------------------------------
    def monomial_string(self, exps: Sequence[int]) -> str:
        parts = []
        for name, e in zip(self.ring.names, exps):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Fixed order: ascending internal degree, then exponent tuple descending."""
        w = self.ring.weights
        items = list(self.terms.items())
        items.sort(key=lambda t: (sum(a * b for a, b in zip(w, t[0])), tuple(-e for e in t[0])))
        return items

    def to_json(self) -> dict[str, str]:
        return {self.monomial_string(e): format_rational(c) for e, c in self.sorted_terms()}

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for i, (e, c) in enumerate(self.sorted_terms()):
            mono = self.monomial_string(e)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono == "1":
                body = format_rational(a)
            elif a == 1:
                body = mono
            else:
                body = f"{format_rational(a)}*{mono}"
            if i == 0:
                out.append(("-" if sign == "-" else "") + body)
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self):
        return f"GradedClass({self})"


def _mul(a: GradedClass, b: GradedClass) -> GradedClass:
    D = a.ring.degree
    out: dict[int, Fraction] = {}
    bw = b._weighted()
    for wa, ka, ca in a._weighted():
        room = D - wa
        for wb, kb, cb in bw:
            if wb > room:
                break
            k = ka + kb
            v = out.get(k)
            out[k] = ca * cb if v is None else v + ca * cb
    return GradedClass(a.ring, {k: v for k, v in out.items() if v})


def _sum(ring: GradedRing, parts: Iterable[GradedClass]) -> GradedClass:
    out: dict[int, Fraction] = {}
    for p in parts:
        for k, c in p._terms.items():
            out[k] = out.get(k, 0) + c
    return GradedClass(ring, {k: v for k, v in out.items() if v})


def extract_degree(f: GradedClass, d: int) -> GradedClass:
    """Homogeneous component of internal degree ``d``."""
    if d < 0 or d > f.ring.degree:
        raise TruncationError(f"degree {d} outside 0..{f.ring.degree}")
    w = f.ring.weight
    return GradedClass(f.ring, {k: c for k, c in f._terms.items() if w(k) == d})


def series_exp(f: GradedClass) -> GradedClass:
    """Truncated exponential; ``f`` must have zero constant term.

    Uses the Euler derivation ``E`` (multiply degree-d part by d):
    ``E(exp f) = E(f) exp f`` gives ``d g_d = sum_i i f_i g_{d-i}``.
    """
    if f.constant:
        raise SeriesDomainError("exp needs zero constant term")
    ring = f.ring
    fc = f.components()
    g = [ring.one()]
    for d in range(1, ring.degree + 1):
        acc = ring.zero()
        for i in range(1, d + 1):
            if fc[i]:
                acc = acc + fc[i].scale(i) * g[d - i]
        g.append(acc.scale(Fraction(1, d)))
    return _sum(ring, g)


def series_log(g: GradedClass) -> GradedClass:
    """Truncated logarithm; ``g`` must have constant term 1."""
    if g.constant != 1:
        raise SeriesDomainError("log needs constant term 1")
    ring = g.ring
    gc = g.components()
    f = [ring.zero()]
    for d in range(1, ring.degree + 1):
        acc = gc[d].scale(d)
        for i in range(1, d):
            if f[i] and gc[d - i]:
                acc = acc - f[i].scale(i) * gc[d - i]
        f.append(acc.scale(Fraction(1, d)))
    return _sum(ring, f)


# ---------------------------------------------------------------------------
# q^(1/2)-series
# ---------------------------------------------------------------------------

Coeff = Union[Fraction, GradedClass]


class HalfQSeries:
    """``sum_{j=0}^{J} a_j q^(j/2)``, truncated at half-step index ``J``."""

    __slots__ = ("coeffs", "ring")

    def __init__(self, coeffs: Sequence, ring: GradedRing | None = None):
        if not coeffs:
            raise ValueError("series needs at least one coefficient")
        if ring is None:
            for c in coeffs:
                if isinstance(c, GradedClass):
                    ring = c.ring
                    break
        if ring is None:
            self.coeffs = tuple(Fraction(c) for c in coeffs)
        else:
            out = []
            for c in coeffs:
                if isinstance(c, GradedClass):
                    if c.ring != ring:
                        raise StructuralError("mixed rings inside one series")
                    out.append(c)
                else:
                    out.append(ring.const(c))
            self.coeffs = tuple(out)
        self.ring = ring

    # -- constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, J: int, ring: GradedRing | None = None) -> "HalfQSeries":
        return cls([0] * (J + 1), ring)

    @classmethod
    def one(cls, J: int, ring: GradedRing | None = None) -> "HalfQSeries":
        return cls([1] + [0] * J, ring)

    @classmethod
    def from_terms(cls, terms: dict[int, object], J: int, ring: GradedRing | None = None) -> "HalfQSeries":
        c = [0] * (J + 1)
        for j, v in terms.items():
            if j <= J:
                c[j] = v
        return cls(c, ring)

    @property
    def J(self) -> int:
        return len(self.coeffs) - 1

    def _zero_coeff(self):
        return Fraction(0) if self.ring is None else self.ring.zero()

    def __getitem__(self, j: int):
        return extract_q(self, j)

    def truncate(self, J: int) -> "HalfQSeries":
        if J > self.J:
            raise TruncationError(f"cannot extend truncation {self.J} -> {J}")
        return HalfQSeries(self.coeffs[: J + 1], self.ring)

    def shift(self, n: int) -> "HalfQSeries":
        """Multiply by ``q^(n/2)`` keeping the same truncation."""
        z = self._zero_coeff()
        return HalfQSeries(([z] * n + list(self.coeffs))[: self.J + 1], self.ring)

    def valuation(self) -> int | None:
        for j, c in enumerate(self.coeffs):
            if c:
                return j
        return None

    def map(self, fn) -> "HalfQSeries":
        return HalfQSeries([fn(c) for c in self.coeffs])

    def _promote(self, other: "HalfQSeries"):
        """Common ring and truncation for a binary operation."""
        J = min(self.J, other.J)
        if self.ring is not None and other.ring is not None and self.ring != other.ring:
            raise StructuralError(f"ring mismatch: {self.ring} vs {other.ring}")
        ring = self.ring or other.ring
        return J, ring

    def __add__(self, other):
        if isinstance(other, HalfQSeries):
            J, ring = self._promote(other)
            return HalfQSeries([self.coeffs[j] + other.coeffs[j] for j in range(J + 1)], ring)
        if isinstance(other, (int, _RationalABC, GradedClass)):
            c = list(self.coeffs)
            c[0] = c[0] + other
            return HalfQSeries(c, self.ring)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return HalfQSeries([-c for c in self.coeffs], self.ring)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "HalfQSeries":
        if isinstance(c, GradedClass):
            return HalfQSeries([c * a for a in self.coeffs], c.ring)
        return HalfQSeries([a * c for a in self.coeffs], self.ring)

    def __mul__(self, other):
        if isinstance(other, HalfQSeries):
            J, ring = self._promote(other)
            a, b = self.coeffs, other.coeffs
            nz_b = [(i, c) for i, c in enumerate(b[: J + 1]) if c]
            acc: list = [Fraction(0) if ring is None else ring.zero() for _ in range(J + 1)]
            for i in range(J + 1):
                ai = a[i]
                if not ai:
                    continue
                for jb, bj in nz_b:
                    if i + jb > J:
                        break
                    acc[i + jb] = acc[i + jb] + ai * bj
            return HalfQSeries(acc, ring)
        if isinstance(other, (int, _RationalABC, GradedClass)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HalfQSeries):
            return self * qseries_inv(other)
        if isinstance(other, (int, _RationalABC)):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        return qseries_pow(self, n)

    def __eq__(self, other):
        if not isinstance(other, HalfQSeries):
            return NotImplemented
        J = min(self.J, other.J)
        return all(self.coeffs[j] == other.coeffs[j] for j in range(J + 1))

    __hash__ = None

    def first_difference(self, other: "HalfQSeries") -> int | None:
        J = min(self.J, other.J)
        for j in range(J + 1):
            if self.coeffs[j] != other.coeffs[j]:
                return j
        return None

    def inverse(self) -> "HalfQSeries":
        return qseries_inv(self)

    def exp(self) -> "HalfQSeries":
        """``exp`` of a series whose q^0 coefficient is nilpotent (GradedClass) or zero."""
        f = self.coeffs
        J = self.J
        if self.ring is None:
            if f[0]:
                raise SeriesDomainError("exp of a rational series needs zero constant term")
            g0 = Fraction(1)
        else:
            g0 = series_exp(f[0])
        g = [g0]
        for j in range(1, J + 1):
            acc = self._zero_coeff()
            for i in range(1, j + 1):
                if f[i]:
                    acc = acc + (f[i] * i) * g[j - i]
            g.append(acc * Fraction(1, j))
        return HalfQSeries(g, self.ring)

    def log(self) -> "HalfQSeries":
        """``log`` of a series whose q^0 coefficient has constant term 1."""
        g = self.coeffs
        J = self.J
        if self.ring is None:
            if g[0] != 1:
                raise SeriesDomainError("log needs leading coefficient 1")
            f0 = Fraction(0)
            inv0 = Fraction(1)
        else:
            f0 = series_log(g[0])
            inv0 = g[0].inverse()
        f = [f0]
        for j in range(1, J + 1):
            acc = g[j] * j
            for i in range(1, j):
                if f[i] and g[j - i]:
                    acc = acc - (f[i] * i) * g[j - i]
            f.append((acc * inv0) * Fraction(1, j))
        return HalfQSeries(f, self.ring)

    def __str__(self):
        return format_qseries(self)

    def __repr__(self):
        return f"HalfQSeries({self})"


def extract_q(f: HalfQSeries, j: int):
    """Coefficient of ``q^(j/2)``."""
    if j < 0 or j > f.J:
        raise TruncationError(f"half-step {j} outside 0..{f.J}")
    return f.coeffs[j]


def qseries_inv(f: HalfQSeries) -> HalfQSeries:
    a0 = f.coeffs[0]
    if f.ring is None:
        if not a0:
            raise SeriesDomainError("leading coefficient is zero")
        inv0 = 1 / a0
    else:
        if not a0.constant:
            raise SeriesDomainError("leading coefficient has no invertible constant term")
        inv0 = a0.inverse()
    h = [inv0]
    a = f.coeffs
    for j in range(1, f.J + 1):
        acc = f._zero_coeff()
        for i in range(1, j + 1):
            if a[i]:
                acc = acc + a[i] * h[j - i]
        h.append(-(acc * inv0))
    return HalfQSeries(h, f.ring)


def qseries_pow(f: HalfQSeries, n: int) -> HalfQSeries:
    if not isinstance(n, int):
        raise SeriesDomainError("integer powers only")
    if n < 0:
        return qseries_pow(qseries_inv(f), -n)
    result = HalfQSeries.one(f.J, f.ring)
    base = f
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def q_power_string(j: int) -> str:
    if j == 0:
        return ""
    if j == 2:
        return "q"
    if j % 2 == 0:
        return f"q^{j // 2}"
    return f"q^({j}/2)"


def format_qseries(f: HalfQSeries) -> str:
    """``-1/8 - 3 q^(1/2) - 3 q + ...`` style; GradedClass coefficients are parenthesised."""
    out = []
    for j, c in enumerate(f.coeffs):
        if not c:
            continue
        qp = q_power_string(j)
        if isinstance(c, GradedClass):
            body = f"({c})" + (f" {qp}" if qp else "")
            sign = "+"
        else:
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if qp:
                body = qp if a == 1 else f"{format_rational(a)} {qp}"
            else:
                body = format_rational(a)
        if not out:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out) if out else "0"
