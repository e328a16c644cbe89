"""Manifolds presented by Pontryagin numbers, and twisted-signature arithmetic."""
from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

from .genera import a_hat_form, ch_tangent, l_hat_form
from .series import GradedClass, extract_degree, format_rational
from .theorems import VerificationReport

__all__ = [
    "ManifoldError",
    "ManifoldClass",
    "CharNumberResult",
    "Divisibility",
    "FUNCTIONALS",
    "CATALOG_NAMES",
    "catalog",
    "product",
    "power",
    "parse_manifold",
    "char_number",
    "verify_product_formula",
    "divisibility_report",
    "spin_products",
    "divisibility_suite",
    "best_possible_suite",
]

Partition = tuple[int, ...]


class ManifoldError(ValueError):
    pass


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _exps_to_partition(exps) -> Partition:
    parts = []
    for i, e in enumerate(exps, start=1):
        parts.extend([i] * e)
    return tuple(sorted(parts, reverse=True))


@dataclass(frozen=True)
class ManifoldClass:
    name: str
    dim: int
    pontryagin_numbers: tuple[tuple[Partition, Fraction], ...]
    spin: bool = True
    factors: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 4:
            raise ManifoldError(f"{self.name}: dimension {self.dim} is not a positive multiple of 4")
        n = self.dim // 4
        for lam, _ in self.pontryagin_numbers:
            if sum(lam) != n:
                raise ManifoldError(f"{self.name}: partition {lam} does not have weight {n}")

    @classmethod
    def from_numbers(cls, name: str, dim: int, numbers: dict, spin: bool = True,
                     factors: tuple[str, ...] = ()) -> "ManifoldClass":
        items = tuple(sorted((tuple(sorted(k, reverse=True)), Fraction(v))
                             for k, v in numbers.items() if v))
        return cls(name, dim, items, spin, factors or (name,))

    @property
    def numbers(self) -> dict[Partition, Fraction]:
        return dict(self.pontryagin_numbers)

    def number(self, lam: Partition) -> Fraction:
        return self.numbers.get(tuple(sorted(lam, reverse=True)), Fraction(0))

    def pair(self, cls: GradedClass) -> Fraction:
        """``<cls, [M]>`` using the internal-degree dim/2 component; u must not occur."""
        D = self.dim // 2
        if cls.ring.degree < D:
            raise ManifoldError(f"class truncated at degree {cls.ring.degree} cannot pair with dim {self.dim}")
        top = extract_degree(cls, D)
        nums = self.numbers
        total = Fraction(0)
        for exps, c in top.terms.items():
            if cls.ring.with_u and exps[-1]:
                raise ManifoldError("cannot pair a class involving u with a manifold")
            ps = exps[:-1] if cls.ring.with_u else exps
            total += c * nums.get(_exps_to_partition(ps), 0)
        return total

    def __mul__(self, other: "ManifoldClass") -> "ManifoldClass":
        return product(self, other)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

CATALOG_NAMES = ("HP1", "HP2", "HP3", "K3", "Bott8")


def _hp_total_class(n: int) -> list[int]:
    """Coefficients of (1+u)^(2n+2) (1+4u)^(-1) modulo u^(n+1)."""
    binom = [math.comb(2 * n + 2, i) for i in range(n + 1)]
    inv = [(-4) ** i for i in range(n + 1)]
    return [sum(binom[i] * inv[j - i] for i in range(j + 1)) for j in range(n + 1)]


def _hp(n: int) -> ManifoldClass:
    p = _hp_total_class(n)
    numbers = {}
    for lam in _partitions(n):
        numbers[lam] = math.prod(p[i] for i in lam)
    return ManifoldClass.from_numbers(f"HP{n}", 4 * n, numbers, True)


@lru_cache(maxsize=None)
def _k3() -> ManifoldClass:
    # the single number p1 is fixed by Sig = -16 against the degree-2 part of L̂
    c = l_hat_form(4).coeff((1,))
    return ManifoldClass.from_numbers("K3", 4, {(1,): Fraction(-16) / c}, True)


@lru_cache(maxsize=None)
def _bott8() -> ManifoldClass:
    # solve Â = 1, Sig = 0 for (p1^2, p2)
    A, L = a_hat_form(8), l_hat_form(8)
    a11, a2 = A.coeff((2, 0)), A.coeff((0, 1))
    l11, l2 = L.coeff((2, 0)), L.coeff((0, 1))
    det = a11 * l2 - a2 * l11
    if not det:
        raise ManifoldError("degenerate system for the Bott manifold")
    x, y = l2 / det, -l11 / det   # Cramer's rule with right-hand side (1, 0)
    return ManifoldClass.from_numbers("Bott8", 8, {(1, 1): x, (2,): y}, True)


def catalog(name: str, n: int | None = None) -> ManifoldClass:
    """Catalog entry by name: ``HP2``, ``HPn`` with ``n``, ``HP<n>``, ``K3``, ``Bott8``."""
    key = name.strip()
    if key == "HPn":
        if n is None or n < 1:
            raise ManifoldError("HPn needs n >= 1")
        return _hp(n)
    m = re.fullmatch(r"HP(\d+)", key)
    if m:
        k = int(m.group(1))
        if k < 1:
            raise ManifoldError("HPn needs n >= 1")
        return _hp(k)
    if key == "K3":
        return _k3()
    if key in ("Bott8", "B8"):
        return _bott8()
    raise ManifoldError(f"unknown catalog manifold {name!r}; known: {', '.join(CATALOG_NAMES)}, HPn")


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

def _mul_bi(a: dict, b: dict, n1: int, n2: int) -> dict:
    out: dict = {}
    for (l1, m1), c1 in a.items():
        w1, v1 = sum(l1), sum(m1)
        for (l2, m2), c2 in b.items():
            if w1 + sum(l2) > n1 or v1 + sum(m2) > n2:
                continue
            key = (tuple(sorted(l1 + l2, reverse=True)), tuple(sorted(m1 + m2, reverse=True)))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def product(m1: ManifoldClass, m2: ManifoldClass) -> ManifoldClass:
    """Pontryagin numbers of ``m1 × m2`` from p(T1 ⊕ T2) = p(T1) p(T2) and the Künneth split."""
    n1, n2 = m1.dim // 4, m2.dim // 4
    n = n1 + n2
    # p_i of the product as a bi-graded polynomial in the factors' classes
    p_total = []
    for i in range(n + 1):
        poly = {}
        for a in range(max(0, i - n2), min(i, n1) + 1):
            b = i - a
            key = ((a,) if a else (), (b,) if b else ())
            poly[key] = poly.get(key, 0) + 1
        p_total.append(poly)
    N1, N2 = m1.numbers, m2.numbers
    numbers = {}
    for lam in _partitions(n):
        acc = {((), ()): 1}
        for part in lam:
            acc = _mul_bi(acc, p_total[part], n1, n2)
        val = Fraction(0)
        for (l1, l2), c in acc.items():
            if sum(l1) == n1 and sum(l2) == n2:
                val += c * N1.get(l1, 0) * N2.get(l2, 0)
        numbers[lam] = val
    return ManifoldClass.from_numbers(f"{m1.name}×{m2.name}", m1.dim + m2.dim, numbers,
                                      m1.spin and m2.spin, m1.factors + m2.factors)


def power(m: ManifoldClass, k: int) -> ManifoldClass:
    if k < 1:
        raise ManifoldError("power needs k >= 1")
    out = m
    for _ in range(k - 1):
        out = product(out, m)
    return out


_TOKEN = re.compile(r"^\(?([A-Za-z]+\d*)\)?(?:\^(\d+))?$")


def parse_manifold(expr: str) -> ManifoldClass:
    """``"K3×Bott8"``, ``"HP2x HP2"``, ``"(HP2)^3*K3"``."""
    # no catalog name contains a lowercase x, so it is always a separator
    pieces = [p.strip() for p in re.split(r"[×*x]", expr)]
    if any(not p for p in pieces):
        raise ManifoldError(f"malformed manifold expression {expr!r}")
    result = None
    for piece in pieces:
        m = _TOKEN.match(piece)
        if not m:
            raise ManifoldError(f"cannot parse {piece!r}")
        base = catalog(m.group(1))
        k = int(m.group(2) or 1)
        term = power(base, k)
        result = term if result is None else product(result, term)
    return result


# ---------------------------------------------------------------------------
# Characteristic numbers
# ---------------------------------------------------------------------------

FUNCTIONALS = ("Sig", "A-hat", "Sig(T)", "Sig(T⊗T)")
_ALIASES = {"sig": "Sig", "signature": "Sig", "a-hat": "A-hat", "ahat": "A-hat", "â": "A-hat",
            "sig(t)": "Sig(T)", "sig(t⊗t)": "Sig(T⊗T)", "sig(txt)": "Sig(T⊗T)", "sig(t*t)": "Sig(T⊗T)"}


def _functional_name(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ManifoldError(f"unknown functional {name!r}; expected one of {FUNCTIONALS}") from None


@lru_cache(maxsize=None)
def functional_class(name: str, dim: int) -> GradedClass:
    """The class whose top pairing gives the functional at this dimension."""
    name = _functional_name(name)
    if name == "A-hat":
        return a_hat_form(dim)
    L = l_hat_form(dim)
    if name == "Sig":
        return L
    chT = ch_tangent(dim)
    if name == "Sig(T)":
        return L * chT
    return L * chT * chT


@dataclass(frozen=True)
class Divisibility:
    quantity: str
    value: Fraction
    divisor: int
    holds: bool
    witness: bool = False

    @property
    def quotient(self) -> Fraction:
        return self.value / self.divisor

    def __str__(self):
        mark = "ok" if self.holds else "VIOLATED"
        extra = f", quotient {format_rational(self.quotient)}" if self.holds else ""
        if self.witness:
            extra += ", best-possible witness"
        return f"{_fmt_divisor(self.divisor)} | {self.quantity}: {mark}{extra}"


def _fmt_divisor(d: int) -> str:
    special = {256 * 7: "256·7", 2048 * 23: "2048·23", 2 ** 15: "2^15", 2 ** 22: "2^22", 2 ** 26: "2^26"}
    return special.get(d, str(d))


@dataclass(frozen=True)
class CharNumberResult:
    manifold: str
    functional: str
    value: Fraction
    annotations: tuple[Divisibility, ...] = ()

    def __int__(self):
        if self.value.denominator != 1:
            raise ValueError(f"{self.functional}({self.manifold}) = {self.value} is not an integer")
        return self.value.numerator


MAX_DIM = 28


def char_number(m: ManifoldClass, functional: str, max_dim: int = MAX_DIM) -> CharNumberResult:
    if m.dim > max_dim:
        raise ManifoldError(f"{m.name} has dimension {m.dim}, beyond the configured truncation {max_dim}")
    name = _functional_name(functional)
    value = m.pair(functional_class(name, m.dim))
    return CharNumberResult(m.name, name, value)


def _values(m: ManifoldClass, max_dim: int = MAX_DIM) -> dict[str, Fraction]:
    return {f: char_number(m, f, max_dim).value for f in FUNCTIONALS}


def verify_product_formula(m1: ManifoldClass, m2: ManifoldClass) -> VerificationReport:
    """Direct pairing on ``m1 × m2`` against the factor-wise product rule."""
    start = time.perf_counter()
    p = product(m1, m2)
    a, b, v = _values(m1), _values(m2), _values(p)
    want_t = a["Sig"] * b["Sig(T)"] + b["Sig"] * a["Sig(T)"]
    want_tt = a["Sig"] * b["Sig(T⊗T)"] + 2 * a["Sig(T)"] * b["Sig(T)"] + b["Sig"] * a["Sig(T⊗T)"]
    rep = VerificationReport(f"product-formula {p.name}", p.dim, p.dim // 2, None, "fail",
                             lhs=v["Sig(T⊗T)"], rhs=want_tt, residual=v["Sig(T⊗T)"] - want_tt)
    rep.checks = [("Sig(T)", v["Sig(T)"] == want_t), ("Sig(T⊗T)", v["Sig(T⊗T)"] == want_tt)]
    rep.status = "pass" if all(ok for _, ok in rep.checks) else "fail"
    rep.detail = (f"Sig(T): {format_rational(v['Sig(T)'])} vs {format_rational(want_t)}; "
                  f"Sig(T⊗T): {format_rational(v['Sig(T⊗T)'])} vs {format_rational(want_tt)}")
    rep.seconds = time.perf_counter() - start
    return rep


def _rules(dim: int, v: dict[str, Fraction]) -> list[tuple[str, Fraction, int]]:
    sig, t, tt = v["Sig"], v["Sig(T)"], v["Sig(T⊗T)"]
    if dim % 8 == 4:
        rules = [("Sig(T)", t, 256), ("Sig(T) - 16·Sig", t - 16 * sig, 2 ** 15)]
        rules.append(("Sig(T⊗T)", tt, 256 * 7 if dim == 4 else 256))
        rules.append(("Sig(T⊗T) - 55·Sig(T) + 768·Sig", tt - 55 * t + 768 * sig, 2 ** 26))
    else:
        rules = [("Sig(T)", t, 2048)]
        rules.append(("Sig(T⊗T)", tt, 2048 * 23 if dim == 8 else 2048))
        rules.append(("Sig(T⊗T) - 23·Sig(T)", tt - 23 * t, 2 ** 22))
    return rules


def divisibility_report(m: ManifoldClass, max_dim: int = MAX_DIM) -> list[CharNumberResult]:
    """All four functionals, with the applicable spin divisibilities attached."""
    if not m.spin:
        raise ManifoldError(f"{m.name} is not spin; the divisibility statements do not apply")
    v = _values(m, max_dim)
    notes: dict[str, list[Divisibility]] = {f: [] for f in FUNCTIONALS}
    for label, value, d in _rules(m.dim, v):
        holds = value.denominator == 1 and value.numerator % d == 0
        witness = holds and label in ("Sig(T)", "Sig(T⊗T)") and abs(value / d) == 1
        key = "Sig(T⊗T)" if label.startswith("Sig(T⊗T)") else "Sig(T)"
        notes[key].append(Divisibility(label, value, d, holds, witness))
    return [CharNumberResult(m.name, f, v[f], tuple(notes[f])) for f in FUNCTIONALS]


@lru_cache(maxsize=None)
def _product_of(names: tuple[str, ...]) -> ManifoldClass:
    if len(names) == 1:
        return catalog(names[0])
    return product(_product_of(names[:-1]), catalog(names[-1]))


def spin_products(max_dim: int = MAX_DIM, names=CATALOG_NAMES) -> list[ManifoldClass]:
    """Every product of catalog entries (with repetition) of dimension <= max_dim."""
    dims = {n: catalog(n).dim for n in names}
    out = []
    for count in range(1, max_dim // 4 + 1):
        for combo in combinations_with_replacement(names, count):
            if sum(dims[c] for c in combo) <= max_dim and all(catalog(c).spin for c in combo):
                out.append(_product_of(combo))
    return sorted(out, key=lambda m: (m.dim, m.name))


def divisibility_suite(max_dim: int = MAX_DIM) -> list[VerificationReport]:
    """One report per catalog product: every applicable divisibility must hold."""
    reports = []
    for m in spin_products(max_dim):
        start = time.perf_counter()
        results = divisibility_report(m, max_dim)
        bad = [str(d) for r in results for d in r.annotations if not d.holds]
        rep = VerificationReport(f"divisibility {m.name}", m.dim, m.dim // 2, None,
                                 "fail" if bad else "pass")
        rep.detail = "; ".join(bad)
        rep.checks = [(d.quantity, d.holds) for r in results for d in r.annotations]
        rep.seconds = time.perf_counter() - start
        reports.append(rep)
    return reports


def best_possible_suite(max_dim: int = MAX_DIM) -> dict[tuple[int, str], tuple[int, int]]:
    """``(dim, quantity) -> (gcd over catalog products, claimed divisor)``."""
    table: dict[tuple[int, str], list] = {}
    for m in spin_products(max_dim):
        v = _values(m, max_dim)
        for label, value, d in _rules(m.dim, v):
            if label in ("Sig(T)", "Sig(T⊗T)"):
                g, _ = table.get((m.dim, label), (0, d))
                table[(m.dim, label)] = (math.gcd(g, int(value)), d)
    return {k: (g, d) for k, (g, d) in sorted(table.items())}
