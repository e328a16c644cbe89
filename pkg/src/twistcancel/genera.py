"""Characteristic forms in the Pontryagin basis.

Symmetric functions of the Chern roots ``±y_j`` of ``T_C M`` are never built
from explicit root variables.  A one-root even series ``f(y) = sum a_r y^(2r)``
is pushed into the ``p``-ring through power sums
``s_2r = sum_j y_j^(2r)``, which Newton's identities express in
``p_i = e_i(y_1^2, ..., y_m^2)``:

* additive:        ``sum_j f(y_j) = m a_0 + sum_r a_r s_2r``
* multiplicative:  ``prod_j f(y_j) = exp(sum_j log f(y_j))``

The factor ``2 pi sqrt(-1)`` of the roots is absorbed, so ``Â`` has root
factor ``(y/2)/sinh(y/2)`` and ``L̂`` has ``y/tanh(y/2)``.  The Euler form of
the plane bundle is the ring variable ``u``; ``ch(xi_C) = e^u + e^-u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import NamedTuple, Sequence

from .series import (
    GradedClass,
    GradedRing,
    HalfQSeries,
    SeriesDomainError,
    StructuralError,
    series_exp,
    series_log,
)

__all__ = [
    "EvenSeries",
    "PowerSumBridge",
    "symmetrize_additive",
    "symmetrize_multiplicative",
    "a_hat_root_series",
    "l_hat_root_series",
    "a_hat_form",
    "l_hat_form",
    "ch_tangent",
    "ch_tensor_square",
    "LineBundleTerms",
    "ch_line_bundle_terms",
    "lambda_ch",
    "sym_ch",
    "theta_element_ch",
    "check_dim",
]


def check_dim(dim: int, modulus: int = 4) -> None:
    if not isinstance(dim, int) or dim <= 0 or dim % modulus:
        raise ValueError(f"dimension must be a positive multiple of {modulus}, got {dim!r}")


def _xring(deg: int) -> GradedRing:
    # one-variable ring; its "u" plays the single root variable x
    return GradedRing(deg, 0, True)


@dataclass(frozen=True)
class EvenSeries:
    """``scale * sum_r coeffs[r] x^(2r)``.

    ``kind`` records how the series is combined over roots: ``"additive"``
    (``sum_j``) or ``"multiplicative"`` (``prod_j``).  Multiplicative series are
    stored normalised (``coeffs[0] == 1``) with the constant in ``scale``.
    """

    coeffs: tuple[Fraction, ...]
    kind: str = "additive"
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.kind not in ("additive", "multiplicative"):
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def normalized(cls, coeffs: Sequence[Fraction]) -> "EvenSeries":
        c0 = Fraction(coeffs[0])
        if not c0:
            raise SeriesDomainError("multiplicative factor with zero constant term")
        return cls(tuple(Fraction(c) / c0 for c in coeffs), "multiplicative", c0)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def as_x_class(self, deg: int | None = None) -> GradedClass:
        """The normalised series as an element of the one-variable ring."""
        deg = 2 * self.order if deg is None else deg
        ring = _xring(deg)
        full = [0] * (deg + 1)
        for r, a in enumerate(self.coeffs):
            if 2 * r <= deg:
                full[2 * r] = a
        return ring.from_u_series(full)

    @classmethod
    def from_x_class(cls, f: GradedClass, kind: str = "additive") -> "EvenSeries":
        coeffs = []
        for b in range(f.ring.degree + 1):
            c = f.coeff((b,))
            if b % 2:
                if c:
                    raise StructuralError("series is not even")
            else:
                coeffs.append(c)
        return cls(tuple(coeffs), kind)

    def log(self) -> "EvenSeries":
        return EvenSeries.from_x_class(series_log(self.as_x_class()), "additive")


def _exp_coeffs(a: Fraction, deg: int) -> list[Fraction]:
    """Coefficients of ``e^(a x)`` through ``x^deg``."""
    return [Fraction(a) ** n / factorial(n) for n in range(deg + 1)]


def _cosh_even(a: Fraction, order: int) -> list[Fraction]:
    """``cosh(a x)`` as even coefficients ``[x^0, x^2, ...]``."""
    return [Fraction(a) ** (2 * r) / factorial(2 * r) for r in range(order + 1)]


def _sinhc_even(a: Fraction, order: int) -> list[Fraction]:
    """``sinh(a x) / (a x)`` as even coefficients."""
    return [Fraction(a) ** (2 * r) / factorial(2 * r + 1) for r in range(order + 1)]


@lru_cache(maxsize=None)
def a_hat_root_series(order: int) -> EvenSeries:
    """``(x/2)/sinh(x/2)`` through ``x^(2*order)``."""
    s = EvenSeries(tuple(_sinhc_even(Fraction(1, 2), order))).as_x_class()
    inv = s.inverse()
    return EvenSeries.normalized(EvenSeries.from_x_class(inv).coeffs)


@lru_cache(maxsize=None)
def l_hat_root_series(order: int) -> EvenSeries:
    """``x/tanh(x/2) = 2 cosh(x/2) (x/2)/sinh(x/2)``."""
    a = a_hat_root_series(order).as_x_class()
    c = EvenSeries(tuple(_cosh_even(Fraction(1, 2), order))).as_x_class()
    coeffs = EvenSeries.from_x_class(a * c).coeffs
    return EvenSeries.normalized([2 * x for x in coeffs])


class PowerSumBridge:
    """Power sums ``s_2r`` of the squared roots in terms of ``p_i``.

    ``m`` is the number of root pairs (``dim/2``); ``p_i`` vanishes for
    ``i > m``.
    """

    def __init__(self, m: int, ring: GradedRing):
        if m < 0:
            raise ValueError("number of roots must be non-negative")
        self.m = m
        self.ring = ring
        self._sums: dict[int, GradedClass] = {}

    def elementary(self, i: int) -> GradedClass:
        if i > self.m or 2 * i > self.ring.degree:
            return self.ring.zero()
        return self.ring.p(i)

    def power_sum(self, r: int) -> GradedClass:
        """``s_2r``; ``r = 0`` gives ``m``."""
        if r == 0:
            return self.ring.const(self.m)
        if r not in self._sums:
            # Newton: P_r = sum_{i<r} (-1)^(i-1) e_i P_(r-i) + (-1)^(r-1) r e_r
            acc = self.elementary(r).scale((-1) ** (r - 1) * r)
            for i in range(1, r):
                e = self.elementary(i)
                if e:
                    acc = acc + (e * self.power_sum(r - i)).scale((-1) ** (i - 1))
            self._sums[r] = acc
        return self._sums[r]

    def max_order(self) -> int:
        return self.ring.degree // 2


def symmetrize_additive(f: EvenSeries, bridge: PowerSumBridge) -> GradedClass:
    """``sum_j f(y_j)`` over the ``m`` root pairs."""
    ring = bridge.ring
    out = ring.zero()
    for r, a in enumerate(f.coeffs):
        if 2 * r > ring.degree:
            break
        if a:
            out = out + bridge.power_sum(r).scale(a * f.scale)
    return out


def symmetrize_multiplicative(f: EvenSeries, bridge: PowerSumBridge) -> GradedClass:
    """``prod_j f(y_j)``; the normalised part must start with 1."""
    if f.coeffs[0] != 1:
        raise SeriesDomainError("multiplicative series needs constant term 1 after normalisation")
    order = bridge.max_order()
    padded = EvenSeries(tuple(f.coeffs[: order + 1]) + (0,) * max(0, order + 1 - len(f.coeffs)))
    logf = padded.log()
    total = series_exp(symmetrize_additive(logf, bridge))
    return total.scale(f.scale ** bridge.m)


def _ring_for(dim: int, ring: GradedRing | None) -> GradedRing:
    return GradedRing.for_dim(dim) if ring is None else ring


def _bridge(dim: int, ring: GradedRing) -> PowerSumBridge:
    return PowerSumBridge(dim // 2, ring)


def a_hat_form(dim: int, ring: GradedRing | None = None) -> GradedClass:
    check_dim(dim)
    ring = _ring_for(dim, ring)
    return symmetrize_multiplicative(a_hat_root_series(ring.degree // 2), _bridge(dim, ring))


def l_hat_form(dim: int, ring: GradedRing | None = None) -> GradedClass:
    check_dim(dim)
    ring = _ring_for(dim, ring)
    return symmetrize_multiplicative(l_hat_root_series(ring.degree // 2), _bridge(dim, ring))


def ch_tangent(dim: int, ring: GradedRing | None = None) -> GradedClass:
    """``ch(T_C M) = sum_j (e^y_j + e^-y_j)``."""
    ring = _ring_for(dim, ring)
    f = EvenSeries(tuple(2 * c for c in _cosh_even(Fraction(1), ring.degree // 2)))
    return symmetrize_additive(f, _bridge(dim, ring))


def ch_tensor_square(dim: int, ring: GradedRing | None = None) -> GradedClass:
    c = ch_tangent(dim, ring)
    return c * c


class LineBundleTerms(NamedTuple):
    ch_xi: GradedClass
    cosh_half: GradedClass
    cosh_sq_half: GradedClass
    sinh_sq_half: GradedClass


def ch_line_bundle_terms(ring: GradedRing) -> LineBundleTerms:
    """``e^u + e^-u``, ``cosh(u/2)``, ``cosh^2(u/2)``, ``sinh^2(u/2)``."""
    D = ring.degree
    e_plus = _exp_coeffs(Fraction(1), D)
    e_minus = _exp_coeffs(Fraction(-1), D)
    ch_xi = ring.from_u_series([a + b for a, b in zip(e_plus, e_minus)])
    half = _exp_coeffs(Fraction(1, 2), D)
    mhalf = _exp_coeffs(Fraction(-1, 2), D)
    cosh_half = ring.from_u_series([(a + b) / 2 for a, b in zip(half, mhalf)])
    sinh_half = ring.from_u_series([(a - b) / 2 for a, b in zip(half, mhalf)])
    return LineBundleTerms(ch_xi, cosh_half, cosh_half * cosh_half, sinh_half * sinh_half)


# ---------------------------------------------------------------------------
# Theta elements
# ---------------------------------------------------------------------------

class _ReducedTangent:
    """Adams operations on ``ch(T_C M - C^dim)``."""

    def __init__(self, dim: int, ring: GradedRing):
        self.bridge = _bridge(dim, ring)
        self.ring = ring
        self._cache: dict[int, GradedClass] = {}

    def adams(self, k: int) -> GradedClass:
        if k not in self._cache:
            order = self.ring.degree // 2
            coeffs = [Fraction(0)] + [2 * Fraction(k) ** (2 * r) / factorial(2 * r) for r in range(1, order + 1)]
            self._cache[k] = symmetrize_additive(EvenSeries(tuple(coeffs)), self.bridge)
        return self._cache[k]


class _ReducedLine:
    """Adams operations on ``ch(xi_C - C^2) = e^u + e^-u - 2``."""

    def __init__(self, ring: GradedRing):
        self.ring = ring
        self._cache: dict[int, GradedClass] = {}

    def adams(self, k: int) -> GradedClass:
        if k not in self._cache:
            D = self.ring.degree
            c = [a + b for a, b in zip(_exp_coeffs(Fraction(k), D), _exp_coeffs(Fraction(-k), D))]
            c[0] -= 2
            self._cache[k] = self.ring.from_u_series(c)
        return self._cache[k]


def _log_power_op(bundle, op: str, sign: int, first: int, J: int, mult: int = 1) -> HalfQSeries:
    """log ch of ``prod_n op_{sign q^(level_n/2)}(E~)``, levels ``first, first+2, ...``.

    ``log ch Lambda_t(E~) = sum_k (-1)^(k-1) t^k psi^k(E~) / k`` and
    ``log ch S_t(E~) = sum_k t^k psi^k(E~) / k``.
    """
    ring = bundle.ring
    out = [ring.zero() for _ in range(J + 1)]
    for level in range(first, J + 1, 2):
        k = 1
        while k * level <= J:
            c = Fraction(sign) ** k / k
            if op == "lambda":
                c *= (-1) ** (k - 1)
            elif op != "sym":
                raise ValueError(op)
            out[k * level] = out[k * level] + bundle.adams(k).scale(c * mult)
            k += 1
    return HalfQSeries(out, ring)


def _bundle(name: str, dim: int, ring: GradedRing):
    if name == "T":
        return _ReducedTangent(dim, ring)
    if name == "xi":
        if not ring.with_u:
            raise StructuralError("line-bundle terms need a ring with u")
        return _ReducedLine(ring)
    raise ValueError(f"unknown bundle {name!r}")


def lambda_ch(bundle: str, sign: int, first: int, dim: int, ring: GradedRing, J: int) -> HalfQSeries:
    """``ch prod_n Lambda_{sign q^(level/2)}(E~)`` for ``E`` = ``"T"`` or ``"xi"``."""
    return _log_power_op(_bundle(bundle, dim, ring), "lambda", sign, first, J).exp()


def sym_ch(bundle: str, sign: int, first: int, dim: int, ring: GradedRing, J: int) -> HalfQSeries:
    """``ch prod_n S_{sign q^(level/2)}(E~)``."""
    return _log_power_op(_bundle(bundle, dim, ring), "sym", sign, first, J).exp()


# (bundle, operation, sign, first level in half-steps, multiplicity)
_THETA_FACTORS = {
    ("theta1", False): [("T", "sym", 1, 2, 1), ("T", "lambda", 1, 2, 1)],
    ("theta2", False): [("T", "sym", 1, 2, 1), ("T", "lambda", -1, 1, 1)],
    ("theta1", True): [
        ("T", "sym", 1, 2, 1),
        ("T", "lambda", 1, 2, 1),
        ("xi", "lambda", 1, 2, -2),
        ("xi", "lambda", 1, 1, 1),
        ("xi", "lambda", -1, 1, 1),
    ],
    ("theta2", True): [
        ("T", "sym", 1, 2, 1),
        ("T", "lambda", -1, 1, 1),
        ("xi", "lambda", -1, 1, -2),
        ("xi", "lambda", 1, 1, 1),
        ("xi", "lambda", 1, 2, 1),
    ],
}


def theta_element_ch(which: str, twisted: bool, dim: int, ring: GradedRing | None = None,
                     J: int = 4) -> HalfQSeries:
    """Chern character of Θ1/Θ2 (optionally twisted by xi) as a q^(1/2)-series.

    Tangent factors are summed as logarithms through the bridge and
    exponentiated; the u-only factors are exponentiated separately and
    multiplied in.
    """
    which = {"1": "theta1", "2": "theta2"}.get(str(which), which)
    if (which, twisted) not in _THETA_FACTORS:
        raise ValueError(f"unknown theta element {which!r}")
    ring = _ring_for(dim, ring)
    if twisted and not ring.with_u:
        raise StructuralError("twisted theta element needs a ring with u")
    bundles = {"T": _bundle("T", dim, ring)}
    if twisted:
        bundles["xi"] = _bundle("xi", dim, ring)
    logs = {"T": HalfQSeries.zero(J, ring), "xi": HalfQSeries.zero(J, ring)}
    for name, op, sign, first, mult in _THETA_FACTORS[(which, twisted)]:
        logs[name] = logs[name] + _log_power_op(bundles[name], op, sign, first, J, mult)
    result = logs["T"].exp()
    if twisted:
        result = result * logs["xi"].exp()
    return result
