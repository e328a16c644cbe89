"""Theta products, the level-2 modular forms, and the P1/P2 decompositions.

Theta functions are evaluated at a root ``v = y / (2 pi i)`` so that
``e^(2 pi i v) = e^y``.  Every theta value is kept as

    prefactor * y^val * body(y, q^(1/2))

where the prefactor is a rational times powers of ``i``, ``pi`` and
``q^(1/8)``.  Ratios must cancel ``pi``, odd powers of ``i`` and any
``q^(1/8)`` that is not a whole half-step before they become series;
anything else is a hard error.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .genera import (
    PowerSumBridge,
    _exp_coeffs,
    a_hat_form,
    ch_line_bundle_terms,
    l_hat_form,
    symmetrize_additive,
    EvenSeries,
    theta_element_ch,
)
from .series import (
    GradedClass,
    GradedRing,
    HalfQSeries,
    SeriesError,
    extract_degree,
)

__all__ = [
    "PrefactorError",
    "VerificationError",
    "RouteMismatch",
    "Prefactor",
    "ThetaValue",
    "theta_function",
    "theta_prime_zero",
    "root_variable",
    "theta_null_series",
    "ModularForm",
    "modular_form",
    "IdentityCheck",
    "jacobi_identity_check",
    "Case",
    "CASES",
    "get_case",
    "default_J",
    "ThetaRatio",
    "theta_ratio",
    "build_p1",
    "build_p2",
    "build_routes",
    "Decomposition",
    "basis_series",
    "decompose",
    "reconstruct_p1",
    "basis_expansion_check",
    "printed_basis_coefficients",
]


class PrefactorError(SeriesError):
    """A pi, odd i or fractional q power survived into a materialised series."""


class VerificationError(SeriesError):
    pass


class RouteMismatch(VerificationError):
    def __init__(self, what: str, q_index: int, degree: int | None, a, b):
        self.q_index = q_index
        self.degree = degree
        self.values = (a, b)
        super().__init__(f"{what}: routes differ at q^({q_index}/2), degree {degree}")


@dataclass(frozen=True)
class Prefactor:
    coeff: Fraction = Fraction(1)
    i_pow: int = 0
    pi_pow: int = 0
    q8_pow: int = 0

    def __mul__(self, other: "Prefactor") -> "Prefactor":
        return Prefactor(self.coeff * other.coeff, self.i_pow + other.i_pow,
                         self.pi_pow + other.pi_pow, self.q8_pow + other.q8_pow)

    def inverse(self) -> "Prefactor":
        return Prefactor(1 / self.coeff, -self.i_pow, -self.pi_pow, -self.q8_pow)

    def __pow__(self, n: int) -> "Prefactor":
        if n < 0:
            return self.inverse() ** (-n)
        return Prefactor(self.coeff ** n, self.i_pow * n, self.pi_pow * n, self.q8_pow * n)

    def materialize(self) -> tuple[Fraction, int]:
        """Rational factor and half-step shift; raises unless pi and odd i cancel."""
        if self.pi_pow:
            raise PrefactorError(f"uncancelled pi^{self.pi_pow}")
        if self.i_pow % 2:
            raise PrefactorError(f"uncancelled odd power i^{self.i_pow}")
        if self.q8_pow % 4 or self.q8_pow < 0:
            raise PrefactorError(f"q^({self.q8_pow}/8) is not a whole non-negative half-step")
        sign = -1 if (self.i_pow // 2) % 2 else 1
        return self.coeff * sign, self.q8_pow // 4


@dataclass(frozen=True)
class ThetaValue:
    """``prefactor * y^val * body``; ``body`` has an invertible q^0 coefficient."""

    prefactor: Prefactor
    val: int
    body: HalfQSeries

    def __mul__(self, other: "ThetaValue") -> "ThetaValue":
        return ThetaValue(self.prefactor * other.prefactor, self.val + other.val, self.body * other.body)

    def __truediv__(self, other: "ThetaValue") -> "ThetaValue":
        return ThetaValue(self.prefactor * other.prefactor.inverse(), self.val - other.val,
                          self.body * other.body.inverse())

    def __pow__(self, n: int) -> "ThetaValue":
        return ThetaValue(self.prefactor ** n, self.val * n, self.body ** n)

    def scale(self, c) -> "ThetaValue":
        return ThetaValue(self.prefactor * Prefactor(Fraction(c)), self.val, self.body)

    def materialize(self) -> HalfQSeries:
        if self.val:
            raise PrefactorError(f"uncancelled y^{self.val}")
        c, shift = self.prefactor.materialize()
        out = self.body.scale(c)
        return out.shift(shift) if shift else out


def _yring(Y: int) -> GradedRing:
    return GradedRing(Y, 0, True)


def _binomial_factor(series: HalfQSeries, c, a: int) -> HalfQSeries:
    """``series * (1 + c q^(a/2))``."""
    out = list(series.coeffs)
    for j in range(series.J, a - 1, -1):
        src = series.coeffs[j - a]
        if src:
            out[j] = out[j] + c * src
    return HalfQSeries(out, series.ring)


def _euler_body(J: int, power: int = 1) -> HalfQSeries:
    """``prod_j (1 - q^j)^power``."""
    s = HalfQSeries.one(J)
    for _ in range(power):
        for n in range(2, J + 1, 2):
            s = _binomial_factor(s, Fraction(-1), n)
    return s


def _root_exps(Y: int | None):
    if Y is None:
        return Fraction(1), Fraction(1), None
    ring = _yring(Y)
    return ring.from_u_series(_exp_coeffs(Fraction(1), Y)), ring.from_u_series(_exp_coeffs(Fraction(-1), Y)), ring


def _root_pair_product(body: HalfQSeries, sign: int, first: int, Y: int | None) -> HalfQSeries:
    """``body * prod_n (1 + sign e^y q^(a/2)) (1 + sign e^-y q^(a/2))``, ``a = first, first+2, ...``"""
    ep, em, _ = _root_exps(Y)
    for a in range(first, body.J + 1, 2):
        body = _binomial_factor(body, ep * sign, a)
        body = _binomial_factor(body, em * sign, a)
    return body


@lru_cache(maxsize=None)
def theta_function(j: int, Y: int | None, J: int) -> ThetaValue:
    """θ (j=0), θ1, θ2, θ3 at ``v = y/(2 pi i)``; ``Y=None`` means ``v = 0``.

    θ(v)  = 2 q^(1/8) sin(pi v) prod (1-q^n)(1-e^y q^n)(1-e^-y q^n)
    θ1(v) = 2 q^(1/8) cos(pi v) prod (1-q^n)(1+e^y q^n)(1+e^-y q^n)
    θ2(v) = prod (1-q^n)(1-e^y q^(n-1/2))(1-e^-y q^(n-1/2))
    θ3(v) = prod (1-q^n)(1+e^y q^(n-1/2))(1+e^-y q^(n-1/2))

    with ``sin(pi v) = -i sinh(y/2)`` and ``cos(pi v) = cosh(y/2)``.
    """
    ring = None if Y is None else _yring(Y)
    body = _euler_body(J)
    if ring is not None:
        body = HalfQSeries(body.coeffs, ring)
    if j == 0:
        if Y is None:
            raise ValueError("θ(0) vanishes; use theta_prime_zero")
        # sinh(y/2)/y
        shc = ring.from_u_series([Fraction(1, 2 ** (b + 1) * _fact(b + 1)) if b % 2 == 0 else 0
                                  for b in range(Y + 1)])
        body = _root_pair_product(body.scale(shc), -1, 2, Y)
        return ThetaValue(Prefactor(Fraction(-2), 1, 0, 1), 1, body)
    if j == 1:
        if ring is not None:
            cosh = ring.from_u_series([Fraction(1, 2 ** b * _fact(b)) if b % 2 == 0 else 0 for b in range(Y + 1)])
            body = body.scale(cosh)
        body = _root_pair_product(body, 1, 2, Y)
        return ThetaValue(Prefactor(Fraction(2), 0, 0, 1), 0, body)
    if j == 2:
        return ThetaValue(Prefactor(), 0, _root_pair_product(body, -1, 1, Y))
    if j == 3:
        return ThetaValue(Prefactor(), 0, _root_pair_product(body, 1, 1, Y))
    raise ValueError(f"no theta function {j}")


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


@lru_cache(maxsize=None)
def theta_prime_zero(J: int) -> ThetaValue:
    """``∂θ/∂v at v=0 = 2 q^(1/8) pi prod (1-q^n)^3``."""
    return ThetaValue(Prefactor(Fraction(2), 0, 1, 1), 0, _euler_body(J, 3))


def root_variable(Y: int, J: int) -> ThetaValue:
    """``v = y/(2 pi i) = -i y / (2 pi)``."""
    return ThetaValue(Prefactor(Fraction(-1, 2), 1, -1, 0), 1, HalfQSeries.one(J, _yring(Y)))


def theta_null_series(j: int, J: int) -> ThetaValue:
    """θ_j(0, τ) for j = 1, 2, 3 with its prefactor kept symbolic."""
    if j not in (1, 2, 3):
        raise ValueError("theta nulls are defined for j = 1, 2, 3")
    return theta_function(j, None, J)


# ---------------------------------------------------------------------------
# Modular forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModularForm:
    name: str
    series: HalfQSeries
    weight: int
    group: str


_PRINTED = {
    "delta1": {0: Fraction(1, 4), 1: 0, 2: 6, 3: 0, 4: 6},
    "eps1": {0: Fraction(1, 16), 1: 0, 2: -1, 3: 0, 4: 7},
    "delta2": {0: Fraction(-1, 8), 1: -3, 2: -3},
    "eps2": {0: 0, 1: 1, 2: 8},
}


@lru_cache(maxsize=None)
def modular_form(name: str, J: int) -> ModularForm:
    """δ1 = (θ2⁴+θ3⁴)/8, ε1 = θ2⁴θ3⁴/16, δ2 = -(θ1⁴+θ3⁴)/8, ε2 = θ1⁴θ3⁴/16.

    Raises :class:`VerificationError` if the expansion disagrees with the
    known leading coefficients.
    """
    t1 = theta_null_series(1, J) ** 4
    t2 = theta_null_series(2, J) ** 4
    t3 = theta_null_series(3, J) ** 4
    if name == "delta1":
        s, w, g = (t2.materialize() + t3.materialize()).scale(Fraction(1, 8)), 2, "Gamma_0(2)"
    elif name == "eps1":
        s, w, g = (t2 * t3).materialize().scale(Fraction(1, 16)), 4, "Gamma_0(2)"
    elif name == "delta2":
        s, w, g = (t1.materialize() + t3.materialize()).scale(Fraction(-1, 8)), 2, "Gamma^0(2)"
    elif name == "eps2":
        s, w, g = (t1 * t3).materialize().scale(Fraction(1, 16)), 4, "Gamma^0(2)"
    else:
        raise ValueError(f"unknown modular form {name!r}")
    for j, want in _PRINTED[name].items():
        if j <= J and s.coeffs[j] != want:
            raise VerificationError(f"{name}: q^({j}/2) coefficient {s.coeffs[j]} != {want}")
    return ModularForm(name, s, w, g)


@dataclass(frozen=True)
class IdentityCheck:
    ok: bool
    first_mismatch: int | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def jacobi_identity_check(J: int) -> IdentityCheck:
    """θ'(0) = pi θ1(0) θ2(0) θ3(0) through half-step ``J``, prefactors included."""
    lhs = theta_prime_zero(J)
    pi = ThetaValue(Prefactor(Fraction(1), 0, 1, 0), 0, HalfQSeries.one(J))
    rhs = pi * theta_null_series(1, J) * theta_null_series(2, J) * theta_null_series(3, J)
    if lhs.prefactor != rhs.prefactor:
        return IdentityCheck(False, 0, f"prefactors differ: {lhs.prefactor} vs {rhs.prefactor}")
    j = lhs.body.first_difference(rhs.body)
    if j is not None:
        return IdentityCheck(False, j, f"q^({j}/2): {lhs.body.coeffs[j]} vs {rhs.body.coeffs[j]}")
    return IdentityCheck(True)


# ---------------------------------------------------------------------------
# Cases and the two constructions of P1, P2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Case:
    name: str
    offset: int          # 4 for 8k+4, 0 for 8k
    twisted: bool

    def dim(self, k: int) -> int:
        d = 8 * k + self.offset
        if d <= 0 or k < 0:
            raise ValueError(f"case {self.name} needs a positive dimension (k={k})")
        return d

    def k_of(self, dim: int) -> int:
        if dim <= 0 or dim % 8 != self.offset:
            raise ValueError(f"dimension {dim} does not belong to case {self.name}")
        return (dim - self.offset) // 8

    def top_power(self, k: int) -> int:
        """Exponent of 8δ2 in the r = 0 basis element."""
        return 2 * k + (1 if self.offset else 0)

    def weight(self, k: int) -> int:
        return 4 * k + (2 if self.offset else 0)

    def ring(self, k: int, degree: int | None = None) -> GradedRing:
        return GradedRing.for_dim(self.dim(k), self.twisted, degree)


CASES = {
    "8k+4": Case("8k+4", 4, False),
    "8k": Case("8k", 0, False),
    "8k+4/twisted": Case("8k+4/twisted", 4, True),
    "8k/twisted": Case("8k/twisted", 0, True),
}


def get_case(case) -> Case:
    if isinstance(case, Case):
        return case
    try:
        return CASES[case]
    except KeyError:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(CASES)}") from None


def default_J(k: int) -> int:
    return 2 * k + 6


@dataclass(frozen=True)
class ThetaRatio:
    """One root factor as ``scale * series`` with ``series`` starting at 1.

    ``kind`` is ``"L"``, ``"A"`` (functions of a tangent root) or
    ``"twist-L"``/``"twist-A"`` (functions of u).
    """

    kind: str
    scale: Fraction
    series: HalfQSeries


@lru_cache(maxsize=None)
def theta_ratio(kind: str, Y: int, J: int) -> ThetaRatio:
    x = root_variable(Y, J)
    tp = theta_prime_zero(J)
    th = theta_function(0, Y, J)
    if kind == "L":
        v = (x * tp / th) * (theta_function(1, Y, J) / theta_function(1, None, J))
        v = v.scale(2)
    elif kind == "A":
        v = (x * tp / th) * (theta_function(2, Y, J) / theta_function(2, None, J))
    elif kind == "twist-L":
        v = ((theta_function(1, None, J) / theta_function(1, Y, J)) ** 2
             * (theta_function(3, Y, J) / theta_function(3, None, J))
             * (theta_function(2, Y, J) / theta_function(2, None, J)))
    elif kind == "twist-A":
        v = ((theta_function(2, None, J) / theta_function(2, Y, J)) ** 2
             * (theta_function(3, Y, J) / theta_function(3, None, J))
             * (theta_function(1, Y, J) / theta_function(1, None, J)))
    else:
        raise ValueError(f"unknown ratio kind {kind!r}")
    s = v.materialize()
    c0 = s.coeffs[0].constant
    return ThetaRatio(kind, c0, s.scale(1 / c0))


def _product_over_roots(ratio: ThetaRatio, dim: int, ring: GradedRing) -> HalfQSeries:
    """``prod_j F(y_j)`` for a tangent-root factor, via ``exp(sum_j log F)``."""
    bridge = PowerSumBridge(dim // 2, ring)
    logf = ratio.series.log()
    coeffs = []
    for c in logf.coeffs:
        coeffs.append(symmetrize_additive(EvenSeries.from_x_class(c), bridge))
    total = HalfQSeries(coeffs, ring).exp()
    return total.scale(ratio.scale ** bridge.m)


def _top(series: HalfQSeries, D: int) -> HalfQSeries:
    return HalfQSeries([extract_degree(c, D) for c in series.coeffs], series.ring)


def _route_genus(which: str, case: Case, k: int, ring: GradedRing, J: int) -> HalfQSeries:
    dim = case.dim(k)
    if which == "P1":
        genus = l_hat_form(dim, ring)
        if case.twisted:
            genus = genus * ch_line_bundle_terms(ring).cosh_sq_half.inverse()
        element = theta_element_ch("theta1", case.twisted, dim, ring, J)
    else:
        genus = a_hat_form(dim, ring)
        if case.twisted:
            genus = genus * ch_line_bundle_terms(ring).cosh_half
        element = theta_element_ch("theta2", case.twisted, dim, ring, J)
    return _top(element.scale(genus), dim // 2)


def _route_theta(which: str, case: Case, k: int, ring: GradedRing, J: int) -> HalfQSeries:
    dim = case.dim(k)
    Y = ring.degree
    kind = "L" if which == "P1" else "A"
    out = _product_over_roots(theta_ratio(kind, Y, J), dim, ring)
    if case.twisted:
        tw = theta_ratio("twist-" + kind, Y, J)
        tw_series = HalfQSeries([c.embed(ring) for c in tw.series.coeffs], ring).scale(tw.scale)
        out = out * tw_series
    return _top(out, dim // 2)


def _compare_routes(what: str, a: HalfQSeries, b: HalfQSeries) -> None:
    j = a.first_difference(b)
    if j is None:
        return
    diff = a.coeffs[j] - b.coeffs[j]
    deg = diff.max_weight() if isinstance(diff, GradedClass) else None
    raise RouteMismatch(what, j, deg, a.coeffs[j], b.coeffs[j])


@lru_cache(maxsize=None)
def build_routes(which: str, case, k: int, J: int | None = None,
                 degree: int | None = None) -> tuple[HalfQSeries, HalfQSeries]:
    """Both constructions of ``P1``/``P2``: genus·ch(Θ) and the theta-ratio product."""
    case = get_case(case)
    J = default_J(k) if J is None else J
    if degree is not None and degree < case.dim(k) // 2:
        raise ValueError(f"degree truncation {degree} is below the top degree {case.dim(k) // 2}")
    ring = case.ring(k, degree)
    if which not in ("P1", "P2"):
        raise ValueError(which)
    return _route_genus(which, case, k, ring, J), _route_theta(which, case, k, ring, J)


def build_p2(case, k: int, J: int | None = None, degree: int | None = None) -> HalfQSeries:
    a, b = build_routes("P2", case, k, J, degree)
    _compare_routes(f"P2[{get_case(case).name}, k={k}]", a, b)
    return a


def build_p1(case, k: int, J: int | None = None, degree: int | None = None) -> HalfQSeries:
    a, b = build_routes("P1", case, k, J, degree)
    _compare_routes(f"P1[{get_case(case).name}, k={k}]", a, b)
    return a


# ---------------------------------------------------------------------------
# Decomposition in the δ2/ε2 basis and reconstruction with δ1/ε1
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def basis_series(case, k: int, r: int, J: int, level: int = 2) -> HalfQSeries:
    """``(8δ)^(N-2r) ε^r`` with δ, ε of level 2 (``level=2``) or the Γ_0(2) pair (``level=1``)."""
    case = get_case(case)
    N = case.top_power(k)
    if not 0 <= r <= k:
        raise ValueError(f"basis index {r} outside 0..{k}")
    d = modular_form(f"delta{level}", J).series.scale(8)
    e = modular_form(f"eps{level}", J).series
    return (d ** (N - 2 * r)) * (e ** r)


@dataclass(frozen=True)
class Decomposition:
    case: Case
    k: int
    coefficients: tuple[GradedClass, ...]
    residual: HalfQSeries
    J: int

    @property
    def symbol(self) -> str:
        return "h" if self.case.offset else "z"

    def __getitem__(self, r: int) -> GradedClass:
        return self.coefficients[r]

    def residual_is_zero(self) -> bool:
        return all(not c for c in self.residual.coeffs)


def decompose(P2: HalfQSeries, case, k: int) -> Decomposition:
    """Solve ``P2 = sum_r c_r (8δ2)^(N-2r) ε2^r`` by elimination in ascending r.

    Basis element r starts at ``q^(r/2)`` with leading coefficient ±1, so the
    system is triangular.  The residual over the whole truncation is kept.
    """
    case = get_case(case)
    J = P2.J
    if J < k + 2:
        raise ValueError(f"truncation J={J} too short for k={k} (need k+2 half-steps)")
    residual = P2
    coeffs = []
    for r in range(k + 1):
        b = basis_series(case, k, r, J)
        lead = b.valuation()
        assert lead == r, f"basis element {r} starts at q^({lead}/2)"
        c = residual.coeffs[r] * (1 / b.coeffs[r])
        coeffs.append(c)
        residual = residual - b.scale(c)
        assert not residual.coeffs[r]
    dec = Decomposition(case, k, tuple(coeffs), residual, J)
    if not dec.residual_is_zero():
        j = residual.valuation()
        raise VerificationError(f"decomposition residual nonzero at q^({j}/2): {residual.coeffs[j]}")
    return dec


def reconstruct_p1(dec: Decomposition) -> HalfQSeries:
    """``2^w sum_r c_r (8δ1)^(N-2r) ε1^r`` with ``w`` the weight of the case."""
    case, k, J = dec.case, dec.k, dec.J
    out = None
    for r, c in enumerate(dec.coefficients):
        term = basis_series(case, k, r, J, level=1).scale(c)
        out = term if out is None else out + term
    return out.scale(2 ** case.weight(k))


def printed_basis_coefficients(case, k: int, r: int) -> tuple[Fraction, Fraction, Fraction]:
    """q^0, q^1, q^2 coefficients of ``(8δ1)^(N-2r) ε1^r`` in closed form."""
    case = get_case(case)
    if case.offset:
        lead = Fraction(2) ** (2 * k + 1 - 6 * r)
        c1 = 48 * k + 24 - 64 * r
        c2 = 1152 * k * k - 3072 * k * r + 2048 * r * r + 624 * k - 1024 * r + 24
    else:
        lead = Fraction(2) ** (2 * k - 6 * r)
        c1 = 48 * k - 64 * r
        c2 = 1152 * k * k - 3072 * k * r + 2048 * r * r - 528 * k + 512 * r
    return lead, lead * c1, lead * c2


def basis_expansion_check(k: int, r: int, J: int = 4, case="8k+4") -> IdentityCheck:
    """Compare the computed basis power-product against its closed-form q^0..q^2 terms."""
    if J < 4:
        raise ValueError("need J >= 4 half-steps to reach q^2")
    s = basis_series(case, k, r, J, level=1)
    want = printed_basis_coefficients(case, k, r)
    for i, w in enumerate(want):
        if s.coeffs[2 * i] != w:
            return IdentityCheck(False, 2 * i, f"q^{i}: {s.coeffs[2 * i]} vs {w}")
    odd = [j for j in range(1, 5, 2) if s.coeffs[j]]
    if odd:
        return IdentityCheck(False, odd[0], "half-integer power in a Γ_0(2) form")
    return IdentityCheck(True)
