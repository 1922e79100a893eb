"""Sequence grammar with decidable series behaviour.

Every sequence a tool user can write is one of four forms: a positive
constant, a geometric progression ``a * r**n``, a power law
``a * (n+1)**(-p)``, or a finite explicit prefix followed by one of the
former.  The grammar is deliberately closed: convergence of the series
(and of the derived series the graph layer needs, like cumulative-product
weightings) is decided in closed form, never by inspecting partial sums.

Values are exact ``Fraction``s when the user supplied integers or "p/q"
strings, floats otherwise.  Exact inputs flow through closed-form series
formulas without rounding; float inputs carry an absolute error bound on
the returned sum (at most ``SUM_TOL``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, Optional, Union

from scipy.special import zeta as _hurwitz_zeta

from .errors import InvariantError, SchemaError

Number = Union[Fraction, float]

# Guaranteed absolute error bound on numerically evaluated series values.
SUM_TOL = 1e-13
_MAX_TERMS = 2_000_000


def parse_number(raw, where: str = "value") -> Number:
    """Parse a JSON-level number: int and "p/q" strings stay exact."""
    if isinstance(raw, bool):
        raise SchemaError(f"{where}: expected a number, got a boolean")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"{where}: cannot parse {raw!r} as p/q") from exc
    raise SchemaError(f"{where}: expected a number, got {type(raw).__name__}")


def number_to_json(x: Number):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def _is_exact(x: Number) -> bool:
    return isinstance(x, (Fraction, int))


def _pow(base: Number, exponent: Number) -> Number:
    """base**exponent, staying exact when both are rational and the
    exponent is an integer."""
    if _is_exact(base) and _is_exact(exponent):
        e = Fraction(exponent)
        if e.denominator == 1:
            return Fraction(base) ** int(e)
    return float(base) ** float(exponent)


@dataclass(frozen=True)
class SeriesSum:
    """Outcome of summing a positive series: Finite(value) or Divergent."""

    finite: bool
    value: Optional[Number] = None
    error_bound: float = 0.0

    @staticmethod
    def finite_sum(value: Number, error_bound: float = 0.0) -> "SeriesSum":
        return SeriesSum(True, value, error_bound)

    DIVERGENT: ClassVar["SeriesSum"]

    @property
    def value_float(self) -> float:
        if not self.finite:
            return math.inf
        return float(self.value)

    @property
    def exact(self) -> bool:
        return self.finite and isinstance(self.value, Fraction) and self.error_bound == 0.0

    def __str__(self) -> str:
        if not self.finite:
            return "divergent"
        if isinstance(self.value, Fraction):
            return str(self.value)
        return repr(self.value)

    def to_json(self):
        if not self.finite:
            return {"finite": False}
        return {"finite": True, "value": number_to_json(self.value),
                "error_bound": self.error_bound}


# A single shared divergent instance keeps comparisons cheap.
SeriesSum.DIVERGENT = SeriesSum(False)


# ---------------------------------------------------------------------------
# Eventual-form algebra
# ---------------------------------------------------------------------------
#
# Past a finite prefix, every grammar sequence has the shape
#     term(n) = coeff * ratio**n * prod_i (n + off_i)**pow_i
# which is closed under pointwise products and index shifts.  That is
# enough to classify (and value) every derived series used by the graph
# layer.

@dataclass(frozen=True)
class GeomPoly:
    coeff: Number
    ratio: Number
    factors: tuple = ()  # ((offset, exponent), ...)

    def term(self, n: int) -> Number:
        out = self.coeff * _pow(self.ratio, n)
        for off, p in self.factors:
            out = out * _pow(n + off, p)
        return out

    @property
    def degree(self) -> float:
        return float(sum(float(p) for _, p in self.factors))

    def times(self, other: "GeomPoly") -> "GeomPoly":
        return GeomPoly(self.coeff * other.coeff, self.ratio * other.ratio,
                        self.factors + other.factors)

    def scaled(self, c: Number) -> "GeomPoly":
        return GeomPoly(self.coeff * c, self.ratio, self.factors)

    def inverted(self) -> "GeomPoly":
        inv_factors = tuple((off, -p) for off, p in self.factors)
        if _is_exact(self.coeff) and _is_exact(self.ratio):
            return GeomPoly(1 / Fraction(self.coeff), 1 / Fraction(self.ratio), inv_factors)
        return GeomPoly(1.0 / float(self.coeff), 1.0 / float(self.ratio), inv_factors)

    def shifted(self, k: int) -> "GeomPoly":
        """Return g with g.term(n) == self.term(n + k)."""
        coeff = self.coeff * _pow(self.ratio, k)
        return GeomPoly(coeff, self.ratio, tuple((off + k, p) for off, p in self.factors))

    def ratio_upper_bound(self, n: int) -> float:
        """Upper bound for term(m+1)/term(m) over all m >= n.

        Polynomial factors with positive exponent have ratios decreasing
        towards 1, factors with negative exponent increase towards 1, so
        the bound is the current ratio with negative-exponent factors
        clamped at 1.
        """
        q = float(self.ratio)
        for off, p in self.factors:
            fp = float(p)
            if fp > 0:
                q *= ((n + 1 + float(off)) / (n + float(off))) ** fp
        return q


def _numeric_tail_ratio(gp: GeomPoly, start: int) -> tuple[float, float]:
    """Sum a ratio-convergent GeomPoly series numerically.

    Valid when ratio < 1 (polynomial factors allowed).  Returns
    (value, rigorous absolute error bound).
    """
    total = 0.0
    n = start
    while n < start + _MAX_TERMS:
        t = float(gp.term(n))
        total += t
        q = gp.ratio_upper_bound(n)
        if q < 1.0:
            bound = t * q / (1.0 - q)
            if bound <= SUM_TOL * max(1.0, total):
                return total, bound
        n += 1
    raise ArithmeticError("series failed to settle within the term cap")


def _numeric_tail_power(gp: GeomPoly, start: int) -> tuple[float, float]:
    """Sum a GeomPoly series with ratio == 1 and degree < -1 numerically,
    with an integral-comparison tail bound."""
    degree = gp.degree
    off_min = min(float(off) for off, _ in gp.factors)
    total = 0.0
    n = max(start, 1)
    for k in range(start, n):
        total += float(gp.term(k))
    while n < start + _MAX_TERMS:
        total += float(gp.term(n))
        # term(m) <= coeff * K * (m + off_min)**degree for m >= n
        K = 1.0
        for off, p in gp.factors:
            fp = float(p)
            if fp > 0:
                K *= ((n + float(off)) / (n + off_min)) ** fp
        bound = abs(float(gp.coeff)) * K * (n + off_min) ** (degree + 1.0) / (-degree - 1.0)
        if bound <= SUM_TOL * max(1.0, total):
            return total, bound
        n += 1
    raise ArithmeticError("series failed to settle within the term cap")


def geompoly_series(gp: GeomPoly, start: int) -> SeriesSum:
    """Classify and value sum_{n >= start} gp.term(n) for positive terms."""
    r = float(gp.ratio)
    if float(gp.coeff) == 0.0:
        return SeriesSum.finite_sum(Fraction(0))
    if r > 1.0:
        return SeriesSum.DIVERGENT
    if r == 1.0:
        if not gp.factors:
            return SeriesSum.DIVERGENT
        if gp.degree >= -1.0:
            return SeriesSum.DIVERGENT
        if len(gp.factors) == 1:
            off, p = gp.factors[0]
            v = float(gp.coeff) * float(_hurwitz_zeta(-float(p), start + float(off)))
            return SeriesSum.finite_sum(v, SUM_TOL * max(1.0, abs(v)))
        v, bound = _numeric_tail_power(gp, start)
        return SeriesSum.finite_sum(v, bound)
    # r < 1
    if not gp.factors:
        head = gp.term(start)
        if _is_exact(head) and _is_exact(gp.ratio):
            return SeriesSum.finite_sum(Fraction(head) / (1 - Fraction(gp.ratio)))
        v = float(head) / (1.0 - r)
        return SeriesSum.finite_sum(v, SUM_TOL * max(1.0, abs(v)))
    v, bound = _numeric_tail_ratio(gp, start)
    return SeriesSum.finite_sum(v, bound)


# ---------------------------------------------------------------------------
# The public grammar
# ---------------------------------------------------------------------------

class SequenceSpec:
    """Base class; concrete forms are Constant, Geometric, Power, Explicit."""

    kind = "abstract"

    def term(self, n: int) -> Number:
        raise NotImplementedError

    def eventual(self) -> tuple[int, GeomPoly]:
        """(start, gp) with term(n) == gp.term(n) for all n >= start."""
        raise NotImplementedError

    @property
    def is_exact(self) -> bool:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # -- series -----------------------------------------------------------

    def series_sum(self) -> SeriesSum:
        """Sum of all terms, decided in closed form."""
        return series_of(self)

    def partial_sum(self, upto: int) -> Number:
        """Sum of terms with index < upto."""
        total: Number = Fraction(0)
        for n in range(upto):
            total = total + self.term(n)
        return total

    def tail_sum(self, start: int) -> SeriesSum:
        """Sum of terms with index >= start (same convergence class as the
        full series, positive terms)."""
        full = self.series_sum()
        if not full.finite:
            return SeriesSum.DIVERGENT
        head = self.partial_sum(start)
        if isinstance(full.value, Fraction) and _is_exact(head):
            return SeriesSum.finite_sum(full.value - Fraction(head), full.error_bound)
        return SeriesSum.finite_sum(float(full.value) - float(head),
                                    full.error_bound + SUM_TOL)

    def terms_vanish(self) -> bool:
        """True when term(n) -> 0."""
        start, gp = self.eventual()
        r = float(gp.ratio)
        if r < 1.0:
            return True
        if r > 1.0:
            return False
        return gp.degree < 0.0

    # -- validation helpers -------------------------------------------------

    def require_positive(self, what: str, exc=InvariantError) -> None:
        start, gp = self.eventual()
        for n in range(start):
            if not (float(self.term(n)) > 0.0):
                raise exc(f"{what}: term {n} is not strictly positive")
        if not (float(gp.coeff) > 0.0 and float(gp.ratio) > 0.0):
            raise exc(f"{what}: tail is not strictly positive")

    def require_integer_at_least(self, minimum: int, what: str) -> None:
        """Check that every term is an integer >= minimum.

        Decidable within the grammar: admissible tails are constants,
        integer-ratio geometrics and integer-exponent growing powers, all
        of which are nondecreasing past the prefix.
        """
        start, gp = self.eventual()
        for n in range(start):
            t = self.term(n)
            if not (_is_exact(t) and Fraction(t).denominator == 1 and t >= minimum):
                raise InvariantError(f"{what}: term {n} = {t} is not an integer >= {minimum}")
        ratio = gp.ratio
        if not (_is_exact(ratio) and Fraction(ratio).denominator == 1 and ratio >= 1):
            raise InvariantError(f"{what}: tail ratio {ratio} must be an integer >= 1")
        for off, p in gp.factors:
            ok = _is_exact(p) and Fraction(p).denominator == 1 and p >= 0 \
                and _is_exact(off) and Fraction(off).denominator == 1 and start + off >= 1
            if not ok:
                raise InvariantError(f"{what}: tail power factor is not integer-valued")
        first = gp.term(start)
        # first value integer plus integer growth factors makes every
        # later value an integer, even when the shifted coefficient is not
        if not (_is_exact(first) and Fraction(first).denominator == 1):
            raise InvariantError(f"{what}: term {start} = {first} is not an integer")
        if first < minimum:
            raise InvariantError(f"{what}: term {start} = {first} is below {minimum}")


@dataclass(frozen=True)
class Constant(SequenceSpec):
    c: Number
    kind = "constant"

    def term(self, n: int) -> Number:
        return self.c

    def eventual(self):
        return 0, GeomPoly(self.c, Fraction(1) if _is_exact(self.c) else 1.0)

    @property
    def is_exact(self) -> bool:
        return _is_exact(self.c)

    def to_json(self):
        return {"kind": "constant", "c": number_to_json(self.c)}


@dataclass(frozen=True)
class Geometric(SequenceSpec):
    a: Number
    r: Number
    kind = "geometric"

    def term(self, n: int) -> Number:
        return self.a * _pow(self.r, n)

    def eventual(self):
        return 0, GeomPoly(self.a, self.r)

    @property
    def is_exact(self) -> bool:
        return _is_exact(self.a) and _is_exact(self.r)

    def to_json(self):
        return {"kind": "geometric", "a": number_to_json(self.a), "r": number_to_json(self.r)}


@dataclass(frozen=True)
class Power(SequenceSpec):
    """a * (n+1)**(-p); p > 0 decays (p=1 is the harmonic sequence)."""

    a: Number
    p: Number
    kind = "power"

    def term(self, n: int) -> Number:
        return self.a * _pow(n + 1, -self.p)

    def eventual(self):
        one = Fraction(1) if self.is_exact else 1.0
        return 0, GeomPoly(self.a, one, ((Fraction(1), -self.p),))

    @property
    def is_exact(self) -> bool:
        return _is_exact(self.a) and _is_exact(self.p)

    def to_json(self):
        return {"kind": "power", "a": number_to_json(self.a), "p": number_to_json(self.p)}


@dataclass(frozen=True)
class Explicit(SequenceSpec):
    prefix: tuple
    tail: SequenceSpec
    kind = "explicit"

    def term(self, n: int) -> Number:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.tail.term(n - len(self.prefix))

    def eventual(self):
        k = len(self.prefix)
        tail_start, gp = self.tail.eventual()
        return k + tail_start, gp.shifted(-k)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(x) for x in self.prefix) and self.tail.is_exact

    def to_json(self):
        return {"kind": "explicit",
                "prefix": [number_to_json(x) for x in self.prefix],
                "tail": self.tail.to_json()}


def series_of(seq: SequenceSpec, start: int = 0) -> SeriesSum:
    """Sum of seq.term(n) over n >= start."""
    ev_start, gp = seq.eventual()
    ev_start = max(ev_start, start)
    tail = geompoly_series(gp, ev_start)
    if not tail.finite:
        return SeriesSum.DIVERGENT
    head: Number = Fraction(0)
    for n in range(start, ev_start):
        head = head + seq.term(n)
    if isinstance(tail.value, Fraction) and _is_exact(head):
        return SeriesSum.finite_sum(tail.value + Fraction(head), tail.error_bound)
    return SeriesSum.finite_sum(float(tail.value) + float(head), tail.error_bound + SUM_TOL)


def parse_sequence(doc, where: str = "sequence") -> SequenceSpec:
    """Parse the JSON form of a sequence."""
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = doc.get("kind")
    if kind == "constant":
        _check_fields(doc, {"kind", "c"}, where)
        return Constant(parse_number(doc.get("c"), f"{where}.c"))
    if kind == "geometric":
        _check_fields(doc, {"kind", "a", "r"}, where)
        return Geometric(parse_number(doc.get("a"), f"{where}.a"),
                         parse_number(doc.get("r"), f"{where}.r"))
    if kind == "power":
        _check_fields(doc, {"kind", "a", "p"}, where)
        return Power(parse_number(doc.get("a"), f"{where}.a"),
                     parse_number(doc.get("p"), f"{where}.p"))
    if kind == "explicit":
        _check_fields(doc, {"kind", "prefix", "tail"}, where)
        prefix = doc.get("prefix")
        if not isinstance(prefix, list):
            raise SchemaError(f"{where}.prefix: expected a list")
        terms = tuple(parse_number(x, f"{where}.prefix[{i}]") for i, x in enumerate(prefix))
        return Explicit(terms, parse_sequence(doc.get("tail"), f"{where}.tail"))
    raise SchemaError(f"{where}: unknown sequence kind {kind!r}")


def _check_fields(doc: dict, allowed: set, where: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise SchemaError(f"{where}: unknown fields {sorted(extra)}")


# ---------------------------------------------------------------------------
# Derived series for graph weights
# ---------------------------------------------------------------------------

class CumulativeProduct:
    """mu_n = prod_{k<=n} b_k for an integer sequence b, with mu_{-1} = 1."""

    def __init__(self, b: SequenceSpec):
        self.b = b
        self._cache = [Fraction(1)]  # _cache[i] = mu_{i-1}

    def mu(self, n: int) -> Fraction:
        while len(self._cache) <= n + 1:
            i = len(self._cache) - 1
            self._cache.append(self._cache[-1] * Fraction(self.b.term(i)))
        return self._cache[n + 1]

    def eventual_geompoly(self) -> Optional[tuple[int, GeomPoly]]:
        """(start, gp) with mu_n == gp.term(n) for n >= start, when b is
        eventually constant; None when mu grows super-geometrically."""
        start, gp = self.b.eventual()
        if gp.factors or float(gp.ratio) != 1.0:
            return None
        beta = Fraction(gp.coeff) if _is_exact(gp.coeff) else gp.coeff
        # mu_n = mu_{start-1} * beta**(n - start + 1) for n >= start
        coeff = self.mu(start - 1) * _pow(beta, 1 - start)
        return start, GeomPoly(coeff, beta)


def _combined_series(ell: SequenceSpec, cum: CumulativeProduct, invert: bool,
                     start: int) -> SeriesSum:
    """sum_{n >= start} of ell_n * mu_n (invert=False) or ell_n / mu_n."""
    ev = cum.eventual_geompoly()
    ell_start, ell_gp = ell.eventual()
    if ev is not None:
        mu_start, mu_gp = ev
        s0 = max(start, ell_start, mu_start)
        gp = ell_gp.times(mu_gp.inverted() if invert else mu_gp)
        tail = geompoly_series(gp, s0)
        if not tail.finite:
            return SeriesSum.DIVERGENT
        head: Number = Fraction(0)
        for n in range(start, s0):
            t = ell.term(n)
            head = head + (t / cum.mu(n) if invert else t * cum.mu(n))
        if isinstance(tail.value, Fraction) and _is_exact(head):
            return SeriesSum.finite_sum(tail.value + Fraction(head), tail.error_bound)
        return SeriesSum.finite_sum(float(tail.value) + float(head),
                                    tail.error_bound + SUM_TOL)
    # b grows without bound, so mu_n is super-geometric.
    if not invert:
        # term ratio is b_{n+1} * (ell ratio) -> infinity
        return SeriesSum.DIVERGENT
    # ell_n / mu_n: term ratio <= ratio_upper(ell, n) / b_{n+1} -> 0.
    total = 0.0
    n = start
    while n < start + _MAX_TERMS:
        t = float(ell.term(n)) / float(cum.mu(n))
        total += t
        if n >= ell_start:
            q = ell_gp.ratio_upper_bound(n) / float(cum.b.term(n + 1))
            if q < 1.0:
                bound = t * q / (1.0 - q)
                if bound <= SUM_TOL * max(1.0, total):
                    return SeriesSum.finite_sum(total, bound)
        n += 1
    raise ArithmeticError("series failed to settle within the term cap")


def weighted_volume_series(b: SequenceSpec, ell: SequenceSpec, start: int = 0,
                           cum: Optional[CumulativeProduct] = None) -> SeriesSum:
    """sum_{n >= start} mu_n * ell_n  (tree volume past a generation)."""
    return _combined_series(ell, cum or CumulativeProduct(b), invert=False, start=start)


def inverse_weight_series(b: SequenceSpec, ell: SequenceSpec, start: int = 0,
                          cum: Optional[CumulativeProduct] = None) -> SeriesSum:
    """sum_{n >= start} ell_n / mu_n  (kernel energy tails)."""
    return _combined_series(ell, cum or CumulativeProduct(b), invert=True, start=start)


def product_series(factors: tuple, start: int = 0) -> SeriesSum:
    """sum_{n >= start} of prod_i s_i(n + shift_i) for factors
    ((s_i, shift_i), ...); used for antitree volumes and star-weight sums."""
    s0 = start
    combined = GeomPoly(Fraction(1), Fraction(1))
    for seq, shift in factors:
        st, gp = seq.eventual()
        s0 = max(s0, st - shift, 0)
        combined = combined.times(gp.shifted(shift))
    tail = geompoly_series(combined, s0)
    if not tail.finite:
        return SeriesSum.DIVERGENT
    head: Number = Fraction(0)
    for n in range(start, s0):
        t: Number = Fraction(1)
        for seq, shift in factors:
            t = t * seq.term(n + shift)
        head = head + t
    if isinstance(tail.value, Fraction) and _is_exact(head):
        return SeriesSum.finite_sum(tail.value + Fraction(head), tail.error_bound)
    return SeriesSum.finite_sum(float(tail.value) + float(head),
                                tail.error_bound + SUM_TOL)
