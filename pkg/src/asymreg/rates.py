"""Rate-of-asymptotic-regularity formulas with certified upward bounds.

All arithmetic goes through :class:`Enclosure`, which keeps a value as an
exact rational for as long as the computation allows it and otherwise as an
outward-rounded interval of ``gmpy2.mpfr`` endpoints. The reported bound of a
rate is the upper endpoint, so it is never below the true real value.

Rate indices (``varphi``, ``sigma``) are plain Python ints: exact, unbounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import gmpy2

from .errors import InvalidInput

DEFAULT_PRECISION = 256


def as_alpha(value) -> Fraction:
    """Exact averagedness parameter; rejects anything outside the open interval (0, 1)."""
    a = _to_fraction(value, "alpha")
    if not 0 < a < 1:
        raise InvalidInput(f"alpha must lie strictly inside (0, 1), got {value!r}")
    return a


def _to_fraction(value, name: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise InvalidInput(f"{name} must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, gmpy2.mpfr):
        if not gmpy2.is_finite(value):
            raise InvalidInput(f"{name} must be finite, got {value!r}")
        q = gmpy2.mpq(value)
        return Fraction(int(q.numerator), int(q.denominator))
    try:
        return Fraction(value)
    except (TypeError, ValueError, OverflowError) as exc:
        raise InvalidInput(f"{name} must be a finite real number, got {value!r}") from exc


def _positive(value, name: str) -> Fraction:
    q = _to_fraction(value, name)
    if q <= 0:
        raise InvalidInput(f"{name} must be positive, got {value!r}")
    return q


# ---------------------------------------------------------------------------
# enclosure arithmetic
# ---------------------------------------------------------------------------


class Arith:
    """Pair of directed-rounding gmpy2 contexts at a fixed precision."""

    def __init__(self, precision: int):
        if precision < 16:
            raise InvalidInput("precision must be at least 16 bits")
        self.precision = precision
        self.down = gmpy2.context(precision=precision, round=gmpy2.RoundDown)
        self.up = gmpy2.context(precision=precision, round=gmpy2.RoundUp)

    def const(self, value) -> Enclosure:
        if isinstance(value, Enclosure):
            return value
        return Enclosure(self, _to_fraction(value))

    def interval(self, lo, hi) -> Enclosure:
        return Enclosure(self, None, lo, hi)

    def round_fraction(self, q: Fraction, ctx) -> gmpy2.mpfr:
        n, d = q.numerator, q.denominator
        num = gmpy2.mpfr(n, max(abs(n).bit_length(), 1))
        if d == 1:
            return ctx.add(num, 0)
        return ctx.div(num, gmpy2.mpfr(d, d.bit_length()))


@lru_cache(maxsize=16)
def arith(precision: int = DEFAULT_PRECISION) -> Arith:
    return Arith(precision)


class Enclosure:
    """A real number known exactly (``exact``) or enclosed in ``[lo, hi]``."""

    __slots__ = ("ar", "exact", "_lo", "_hi")

    def __init__(self, ar: Arith, exact: Fraction | None, lo=None, hi=None):
        self.ar = ar
        self.exact = exact
        self._lo = lo
        self._hi = hi

    @property
    def lo(self) -> gmpy2.mpfr:
        if self._lo is None:
            self._lo = self.ar.round_fraction(self.exact, self.ar.down)
        return self._lo

    @property
    def hi(self) -> gmpy2.mpfr:
        if self._hi is None:
            self._hi = self.ar.round_fraction(self.exact, self.ar.up)
        return self._hi

    def _coerce(self, other) -> Enclosure:
        return other if isinstance(other, Enclosure) else self.ar.const(other)

    def __add__(self, other):
        o = self._coerce(other)
        if self.exact is not None and o.exact is not None:
            return Enclosure(self.ar, self.exact + o.exact)
        return self.ar.interval(self.ar.down.add(self.lo, o.lo), self.ar.up.add(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self):
        if self.exact is not None:
            return Enclosure(self.ar, -self.exact)
        return self.ar.interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        if self.exact is not None and o.exact is not None:
            return Enclosure(self.ar, self.exact - o.exact)
        return self.ar.interval(self.ar.down.sub(self.lo, o.hi), self.ar.up.sub(self.hi, o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.exact is not None and o.exact is not None:
            return Enclosure(self.ar, self.exact * o.exact)
        dn, up = self.ar.down, self.ar.up
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        return self.ar.interval(min(dn.mul(a, b) for a, b in pairs), max(up.mul(a, b) for a, b in pairs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.exact is not None and o.exact == 0 or o.exact is None and o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("division by an enclosure containing zero")
        if self.exact is not None and o.exact is not None:
            return Enclosure(self.ar, self.exact / o.exact)
        dn, up = self.ar.down, self.ar.up
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        return self.ar.interval(min(dn.div(a, b) for a, b in pairs), max(up.div(a, b) for a, b in pairs))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqrt(self) -> Enclosure:
        if self.exact is not None:
            if self.exact < 0:
                raise InvalidInput("square root of a negative number")
            n, d = self.exact.numerator, self.exact.denominator
            rn, rd = math.isqrt(n), math.isqrt(d)
            if rn * rn == n and rd * rd == d:
                return Enclosure(self.ar, Fraction(rn, rd))
        if self.hi < 0:
            raise InvalidInput("square root of a negative number")
        lo = self.lo if self.lo > 0 else gmpy2.mpfr(0)
        return self.ar.interval(self.ar.down.sqrt(lo), self.ar.up.sqrt(self.hi))

    def max(self, other) -> Enclosure:
        o = self._coerce(other)
        if self.exact is not None and o.exact is not None:
            return Enclosure(self.ar, max(self.exact, o.exact))
        return self.ar.interval(max(self.lo, o.lo), max(self.hi, o.hi))

    def pow_neg(self, k: Fraction) -> Enclosure:
        """``self ** (-k)`` for positive ``self`` and ``k >= 0``."""
        if k == 0:
            return Enclosure(self.ar, Fraction(1))
        if self.exact is not None and k.denominator == 1:
            return Enclosure(self.ar, self.exact ** -int(k))
        kk = self.ar.round_fraction(k, self.ar.down), self.ar.round_fraction(k, self.ar.up)
        lo_base, hi_base = self.lo, self.hi
        cands_hi = [self.ar.up.pow(lo_base, -e) for e in kk] + [self.ar.up.pow(hi_base, -e) for e in kk]
        cands_lo = [self.ar.down.pow(lo_base, -e) for e in kk] + [self.ar.down.pow(hi_base, -e) for e in kk]
        return self.ar.interval(min(cands_lo), max(cands_hi))

    def ceil_upper(self) -> int:
        """Smallest integer not below the upper end (exact ceiling for exact values)."""
        if self.exact is not None:
            return math.ceil(self.exact)
        return int(gmpy2.ceil(self.hi))

    def is_positive(self) -> bool:
        return self.exact > 0 if self.exact is not None else self.lo > 0

    def __repr__(self):
        if self.exact is not None:
            return f"Enclosure(exact={self.exact})"
        return f"Enclosure([{self.lo}, {self.hi}])"


# ---------------------------------------------------------------------------
# rate values and bound functions
# ---------------------------------------------------------------------------

_DOUBLE_UP = gmpy2.context(precision=53, round=gmpy2.RoundUp)
_DOUBLE_DOWN = gmpy2.context(precision=53, round=gmpy2.RoundDown)


@dataclass(frozen=True)
class RateValue:
    """Certified bound of a real rate quantity: ``lower <= true value <= upper``."""

    upper: gmpy2.mpfr
    precision_bits: int
    lower: gmpy2.mpfr
    exact: Fraction | None = None

    @classmethod
    def from_enclosure(cls, enc: Enclosure) -> RateValue:
        return cls(enc.hi, enc.ar.precision, enc.lo, enc.exact)

    def upper_float(self) -> float:
        """The upper bound rounded up to a double (still an upper bound)."""
        if self.exact is not None:
            return float(arith(53).round_fraction(self.exact, _DOUBLE_UP))
        return float(_DOUBLE_UP.add(self.upper, 0))

    def lower_float(self) -> float:
        if self.exact is not None:
            return float(arith(53).round_fraction(self.exact, _DOUBLE_DOWN))
        return float(_DOUBLE_DOWN.add(self.lower, 0))

    def __float__(self):
        return self.upper_float()


class BoundFn:
    """Positive function on (0, inf); ``enclose`` bounds its range over an enclosure."""

    def enclose(self, eps: Enclosure) -> Enclosure:
        raise NotImplementedError

    def __call__(self, eps, precision: int = DEFAULT_PRECISION) -> float:
        return RateValue.from_enclosure(self.enclose(arith(precision).const(eps))).upper_float()

    def to_dict(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no file representation")


class Constant(BoundFn):
    def __init__(self, value):
        self.value = _positive(value, "constant")

    def enclose(self, eps):
        return eps.ar.const(self.value)

    def to_dict(self):
        return {"form": "constant", "value": _json_number(self.value)}

    def __repr__(self):
        return f"Constant({self.value})"


class InversePower(BoundFn):
    """``eps -> c0 + c * eps**(-k)``."""

    def __init__(self, c0, c, k):
        self.c0 = _to_fraction(c0, "c0")
        self.c = _positive(c, "c")
        self.k = _to_fraction(k, "k")
        if self.c0 < 0 or self.k < 0:
            raise InvalidInput("inverse_power needs c0 >= 0 and k >= 0")

    def enclose(self, eps):
        if not eps.is_positive():
            raise InvalidInput("bound functions are only defined for eps > 0")
        return self.c0 + self.c * eps.pow_neg(self.k)

    def to_dict(self):
        return {"form": "inverse_power", "c0": _json_number(self.c0), "c": _json_number(self.c),
                "k": _json_number(self.k)}


class StepTable(BoundFn):
    """Right-continuous step function: value of the largest tabulated eps <= query."""

    def __init__(self, points: Sequence[tuple]):
        if not points:
            raise InvalidInput("step table needs at least one point")
        self.eps = [_positive(e, "table eps") for e, _ in points]
        self.values = [_positive(v, "table value") for _, v in points]
        if any(a >= b for a, b in zip(self.eps, self.eps[1:])):
            raise InvalidInput("step table eps must be strictly increasing")
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise InvalidInput("step table values must be nonincreasing")

    def _lookup(self, x) -> Fraction:
        idx = None
        for i, e in enumerate(self.eps):
            if e <= x:
                idx = i
            else:
                break
        if idx is None:
            raise InvalidInput(f"step table evaluated below its range at eps={x}")
        return self.values[idx]

    def enclose(self, eps):
        if eps.exact is not None:
            return eps.ar.const(self._lookup(eps.exact))
        ar = eps.ar
        lo_val = self._lookup(_to_fraction(eps.hi))
        hi_val = self._lookup(_to_fraction(eps.lo))
        if lo_val == hi_val:
            return ar.const(lo_val)
        return ar.interval(ar.round_fraction(lo_val, ar.down), ar.round_fraction(hi_val, ar.up))

    def to_dict(self):
        return {"form": "table",
                "points": [[_json_number(e), _json_number(v)] for e, v in zip(self.eps, self.values)]}


class FunctionBound(BoundFn):
    """Wrap ``fn(Enclosure) -> Enclosure | number``; memoizes per enclosure."""

    def __init__(self, fn: Callable):
        self.fn = fn
        self._memo: dict = {}

    def enclose(self, eps):
        key = (eps.exact,) if eps.exact is not None else (eps.lo, eps.hi)
        hit = self._memo.get(key)
        if hit is None:
            hit = eps.ar.const(self.fn(eps))
            self._memo[key] = hit
        return hit


class PointwiseMax(BoundFn):
    def __init__(self, *parts: BoundFn):
        self.parts = parts
        self._memo: dict = {}

    def enclose(self, eps):
        key = (eps.exact,) if eps.exact is not None else (eps.lo, eps.hi)
        hit = self._memo.get(key)
        if hit is None:
            hit = self.parts[0].enclose(eps)
            for p in self.parts[1:]:
                hit = hit.max(p.enclose(eps))
            self._memo[key] = hit
        return hit


def as_bound_fn(obj) -> BoundFn:
    if isinstance(obj, BoundFn):
        return obj
    if callable(obj):
        return FunctionBound(obj)
    return Constant(obj)


def bound_fn_from_dict(spec: dict) -> BoundFn:
    form = spec.get("form")
    if form == "constant":
        return Constant(spec["value"])
    if form == "inverse_power":
        return InversePower(spec["c0"], spec["c"], spec["k"])
    if form == "table":
        return StepTable([tuple(p) for p in spec["points"]])
    raise InvalidInput(f"unknown bound function form {form!r}")


def _json_number(q: Fraction):
    if q.denominator == 1:
        return int(q)
    f = float(q)
    return f if Fraction(f) == q else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# the star operation
# ---------------------------------------------------------------------------


def star(a, b) -> Fraction:
    """Averagedness parameter of a composition of an a- and a b-averaged map."""
    a, b = as_alpha(a), as_alpha(b)
    return 1 / (1 + 1 / (a / (1 - a) + b / (1 - b)))


def star_many(alphas: Sequence) -> Fraction:
    if len(alphas) < 2:
        raise InvalidInput("star_many needs at least two parameters")
    total = sum((a / (1 - a) for a in map(as_alpha, alphas)), Fraction(0))
    return 1 / (1 + 1 / total)


# ---------------------------------------------------------------------------
# rate formulas (enclosure level)
# ---------------------------------------------------------------------------


def _theta(ar: Arith, beta, l1, l2, l3) -> Enclosure:
    beta, l1, l2, l3 = (ar.const(v) for v in (beta, l1, l2, l3))
    disc = l1 * l1 + l2 * l2 + 2 * l1 * l2 + 8 * beta * l1 * l3 + 4 * beta * l2 * l3
    rho = (l1 + l2 + 2 * beta * l3 + disc.sqrt()) / (2 * beta)
    return (l1 + l2) * (l3 + rho)


def _shifted_k(ar: Arith, K: BoundFn, delta: Enclosure) -> Enclosure:
    """``K(delta/4) + delta/8``, the norm bound shared by B and Phi."""
    return K.enclose(delta / 4) + delta / 8


def _b_bound(ar: Arith, alpha2: Fraction, K: BoundFn, delta: Enclosure) -> Enclosure:
    kk = _shifted_k(ar, K, delta)
    beta = 1 / alpha2 - 1
    return (kk * kk + 2 * _theta(ar, beta, kk, kk, delta / 8)).sqrt()


def _phi(ar: Arith, alpha1: Fraction, alpha2: Fraction, K: BoundFn, delta: Enclosure) -> Enclosure:
    kk = _shifted_k(ar, K, delta)
    b = _b_bound(ar, alpha2, K, delta)
    spread = ar.const(2).sqrt().max(4 * b / delta)
    return b * spread / (1 - alpha1) + (alpha1 / (1 - alpha1)) * kk + delta / 8


def _psi(ar: Arith, alphas: tuple[Fraction, ...], K: BoundFn, delta: Enclosure) -> Enclosure:
    if len(alphas) == 2:
        return _phi(ar, alphas[0], alphas[1], K, delta)
    head = alphas[:-1]
    inner = PointwiseMax(FunctionBound(lambda rho: _psi(ar, head, K, rho)), K)
    return _phi(ar, star_many(head), alphas[-1], inner, delta)


def _omega(ar: Arith, alpha: Fraction, b: Enclosure, eps: Enclosure) -> Enclosure:
    return alpha * (1 - alpha) / (4 * b) * eps * eps


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def theta(beta, l1, l2, l3, precision: int = DEFAULT_PRECISION) -> RateValue:
    """Bound on ``<a - c, Ab - Aa>`` over all ``a`` for a beta-cocoercive ``A``."""
    args = [_positive(v, n) for v, n in ((beta, "beta"), (l1, "L1"), (l2, "L2"), (l3, "L3"))]
    return RateValue.from_enclosure(_theta(arith(precision), *args))


def b_bound(alpha2, K, delta, precision: int = DEFAULT_PRECISION) -> RateValue:
    ar = arith(precision)
    return RateValue.from_enclosure(
        _b_bound(ar, as_alpha(alpha2), as_bound_fn(K), ar.const(_positive(delta, "delta"))))


def phi(alpha1, alpha2, K, delta, precision: int = DEFAULT_PRECISION) -> RateValue:
    """Norm bound on a delta-approximate fixed point of a two-map composition."""
    ar = arith(precision)
    return RateValue.from_enclosure(
        _phi(ar, as_alpha(alpha1), as_alpha(alpha2), as_bound_fn(K), ar.const(_positive(delta, "delta"))))


def _check_alphas(m: int, alphas: Sequence) -> tuple[Fraction, ...]:
    if not isinstance(m, int) or m < 2:
        raise InvalidInput(f"m must be an integer >= 2, got {m!r}")
    if len(alphas) != m:
        raise InvalidInput(f"expected {m} averagedness parameters, got {len(alphas)}")
    return tuple(as_alpha(a) for a in alphas)


def psi(m: int, alphas: Sequence, K, delta, precision: int = DEFAULT_PRECISION) -> RateValue:
    """Norm bound on a delta-approximate fixed point of an m-map composition."""
    alphas = _check_alphas(m, alphas)
    ar = arith(precision)
    return RateValue.from_enclosure(_psi(ar, alphas, as_bound_fn(K), ar.const(_positive(delta, "delta"))))


def omega(alpha, b, eps, precision: int = DEFAULT_PRECISION) -> RateValue:
    """Modulus of strong nonexpansiveness of an alpha-averaged map."""
    ar = arith(precision)
    return RateValue.from_enclosure(_omega(ar, as_alpha(alpha), ar.const(_positive(b, "b")),
                                           ar.const(_positive(eps, "eps"))))


def averaged_modulus(alpha) -> Callable[[Enclosure, Enclosure], Enclosure]:
    a = as_alpha(alpha)
    return lambda b, eps: _omega(b.ar, a, b, eps)


def varphi(eps, b, d, afp, modulus, precision: int = DEFAULT_PRECISION) -> int:
    """Iteration count after which the displacement of a strongly nonexpansive map is <= eps.

    ``modulus`` is either an averagedness parameter (meaning its averaged
    modulus) or a callable ``(b, eps) -> Enclosure``.
    """
    ar = arith(precision)
    eps, b, d = (ar.const(_positive(v, n)) for v, n in ((eps, "eps"), (b, "b"), (d, "d")))
    afp = as_bound_fn(afp)
    if not callable(modulus):
        modulus = averaged_modulus(modulus)
    a = afp.enclose(eps / 6)
    first = max((((18 * b + 12 * a) / eps) - 1).ceil_upper(), 0)
    if first == 0:
        return 0
    w = ar.const(modulus(d, eps * eps / (27 * b + 18 * a)))
    if not w.is_positive():
        raise InvalidInput("modulus must be positive")
    return first * (d / w).ceil_upper()


def sigma(m: int, alphas: Sequence, K, b, d, eps, precision: int = DEFAULT_PRECISION) -> int:
    """Rate of asymptotic regularity of the Picard iterates of the m-map composition."""
    alphas = _check_alphas(m, alphas)
    ar = arith(precision)
    K = as_bound_fn(K)
    afp = FunctionBound(lambda delta: _psi(ar, alphas, K, delta))
    return varphi(eps, b, d, afp, star_many(alphas), precision)
