"""Exact coefficient arithmetic.

Supported rings: the rationals, prime fields F_p, univariate polynomials
over either, order-N truncations of those polynomials, and the fraction
field of a polynomial ring.  Every scalar is kept in canonical form at
construction time so that equality is structural:

* rationals are reduced ``Fraction`` values,
* prime-field elements are residues in ``[0, p)``,
* polynomial coefficient tuples carry no trailing zeros,
* fractions of polynomials are gcd-reduced with a monic denominator.

No floating point appears anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .exceptions import CoefficientError

BaseValue = Union[Fraction, int]


@dataclass(frozen=True)
class RingDescriptor:
    """Names one of the supported coefficient rings.

    ``poly``, ``truncated_poly`` and ``fraction_field`` wrap exactly one
    level of ``rationals`` or ``prime_field``.
    """

    kind: str
    p: Optional[int] = None
    var: Optional[str] = None
    order: Optional[int] = None
    base: Optional["RingDescriptor"] = None

    def __post_init__(self):
        if self.kind == "rationals":
            pass
        elif self.kind == "prime_field":
            if self.p is None or self.p < 2 or not _is_prime(self.p):
                raise CoefficientError(f"prime_field needs a prime p, got {self.p}")
        elif self.kind in ("poly", "truncated_poly"):
            if not self.var or self.base is None:
                raise CoefficientError(f"{self.kind} needs a variable and a base ring")
            if self.base.kind not in ("rationals", "prime_field"):
                raise CoefficientError("polynomial rings wrap only rationals or prime fields")
            if self.kind == "truncated_poly" and (self.order is None or self.order < 1):
                raise CoefficientError("truncated_poly needs order N >= 1")
        elif self.kind == "fraction_field":
            if self.base is None or self.base.kind != "poly":
                raise CoefficientError("fraction_field wraps a polynomial ring")
        else:
            raise CoefficientError(f"unknown ring kind {self.kind!r}")

    @property
    def is_field(self) -> bool:
        return self.kind in ("rationals", "prime_field", "fraction_field")

    def characteristic(self) -> int:
        if self.kind == "rationals":
            return 0
        if self.kind == "prime_field":
            return self.p  # type: ignore[return-value]
        return self.base.characteristic()  # type: ignore[union-attr]

    def __str__(self):
        if self.kind == "rationals":
            return "Q"
        if self.kind == "prime_field":
            return f"F{self.p}"
        if self.kind == "poly":
            return f"{self.base}[{self.var}]"
        if self.kind == "truncated_poly":
            return f"{self.base}[{self.var}]/{self.var}^{self.order}"
        return f"Frac({self.base})"


RATIONALS = RingDescriptor("rationals")


def prime_field(p: int) -> RingDescriptor:
    return RingDescriptor("prime_field", p=p)


def poly_ring(var: str = "h", base: RingDescriptor = RATIONALS) -> RingDescriptor:
    return RingDescriptor("poly", var=var, base=base)


def truncated_poly_ring(var: str = "h", order: int = 2, base: RingDescriptor = RATIONALS) -> RingDescriptor:
    return RingDescriptor("truncated_poly", var=var, order=order, base=base)


def fraction_field(of: RingDescriptor) -> RingDescriptor:
    if of.kind != "poly":
        raise CoefficientError("fraction_field is only taken of a polynomial ring")
    return RingDescriptor("fraction_field", var=of.var, base=of)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# raw base-field arithmetic (Fraction for Q, residues for F_p)

def _bzero(base: RingDescriptor) -> BaseValue:
    return Fraction(0) if base.kind == "rationals" else 0


def _bone(base: RingDescriptor) -> BaseValue:
    return Fraction(1) if base.kind == "rationals" else 1


def _badd(base, x, y):
    return x + y if base.kind == "rationals" else (x + y) % base.p


def _bmul(base, x, y):
    return x * y if base.kind == "rationals" else (x * y) % base.p


def _bneg(base, x):
    return -x if base.kind == "rationals" else (-x) % base.p


def _binv(base, x):
    if base.kind == "rationals":
        if x == 0:
            raise CoefficientError("division by zero")
        return Fraction(1) / x
    if x % base.p == 0:
        raise CoefficientError("division by zero")
    return pow(x, base.p - 2, base.p)


def _bfrom_int(base, n: int) -> BaseValue:
    return Fraction(n) if base.kind == "rationals" else n % base.p


# ---------------------------------------------------------------------------
# raw polynomial arithmetic on stripped coefficient tuples

def _pstrip(base, coeffs) -> tuple:
    cs = list(coeffs)
    while cs and cs[-1] == _bzero(base):
        cs.pop()
    return tuple(cs)


def _padd(base, a, b):
    n = max(len(a), len(b))
    z = _bzero(base)
    return _pstrip(base, tuple(_badd(base, a[i] if i < len(a) else z, b[i] if i < len(b) else z) for i in range(n)))


def _pneg(base, a):
    return tuple(_bneg(base, c) for c in a)


def _pmul(base, a, b):
    if not a or not b:
        return ()
    z = _bzero(base)
    out = [z] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == z:
            continue
        for j, y in enumerate(b):
            out[i + j] = _badd(base, out[i + j], _bmul(base, x, y))
    return _pstrip(base, out)


def _pscale(base, c, a):
    if c == _bzero(base):
        return ()
    return _pstrip(base, tuple(_bmul(base, c, x) for x in a))


def _pdivmod(base, a, b):
    """Euclidean division of coefficient tuples; b must be nonzero."""
    if not b:
        raise CoefficientError("polynomial division by zero")
    q: list = []
    r = list(a)
    inv_lead = _binv(base, b[-1])
    while len(r) >= len(b) and _pstrip(base, r):
        r = list(_pstrip(base, r))
        if len(r) < len(b):
            break
        c = _bmul(base, r[-1], inv_lead)
        d = len(r) - len(b)
        while len(q) <= d:
            q.append(_bzero(base))
        q[d] = _badd(base, q[d], c)
        for i, y in enumerate(b):
            r[d + i] = _badd(base, r[d + i], _bneg(base, _bmul(base, c, y)))
        r = list(_pstrip(base, r))
    return _pstrip(base, q), _pstrip(base, r)


def _pgcd(base, a, b):
    """Monic gcd of coefficient tuples."""
    a, b = _pstrip(base, a), _pstrip(base, b)
    while b:
        _, r = _pdivmod(base, a, b)
        a, b = b, r
    if a:
        a = _pscale(base, _binv(base, a[-1]), a)
    return a


def _pxgcd(base, a, b):
    """Extended gcd: ``(g, x, y)`` with ``x a + y b = g``, ``g`` monic."""
    a, b = _pstrip(base, a), _pstrip(base, b)
    one_p = (_bone(base),)
    r0, r1 = a, b
    x0, x1 = one_p, ()
    y0, y1 = (), one_p
    while r1:
        q, r = _pdivmod(base, r0, r1)
        r0, r1 = r1, r
        x0, x1 = x1, _padd(base, x0, _pneg(base, _pmul(base, q, x1)))
        y0, y1 = y1, _padd(base, y0, _pneg(base, _pmul(base, q, y1)))
    if r0:
        c = _binv(base, r0[-1])
        r0 = _pscale(base, c, r0)
        x0 = _pscale(base, c, x0)
        y0 = _pscale(base, c, y0)
    return r0, x0, y0


def _peval(base, a, x):
    acc = _bzero(base)
    for c in reversed(a):
        acc = _badd(base, _bmul(base, acc, x), c)
    return acc


# ---------------------------------------------------------------------------

class Scalar:
    """An element of one of the supported rings, in canonical form.

    Arithmetic is exact; mixing scalars from different rings raises
    :class:`CoefficientError`.
    """

    __slots__ = ("ring", "value")

    def __init__(self, ring: RingDescriptor, value, _canonical: bool = False):
        object.__setattr__(self, "ring", ring)
        if not _canonical:
            value = _canonicalize(ring, value)
        object.__setattr__(self, "value", value)

    def __setattr__(self, *a):
        raise AttributeError("Scalar is immutable")

    # -- queries ----------------------------------------------------------
    def is_zero(self) -> bool:
        k = self.ring.kind
        if k == "rationals":
            return self.value == 0
        if k == "prime_field":
            return self.value == 0
        if k in ("poly", "truncated_poly"):
            return self.value == ()
        return self.value[0] == ()

    def is_one(self) -> bool:
        return self == one(self.ring)

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Scalar"):
        if not isinstance(other, Scalar):
            raise CoefficientError(f"expected Scalar, got {type(other).__name__}")
        if other.ring != self.ring:
            raise CoefficientError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other):
        self._check(other)
        r, k = self.ring, self.ring.kind
        if k == "rationals":
            return Scalar(r, self.value + other.value, _canonical=True)
        if k == "prime_field":
            return Scalar(r, (self.value + other.value) % r.p, _canonical=True)
        if k in ("poly", "truncated_poly"):
            return Scalar(r, _padd(r.base, self.value, other.value), _canonical=True)
        (n1, d1), (n2, d2) = self.value, other.value
        base = r.base.base
        return _make_fraction(r, _padd(base, _pmul(base, n1, d2), _pmul(base, n2, d1)), _pmul(base, d1, d2))

    def __neg__(self):
        r, k = self.ring, self.ring.kind
        if k == "rationals":
            return Scalar(r, -self.value, _canonical=True)
        if k == "prime_field":
            return Scalar(r, (-self.value) % r.p, _canonical=True)
        if k in ("poly", "truncated_poly"):
            return Scalar(r, _pneg(r.base, self.value), _canonical=True)
        n, d = self.value
        return Scalar(r, (_pneg(r.base.base, n), d), _canonical=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        r, k = self.ring, self.ring.kind
        if k == "rationals":
            return Scalar(r, self.value * other.value, _canonical=True)
        if k == "prime_field":
            return Scalar(r, (self.value * other.value) % r.p, _canonical=True)
        if k == "poly":
            return Scalar(r, _pmul(r.base, self.value, other.value), _canonical=True)
        if k == "truncated_poly":
            return Scalar(r, _pstrip(r.base, _pmul(r.base, self.value, other.value)[: r.order]), _canonical=True)
        (n1, d1), (n2, d2) = self.value, other.value
        base = r.base.base
        return _make_fraction(r, _pmul(base, n1, n2), _pmul(base, d1, d2))

    def inverse(self) -> "Scalar":
        r, k = self.ring, self.ring.kind
        if self.is_zero():
            raise CoefficientError("division by zero")
        if k == "rationals":
            return Scalar(r, Fraction(1) / self.value, _canonical=True)
        if k == "prime_field":
            return Scalar(r, _binv(r, self.value), _canonical=True)
        if k == "fraction_field":
            n, d = self.value
            return _make_fraction(r, d, n)
        if k == "truncated_poly":
            # units are exactly the series with invertible constant term;
            # invert by the finite geometric series mod h^N
            base = r.base
            if not self.value or self.value[0] == _bzero(base):
                raise CoefficientError(f"not a unit in {r}")
            c0_inv = _binv(base, self.value[0])
            tail = _pstrip(base, tuple(_bneg(base, _bmul(base, c0_inv, c)) for c in self.value[1:]))
            tail = ((_bzero(base),) + tail)[: r.order]
            acc = (_bone(base),)
            power = (_bone(base),)
            for _ in range(1, r.order):
                power = _pstrip(base, _pmul(base, power, tail)[: r.order])
                if not power:
                    break
                acc = _padd(base, acc, power)
            return Scalar(r, _pstrip(base, _pscale(base, c0_inv, acc)[: r.order]), _canonical=True)
        if k == "poly":
            if len(self.value) == 1:
                return Scalar(r, (_binv(r.base, self.value[0]),), _canonical=True)
            raise CoefficientError(f"{self} is not a unit in {r}; embed into the fraction field first")
        raise CoefficientError(f"cannot invert in {r}")

    def __truediv__(self, other):
        self._check(other)
        k = self.ring.kind
        if k == "poly":
            # exact division only
            q, rem = _pdivmod(self.ring.base, self.value, other.value)
            if rem:
                raise CoefficientError("non-exact polynomial division; embed into the fraction field")
            return Scalar(self.ring, q, _canonical=True)
        return self * other.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        acc = one(self.ring)
        for _ in range(n):
            acc = acc * self
        return acc

    # -- comparisons ------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Scalar) and self.ring == other.ring and self.value == other.value

    def __hash__(self):
        return hash((self.ring, self.value))

    def __repr__(self):
        return f"Scalar({self.ring}, {scalar_str(self)})"


def _canonicalize(ring: RingDescriptor, value):
    k = ring.kind
    if k == "rationals":
        return Fraction(value)
    if k == "prime_field":
        if isinstance(value, Fraction):
            if value.denominator % ring.p == 0:
                raise CoefficientError(f"denominator not invertible mod {ring.p}")
            return (value.numerator * pow(value.denominator, ring.p - 2, ring.p)) % ring.p
        return int(value) % ring.p
    if k == "poly":
        return _pstrip(ring.base, tuple(_bcanon(ring.base, c) for c in value))
    if k == "truncated_poly":
        return _pstrip(ring.base, tuple(_bcanon(ring.base, c) for c in value)[: ring.order])
    if k == "fraction_field":
        num, den = value
        base = ring.base.base
        return _make_fraction(ring, _pstrip(base, tuple(_bcanon(base, c) for c in num)),
                              _pstrip(base, tuple(_bcanon(base, c) for c in den))).value
    raise CoefficientError(f"unknown ring kind {k!r}")


def _bcanon(base, c) -> BaseValue:
    if base.kind == "rationals":
        return Fraction(c)
    if isinstance(c, Fraction):
        if c.denominator % base.p == 0:
            raise CoefficientError(f"denominator not invertible mod {base.p}")
        return (c.numerator * pow(c.denominator, base.p - 2, base.p)) % base.p
    return int(c) % base.p


def _make_fraction(ring: RingDescriptor, num, den) -> Scalar:
    base = ring.base.base
    if not den:
        raise CoefficientError("zero denominator")
    if not num:
        return Scalar(ring, ((), (_bone(base),)), _canonical=True)
    g = _pgcd(base, num, den)
    num, _ = _pdivmod(base, num, g)
    den, _ = _pdivmod(base, den, g)
    lead_inv = _binv(base, den[-1])
    num = _pscale(base, lead_inv, num)
    den = _pscale(base, lead_inv, den)
    return Scalar(ring, (num, den), _canonical=True)


# ---------------------------------------------------------------------------
# constructors

def zero(ring: RingDescriptor) -> Scalar:
    k = ring.kind
    if k == "rationals":
        return Scalar(ring, Fraction(0), _canonical=True)
    if k == "prime_field":
        return Scalar(ring, 0, _canonical=True)
    if k in ("poly", "truncated_poly"):
        return Scalar(ring, (), _canonical=True)
    return Scalar(ring, ((), (_bone(ring.base.base),)), _canonical=True)


def one(ring: RingDescriptor) -> Scalar:
    k = ring.kind
    if k == "rationals":
        return Scalar(ring, Fraction(1), _canonical=True)
    if k == "prime_field":
        return Scalar(ring, 1 % ring.p, _canonical=True)
    if k in ("poly", "truncated_poly"):
        return Scalar(ring, (_bone(ring.base),), _canonical=True)
    return Scalar(ring, ((_bone(ring.base.base),), (_bone(ring.base.base),)), _canonical=True)


def from_int(ring: RingDescriptor, n: int) -> Scalar:
    k = ring.kind
    if k == "rationals":
        return Scalar(ring, Fraction(n), _canonical=True)
    if k == "prime_field":
        return Scalar(ring, n % ring.p, _canonical=True)
    if k in ("poly", "truncated_poly"):
        v = _bfrom_int(ring.base, n)
        return Scalar(ring, () if v == _bzero(ring.base) else (v,), _canonical=True)
    v = _bfrom_int(ring.base.base, n)
    num = () if v == _bzero(ring.base.base) else (v,)
    return Scalar(ring, (num, (_bone(ring.base.base),)), _canonical=True)


def from_coeffs(ring: RingDescriptor, coeffs) -> Scalar:
    """Polynomial scalar from a low-to-high coefficient sequence."""
    if ring.kind not in ("poly", "truncated_poly"):
        raise CoefficientError(f"{ring} is not a polynomial ring")
    return Scalar(ring, tuple(coeffs))


def variable(ring: RingDescriptor) -> Scalar:
    """The polynomial variable of ``ring`` (also inside its fraction field)."""
    if ring.kind in ("poly", "truncated_poly"):
        if ring.kind == "truncated_poly" and ring.order < 2:
            return zero(ring)
        return Scalar(ring, (_bzero(ring.base), _bone(ring.base)), _canonical=True)
    if ring.kind == "fraction_field":
        base = ring.base.base
        return Scalar(ring, ((_bzero(base), _bone(base)), (_bone(base),)), _canonical=True)
    raise CoefficientError(f"{ring} has no variable")


def poly_coeff(s: Scalar, i: int) -> Scalar:
    """The coefficient of var^i of a polynomial scalar, as a base-ring scalar."""
    if s.ring.kind not in ("poly", "truncated_poly"):
        raise CoefficientError(f"{s.ring} is not a polynomial ring")
    v = s.value[i] if i < len(s.value) else _bzero(s.ring.base)
    return Scalar(s.ring.base, v, _canonical=True)


def poly_degree(s: Scalar) -> int:
    """Degree of a polynomial scalar; -1 for zero."""
    if s.ring.kind not in ("poly", "truncated_poly"):
        raise CoefficientError(f"{s.ring} is not a polynomial ring")
    return len(s.value) - 1


# ---------------------------------------------------------------------------
# ring morphisms

def eval_at(s: Scalar, a: Scalar) -> Scalar:
    """Evaluate a polynomial scalar at a point of its base ring."""
    if s.ring.kind not in ("poly", "truncated_poly"):
        raise CoefficientError(f"eval_at needs a polynomial scalar, got {s.ring}")
    if a.ring != s.ring.base:
        raise CoefficientError(f"evaluation point must live in {s.ring.base}, got {a.ring}")
    return Scalar(s.ring.base, _peval(s.ring.base, s.value, a.value), _canonical=True)


def embed_fraction(s: Scalar) -> Scalar:
    """Canonical injection of a polynomial scalar into the fraction field."""
    if s.ring.kind != "poly":
        raise CoefficientError(f"embed_fraction needs a poly scalar, got {s.ring}")
    target = fraction_field(s.ring)
    return Scalar(target, (s.value, (_bone(s.ring.base),)), _canonical=True)


@dataclass(frozen=True)
class RingMap:
    """A named morphism between supported rings.

    kinds: ``identity``, ``eval`` (poly -> base, at ``point``),
    ``truncate`` (poly -> truncated_poly), ``embed_fraction``
    (poly -> fraction field), ``reduce_mod_p`` (rationals -> F_p) and
    ``poly_embed`` (base -> poly or truncated_poly, as constants).
    """

    kind: str
    source: RingDescriptor
    target: RingDescriptor
    point: Optional[Scalar] = None

    def __call__(self, s: Scalar) -> Scalar:
        if s.ring != self.source:
            raise CoefficientError(f"ring mismatch: map expects {self.source}, got {s.ring}")
        if self.kind == "identity":
            return s
        if self.kind == "eval":
            return eval_at(s, self.point)
        if self.kind == "truncate":
            return Scalar(self.target, s.value)
        if self.kind == "embed_fraction":
            return embed_fraction(s)
        if self.kind == "reduce_mod_p":
            return Scalar(self.target, s.value)
        if self.kind == "poly_embed":
            return Scalar(self.target, (s.value,))
        raise CoefficientError(f"unknown ring map {self.kind!r}")


def identity_map(ring: RingDescriptor) -> RingMap:
    return RingMap("identity", ring, ring)


def evaluation_map(ring: RingDescriptor, point: Scalar) -> RingMap:
    if ring.kind != "poly":
        raise CoefficientError("evaluation maps are defined on polynomial rings")
    if point.ring != ring.base:
        raise CoefficientError(f"evaluation point must live in {ring.base}")
    return RingMap("eval", ring, ring.base, point=point)


def truncation_map(ring: RingDescriptor, order: int) -> RingMap:
    if ring.kind != "poly":
        raise CoefficientError("truncation maps are defined on polynomial rings")
    return RingMap("truncate", ring, truncated_poly_ring(ring.var, order, ring.base))


def fraction_embedding(ring: RingDescriptor) -> RingMap:
    return RingMap("embed_fraction", ring, fraction_field(ring))


def mod_p_map(p: int) -> RingMap:
    return RingMap("reduce_mod_p", RATIONALS, prime_field(p))


def polynomial_embedding(target: RingDescriptor) -> RingMap:
    """Constants into a polynomial or truncated polynomial ring."""
    if target.kind not in ("poly", "truncated_poly"):
        raise CoefficientError("polynomial_embedding needs a polynomial target")
    return RingMap("poly_embed", target.base, target)


def base_change_scalar(s: Scalar, target: RingDescriptor, ring_map: RingMap) -> Scalar:
    """Push a scalar through a named ring morphism into ``target``."""
    if ring_map.target != target:
        raise CoefficientError(f"map lands in {ring_map.target}, not {target}")
    return ring_map(s)


# ---------------------------------------------------------------------------
# display

def scalar_str(s: Scalar) -> str:
    """Canonical text form, also used by the document format."""
    k = s.ring.kind
    if k == "rationals":
        return str(s.value)
    if k == "prime_field":
        return f"{s.value} mod {s.ring.p}"
    if k in ("poly", "truncated_poly"):
        return "[" + ",".join(str(c) for c in s.value) + "]"
    num, den = s.value
    return "[" + ",".join(str(c) for c in num) + "]/[" + ",".join(str(c) for c in den) + "]"


def scalar_from_str(ring: RingDescriptor, text: str) -> Scalar:
    """Inverse of :func:`scalar_str`."""
    k = ring.kind
    text = text.strip()
    try:
        if k == "rationals":
            return Scalar(ring, Fraction(text))
        if k == "prime_field":
            part = text.split("mod")[0].strip() if "mod" in text else text
            return Scalar(ring, int(part))
        if k in ("poly", "truncated_poly"):
            return Scalar(ring, _parse_coeff_list(ring.base, text))
        # coefficients may themselves contain '/', so split between brackets
        if "]/[" not in text:
            raise ValueError("fraction must look like [..]/[..]")
        num_s, den_s = text.split("]/[", 1)
        base = ring.base.base
        return _make_fraction(ring, _parse_coeff_list(base, num_s + "]"),
                              _parse_coeff_list(base, "[" + den_s))
    except (ValueError, ZeroDivisionError) as exc:
        raise CoefficientError(f"cannot parse {text!r} as a {ring} scalar: {exc}") from exc


def _parse_coeff_list(base, text: str) -> tuple:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("coefficient list must be bracketed")
    inner = text[1:-1].strip()
    if not inner:
        return ()
    out = []
    for piece in inner.split(","):
        piece = piece.strip()
        out.append(Fraction(piece) if base.kind == "rationals" else int(Fraction(piece)))
    return _pstrip(base, tuple(_bcanon(base, c) for c in out))
