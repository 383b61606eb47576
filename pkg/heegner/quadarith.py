"""
Exact arithmetic for imaginary quadratic fields and their orders.

Residue symbols, local splitting and square classes, Hilbert symbols, and
class numbers of orders R_c (reduced-form enumeration for the maximal order,
conductor formula for the rest).
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Tuple, Union

from sympy import factorint, isprime
from sympy.ntheory import jacobi_symbol, legendre_symbol

import config_heegner as config
from heegner.errors import InputError

INFINITY = math.inf


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise InputError("valuation of 0 is undefined")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_off(n: int, p: int) -> Tuple[int, int]:
    """Write n = p^v * u with p not dividing u; returns (v, u)."""
    v = valuation(n, p)
    return v, n // p**v


def is_fundamental(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return all(e == 1 for e in factorint(abs(d)).values())
    if d % 4 == 0:
        q = d // 4
        if q % 4 not in (2, 3):
            return False
        return all(e == 1 for e in factorint(abs(q)).values())
    return False


class SplittingType(Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


class LocalQuadExt(Enum):
    """Isomorphism classes of quadratic field extensions of Q_p."""

    UNRAMIFIED = "unram"
    RAMIFIED_UNIT = "ramu"      # Q_p(sqrt(u p)), u a non-residue; odd p
    RAMIFIED_PRIME = "ramp"     # Q_p(sqrt(p)); odd p
    SQRT3 = "sqrt3"
    SQRT7 = "sqrt7"
    SQRT2 = "sqrt2"
    SQRT6 = "sqrt6"
    SQRT10 = "sqrt10"
    SQRT14 = "sqrt14"

    @property
    def is_ramified(self) -> bool:
        return self is not LocalQuadExt.UNRAMIFIED

    @property
    def splitting(self) -> SplittingType:
        return SplittingType.RAMIFIED if self.is_ramified else SplittingType.INERT

    def valid_at(self, p: int) -> bool:
        return self in local_classes(p)

    def disc_valuation(self, p: int) -> int:
        require_class_at(self, p)
        if self is LocalQuadExt.UNRAMIFIED:
            return 0
        if p != 2:
            return 1
        return 2 if self in (LocalQuadExt.SQRT3, LocalQuadExt.SQRT7) else 3

    def representative(self, p: int) -> int:
        """An integer d with the extension equal to Q_p(sqrt(d))."""
        require_class_at(self, p)
        if p == 2:
            return _TWO_ADIC_REPRESENTATIVES[self]
        u = smallest_nonresidue(p)
        return {
            LocalQuadExt.UNRAMIFIED: u,
            LocalQuadExt.RAMIFIED_UNIT: u * p,
            LocalQuadExt.RAMIFIED_PRIME: p,
        }[self]


_ODD_CLASSES = (
    LocalQuadExt.UNRAMIFIED,
    LocalQuadExt.RAMIFIED_UNIT,
    LocalQuadExt.RAMIFIED_PRIME,
)

_TWO_ADIC_CLASSES = (
    LocalQuadExt.UNRAMIFIED,
    LocalQuadExt.SQRT3,
    LocalQuadExt.SQRT7,
    LocalQuadExt.SQRT2,
    LocalQuadExt.SQRT6,
    LocalQuadExt.SQRT10,
    LocalQuadExt.SQRT14,
)

# Q_2^x / squares = {1,3,5,7,2,6,10,14}; 1 is the split algebra
_TWO_ADIC_REPRESENTATIVES = {
    LocalQuadExt.UNRAMIFIED: 5,
    LocalQuadExt.SQRT3: 3,
    LocalQuadExt.SQRT7: 7,
    LocalQuadExt.SQRT2: 2,
    LocalQuadExt.SQRT6: 6,
    LocalQuadExt.SQRT10: 10,
    LocalQuadExt.SQRT14: 14,
}


def local_classes(p: int) -> Tuple[LocalQuadExt, ...]:
    if not isprime(p):
        raise InputError(f"{p} is not prime")
    return _TWO_ADIC_CLASSES if p == 2 else _ODD_CLASSES


def require_class_at(cls: LocalQuadExt, p: int) -> None:
    if cls not in local_classes(p):
        raise InputError(f"{cls.value} is not a quadratic extension class of Q_{p}")


def smallest_nonresidue(p: int) -> int:
    for u in range(2, p):
        if legendre_symbol(u, p) == -1:
            return u
    raise InputError(f"no quadratic non-residue modulo {p}")


@dataclass(frozen=True)
class QuadOrder:
    """The order of conductor c in the imaginary quadratic field of discriminant D_K."""

    fundamental_discriminant: int
    conductor: int = 1

    def __post_init__(self):
        d = self.fundamental_discriminant
        if d >= 0 or not is_fundamental(d):
            raise InputError(f"{d} is not a negative fundamental discriminant")
        if self.conductor < 1:
            raise InputError(f"conductor must be positive, got {self.conductor}")

    @property
    def discriminant(self) -> int:
        return self.conductor**2 * self.fundamental_discriminant

    def m_at(self, p: int) -> int:
        return valuation(self.conductor, p)

    def with_conductor(self, c: int) -> "QuadOrder":
        return QuadOrder(self.fundamental_discriminant, c)

    @property
    def generator(self) -> Tuple[int, int]:
        """(trace, norm) of omega = (D + sqrt(D))/2, which generates O_K over Z."""
        d = self.fundamental_discriminant
        return d, (d * d - d) // 4


def kronecker_symbol(a: int, n: int) -> int:
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    e, n = split_off(n, 2)
    if e:
        if a % 2 == 0:
            return 0
        if e % 2 == 1 and a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi_symbol(a % n, n)


def splitting_at(K: QuadOrder, p: int) -> SplittingType:
    d = K.fundamental_discriminant
    if d % p == 0:
        return SplittingType.RAMIFIED
    if kronecker_symbol(d, p) == 1:
        return SplittingType.SPLIT
    return SplittingType.INERT


def eichler_symbol(m: int, s: SplittingType) -> int:
    if s is SplittingType.SPLIT:
        raise InputError("the Eichler symbol is defined for field extensions only")
    if m >= 1:
        return 1
    return -1 if s is SplittingType.INERT else 0


def reduced_forms(disc: int) -> List[Tuple[int, int, int]]:
    """Primitive reduced positive definite forms (a, b, c) with b^2 - 4ac = disc."""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise InputError(f"{disc} is not a negative discriminant")
    forms = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                forms.append((a, b, c))
        a += 1
    return forms


def form_class_number(disc: int) -> int:
    return len(reduced_forms(disc))


def class_number(K: QuadOrder) -> int:
    d, c = K.fundamental_discriminant, K.conductor
    if -d > config.CLASS_NUMBER["max_fundamental_discriminant"]:
        raise InputError(f"|D_K| = {-d} exceeds the form-enumeration range")
    if c > config.CLASS_NUMBER["max_conductor"]:
        raise InputError(f"conductor {c} exceeds the supported range")
    h = form_class_number(d)
    if c == 1:
        return h
    value = Fraction(h * c)
    for ell in factorint(c):
        value *= 1 - Fraction(kronecker_symbol(d, ell), ell)
    value /= {-3: 3, -4: 2}.get(d, 1)
    if value.denominator != 1:
        raise InputError(f"non-integral class number {value} for {K}")
    return int(value)


def _integral_square_class(x: Union[int, Fraction]) -> int:
    x = Fraction(x)
    if x == 0:
        raise InputError("Hilbert symbol arguments must be nonzero")
    return x.numerator * x.denominator


def hilbert_symbol(a, b, p) -> int:
    """(a, b)_p for nonzero rationals; p a prime or INFINITY."""
    a, b = _integral_square_class(a), _integral_square_class(b)
    if p == INFINITY:
        return -1 if a < 0 and b < 0 else 1
    alpha, u = split_off(a, p)
    beta, v = split_off(b, p)
    if p == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= legendre_symbol(u % p, p)
    if alpha % 2:
        sign *= legendre_symbol(v % p, p)
    return sign


def local_quad_class(K: QuadOrder, p: int) -> Union[LocalQuadExt, SplittingType]:
    """Class of K tensor Q_p; SplittingType.SPLIT when that algebra is not a field."""
    if splitting_at(K, p) is SplittingType.SPLIT:
        return SplittingType.SPLIT
    alpha, u = split_off(K.fundamental_discriminant, p)
    if p != 2:
        if alpha % 2 == 0:
            return LocalQuadExt.UNRAMIFIED
        if legendre_symbol(u % p, p) == 1:
            return LocalQuadExt.RAMIFIED_PRIME
        return LocalQuadExt.RAMIFIED_UNIT
    if alpha % 2 == 0:
        return {
            5: LocalQuadExt.UNRAMIFIED,
            3: LocalQuadExt.SQRT3,
            7: LocalQuadExt.SQRT7,
        }[u % 8]
    return {
        1: LocalQuadExt.SQRT2,
        3: LocalQuadExt.SQRT6,
        5: LocalQuadExt.SQRT10,
        7: LocalQuadExt.SQRT14,
    }[u % 8]
