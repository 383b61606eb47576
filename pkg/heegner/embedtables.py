"""
Closed-form local optimal-embedding rules and their global assembly.

Local rows: Eichler orders of level p^n, non-split Cartan orders, and the
division-algebra orders R_n(L) = O_L + pi^(n-1) O. Global: the product of local
contributions, Heegner point counts, and connected components.
"""

from dataclasses import dataclass, field
from math import prod
from typing import Callable, Dict, List, Optional, Tuple

from heegner.errors import InputError
from heegner.localdata import t_symbol
from heegner.quadarith import (
    LocalQuadExt,
    QuadOrder,
    SplittingType,
    class_number,
    eichler_symbol,
    require_class_at,
    splitting_at,
)


@dataclass
class OrderType:
    """Global type (N_Eic; N_Car; {(L_p, nu_p)}) of an order in a quaternion algebra over Q."""

    eichler: Dict[int, int] = field(default_factory=dict)
    cartan: Dict[int, int] = field(default_factory=dict)
    division: Dict[int, Tuple[LocalQuadExt, int]] = field(default_factory=dict)

    def __post_init__(self):
        supports = [set(self.eichler), set(self.cartan), set(self.division)]
        for i in range(3):
            for j in range(i + 1, 3):
                common = supports[i] & supports[j]
                if common:
                    raise InputError(f"primes {sorted(common)} appear in two parts of the order type")
        for part in (self.eichler, self.cartan):
            for p, e in part.items():
                if e < 1:
                    raise InputError(f"exponent at {p} must be positive")
        for p, (L, nu) in self.division.items():
            require_class_at(L, p)
            if nu < 1:
                raise InputError(f"division level at {p} must be positive")
        if len(self.division) % 2:
            raise InputError("the discriminant needs an even number of primes")

    @property
    def delta(self) -> int:
        return prod(self.division)

    @property
    def n_eic(self) -> int:
        return prod(p**e for p, e in self.eichler.items())

    @property
    def n_car(self) -> int:
        return prod(p**e for p, e in self.cartan.items())

    @property
    def n_delta(self) -> int:
        return prod(p**nu for p, (_, nu) in self.division.items())

    @property
    def level(self) -> int:
        return self.n_eic * self.n_car**2 * self.n_delta

    @property
    def primes(self) -> List[int]:
        return sorted(set(self.eichler) | set(self.cartan) | set(self.division))

    def role_of(self, p: int) -> Optional[str]:
        if p in self.eichler:
            return "eichler"
        if p in self.cartan:
            return "cartan"
        if p in self.division:
            return "division"
        return None

    def level_exponent(self, p: int) -> int:
        role = self.role_of(p)
        if role == "eichler":
            return self.eichler[p]
        if role == "cartan":
            return 2 * self.cartan[p]
        if role == "division":
            return self.division[p][1]
        return 0

    @property
    def is_cartan_eichler(self) -> bool:
        return all(nu == 1 for _, nu in self.division.values())

    @property
    def label(self) -> str:
        div = ",".join(f"({L.value}@{p},{nu})" for p, (L, nu) in sorted(self.division.items()))
        return f"({self.n_eic};{self.n_car};{{{div}}})"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "eichler": [[p, e] for p, e in sorted(self.eichler.items())],
            "cartan": [[p, e] for p, e in sorted(self.cartan.items())],
            "division": [[p, L.value, nu] for p, (L, nu) in sorted(self.division.items())],
            "delta": self.delta,
            "level": self.level,
            "cartan_eichler": self.is_cartan_eichler,
            "type_number": 1,
        }


@dataclass(frozen=True)
class EmbeddingVerdict:
    exists: bool
    count: Optional[int]
    rule_id: str

    def __post_init__(self):
        if self.count is not None and (self.count > 0) != self.exists:
            raise InputError(f"count {self.count} contradicts exists={self.exists} ({self.rule_id})")

    def to_dict(self) -> dict:
        return {"exists": self.exists, "count": self.count, "rule_id": self.rule_id}


def _check_exponents(m: int, n: int, n_min: int = 0):
    if m < 0 or n < n_min:
        raise InputError(f"invalid exponents m={m}, n={n}")


def eichler_exists(m: int, n: int, s: SplittingType) -> EmbeddingVerdict:
    _check_exponents(m, n)
    count = None
    if n <= 1:
        symbol = 1 if s is SplittingType.SPLIT else eichler_symbol(m, s)
        count = 1 if n == 0 else 1 + symbol
    if s is SplittingType.SPLIT:
        return EmbeddingVerdict(True, count, "eic-split")
    if n == 0:
        return EmbeddingVerdict(True, count, "eic-maximal")
    if s is SplittingType.INERT:
        return EmbeddingVerdict(2 * m >= n, count, "eic-inert")
    return EmbeddingVerdict(2 * m >= n - 1, count, "eic-ramified")


def cartan_exists(m: int, n: int) -> EmbeddingVerdict:
    _check_exponents(m, n, 1)
    return EmbeddingVerdict(m == 0, None, "car")


# rho is n = 2 rho + 1 (n odd) or n = 2 rho (n even)
_ROW_PREDICATES: Dict[str, Callable[[int, int], bool]] = {
    "div-1a": lambda m, r: m <= r,
    "div-1b": lambda m, r: m == r,
    "div-1c": lambda m, r: m == r,
    "div-1d": lambda m, r: m == r - 1,
    "div-1e": lambda m, r: m <= r - 1,
    "div-2a": lambda m, r: m == 0,
    "div-2b": lambda m, r: m == r,
    "div-2c": lambda m, r: m == r - 1,
    "div-2d": lambda m, r: m <= r - 1,
    "div-2e": lambda m, r: m == r - 1,
    "div-2f": lambda m, r: m <= r,
    "div-2g": lambda m, r: m == r,
    "div-2h": lambda m, r: m == r,
    "div-2i": lambda m, r: m == r - 1,
    "div-2j": lambda m, r: m in (r - 1, r - 2),
    "div-2k": lambda m, r: m <= r - 1,
    "no-row": lambda m, r: False,
}


def division_row(p: int, n: int, Kc: LocalQuadExt, Lc: LocalQuadExt) -> str:
    """Catalog row governing (n, K_p, L); "no-row" for pairs the catalog never lists."""
    require_class_at(Kc, p)
    require_class_at(Lc, p)
    if n < 1:
        raise InputError("division levels start at 1")
    odd = n % 2 == 1
    if odd == Lc.is_ramified:
        return "no-row"
    if p != 2:
        if odd:
            return "div-1b" if Kc.is_ramified else "div-1a"
        if not Kc.is_ramified:
            return "div-1c"
        return "div-1e" if Kc is Lc else "div-1d"
    if n == 1:
        return "div-2a"
    if odd:
        return "div-2g" if Kc.is_ramified else "div-2f"
    tk, tl = t_symbol(Kc, 2), t_symbol(Lc, 2)
    if tk == -1:
        return "div-2b" if tl == 1 else "div-2h"
    if tk == 1:
        if tl == 2:
            return "div-2i"
        return "div-2d" if Kc is Lc else "div-2c"
    if tl == 1:
        return "div-2e"
    return "div-2k" if Kc is Lc else "div-2j"


def division_exists(p: int, m: int, n: int, Kc: LocalQuadExt, Lc: LocalQuadExt) -> EmbeddingVerdict:
    _check_exponents(m, n, 1)
    row = division_row(p, n, Kc, Lc)
    rho = n // 2
    return EmbeddingVerdict(_ROW_PREDICATES[row](m, rho), None, row)


def division_count_nu2(p: int, m: int, s: SplittingType) -> int:
    if p == 2:
        raise InputError("the level p^2 count is stated for odd p")
    if m == 1 and s is SplittingType.INERT:
        return 2
    if m == 0 and s is SplittingType.RAMIFIED:
        return p + 1
    return 0


@dataclass(frozen=True)
class ComponentData:
    determined: bool
    primes: Tuple[int, ...] = ()
    class_number: Optional[int] = None
    field_generators: Tuple[int, ...] = ()
    reason: str = ""

    def to_dict(self) -> dict:
        if not self.determined:
            return {"determined": False, "reason": self.reason}
        return {
            "determined": True,
            "primes": list(self.primes),
            "h_R": self.class_number,
            "field_generators": list(self.field_generators),
        }


def component_data(T: OrderType) -> ComponentData:
    if 2 in T.division and T.division[2][1] >= 2:
        return ComponentData(False, reason="even discriminant with level at least 4 at 2")
    primes = tuple(sorted(
        p for p, (L, nu) in T.division.items() if nu > 1 and L.is_ramified
    ))
    generators = tuple((-1) ** ((p - 1) // 2) * p for p in primes)
    return ComponentData(True, primes, 2 ** len(primes), generators)


def local_count_factor(T: OrderType, K: QuadOrder, p: int) -> Optional[int]:
    """Local contribution v_p at a prime of the level, or None if no closed form applies."""
    role = T.role_of(p)
    m = K.m_at(p)
    s = splitting_at(K, p)
    if role == "eichler" and T.eichler[p] == 1:
        return 2 if s is SplittingType.SPLIT else 1 + eichler_symbol(m, s)
    if role == "division":
        nu = T.division[p][1]
        if s is SplittingType.SPLIT:
            return 0
        if nu == 1:
            return 1 - eichler_symbol(m, s)
        if nu == 2 and p != 2:
            return division_count_nu2(p, m, s)
    return None


def heegner_count(T: OrderType, K: QuadOrder) -> Optional[int]:
    factors = [local_count_factor(T, K, p) for p in T.primes]
    if 0 in factors:
        return 0
    if None in factors:
        return None
    return class_number(K) * prod(factors)


def global_embedding_count(T: OrderType, K: QuadOrder) -> Optional[int]:
    total = heegner_count(T, K)
    if total is None:
        return None
    if total == 0:
        return 0
    components = component_data(T)
    if not components.determined or total % components.class_number:
        return None
    return total // components.class_number

