"""
Local data at primes dividing the conductor: representation types, the
Jacquet-Langlands level classification, and the t / mu symbols that index the
division-algebra embedding rows.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import config_heegner as config
from heegner.errors import InputError, TwistCaseError
from heegner.quadarith import LocalQuadExt, local_classes, require_class_at


class RepKind(Enum):
    PRINCIPAL_SERIES = "ps"
    STEINBERG = "st"
    SUPERCUSPIDAL = "sc"


def max_exponent(p: int) -> int:
    return config.ADMISSIBLE_EXPONENTS.get(p, config.ADMISSIBLE_EXPONENTS["default"])


@dataclass(frozen=True)
class LocalRepType:
    """Discrete type of the local representation at p with conductor exponent n."""

    p: int
    kind: RepKind
    n: int
    twist_conductor: int = 0            # Steinberg: conductor exponent a of the quadratic twist
    inducing: Optional[LocalQuadExt] = None
    psi_conductor: int = 0
    minimal: bool = True
    exceptional: bool = False
    override_recommended: bool = False

    def __post_init__(self):
        local_classes(self.p)
        if not 0 <= self.n <= max_exponent(self.p):
            raise InputError(
                f"conductor exponent {self.n} at {self.p} is outside 0..{max_exponent(self.p)}"
            )
        if self.kind is RepKind.STEINBERG:
            self._check_steinberg()
        elif self.kind is RepKind.SUPERCUSPIDAL:
            self._check_supercuspidal()
        elif self.exceptional or self.inducing is not None:
            raise InputError("principal series carry no inducing data")
        elif self.n % 2:
            # pi(mu, mu^-1) has conductor exponent 2 c(mu)
            raise InputError(f"principal series at {self.p} have even conductor exponent, not {self.n}")

    def _check_steinberg(self):
        a = self.twist_conductor
        allowed = (0, 2, 3) if self.p == 2 else (0, 1)
        if a not in allowed:
            raise InputError(f"Steinberg twist conductor {a} is impossible at {self.p}")
        expected = 1 if a == 0 else 2 * a
        if self.n != expected:
            raise InputError(f"Steinberg twist of conductor {a} has exponent {expected}, not {self.n}")

    def _check_supercuspidal(self):
        if self.n < 2:
            raise InputError("supercuspidal exponents are at least 2")
        if self.p >= 5 and self.n != 2:
            raise InputError(f"supercuspidals at {self.p} have exponent 2")
        if self.exceptional:
            if self.p != 2 or self.n != 7:
                raise InputError("exceptional supercuspidals are modelled only at 2 with exponent 7")
            return
        if self.inducing is None or self.psi_conductor < 1:
            raise InputError("dihedral supercuspidals need an inducing field and a ramified character")
        require_class_at(self.inducing, self.p)
        if self.inducing.is_ramified:
            expected = self.psi_conductor + self.inducing.disc_valuation(self.p)
        else:
            expected = 2 * self.psi_conductor
        if expected != self.n:
            raise InputError(
                f"induction from {self.inducing.value} with character conductor "
                f"{self.psi_conductor} has exponent {expected}, not {self.n}"
            )

    @property
    def label(self) -> str:
        if self.kind is RepKind.PRINCIPAL_SERIES:
            return "ps"
        if self.kind is RepKind.STEINBERG:
            return f"st({self.twist_conductor})"
        if self.exceptional:
            return "sc(exceptional)"
        return f"sc({self.inducing.value},{self.psi_conductor})"

    def to_dict(self) -> dict:
        data = {"p": self.p, "kind": self.kind.value, "n": self.n}
        if self.kind is RepKind.STEINBERG:
            data["twist_conductor"] = self.twist_conductor
        if self.kind is RepKind.SUPERCUSPIDAL:
            data["inducing"] = self.inducing.value if self.inducing else None
            data["psi_conductor"] = self.psi_conductor
            data["minimal"] = self.minimal
            data["exceptional"] = self.exceptional
        data["override_recommended"] = self.override_recommended
        return data


def steinberg(p: int, a: int = 0) -> LocalRepType:
    return LocalRepType(p, RepKind.STEINBERG, 1 if a == 0 else 2 * a, twist_conductor=a)


def supercuspidal(p: int, inducing: LocalQuadExt, psi_conductor: int, **kwargs) -> LocalRepType:
    if inducing.is_ramified:
        n = psi_conductor + inducing.disc_valuation(p)
    else:
        n = 2 * psi_conductor
    return LocalRepType(p, RepKind.SUPERCUSPIDAL, n, inducing=inducing,
                        psi_conductor=psi_conductor, **kwargs)


def default_rep_type(p: int, n: int) -> LocalRepType:
    if not 0 <= n <= max_exponent(p):
        raise InputError(f"exponent {n} at {p} is outside the admissible range 0..{max_exponent(p)}")
    if n == 0:
        return LocalRepType(p, RepKind.PRINCIPAL_SERIES, 0)
    if n == 1:
        return steinberg(p)
    if p == 2:
        return _default_at_two(n)
    if n == 2:
        # twisted Steinberg is the other possibility
        return supercuspidal(p, LocalQuadExt.RAMIFIED_PRIME, 1, override_recommended=True)
    if n == 4:
        return supercuspidal(p, LocalQuadExt.UNRAMIFIED, 2)
    return supercuspidal(p, LocalQuadExt.RAMIFIED_PRIME, n - 1)


def _default_at_two(n: int) -> LocalRepType:
    if n == 7:
        return LocalRepType(2, RepKind.SUPERCUSPIDAL, 7, exceptional=True)
    table = {
        2: (LocalQuadExt.UNRAMIFIED, 1, False),
        3: (LocalQuadExt.SQRT3, 1, False),
        4: (LocalQuadExt.UNRAMIFIED, 2, True),
        5: (LocalQuadExt.SQRT3, 3, False),
        6: (LocalQuadExt.UNRAMIFIED, 3, True),
        8: (LocalQuadExt.SQRT2, 5, True),
    }
    inducing, psi, ambiguous = table[n]
    return supercuspidal(2, inducing, psi, override_recommended=ambiguous)


@dataclass(frozen=True)
class JLLevelDatum:
    l_choices: Tuple[LocalQuadExt, ...]
    n: int

    def __post_init__(self):
        if not self.l_choices:
            raise InputError("empty class set")
        unramified = [not cls.is_ramified for cls in self.l_choices]
        if self.n % 2 == 1 and not all(unramified):
            raise InputError("odd division levels pair with the unramified class")
        if self.n % 2 == 0 and any(unramified):
            raise InputError("even division levels pair with ramified classes")


def jl_local_level(p: int, s: int) -> JLLevelDatum:
    local_classes(p)
    if s < 1:
        raise InputError(f"a division prime divides the conductor; got exponent {s}")
    if s % 2 == 1:
        return JLLevelDatum((LocalQuadExt.UNRAMIFIED,), s)
    if p != 2:
        return JLLevelDatum((LocalQuadExt.RAMIFIED_UNIT, LocalQuadExt.RAMIFIED_PRIME), s)
    if s == 2:
        return JLLevelDatum((LocalQuadExt.SQRT3, LocalQuadExt.SQRT7), 2)
    raise TwistCaseError(
        f"exponent {s} at 2: the form is a twist of lower level (twist case, out of scope)"
    )


def t_symbol(L: LocalQuadExt, p: int) -> int:
    require_class_at(L, p)
    if not L.is_ramified:
        return -1
    if p != 2:
        return 0
    return 1 if L.disc_valuation(2) == 2 else 2


def mu_symbol(L: LocalQuadExt, L2: LocalQuadExt, p: int) -> Union[int, float]:
    """Distance between two classes; math.inf for equal classes."""
    t1, t2 = t_symbol(L, p), t_symbol(L2, p)
    if L is L2:
        return math.inf
    if t1 == -1 or t2 == -1:
        return 1
    pair = tuple(sorted((t1, t2)))
    return {(0, 0): 2, (1, 1): 3, (1, 2): 3, (2, 2): 5}[pair]


def jl_multiplicity(a: int) -> int:
    if a not in (1, 2):
        raise InputError(f"minimal conductor exponent must be 1 or 2, got {a}")
    return a
