"""
Local root numbers of E over K twisted by a ring class character, the local
signs eta_{K,p}(-1), and the set Sigma of places where they differ.

Character values are not modelled: a rule that needs more than conductors
returns an Undetermined sign naming the missing datum, and the caller is
expected to supply a Sigma override for that prime.
"""

from dataclasses import dataclass, field
from math import prod
from typing import Dict, List, Optional, Tuple

from heegner.errors import InputError, SigmaError
from heegner.localdata import LocalRepType, RepKind, default_rep_type
from heegner.quadarith import (
    LocalQuadExt,
    QuadOrder,
    SplittingType,
    hilbert_symbol,
    local_quad_class,
    splitting_at,
)


@dataclass(frozen=True)
class SignValue:
    value: Optional[int]
    reason: str = ""

    def __post_init__(self):
        if self.value not in (1, -1, None):
            raise InputError(f"a sign is +1 or -1, got {self.value}")
        if self.value is None and not self.reason:
            raise InputError("an undetermined sign must name the missing datum")

    @classmethod
    def plus(cls, reason: str = "") -> "SignValue":
        return cls(1, reason)

    @classmethod
    def minus(cls, reason: str = "") -> "SignValue":
        return cls(-1, reason)

    @classmethod
    def undetermined(cls, reason: str) -> "SignValue":
        return cls(None, reason)

    @classmethod
    def of(cls, value: int, reason: str = "") -> "SignValue":
        return cls(value, reason)

    @property
    def determined(self) -> bool:
        return self.value is not None

    @property
    def label(self) -> str:
        return {1: "+", -1: "-", None: "?"}[self.value]

    def to_dict(self) -> dict:
        return {"value": self.value, "reason": self.reason}


@dataclass(frozen=True)
class EpsilonFlags:
    """Character relations supplied by the user where conductors do not decide the sign."""

    steinberg_norm_relation: Optional[bool] = None
    # c(psi * chi_p) when the inducing field differs from K_p
    twist_conductor: Optional[int] = None
    # (c(psi^tau * chi_p), c(psi * chi_p)) when the inducing field is K_p
    twist_conductor_pair: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        return {
            "steinberg_norm_relation": self.steinberg_norm_relation,
            "twist_conductor": self.twist_conductor,
            "twist_conductor_pair": list(self.twist_conductor_pair) if self.twist_conductor_pair else None,
        }


NEEDS_CHARACTER_VALUES = "requires character values, not just conductors"


def eta_minus_one(K: QuadOrder, p: int) -> int:
    if splitting_at(K, p) is SplittingType.SPLIT:
        return 1
    return hilbert_symbol(-1, K.fundamental_discriminant, p)


def _steinberg_epsilon(rep: LocalRepType, s: SplittingType, m: int,
                       flags: EpsilonFlags) -> SignValue:
    relation = flags.steinberg_norm_relation
    unramified_twist = rep.twist_conductor == 0
    if unramified_twist and m > 0:
        # psi o Nr is unramified while chi_p is not
        if relation:
            raise InputError(
                f"norm relation at {rep.p} is impossible: chi_p has conductor exponent {m}, psi o Nr is unramified"
            )
        return SignValue.plus("chi_p and psi o Nr have different conductors")
    if unramified_twist and s is SplittingType.INERT:
        if relation is False:
            raise InputError(f"at {rep.p} both chi_p and psi o Nr are trivial, so the norm relation holds")
        return SignValue.minus("chi_p and psi o Nr both trivial at an inert prime")
    if relation is None:
        return SignValue.undetermined(f"Steinberg at {rep.p}: {NEEDS_CHARACTER_VALUES}")
    if relation:
        return SignValue.minus("chi_p^-1 = psi o Nr")
    return SignValue.plus("chi_p^-1 != psi o Nr")


def _flag_epsilon(rep: LocalRepType, flags: EpsilonFlags,
                  k_class: Optional[LocalQuadExt]) -> Optional[SignValue]:
    if rep.inducing is None or k_class is None:
        return None
    if rep.inducing is k_class and flags.twist_conductor_pair is not None:
        a, b = flags.twist_conductor_pair
        return SignValue.of((-1) ** (a + b), "inducing field is K_p; twisted conductors supplied")
    if rep.inducing is not k_class and flags.twist_conductor is not None:
        return SignValue.of((-1) ** flags.twist_conductor, "inducing field differs from K_p; twisted conductor supplied")
    return None


def _supercuspidal_epsilon(rep: LocalRepType, s: SplittingType, m: int) -> Optional[SignValue]:
    p, n = rep.p, rep.n
    inert = s is SplittingType.INERT
    if rep.exceptional:
        if not rep.minimal:
            return SignValue.undetermined("exceptional supercuspidal that is not twist-minimal")
        return SignValue.plus("exceptional, m >= 4") if m >= 4 else SignValue.minus("exceptional, m < 4")
    if p == 2:
        if n == 3 and inert:
            return SignValue.plus("2 inert, n = 3, m >= 2") if m >= 2 else SignValue.minus("2 inert, n = 3, m < 2")
        if n == 5 and inert and m < 3:
            return SignValue.minus("2 inert, n = 5, m < 3")
        if n == 2 and not inert:
            return SignValue.plus("2 ramified, n = 2, m >= 2") if m >= 2 else SignValue.minus("2 ramified, n = 2, m < 2")
        if n % 2 == 0 and inert and m == 0:
            return SignValue.plus("m = 0")
        return None
    if rep.inducing.is_ramified and n >= 3 and n % 2 == 1:
        bound = (n - 1) // 2
        if inert:
            if m <= bound:
                return SignValue.minus(f"ramified induction, m <= {bound}")
            return SignValue.plus(f"ramified induction, m > {bound}")
        if m == bound:
            return SignValue.minus(f"ramified induction, m = {bound}")
        if m > bound:
            return SignValue.plus(f"ramified induction, m > {bound}")
        return None
    if n == 2 and not inert and m == 1:
        return SignValue.plus("n = 2, K ramified, m = 1")
    if p == 3 and n == 4 and inert and m == 1:
        return SignValue.plus("p = 3, n = 4, K inert, m = 1")
    if n == 2 and inert and m >= 2:
        return SignValue.plus("n = 2, K inert, m >= 2")
    if inert and m == 0:
        return SignValue.plus("m = 0")
    return None


def local_epsilon(p: int, rep: LocalRepType, s: SplittingType, m: int,
                  flags: Optional[EpsilonFlags] = None,
                  k_class: Optional[LocalQuadExt] = None) -> SignValue:
    """Local root number at a prime of the conductor, or Undetermined with the missing datum."""
    if rep.p != p:
        raise InputError(f"representation at {rep.p} used at {p}")
    if m < 0:
        raise InputError("conductor exponent must be nonnegative")
    flags = flags or EpsilonFlags()
    if s is SplittingType.SPLIT:
        return SignValue.plus("p splits in K")
    if rep.kind is RepKind.STEINBERG:
        return _steinberg_epsilon(rep, s, m, flags)
    if rep.kind is RepKind.PRINCIPAL_SERIES:
        if m == 0:
            return SignValue.plus("m = 0")
        return SignValue.undetermined(f"principal series at {p}: {NEEDS_CHARACTER_VALUES}")
    if flags.steinberg_norm_relation is not None:
        raise InputError(f"the norm relation flag applies to Steinberg representations, not {rep.label}")
    decided = _supercuspidal_epsilon(rep, s, m)
    if decided is not None and decided.determined:
        return decided
    from_flags = _flag_epsilon(rep, flags, k_class)
    if from_flags is not None:
        return from_flags
    if decided is not None:
        return decided
    return SignValue.undetermined(f"{rep.label} at {p} with m = {m}: {NEEDS_CHARACTER_VALUES}")


@dataclass
class SigmaEntry:
    p: int
    epsilon: SignValue
    eta_minus1: int
    in_sigma: Optional[bool]
    source: str = "rule"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "epsilon": self.epsilon.to_dict(),
            "eta_minus1": self.eta_minus1,
            "in_sigma": self.in_sigma,
            "source": self.source,
        }


@dataclass
class SigmaReport:
    entries: List[SigmaEntry] = field(default_factory=list)
    includes_infinity: bool = True

    @property
    def determined(self) -> bool:
        return all(e.in_sigma is not None for e in self.entries)

    @property
    def finite(self) -> List[int]:
        return [e.p for e in self.entries if e.in_sigma]

    @property
    def undetermined_primes(self) -> List[int]:
        return [e.p for e in self.entries if e.in_sigma is None]

    @property
    def size(self) -> Optional[int]:
        if not self.determined:
            return None
        return len(self.finite) + 1

    @property
    def global_sign(self) -> Optional[int]:
        if not self.determined:
            return None
        return (-1) ** self.size

    @property
    def delta(self) -> Optional[int]:
        if not self.determined:
            return None
        return prod(self.finite)

    def entry(self, p: int) -> Optional[SigmaEntry]:
        return next((e for e in self.entries if e.p == p), None)

    def overrides(self) -> Dict[int, bool]:
        return {e.p: e.in_sigma for e in self.entries if e.in_sigma is not None}

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "includes_infinity": self.includes_infinity,
            "finite": self.finite if self.determined else None,
            "global_sign": self.global_sign,
            "delta": self.delta,
        }


def build_sigma(N: Dict[int, int], reps: Dict[int, LocalRepType], K: QuadOrder, c: int,
                overrides: Optional[Dict[int, bool]] = None,
                flags: Optional[Dict[int, EpsilonFlags]] = None) -> SigmaReport:
    overrides = dict(overrides or {})
    flags = flags or {}
    for p, member in overrides.items():
        if p not in N:
            if member:
                raise SigmaError(f"{p} does not divide N: every finite prime of Sigma divides the conductor")
            continue
        if member and splitting_at(K, p) is SplittingType.SPLIT:
            raise SigmaError(f"{p} splits in K: primes of Sigma have K_p a field")

    entries = []
    for p in sorted(N):
        rep = reps.get(p) or default_rep_type(p, N[p])
        s = splitting_at(K, p)
        eta = eta_minus_one(K, p)
        m = K.with_conductor(c).m_at(p)
        if s is SplittingType.SPLIT:
            entry = SigmaEntry(p, SignValue.plus("p splits in K"), eta, False, "structural")
        elif rep.kind is RepKind.PRINCIPAL_SERIES:
            entry = SigmaEntry(p, SignValue.of(eta, "principal series do not transfer to the division algebra"),
                               eta, False, "structural")
        else:
            k_class = local_quad_class(K, p)
            eps = local_epsilon(p, rep, s, m, flags.get(p), k_class)
            member = None if not eps.determined else eps.value != eta
            entry = SigmaEntry(p, eps, eta, member)

        if p in overrides:
            wanted = overrides[p]
            if entry.in_sigma is None:
                entry.in_sigma = wanted
                entry.source = "override"
            elif entry.in_sigma != wanted:
                if entry.epsilon.determined:
                    verb = "must" if entry.in_sigma else "cannot"
                    raise SigmaError(
                        f"{p} {verb} lie in Sigma: epsilon={entry.epsilon.value:+d}, "
                        f"eta(-1)={entry.eta_minus1:+d} ({entry.epsilon.reason})"
                    )
                raise SigmaError(f"{p} cannot lie in Sigma: {entry.epsilon.reason}")
        entries.append(entry)
    return SigmaReport(entries)
