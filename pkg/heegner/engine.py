"""
Heegner point existence engine.

Given the conductor N of E with its local representation types, an imaginary
quadratic field K and a conductor c, the engine

  1. computes the ramification set Sigma from local root numbers,
  2. picks the quaternion discriminant (the finite part of Sigma) and the
     minimal order type carrying the Jacquet-Langlands lift,
  3. raises levels (and, in abelian mode, local conductors) prime by prime
     until every local optimal-embedding condition holds,
  4. reports the residual hypotheses at 2 and 3 and the two missing
     configurations, plus counts and component data where closed forms exist.
"""

import sys
from dataclasses import dataclass, field
from enum import Enum
from math import prod
from typing import Dict, List, Optional

from sympy import isprime

import config_heegner as config
from heegner.embedtables import (
    ComponentData,
    EmbeddingVerdict,
    OrderType,
    cartan_exists,
    component_data,
    division_exists,
    eichler_exists,
    heegner_count,
)
from heegner.errors import AssumptionViolation, HeegnerError, InputError, SigmaError
from heegner.localdata import LocalRepType, RepKind, default_rep_type, jl_local_level
from heegner.quadarith import (
    LocalQuadExt,
    QuadOrder,
    SplittingType,
    class_number,
    local_quad_class,
    splitting_at,
)
from heegner.signs import EpsilonFlags, SigmaReport, build_sigma


class Mode(Enum):
    ELLIPTIC = "elliptic"      # conductor c is fixed
    ABELIAN = "abelian"        # conductor may be raised to c'


@dataclass
class CurveInput:
    N: Dict[int, int]
    reps: Dict[int, LocalRepType] = field(default_factory=dict)
    primitive: bool = True
    two_minimal: bool = True
    mode: Mode = Mode.ELLIPTIC
    epsilon_flags: Dict[int, EpsilonFlags] = field(default_factory=dict)
    l_prime_nonzero: Optional[bool] = None
    no_cm: Optional[bool] = None

    def __post_init__(self):
        if not self.N:
            raise InputError("N must be greater than 1")
        for p, e in self.N.items():
            if not isprime(p):
                raise InputError(f"{p} in the factorization of N is not prime")
            if e < 1:
                raise InputError(f"exponent of {p} in N must be positive")
        stray = set(self.reps) - set(self.N)
        if stray:
            raise InputError(f"representation types given at {sorted(stray)}, which do not divide N")
        stray = set(self.epsilon_flags) - set(self.N)
        if stray:
            raise InputError(f"sign flags given at {sorted(stray)}, which do not divide N")
        for p, e in self.N.items():
            rep = self.reps.get(p)
            if rep is None:
                self.reps[p] = default_rep_type(p, e)
            elif rep.p != p or rep.n != e:
                raise InputError(f"representation {rep.label} has exponent {rep.n} at {rep.p}, but val_{p}(N) = {e}")

    @property
    def conductor(self) -> int:
        return prod(p**e for p, e in self.N.items())

    def val(self, p: int) -> int:
        return self.N.get(p, 0)


def _m_at(c: int, p: int) -> int:
    m = 0
    while c % p == 0:
        c //= p
        m += 1
    return m


@dataclass
class PrimeAdjustment:
    p: int
    role: str
    m: int
    m_prime: int
    n: int
    n_prime: int
    rule_id: str
    passed: bool
    L: Optional[LocalQuadExt] = None
    note: str = ""

    def to_dict(self) -> dict:
        data = {
            "p": self.p,
            "role": self.role,
            "m": self.m,
            "m_prime": self.m_prime,
            "n": self.n,
            "n_prime": self.n_prime,
            "rule_id": self.rule_id,
            "passed": self.passed,
        }
        if self.L is not None:
            data["L"] = self.L.value
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class AdjustmentResult:
    order_type: OrderType
    c_prime: int
    trace: List[PrimeAdjustment]

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trace)

    @property
    def failures(self) -> List[PrimeAdjustment]:
        return [t for t in self.trace if not t.passed]


def _role(p: int, inp: CurveInput, K: QuadOrder, c: int, sigma: SigmaReport) -> Optional[str]:
    """Part of the order type that p joins; None while its Sigma membership is open."""
    if p not in inp.N:
        return None
    entry = sigma.entry(p)
    if entry is None or entry.in_sigma is None:
        return None
    if entry.in_sigma:
        return "division"
    if (splitting_at(K, p) is SplittingType.INERT and inp.val(p) % 2 == 0
            and c % p != 0):
        return "cartan"
    return "eichler"


def _l_preference(p: int, n: int, K: QuadOrder) -> List[LocalQuadExt]:
    choices = list(jl_local_level(p, n).l_choices)
    k_class = local_quad_class(K, p)
    if k_class in choices:
        choices.remove(k_class)
        choices.insert(0, k_class)
    return choices


def _require_sigma(sigma: SigmaReport):
    if not sigma.determined:
        raise SigmaError(f"Sigma is undetermined at {sigma.undetermined_primes}")
    if sigma.size % 2 == 0:
        raise SigmaError(
            f"|Sigma| = {sigma.size} is even (finite part {sigma.finite}): "
            "the global sign must be -1 for a Heegner point"
        )


def select_structure(inp: CurveInput, K: QuadOrder, c: int, sigma: SigmaReport) -> OrderType:
    """Minimal order type T_min: division part on Sigma, Cartan part at inert even levels, Eichler elsewhere."""
    _require_sigma(sigma)
    eichler, cartan, division = {}, {}, {}
    for p in sorted(inp.N):
        role = _role(p, inp, K, c, sigma)
        n = inp.val(p)
        if role == "division":
            if splitting_at(K, p) is SplittingType.SPLIT:
                raise SigmaError(f"{p} splits in K and cannot lie in Sigma")
            division[p] = (_l_preference(p, n, K)[0], n)
        elif role == "cartan":
            cartan[p] = n // 2
        else:
            eichler[p] = n
    T = OrderType(eichler, cartan, division)
    if T.level % inp.conductor:
        raise HeegnerError(f"level {T.level} of {T.label} is not divisible by N = {inp.conductor}")
    return T


def alternative_structures(T: OrderType, K: QuadOrder) -> List[OrderType]:
    """Order types differing from T only in the choice of L at even division levels."""
    alternatives = []
    for p, (L, n) in sorted(T.division.items()):
        for other in _l_preference(p, n, K):
            if other is L:
                continue
            division = dict(T.division)
            division[p] = (other, n)
            alternatives.append(OrderType(dict(T.eichler), dict(T.cartan), division))
    return alternatives


def _adjust_eichler(p: int, n: int, m: int, s: SplittingType, mode: Mode) -> PrimeAdjustment:
    limit = m if mode is Mode.ELLIPTIC else m + config.ENGINE["abelian_m_scan"]
    verdict = None
    for mm in range(m, limit + 1):
        verdict = eichler_exists(mm, n, s)
        if verdict.exists:
            return PrimeAdjustment(p, "eichler", m, mm, n, n, verdict.rule_id, True)
    if mode is Mode.ABELIAN:
        raise HeegnerError(f"no conductor exponent up to {limit} works at the Eichler prime {p}")
    threshold = "2m >= n" if s is SplittingType.INERT else "2m >= n - 1"
    return PrimeAdjustment(p, "eichler", m, m, n, n, verdict.rule_id, False,
                           note=f"assumption violation: {verdict.rule_id} needs {threshold}")


def _adjust_division(p: int, L: LocalQuadExt, n: int, m: int, K: QuadOrder, mode: Mode) -> PrimeAdjustment:
    k_class = local_quad_class(K, p)
    choices = _l_preference(p, n, K)
    if L in choices:
        choices.remove(L)
        choices.insert(0, L)
    slack = config.ENGINE["division_scan_slack"]
    top_m = m if mode is Mode.ELLIPTIC else m + config.ENGINE["abelian_m_scan"]
    last: Optional[EmbeddingVerdict] = None
    for mm in range(m, top_m + 1):
        # suborders keep the parity of the level
        for nn in range(n, n + 2 * mm + slack + 1, 2):
            for cls in choices:
                verdict = division_exists(p, mm, nn, k_class, cls)
                last = verdict
                if verdict.exists:
                    note = ""
                    if p != 2 and k_class.is_ramified and nn % 2 == 0:
                        note = ("L not isomorphic to K_p falls under row div-1d (m = rho - 1); "
                                "L isomorphic to K_p under div-1e (m <= rho - 1)")
                    return PrimeAdjustment(p, "division", m, mm, n, nn, verdict.rule_id, True, cls, note)
    if mode is Mode.ABELIAN:
        raise HeegnerError(f"level scan exhausted at the division prime {p}")
    return PrimeAdjustment(p, "division", m, m, n, n, last.rule_id if last else "no-row", False, L,
                           note=f"no level n' >= {n} of the same parity admits an optimal embedding at m = {m}")


def _adjust_prime(T: OrderType, p: int, K: QuadOrder, c: int, mode: Mode) -> PrimeAdjustment:
    m = _m_at(c, p)
    role = T.role_of(p)
    if role == "eichler":
        return _adjust_eichler(p, T.eichler[p], m, splitting_at(K, p), mode)
    if role == "cartan":
        n = T.cartan[p]
        verdict = cartan_exists(m, n)
        return PrimeAdjustment(p, "cartan", m, m, n, n, verdict.rule_id, verdict.exists)
    L, n = T.division[p]
    return _adjust_division(p, L, n, m, K, mode)


def adjust_levels(T_min: OrderType, inp: CurveInput, K: QuadOrder, c: int,
                  sigma: SigmaReport, strict: bool = False,
                  verbose: bool = False) -> AdjustmentResult:
    """Lexicographically minimal (m', n') per prime of the level under the mode's constraint."""
    trace = []
    for p in T_min.primes:
        step = _adjust_prime(T_min, p, K, c, inp.mode)
        if verbose:
            print(f"[Engine] {p}: {step.role} (m, n) = ({step.m}, {step.n}) -> "
                  f"({step.m_prime}, {step.n_prime}) via {step.rule_id}", file=sys.stderr)
        if strict and not step.passed and step.role == "eichler":
            raise AssumptionViolation(f"Eichler prime {p}: {step.note}")
        trace.append(step)

    eichler = {t.p: t.n_prime for t in trace if t.role == "eichler"}
    cartan = {t.p: t.n_prime for t in trace if t.role == "cartan"}
    division = {t.p: (t.L, t.n_prime) for t in trace if t.role == "division"}
    T = OrderType(eichler, cartan, division)
    c_prime = c * prod(t.p ** (t.m_prime - t.m) for t in trace)
    return AdjustmentResult(T, c_prime, trace)


def level_obstructions(T_min: OrderType, K: QuadOrder, c: int) -> List[dict]:
    """Primes where no level n' >= n admits an optimal embedding at the given conductor exponent."""
    blocked = []
    for p in T_min.primes:
        step = _adjust_prime(T_min, p, K, c, Mode.ELLIPTIC)
        if not step.passed:
            blocked.append({"p": p, "role": step.role, "m": step.m, "n": step.n,
                            "rule_id": step.rule_id, "reason": step.note})
    return blocked


@dataclass
class ConditionResult:
    name: str
    status: str         # pass | fail | not_applicable | undetermined
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class AssumptionReport:
    conditions: List[ConditionResult]

    @property
    def all_pass(self) -> Optional[bool]:
        statuses = {c.status for c in self.conditions}
        if "fail" in statuses:
            return False
        if "undetermined" in statuses:
            return None
        return True

    def to_dict(self) -> dict:
        return {"all_pass": self.all_pass, "conditions": [c.to_dict() for c in self.conditions]}


def _ramified_eichler_condition(inp: CurveInput, K: QuadOrder, c: int, sigma: SigmaReport) -> ConditionResult:
    """Eichler primes ramified in K need 2 val_p(c) >= val_p(N) - 1."""
    name = "ramified_eichler_level"
    watched, blocked, still_open = [], [], []
    for p, n in sorted(inp.N.items()):
        if splitting_at(K, p) is not SplittingType.RAMIFIED or 2 * _m_at(c, p) >= n - 1:
            continue
        watched.append(p)
        role = _role(p, inp, K, c, sigma)
        if role is None:
            still_open.append(p)
        elif role == "eichler":
            blocked.append(p)
    if not watched:
        return ConditionResult(name, "not_applicable", "no prime ramified in K has val_p(N) > 2 val_p(c) + 1")
    if blocked:
        return ConditionResult(name, "fail", f"Eichler primes {blocked} ramify in K with 2 val_p(c) < val_p(N) - 1")
    if still_open:
        return ConditionResult(name, "undetermined", f"Sigma membership of {still_open} is open")
    return ConditionResult(name, "pass", f"{watched} lie in Sigma")


def check_assumption_2N(inp: CurveInput, K: QuadOrder, c: int, sigma: SigmaReport) -> AssumptionReport:
    v2, v3 = inp.val(2), inp.val(3)
    s2, s3 = splitting_at(K, 2), splitting_at(K, 3)
    conditions = []

    role2 = _role(2, inp, K, c, sigma)
    if v2 < 3:
        conditions.append(ConditionResult("eichler_at_2", "not_applicable", f"val_2(N) = {v2}"))
    elif role2 is None:
        conditions.append(ConditionResult("eichler_at_2", "undetermined", "Sigma membership of 2 is open"))
    elif role2 != "eichler":
        conditions.append(ConditionResult("eichler_at_2", "not_applicable", f"2 is a {role2} prime"))
    else:
        ok = s2 is SplittingType.SPLIT or (v2 % 2 == 1 and s2 is SplittingType.INERT)
        conditions.append(ConditionResult(
            "eichler_at_2", "pass" if ok else "fail",
            f"val_2(N_Eic) = {v2}, 2 {s2.value} in K; needs 2 split, or inert with odd valuation",
        ))

    if v2 < 3:
        conditions.append(ConditionResult("division_at_2", "not_applicable", f"val_2(N) = {v2}"))
    elif role2 is None:
        conditions.append(ConditionResult("division_at_2", "undetermined", "Sigma membership of 2 is open"))
    elif role2 != "division":
        conditions.append(ConditionResult("division_at_2", "not_applicable", "2 is not in Sigma"))
    else:
        supercuspidal = inp.reps[2].kind is RepKind.SUPERCUSPIDAL
        ok = s2 is SplittingType.INERT and (not supercuspidal or v2 % 2 == 1)
        conditions.append(ConditionResult(
            "division_at_2", "pass" if ok else "fail",
            f"2 in Sigma with val_2(N) = {v2}, 2 {s2.value} in K; needs 2 inert"
            + (" and odd valuation" if supercuspidal else ""),
        ))

    if v2 == 0:
        conditions.append(ConditionResult("two_minimal", "not_applicable", "N is odd"))
    else:
        conditions.append(ConditionResult(
            "two_minimal", "pass" if inp.two_minimal else "fail",
            "minimal Artin conductor among twists at 2",
        ))

    role3 = _role(3, inp, K, c, sigma)
    if v3 != 4 or s3 is not SplittingType.INERT:
        conditions.append(ConditionResult("three_level", "not_applicable",
                                          f"val_3(N) = {v3}, 3 {s3.value} in K"))
    elif role3 is None:
        conditions.append(ConditionResult("three_level", "undetermined", "Sigma membership of 3 is open"))
    elif role3 != "eichler":
        conditions.append(ConditionResult("three_level", "not_applicable", f"3 is a {role3} prime"))
    else:
        ok = _m_at(c, 3) != 1
        conditions.append(ConditionResult(
            "three_level", "pass" if ok else "fail",
            f"val_3(N_Eic) = 4 with 3 inert needs val_3(c) != 1 (val_3(c) = {_m_at(c, 3)})",
        ))
    conditions.append(_ramified_eichler_condition(inp, K, c, sigma))
    return AssumptionReport(conditions)


@dataclass
class MissingCases:
    flag1: bool = False
    flag2: bool = False

    @property
    def any(self) -> bool:
        return self.flag1 or self.flag2

    def to_dict(self) -> dict:
        return {"flag1": self.flag1, "flag2": self.flag2}


def _known_outside_sigma(p: int, sigma: SigmaReport) -> bool:
    entry = sigma.entry(p)
    return entry is not None and entry.in_sigma is False


def detect_missing_cases(inp: CurveInput, K: QuadOrder, c: int, sigma: SigmaReport) -> MissingCases:
    flag1 = (inp.val(3) == 4 and _known_outside_sigma(3, sigma)
             and splitting_at(K, 3) is SplittingType.INERT and _m_at(c, 3) == 1)
    flag2 = (inp.val(2) >= 3 and _known_outside_sigma(2, sigma)
             and splitting_at(K, 2) is SplittingType.RAMIFIED)
    return MissingCases(flag1, flag2)


def check_corollary_hypotheses(inp: CurveInput, K: QuadOrder, c: int) -> List[dict]:
    v2, v3 = inp.val(2), inp.val(3)
    return [
        {"name": "primitive", "holds": inp.primitive},
        {"name": "two_minimal", "holds": inp.two_minimal or v2 == 0},
        {"name": "three_conductor",
         "holds": not (v3 == 4 and splitting_at(K, 3) is SplittingType.INERT and _m_at(c, 3) == 1)},
        {"name": "two_not_ramified",
         "holds": not (v2 >= 3 and splitting_at(K, 2) is SplittingType.RAMIFIED)},
    ]


CONCLUSION_TEMPLATE = (
    "If L'(E/K, chi, 1) != 0 and E acquires no CM over an imaginary quadratic subfield "
    "of {field}, then dim (E({field}) (x) C)^chi = 1."
)

UNIFORMIZATION_CERTIFICATE = (
    "The Jacquet-Langlands lift lives on R_min of level {level_min}; {label} is a suborder, "
    "so its Shimura curve X_R admits a surjection J_R -> E."
)


@dataclass
class HeegnerReport:
    status: str                                   # exists | none | undetermined
    mode: Mode
    K: QuadOrder
    c: int
    sigma: SigmaReport
    assumption_2N: AssumptionReport
    missing_cases: MissingCases
    corollary_hypotheses: List[dict]
    order_type: Optional[OrderType] = None
    minimal_order_type: Optional[OrderType] = None
    alternatives: List[OrderType] = field(default_factory=list)
    c_prime: Optional[int] = None
    adjustments: List[PrimeAdjustment] = field(default_factory=list)
    heegner_count: Optional[int] = None
    components: Optional[ComponentData] = None
    rationality_field: Optional[dict] = None
    obstructions: List[dict] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    conclusion: Optional[str] = None
    uniformization: Optional[str] = None
    delta_one_warning: bool = False
    l_prime_nonzero: Optional[bool] = None
    cm_caveat_flag: Optional[bool] = None
    request: Optional[dict] = None

    @property
    def exists(self) -> Optional[bool]:
        if self.status == "undetermined":
            return None
        return self.status == "exists"

    @property
    def level(self) -> Optional[int]:
        return self.order_type.level if self.order_type else None

    def to_dict(self) -> dict:
        data = {
            "schema_version": config.SCHEMA_VERSION,
            "status": self.status,
            "exists": self.exists,
            "mode": self.mode.value,
            "K": {"disc": self.K.fundamental_discriminant},
            "c": self.c,
            "c_prime": self.c_prime,
            "level": self.level,
            "sigma": self.sigma.to_dict(),
            "order_type": self.order_type.to_dict() if self.order_type else None,
            "minimal_order_type": self.minimal_order_type.to_dict() if self.minimal_order_type else None,
            "alternatives": [t.label for t in self.alternatives],
            "adjustments": [a.to_dict() for a in self.adjustments],
            "heegner_count": self.heegner_count,
            "components": self.components.to_dict() if self.components else None,
            "rationality_field": self.rationality_field,
            "assumption_2N": self.assumption_2N.to_dict(),
            "missing_case_flags": self.missing_cases.to_dict(),
            "corollary_hypotheses": self.corollary_hypotheses,
            "obstructions": self.obstructions,
            "diagnostics": self.diagnostics,
            "conclusion": self.conclusion,
            "uniformization": self.uniformization,
            "delta_one_warning": self.delta_one_warning,
            "l_prime_nonzero": self.l_prime_nonzero,
            "cm_caveat_flag": self.cm_caveat_flag,
        }
        if self.request is not None:
            data["request"] = self.request
        return data


def analyze(inp: CurveInput, K: QuadOrder, c: int = 1,
            overrides: Optional[Dict[int, bool]] = None,
            verbose: bool = False) -> HeegnerReport:
    if c < 1:
        raise InputError(f"conductor c must be positive, got {c}")
    sigma = build_sigma(inp.N, inp.reps, K, c, overrides, inp.epsilon_flags)
    report = HeegnerReport(
        status="undetermined",
        mode=inp.mode,
        K=K,
        c=c,
        sigma=sigma,
        assumption_2N=check_assumption_2N(inp, K, c, sigma),
        missing_cases=detect_missing_cases(inp, K, c, sigma),
        corollary_hypotheses=check_corollary_hypotheses(inp, K, c),
        l_prime_nonzero=inp.l_prime_nonzero,
        cm_caveat_flag=inp.no_cm,
    )
    if report.missing_cases.any:
        report.diagnostics.append("input falls under a missing case of the existence criterion")

    if not sigma.determined:
        report.diagnostics.append(
            f"Sigma undetermined at {sigma.undetermined_primes}; supply overrides for these primes"
        )
        if verbose:
            print(f"[Engine] Sigma undetermined at {sigma.undetermined_primes}", file=sys.stderr)
        return report

    T_min = select_structure(inp, K, c, sigma)
    report.minimal_order_type = T_min
    report.alternatives = alternative_structures(T_min, K)
    if verbose:
        print(f"[Engine] Sigma = {sigma.finite} + infinity, T_min = {T_min.label}", file=sys.stderr)

    adjusted = adjust_levels(T_min, inp, K, c, sigma, verbose=verbose)
    report.adjustments = adjusted.trace
    report.order_type = adjusted.order_type
    report.c_prime = adjusted.c_prime
    report.delta_one_warning = sigma.delta == 1
    if report.delta_one_warning:
        report.diagnostics.append("Delta = 1: the order lives in the split algebra M_2(Q)")

    if not adjusted.passed:
        report.status = "none"
        report.obstructions = level_obstructions(T_min, K, c)
        report.diagnostics.extend(
            f"{t.p}: {t.note}" for t in adjusted.failures if t.note
        )
        return report

    T, c_prime = adjusted.order_type, adjusted.c_prime
    if c_prime % c or T.level % inp.conductor:
        raise HeegnerError(f"escalation broke c | c' or N | level ({c} -> {c_prime}, {T.label})")
    report.status = "exists"
    order = K.with_conductor(c_prime)
    report.heegner_count = heegner_count(T, order)
    report.components = component_data(T)
    report.rationality_field = {"name": f"H_{c_prime}", "degree_over_K": class_number(order)}
    report.conclusion = CONCLUSION_TEMPLATE.format(field=f"H_{c_prime}")
    report.uniformization = UNIFORMIZATION_CERTIFICATE.format(level_min=T_min.level, label=T.label)
    return report
