"""
JSON wire format for analysis requests and reports.

Requests are plain dicts (parsed from a file, CLI flags, or a CSV row). Field
names are frozen per SCHEMA_VERSION; unknown fields are rejected. The
canonical echo of a request, fed back through AnalyzeRequest.from_dict,
reproduces the same analysis.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

from sympy import factorint, isprime

import config_heegner as config
from heegner.engine import CurveInput, HeegnerReport, Mode, analyze
from heegner.errors import InputError
from heegner.localdata import LocalRepType, RepKind, default_rep_type, steinberg, supercuspidal
from heegner.quadarith import LocalQuadExt, QuadOrder
from heegner.signs import EpsilonFlags

REQUEST_FIELDS = {
    "schema_version", "N", "disc", "c", "mode", "sigma", "sigma_overrides",
    "reps", "flags", "epsilon_flags", "assertions",
}
FLAG_FIELDS = {"primitive", "two_minimal"}
ASSERTION_FIELDS = {"l_prime_nonzero", "no_cm"}
EPSILON_FIELDS = {"steinberg_norm_relation", "twist_conductor", "twist_conductor_pair"}

# short names accepted for inducing fields at odd p
_CLASS_ALIASES = {"ram": LocalQuadExt.RAMIFIED_PRIME, "ramified": LocalQuadExt.RAMIFIED_PRIME}


def parse_factored(value: Union[int, str, List]) -> Dict[int, int]:
    """N as an integer (factored here up to FACTOR_LIMIT) or as [[p, e], ...] pairs."""
    if isinstance(value, (list, tuple)):
        factors = {}
        for pair in value:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise InputError(f"factored N expects [prime, exponent] pairs, got {pair!r}")
            p, e = int(pair[0]), int(pair[1])
            if not isprime(p):
                raise InputError(f"{p} is not prime")
            if e < 1:
                raise InputError(f"exponent of {p} must be positive")
            if p in factors:
                raise InputError(f"prime {p} listed twice")
            factors[p] = e
        if not factors:
            raise InputError("N must be greater than 1")
        return factors
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise InputError(f"N must be an integer or a list of [prime, exponent] pairs, got {value!r}")
    if n < 2:
        raise InputError(f"N must be greater than 1, got {n}")
    if n > config.FACTOR_LIMIT:
        raise InputError(f"N = {n} exceeds {config.FACTOR_LIMIT}; send it factored")
    return {int(p): int(e) for p, e in factorint(n).items()}


def _parse_class(name: str, p: int) -> LocalQuadExt:
    name = name.strip().lower()
    if name in _CLASS_ALIASES and p != 2:
        return _CLASS_ALIASES[name]
    try:
        return LocalQuadExt(name)
    except ValueError:
        known = ", ".join(c.value for c in LocalQuadExt)
        raise InputError(f"unknown quadratic extension class {name!r} (known: {known})")


def parse_rep(text: str, p: Optional[int] = None) -> Tuple[int, LocalRepType]:
    """Parse `p:kind:params`; the prime may be omitted when given separately.

    ps[:n] | st[:a] | sc:F,psi | sc:exceptional
    """
    parts = [s.strip() for s in text.strip().split(":")]
    if parts and parts[0].isdigit():
        p = int(parts.pop(0))
    if p is None or not parts:
        raise InputError(f"representation override {text!r} needs the form p:kind[:params]")
    kind = parts[0].lower()
    params = parts[1] if len(parts) > 1 else ""
    if len(parts) > 2:
        raise InputError(f"too many fields in {text!r}")
    try:
        if kind == RepKind.PRINCIPAL_SERIES.value:
            return p, LocalRepType(p, RepKind.PRINCIPAL_SERIES, int(params) if params else 0)
        if kind == RepKind.STEINBERG.value:
            return p, steinberg(p, int(params) if params else 0)
        if kind == RepKind.SUPERCUSPIDAL.value:
            if params.lower() == "exceptional":
                return p, LocalRepType(p, RepKind.SUPERCUSPIDAL, 7, exceptional=True)
            fields = [s.strip() for s in params.split(",")]
            if len(fields) != 2:
                raise InputError(f"supercuspidal overrides read sc:F,psi_conductor, got {text!r}")
            return p, supercuspidal(p, _parse_class(fields[0], p), int(fields[1]))
    except ValueError as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"bad number in representation override {text!r}")
    raise InputError(f"unknown representation kind {kind!r} in {text!r}")


def format_rep(rep: LocalRepType) -> str:
    if rep.kind is RepKind.PRINCIPAL_SERIES:
        return f"{rep.p}:ps:{rep.n}"
    if rep.kind is RepKind.STEINBERG:
        return f"{rep.p}:st:{rep.twist_conductor}"
    if rep.exceptional:
        return f"{rep.p}:sc:exceptional"
    return f"{rep.p}:sc:{rep.inducing.value},{rep.psi_conductor}"


def _parse_epsilon_flags(data: Dict[str, Any]) -> Dict[int, EpsilonFlags]:
    result = {}
    for key, value in data.items():
        if not isinstance(value, dict):
            raise InputError(f"epsilon_flags[{key}] must be an object")
        unknown = set(value) - EPSILON_FIELDS
        if unknown:
            raise InputError(f"unknown epsilon flag(s) {sorted(unknown)}")
        pair = value.get("twist_conductor_pair")
        result[int(key)] = EpsilonFlags(
            steinberg_norm_relation=value.get("steinberg_norm_relation"),
            twist_conductor=value.get("twist_conductor"),
            twist_conductor_pair=tuple(pair) if pair is not None else None,
        )
    return result


def _check_keys(name: str, data: Any, allowed: set):
    if not isinstance(data, dict):
        raise InputError(f"{name} must be an object")
    unknown = set(data) - allowed
    if unknown:
        raise InputError(f"unknown field(s) in {name}: {sorted(unknown)}")


@dataclass
class AnalyzeRequest:
    N: Dict[int, int]
    disc: int
    c: int = 1
    mode: Mode = Mode.ELLIPTIC
    sigma: Optional[List[int]] = None
    sigma_overrides: Dict[int, bool] = field(default_factory=dict)
    reps: Dict[int, LocalRepType] = field(default_factory=dict)
    primitive: bool = True
    two_minimal: bool = True
    epsilon_flags: Dict[int, EpsilonFlags] = field(default_factory=dict)
    l_prime_nonzero: Optional[bool] = None
    no_cm: Optional[bool] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalyzeRequest":
        _check_keys("request", data, REQUEST_FIELDS)
        version = str(data.get("schema_version", config.SCHEMA_VERSION))
        if version != config.SCHEMA_VERSION:
            raise InputError(f"schema_version {version!r} is not supported (expected {config.SCHEMA_VERSION!r})")
        for required in ("N", "disc"):
            if required not in data:
                raise InputError(f"missing field {required!r}")
        N = parse_factored(data["N"])
        try:
            disc, c = int(data["disc"]), int(data.get("c", 1))
        except (TypeError, ValueError):
            raise InputError("disc and c must be integers")
        try:
            mode = Mode(data.get("mode", Mode.ELLIPTIC.value))
        except ValueError:
            raise InputError(f"mode must be one of {[m.value for m in Mode]}")

        reps = {}
        raw_reps = data.get("reps") or {}
        items = raw_reps.items() if isinstance(raw_reps, dict) else ((None, r) for r in raw_reps)
        for key, text in items:
            p, rep = parse_rep(text, int(key) if key is not None else None)
            if rep.kind is RepKind.PRINCIPAL_SERIES and p in N and rep.n != N[p]:
                rep = LocalRepType(p, RepKind.PRINCIPAL_SERIES, N[p])
            reps[p] = rep

        flags = data.get("flags") or {}
        _check_keys("flags", flags, FLAG_FIELDS)
        assertions = data.get("assertions") or {}
        _check_keys("assertions", assertions, ASSERTION_FIELDS)
        eps = data.get("epsilon_flags") or {}
        _check_keys("epsilon_flags", eps, {str(p) for p in N} | set(N))

        sigma = data.get("sigma")
        if sigma is not None:
            sigma = sorted({int(p) for p in sigma})
        overrides = {int(p): bool(v) for p, v in (data.get("sigma_overrides") or {}).items()}

        return cls(
            N=N,
            disc=disc,
            c=c,
            mode=mode,
            sigma=sigma,
            sigma_overrides=overrides,
            reps=reps,
            primitive=bool(flags.get("primitive", True)),
            two_minimal=bool(flags.get("two_minimal", True)),
            epsilon_flags=_parse_epsilon_flags(eps),
            l_prime_nonzero=assertions.get("l_prime_nonzero"),
            no_cm=assertions.get("no_cm"),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Canonical echo; explicit about every field so defaults cannot drift."""
        data = {
            "schema_version": config.SCHEMA_VERSION,
            "N": [[p, e] for p, e in sorted(self.N.items())],
            "disc": self.disc,
            "c": self.c,
            "mode": self.mode.value,
            "reps": [format_rep(r) for _, r in sorted(self.reps.items())],
            "flags": {"primitive": self.primitive, "two_minimal": self.two_minimal},
        }
        if self.sigma is not None:
            data["sigma"] = list(self.sigma)
        if self.sigma_overrides:
            data["sigma_overrides"] = {str(p): v for p, v in sorted(self.sigma_overrides.items())}
        if self.epsilon_flags:
            data["epsilon_flags"] = {str(p): f.to_dict() for p, f in sorted(self.epsilon_flags.items())}
        assertions = {k: v for k, v in (("l_prime_nonzero", self.l_prime_nonzero),
                                        ("no_cm", self.no_cm)) if v is not None}
        if assertions:
            data["assertions"] = assertions
        return data

    def quad_field(self) -> QuadOrder:
        return QuadOrder(self.disc)

    def curve_input(self) -> CurveInput:
        reps = {p: self.reps.get(p) or default_rep_type(p, e) for p, e in self.N.items()}
        return CurveInput(
            N=dict(self.N),
            reps=reps,
            primitive=self.primitive,
            two_minimal=self.two_minimal,
            mode=self.mode,
            epsilon_flags=dict(self.epsilon_flags),
            l_prime_nonzero=self.l_prime_nonzero,
            no_cm=self.no_cm,
        )

    def overrides(self) -> Dict[int, bool]:
        """A full Sigma list fixes membership at every prime of N; partial overrides win over it."""
        merged = {}
        if self.sigma is not None:
            merged = {p: p in self.sigma for p in self.N}
            for p in self.sigma:
                merged.setdefault(p, True)
        merged.update(self.sigma_overrides)
        return merged

    def run(self, verbose: bool = False) -> HeegnerReport:
        report = analyze(self.curve_input(), self.quad_field(), self.c, self.overrides(), verbose=verbose)
        report.request = self.to_dict()
        return report


def dumps(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=False)


def exit_code_for(report: HeegnerReport) -> int:
    return {
        "exists": config.EXIT_CODES["exists"],
        "none": config.EXIT_CODES["not_exists"],
        "undetermined": config.EXIT_CODES["undetermined"],
    }[report.status]
