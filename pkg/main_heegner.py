#!/usr/bin/env python3
"""
Heegner point existence engine - command line.

JSON goes to stdout, one object per command (one line per row in batch mode).
Progress and diagnostics go to stderr.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import config_heegner as config
from heegner_config import HeegnerConfig, create_sample_config
from heegner.embedtables import cartan_exists, division_exists, eichler_exists
from heegner.errors import HeegnerError, InputError
from heegner.padic_oracle import verify_nu2_counts, verify_table
from heegner.quadarith import LocalQuadExt, SplittingType
from heegner.schema import AnalyzeRequest, dumps, exit_code_for


def _emit(data: dict):
    print(dumps(data))


def _error(e: Exception) -> int:
    _emit({"error": str(e), "kind": type(e).__name__})
    print(f"[Main] {type(e).__name__}: {e}", file=sys.stderr)
    if isinstance(e, HeegnerError) and not isinstance(e, InputError):
        # budget exhaustion, scan failure, assumption violation: no verdict reached
        return config.EXIT_CODES["undetermined"]
    return config.EXIT_CODES["input_error"]


def _primes(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    try:
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise InputError(f"expected comma-separated primes, got {text!r}")


def _request_from_args(args) -> AnalyzeRequest:
    if args.request:
        try:
            with open(args.request, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise InputError(f"cannot read request {args.request}: {e}")
        return AnalyzeRequest.from_dict(data)
    if args.N is None or args.disc is None:
        raise InputError("analyze needs --request FILE or both --N and --disc")
    data = {
        "N": args.N,
        "disc": args.disc,
        "c": args.c,
        "mode": args.mode,
        "reps": list(args.rep or []),
        "flags": {"primitive": not args.not_primitive, "two_minimal": not args.not_two_minimal},
    }
    sigma = _primes(args.sigma)
    if sigma is not None:
        data["sigma"] = sigma
    assertions = {}
    if args.l_prime_nonzero:
        assertions["l_prime_nonzero"] = True
    if args.no_cm:
        assertions["no_cm"] = True
    if assertions:
        data["assertions"] = assertions
    return AnalyzeRequest.from_dict(data)


def _summary(report) -> str:
    if report.status == "exists":
        return (f"Heegner points of conductor {report.c_prime} exist on X_R, "
                f"R of type {report.order_type.label}, level {report.level}")
    if report.status == "none":
        return f"no Heegner points of conductor {report.c}: {'; '.join(report.diagnostics)}"
    return f"undetermined: {'; '.join(report.diagnostics)}"


def cmd_analyze(args, settings: HeegnerConfig) -> int:
    try:
        request = _request_from_args(args)
        report = request.run(verbose=settings.verbose)
    except HeegnerError as e:
        return _error(e)
    _emit(report.to_dict())
    print(f"[Main] {_summary(report)}", file=sys.stderr)
    return exit_code_for(report)


def _splitting(name: str, p: int):
    name = name.lower()
    try:
        return SplittingType(name)
    except ValueError:
        pass
    try:
        cls = LocalQuadExt(name)
    except ValueError:
        raise InputError(f"unknown class {name!r}")
    if not cls.valid_at(p):
        raise InputError(f"{cls.value} is not a class at {p}")
    return cls.splitting


def cmd_embed(args, settings: HeegnerConfig) -> int:
    try:
        if args.case == "eichler":
            if not args.K_class:
                raise InputError("--K-class is required for the Eichler case")
            verdict = eichler_exists(args.m, args.n, _splitting(args.K_class, args.p))
        elif args.case == "cartan":
            verdict = cartan_exists(args.m, args.n)
        else:
            if not args.K_class or not args.L_class:
                raise InputError("--K-class and --L-class are required for the division case")
            verdict = division_exists(args.p, args.m, args.n,
                                      LocalQuadExt(args.K_class), LocalQuadExt(args.L_class))
    except ValueError as e:
        return _error(e if isinstance(e, InputError) else InputError(str(e)))
    _emit({"schema_version": config.SCHEMA_VERSION, "case": args.case, "p": args.p,
           "m": args.m, "n": args.n, **verdict.to_dict()})
    return 0 if verdict.exists else 1


def cmd_oracle_verify(args, settings: HeegnerConfig) -> int:
    try:
        report = verify_table(
            args.p, args.case, args.max_m, args.max_n,
            precision_slack=args.precision if args.precision is not None else settings.precision_slack,
            budget=settings.oracle_budget,
            workers=settings.max_workers,
            verbose=settings.verbose,
        )
    except HeegnerError as e:
        return _error(e)
    _emit(report.to_dict())
    if report.mismatches:
        return config.EXIT_CODES["not_exists"]
    if report.skipped:
        print(f"[Main] {len(report.skipped)} cells exhausted the search budget", file=sys.stderr)
        return config.EXIT_CODES["undetermined"]
    return 0


def cmd_count_verify(args, settings: HeegnerConfig) -> int:
    try:
        cells = verify_nu2_counts(args.p, budget=settings.oracle_budget,
                                  count_budget=settings.count_budget, verbose=settings.verbose)
    except HeegnerError as e:
        return _error(e)
    ok = all(c.match for c in cells)
    _emit({"schema_version": config.SCHEMA_VERSION, "p": args.p,
           "cells": [c.to_dict() for c in cells], "all_match": ok})
    if any(c.match is False for c in cells):
        return config.EXIT_CODES["not_exists"]
    return 0 if ok else config.EXIT_CODES["undetermined"]


def _row_request(row: dict, args) -> AnalyzeRequest:
    extra = [v for k, v in row.items()
             if k not in config.BATCH["required_columns"] and isinstance(v, str) and v]
    reps = []
    for cell in extra:
        reps.extend(t.strip() for t in cell.split(config.BATCH["rep_separator"]) if t.strip())
    data = {"N": row["N"], "disc": args.disc, "c": args.c, "mode": args.mode, "reps": reps}
    sigma = _primes(args.sigma)
    if sigma is not None:
        data["sigma"] = sigma
    return AnalyzeRequest.from_dict(data)


def cmd_batch(args, settings: HeegnerConfig) -> int:
    try:
        with open(args.table, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            missing = [c for c in config.BATCH["required_columns"] if c not in (reader.fieldnames or [])]
            if missing:
                raise InputError(f"CSV header lacks column(s) {missing}")
            rows = list(reader)
    except OSError as e:
        return _error(InputError(f"cannot read {args.table}: {e}"))
    except InputError as e:
        return _error(e)

    malformed = 0
    jobs = []
    for index, row in enumerate(rows, start=2):
        label = row.get("label") or f"row{index}"
        try:
            jobs.append((label, _row_request(row, args)))
        except InputError as e:
            malformed += 1
            print(f"[Batch] skipping line {index} ({label}): {e}", file=sys.stderr)

    def run(job):
        label, request = job
        try:
            return {"label": label, "report": request.run(verbose=settings.verbose).to_dict()}
        except HeegnerError as e:
            return {"label": label, "error": str(e), "kind": type(e).__name__}

    with ThreadPoolExecutor(max_workers=settings.max_workers) as executor:
        for line in executor.map(run, jobs):
            _emit(line)
    print(f"[Batch] {len(jobs)} rows analysed, {malformed} malformed", file=sys.stderr)
    return 0 if malformed == 0 else config.EXIT_CODES["input_error"]


def cmd_sample_config(args, settings: HeegnerConfig) -> int:
    create_sample_config(args.path, env_dir=args.env_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main_heegner.py",
        description="Heegner points on Shimura curves of HPS orders",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main_heegner.py analyze --N 99 --disc -4 --c 3 --sigma 3,11
  python main_heegner.py analyze --request request.json
  python main_heegner.py embed --case division --p 5 --m 1 --n 3 --K-class unram --L-class unram
  python main_heegner.py oracle-verify --p 3 --case eichler --max-m 2 --max-n 3
  python main_heegner.py count-verify --p 3
  python main_heegner.py batch --table curves.csv --disc -4 --c 3

Exit codes:
  0  Heegner points exist (analyze), verdict true (embed), all cells match (verify)
  1  input error
  2  no Heegner points at this conductor, or an oracle mismatch
  3  undetermined: a local sign needs a Sigma override, a search ran out of
     budget, or the analysis stopped on an internal error
"""
    )
    parser.add_argument("--config", type=str, help="Path to JSON config file")
    parser.add_argument("--verbose", action="store_true", help="Progress on stderr")
    parser.add_argument("--oracle-budget", type=int, help="Lifting-tree node budget per search")
    parser.add_argument("--workers", type=int, help="Worker threads for batch rows and oracle cells")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Decide existence of Heegner points")
    analyze.add_argument("--request", type=str, help="JSON request file")
    analyze.add_argument("--N", type=str, help="Conductor of E")
    analyze.add_argument("--disc", type=int, help="Fundamental discriminant of K")
    analyze.add_argument("--c", type=int, default=1, help="Conductor of the ring class character")
    analyze.add_argument("--sigma", type=str, help="Finite part of Sigma, comma-separated")
    analyze.add_argument("--rep", action="append", help="Representation override p:kind:params")
    analyze.add_argument("--mode", choices=("elliptic", "abelian"), default="elliptic")
    analyze.add_argument("--not-primitive", action="store_true", help="The newform is not primitive")
    analyze.add_argument("--not-two-minimal", action="store_true",
                         help="The Artin conductor at 2 is not minimal among twists")
    analyze.add_argument("--l-prime-nonzero", action="store_true", help="Assert L'(E/K, chi, 1) != 0")
    analyze.add_argument("--no-cm", action="store_true", help="Assert E acquires no CM over H_c'")
    analyze.set_defaults(func=cmd_analyze)

    embed = sub.add_parser("embed", help="Local optimal-embedding verdict")
    embed.add_argument("--case", choices=("eichler", "cartan", "division"), required=True)
    embed.add_argument("--p", type=int, required=True)
    embed.add_argument("--m", type=int, required=True)
    embed.add_argument("--n", type=int, required=True)
    embed.add_argument("--K-class", dest="K_class", type=str)
    embed.add_argument("--L-class", dest="L_class", type=str)
    embed.set_defaults(func=cmd_embed)

    verify = sub.add_parser("oracle-verify", help="Brute-force check of an embedding table")
    verify.add_argument("--p", type=int, required=True)
    verify.add_argument("--case", choices=("eichler", "cartan", "division"), required=True)
    verify.add_argument("--max-m", type=int, default=2)
    verify.add_argument("--max-n", type=int, default=3)
    verify.add_argument("--precision", type=int, help="Extra digits on top of n + 2m + 2")
    verify.set_defaults(func=cmd_oracle_verify)

    counts = sub.add_parser("count-verify", help="Brute-force check of the level p^2 division counts")
    counts.add_argument("--p", type=int, default=3)
    counts.set_defaults(func=cmd_count_verify)

    batch = sub.add_parser("batch", help="Analyse every row of a curve table")
    batch.add_argument("--table", type=str, required=True, help="CSV with label, N[, reps]")
    batch.add_argument("--disc", type=int, required=True)
    batch.add_argument("--c", type=int, default=1)
    batch.add_argument("--sigma", type=str, help="Finite part of Sigma applied to every row")
    batch.add_argument("--mode", choices=("elliptic", "abelian"), default="elliptic")
    batch.set_defaults(func=cmd_batch)

    sample = sub.add_parser("sample-config", help="Write sample .env and JSON config files")
    sample.add_argument("--path", type=str, help="JSON config destination")
    sample.add_argument("--env-dir", type=str, help="Directory for the .env file")
    sample.set_defaults(func=cmd_sample_config)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = HeegnerConfig.load(
        cli_budget=args.oracle_budget,
        cli_workers=args.workers,
        cli_verbose=args.verbose,
        config_path=args.config,
    )
    try:
        return args.func(args, settings)
    except HeegnerError as e:
        return _error(e)


if __name__ == "__main__":
    sys.exit(main())
