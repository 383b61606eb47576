"""Heegner points on Shimura curves attached to quaternion orders of HPS type."""

from heegner.embedtables import OrderType, heegner_count
from heegner.engine import CurveInput, HeegnerReport, Mode, analyze
from heegner.errors import (
    AssumptionViolation,
    HeegnerError,
    InputError,
    OracleBudgetError,
    PrecisionError,
    SigmaError,
    TwistCaseError,
)
from heegner.quadarith import LocalQuadExt, QuadOrder, SplittingType
from heegner.schema import AnalyzeRequest

__all__ = [
    "AnalyzeRequest",
    "AssumptionViolation",
    "CurveInput",
    "HeegnerError",
    "HeegnerReport",
    "InputError",
    "LocalQuadExt",
    "Mode",
    "OracleBudgetError",
    "OrderType",
    "PrecisionError",
    "QuadOrder",
    "SigmaError",
    "SplittingType",
    "TwistCaseError",
    "analyze",
    "heegner_count",
]
