"""Maximin-optimal randomized top-k selection from quality intervals."""

import json

from ._merit import (
    Instance,
    Interval,
    InvalidInput,
    MonotonicityViolation,
    PreconditionError,
    Selection,
    SolveReport,
    SolverFailure,
    check_budget_monotonicity,
    conference_instance,
    enforce,
    expost_violations,
    select,
    solve_ex_ante,
    systematic_sample,
    verify_audit_json,
    worst_case_utility,
)
from ._merit import audit_record_json as _audit_record_json


def instance(rows, k, epsilon=0.0):
    """Build an Instance from (id, lower, upper[, estimate]) tuples."""
    return Instance([Interval(*row) for row in rows], k, epsilon)


def audit_record(p, seed, selection):
    return json.loads(_audit_record_json(p, seed, selection))


def verify_audit(record):
    return verify_audit_json(json.dumps(record, sort_keys=True))


__all__ = [
    "Instance",
    "Interval",
    "InvalidInput",
    "MonotonicityViolation",
    "PreconditionError",
    "Selection",
    "SolveReport",
    "SolverFailure",
    "audit_record",
    "check_budget_monotonicity",
    "conference_instance",
    "enforce",
    "expost_violations",
    "instance",
    "select",
    "solve_ex_ante",
    "systematic_sample",
    "verify_audit",
    "worst_case_utility",
]
