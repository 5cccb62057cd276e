"""Least-commitment assembly plans and opportunistic execution-time scheduling.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    BatchSummary,
    MetricSummary,
    OppschedError,
    Plan,
    Policy,
    TrialStats,
    count_completions,
    count_completions_bruteforce,
    export_summary,
    is_admissible,
    parse_plan,
    parse_script,
    ready_set,
    replay_scripted,
    run_batch,
    run_trial,
    transitive_reduction,
    uninstalled_ancestor_count,
    validate_plan_text,
)

__all__ = [
    "BatchSummary",
    "MetricSummary",
    "OppschedError",
    "Plan",
    "Policy",
    "TrialStats",
    "count_completions",
    "count_completions_bruteforce",
    "export_summary",
    "is_admissible",
    "parse_plan",
    "parse_script",
    "ready_set",
    "replay_scripted",
    "run_batch",
    "run_trial",
    "transitive_reduction",
    "uninstalled_ancestor_count",
    "validate_plan_text",
]
