"""
Inequality checkers: proved statements, remainder conjectures, reduction
identities and fidelity lemmas, all reporting through InequalityReport.
"""

from .conjectures import check_bures_circle, check_conjectures, check_petz_pt_conjecture
from .instances import FAMILIES, INSTANCE_KIND, InstanceKind, instance_from_payload, sample_instance
from .lemmas import check_fr_lemmas
from .proved import (
    alt_bound_diagnostic,
    check_concavity,
    check_joint_convexity,
    check_mono_channel,
    check_mono_channel_rotated,
    check_mono_pt,
    check_mono_pt_rotated,
    check_ssa,
)
from .reductions import (
    check_reduction,
    cond_entropy_slope,
    fd_root_fidelity_slope,
    homogeneity_gap,
    interpolation_remainder,
    reduction_cq_identity,
    reduction_fidelity_blocks,
    reduction_ssa_substitution,
)
from .refinement import refine
from .report import (
    CONJECTURES,
    DIAGNOSTICS,
    PROVED,
    SCHEMA_VERSION,
    CounterexampleCandidate,
    InequalityId,
    InequalityReport,
    RemainderKind,
    Verdict,
    decide_verdict,
    is_proved,
    make_report,
    status_of,
)
from .suite import CHECKS, CheckSpec, resolve_checks, run_all_checks, run_check

__all__ = [
    "CHECKS",
    "CONJECTURES",
    "DIAGNOSTICS",
    "FAMILIES",
    "INSTANCE_KIND",
    "PROVED",
    "SCHEMA_VERSION",
    "CheckSpec",
    "CounterexampleCandidate",
    "InequalityId",
    "InequalityReport",
    "InstanceKind",
    "RemainderKind",
    "Verdict",
    "alt_bound_diagnostic",
    "check_bures_circle",
    "check_concavity",
    "check_conjectures",
    "check_fr_lemmas",
    "check_joint_convexity",
    "check_mono_channel",
    "check_mono_channel_rotated",
    "check_mono_pt",
    "check_mono_pt_rotated",
    "check_petz_pt_conjecture",
    "check_reduction",
    "check_ssa",
    "cond_entropy_slope",
    "decide_verdict",
    "fd_root_fidelity_slope",
    "homogeneity_gap",
    "instance_from_payload",
    "interpolation_remainder",
    "is_proved",
    "make_report",
    "reduction_cq_identity",
    "reduction_fidelity_blocks",
    "reduction_ssa_substitution",
    "refine",
    "resolve_checks",
    "run_all_checks",
    "run_check",
    "sample_instance",
    "status_of",
]
