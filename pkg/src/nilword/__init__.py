"""Word maps on finite class-2 nilpotent groups."""

from .canonical import (
    Certificate,
    ChainForm,
    VForm,
    canonicalize,
    chain_form,
    disjoint_reduce,
    v_form,
    verify_certificate,
)
from .catalog import catalog_group
from .distribution import (
    bound_report,
    exact_distribution,
    kernel_lower_bound,
    same_distribution,
    sampled_distribution,
)
from .groups import Group, build_group, structure_report
from .words import Class2Form, Word, class2_normal_form, parse_word

__all__ = [
    "Certificate", "ChainForm", "VForm", "canonicalize", "chain_form", "disjoint_reduce",
    "v_form", "verify_certificate", "catalog_group", "bound_report", "exact_distribution",
    "kernel_lower_bound", "same_distribution", "sampled_distribution", "Group",
    "build_group", "structure_report", "Class2Form", "Word", "class2_normal_form",
    "parse_word",
]
