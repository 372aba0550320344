"""Exact construction, search and certification of arithmetic progressions
in homogeneous self-similar sets."""
from .bounds import (
    Certificate,
    LengthBounds,
    ap_length_bounds,
    lambda_nm,
    no_ap_test,
    overlap_ap,
    renormalize_ap,
    upper_bound_alpha,
    upper_bound_power,
)
from .construct import APWitness, VerificationReport, build_ap, reflect, verify_witness
from .core import (
    Coding,
    GeneralSystem,
    Interval,
    SystemParams,
    cylinder,
    format_scalar,
    is_ap,
    make_system,
    parse_scalar,
    value,
)
from .errors import (
    APError,
    BudgetError,
    DomainError,
    InfeasibleError,
    NormalizationError,
    ParseError,
)
from .expansion import (
    KBeta,
    MembershipResult,
    SignedExpansion,
    claim_feasible,
    k_beta,
    member,
    signed_expand,
)
from .search import CylinderTuple, ap_feasible, certified_search, endpoint_llap

__version__ = "0.1.0"
