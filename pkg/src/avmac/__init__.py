"""Finite AV-MAC modeling and zero-error partial-correction code tools."""

__version__ = "0.1.0"

from .channel import (
    ChannelSpec,
    make_adder_channel,
    output_of,
    parse_channel,
    serialize_channel,
    transition_prob,
    validate,
)
from .codebooks import (
    AdderDecoder,
    CodebookTuple,
    PartialCorrectionReport,
    build_clean_outputs,
    canonical_decode,
    check_antichain,
    check_attack_agreement,
    check_attack_collision,
    check_clean_collision,
    check_union_structure,
    parse_codebooks,
    scan_attack_agreement_fast,
    serialize_codebooks,
    sperner_bound,
    verify_zero_error,
)
from .extension import (
    ErasurePattern,
    ExtensionPlan,
    achieved_rates,
    build_plan,
    concat_decode,
    concat_encode,
    erasure_budget,
    min_distance,
    verify_extension,
    worst_case_erasures,
)
from .feasibility import (
    InteriorReport,
    StateConditionalWitness,
    find_overwriter,
    find_symmetrizer,
    interior_necessary_conditions,
    symmetrizable_orders,
    verify_witness,
)
from .search import SearchSpec, enumerate_antichain_codebooks, search

__all__ = [
    "AdderDecoder",
    "ChannelSpec",
    "CodebookTuple",
    "ErasurePattern",
    "ExtensionPlan",
    "InteriorReport",
    "PartialCorrectionReport",
    "SearchSpec",
    "StateConditionalWitness",
    "achieved_rates",
    "build_clean_outputs",
    "build_plan",
    "canonical_decode",
    "check_antichain",
    "check_attack_agreement",
    "check_attack_collision",
    "check_clean_collision",
    "check_union_structure",
    "concat_decode",
    "concat_encode",
    "enumerate_antichain_codebooks",
    "erasure_budget",
    "find_overwriter",
    "find_symmetrizer",
    "interior_necessary_conditions",
    "make_adder_channel",
    "min_distance",
    "output_of",
    "parse_channel",
    "parse_codebooks",
    "scan_attack_agreement_fast",
    "search",
    "serialize_channel",
    "serialize_codebooks",
    "sperner_bound",
    "symmetrizable_orders",
    "transition_prob",
    "validate",
    "verify_extension",
    "verify_witness",
    "verify_zero_error",
    "worst_case_erasures",
]
