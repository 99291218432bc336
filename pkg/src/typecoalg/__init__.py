"""Finite, exact-rational type structures with conditioning events."""
from .coalg import (Coalgebra, InvalidStructure, check_coalgebra_morphism, compose, functor_on_morphism,
                    identity_morphism, is_isomorphism, profile_map)
from .games import (AllowingSet, CoalitionSpace, ExtensiveGame, GameError, InclusiveStructure, Substructure,
                    UnreachableInformationSet, allowing_set, belief_closed_substructure,
                    check_coalition_beliefs, coalition_space, conditioning_family, dirac_corrected_belief,
                    game_events, game_space, harsanyi_check, lift_inclusive, play_out, strategies,
                    validate_game, xi_atoms)
from .hierarchy import (Description, HierarchyPartition, class_ids, hierarchy_level, is_non_redundant,
                        joint_stabilization_depth, refine_to_fixed_point, truncate_description)
from .measure import (CPS, ConditionalSpace, IncompatibleMap, MeasureError, NotPiSystem, ProbabilityMeasure,
                      ProductSpace, StructureMismatch, ValidationReport, Verdict, ZeroConditioningEvent,
                      agree_on_pi_system, check_compatible, cps_from_prior, gamma_event,
                      generated_sigma_algebra, is_cps, lift_space, marginal, pushforward_cps, validate_cps)
from .universal import (FragmentDepthError, FragmentError, UniversalFragment, UnmaterializedHierarchy,
                        build_fragment, check_uniqueness, fragment_transition_checks, quotient, terminal_map)

__all__ = [
    "AllowingSet",
    "CPS",
    "Coalgebra",
    "CoalitionSpace",
    "ConditionalSpace",
    "Description",
    "ExtensiveGame",
    "FragmentDepthError",
    "FragmentError",
    "GameError",
    "HierarchyPartition",
    "InclusiveStructure",
    "IncompatibleMap",
    "InvalidStructure",
    "MeasureError",
    "NotPiSystem",
    "ProbabilityMeasure",
    "ProductSpace",
    "StructureMismatch",
    "Substructure",
    "UniversalFragment",
    "UnmaterializedHierarchy",
    "UnreachableInformationSet",
    "ValidationReport",
    "Verdict",
    "ZeroConditioningEvent",
    "agree_on_pi_system",
    "allowing_set",
    "belief_closed_substructure",
    "build_fragment",
    "check_coalgebra_morphism",
    "check_coalition_beliefs",
    "check_compatible",
    "check_uniqueness",
    "class_ids",
    "coalition_space",
    "compose",
    "conditioning_family",
    "cps_from_prior",
    "dirac_corrected_belief",
    "fragment_transition_checks",
    "functor_on_morphism",
    "game_events",
    "game_space",
    "gamma_event",
    "generated_sigma_algebra",
    "harsanyi_check",
    "hierarchy_level",
    "identity_morphism",
    "is_cps",
    "is_isomorphism",
    "is_non_redundant",
    "joint_stabilization_depth",
    "lift_inclusive",
    "lift_space",
    "marginal",
    "play_out",
    "profile_map",
    "pushforward_cps",
    "quotient",
    "refine_to_fixed_point",
    "strategies",
    "terminal_map",
    "truncate_description",
    "validate_cps",
    "validate_game",
    "xi_atoms",
]

__version__ = "0.1.0"
