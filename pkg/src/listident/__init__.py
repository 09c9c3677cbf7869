"""k-list language identification in the limit: simulation engine.

Languages are subsets of the integers; ``langs`` holds the language,
collection, enumeration and distribution types the other modules share.
"""
__version__ = "0.1.0"

from .errors import (ConditionNotSatisfied, ConditionSatisfied, DepthTooLarge,  # noqa: E402
                     IndexOutOfRange, InsufficientPositivePoints, InsufficientStream,
                     InvariantViolation, ListIdentError, NoDescendant,
                     NonTrivialityUnwitnessed, ParseError, ResidueNonEmpty, UndecidableFamily)
from .langs import (FULL, CanonicalCollection, CanonicalEnumeration, Cofinite,  # noqa: E402
                    EnumerationGeometric, ExplicitCollection, Finite, HalfMassPoint,
                    ListEnumeration, BlockShuffledEnumeration, SeenSet, canonical_enumeration,
                    first_index, language_at, make_rng, member, proper_subset, sample,
                    spiral_position, spiral_value, truncate_canonical)
from .angluin import (AllEmpty, BruteForcePsi, assign_telltales, check_k_angluin,  # noqa: E402
                      find_unfoolable_root, psi_bruteforce, psi_canonical)
from .identify import (ListIdentifier, LazyIndexSet, converged_at, feasible_min_index,  # noqa: E402
                       list_identify, run_identifier, stabilized_istars, stratified_identifier,
                       topk_multiset)
from .adversary import adv_enum, find_descendant, limit_language  # noqa: E402
from .stratify import peel_relation, stratify, verify_stratum_identifiable  # noqa: E402
from .derand import (CoinMixture, DecoySplitter, Derandomizable, build_tree,  # noqa: E402
                     derandomize, extract_bits, level_fraction_identifying,
                     prob_converged_at_node, reduce_enumeration_to_distribution)
from .rates import (BoostedIdentifier, RateExperiment, boosted_identify,  # noqa: E402
                    fit_exponential, lower_bound_experiment, run_rate_experiment)
