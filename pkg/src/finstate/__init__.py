"""Finite-dimensional quantum systems with decoherence, their channels, and
the Segal-entropy functor on the category of states and channels."""

from .algebra import (
    PureState,
    State,
    System,
    classical_state_from_probs,
    direct_sum_states,
    direct_sum_systems,
    embed_state_full,
    is_pure,
    make_classical_system,
    spectral_decompose,
    state_as_prob_vector,
    trace_distance,
)
from .channels import (
    Channel,
    CPTPReport,
    PurityVerdict,
    apply,
    channel_distance,
    compose,
    direct_sum_channels,
    embedding_channel,
    from_stochastic_matrix,
    identity_channel,
    is_pure_to_pure,
    isometric_channel,
    measurement_channel,
    trace_channel,
    validate_cptp,
    verify_left_inverse,
)
from .entropy import segal, shannon, von_neumann
from .errors import (
    DomainMismatch,
    FinStateError,
    InvalidArgument,
    InvalidChannel,
    InvalidState,
    PreconditionViolated,
)
from .functor import (
    CheckReport,
    EntropyFunctor,
    Morphism,
    check_bfl_restriction,
    check_continuity,
    check_convex_linearity,
    check_functoriality,
    check_positivity,
    compose_morphisms,
    evaluate,
    factorize_state,
    identity_morphism,
    s_of,
    trace_morphism,
)

__version__ = "0.1.0"

__all__ = [
    "PureState",
    "State",
    "System",
    "classical_state_from_probs",
    "direct_sum_states",
    "direct_sum_systems",
    "embed_state_full",
    "is_pure",
    "make_classical_system",
    "spectral_decompose",
    "state_as_prob_vector",
    "trace_distance",
    "Channel",
    "CPTPReport",
    "PurityVerdict",
    "apply",
    "channel_distance",
    "compose",
    "direct_sum_channels",
    "embedding_channel",
    "from_stochastic_matrix",
    "identity_channel",
    "is_pure_to_pure",
    "isometric_channel",
    "measurement_channel",
    "trace_channel",
    "validate_cptp",
    "verify_left_inverse",
    "segal",
    "shannon",
    "von_neumann",
    "DomainMismatch",
    "FinStateError",
    "InvalidArgument",
    "InvalidChannel",
    "InvalidState",
    "PreconditionViolated",
    "CheckReport",
    "EntropyFunctor",
    "Morphism",
    "check_bfl_restriction",
    "check_continuity",
    "check_convex_linearity",
    "check_functoriality",
    "check_positivity",
    "compose_morphisms",
    "evaluate",
    "factorize_state",
    "identity_morphism",
    "s_of",
    "trace_morphism",
    "__version__",
]
