"""Multiparty commutative hashing over discrete-log groups.

A set of participants and a coordinating server jointly compute
``g^(m + sum x_i) * h^(sum y_i)`` for a message m held by one of them; the
result is invariant under every reordering of the participants, so two
parties holding the same message always land on the same digest. Backends:
safe-prime multiplicative groups and prime-order elliptic curves.
"""

from .encoding import (
    element_from_bytes,
    element_to_bytes,
    params_digest,
    params_from_bytes,
    params_to_bytes,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .errors import (
    AuthenticationError,
    BenchError,
    ComhashError,
    EncodingError,
    FrameError,
    GroupError,
    ProtocolStateError,
    TransportError,
)
from .frames import ErrorCode, Frame, MsgType, decode_frame, encode_frame
from .groups import (
    EcParams,
    GroupParams,
    ModpMode,
    ModpParams,
    derive_second_generator,
    generate_group,
    modp_group,
    secp256k1,
    toy_ec,
    toy_modp_primitive,
    toy_modp_subgroup,
    validate_group,
)
from .hashing import (
    ParticipantKeys,
    collision_to_dlog,
    combine_shares,
    cvhp,
    member_share,
    owner_share,
    reference_digest,
)
from .net import FaultPlan, run_basic_session
from .protocol import (
    OwnerRole,
    ParticipantSession,
    Phase,
    ServerSession,
    participant_respond,
    server_absorb,
    server_begin,
    server_finalize,
)
from .threshold import (
    MultiplyRole,
    MultiplySession,
    Polynomial,
    QuotientTable,
    SealedPolynomialEvaluator,
    ThresholdParticipant,
    ThresholdServer,
    lagrange_at_zero,
    lagrange_from_quotients,
    multiply_step,
    poly_eval,
    ratio_from_quotients,
    run_multiply,
    run_threshold_session,
)

__version__ = "0.1.0"
