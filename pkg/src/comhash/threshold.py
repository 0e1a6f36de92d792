"""k-of-n threshold variant of the hashing session.

Two secrets (s0, t0) are dealt with Shamir sharing over the exponent field.
Each chosen participant contributes ``g^(f(x_i)*l_i) * h^(g(x_i)*l_i)`` where
l_i is its recombination coefficient, so the combined digest collapses to
``g^(m + s0) * h^(t0)`` for every k-subset.

The server never learns the secret evaluation points x_i: polynomial values
reach participants through a pluggable evaluator that works on opaque
encrypted blobs, and the recombination coefficients are computed from
pairwise quotients x_{i+1}/x_i obtained with a blinded two-party
multiplication.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .encoding import (
    element_to_bytes,
    scalar_byte_length,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .errors import EncodingError, ProtocolStateError
from .frames import Frame, MsgType, SERVER_ID, SESSION_ID_LENGTH
from .groups import GroupParams, ModpMode, ModpParams, scalar_inv
from .hashing import ParticipantKeys, member_share, owner_share
from .protocol import Phase, ServerSession
from . import pke


# ---------------------------------------------------------------------------
# polynomials and recombination coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Coefficients c0..c_{k-1} over GF(modulus); c0 is the shared secret."""

    coefficients: tuple
    modulus: int

    @classmethod
    def random(cls, secret: int, degree: int, modulus: int,
               rng: random.Random) -> "Polynomial":
        coeffs = (secret % modulus,) + tuple(rng.randrange(modulus)
                                             for _ in range(degree))
        return cls(coeffs, modulus)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):  # Horner
            acc = (acc * x + c) % self.modulus
        return acc


def poly_eval(poly: Polynomial, x: int) -> int:
    return poly(x)


def lagrange_at_zero(points: Sequence[int], modulus: int) -> list[int]:
    """Coefficients l_i with sum(f(x_i) * l_i) = f(0) for deg(f) < len(points)."""
    if not points:
        raise ValueError("need at least one point")
    if any(x % modulus == 0 for x in points):
        raise ValueError("zero evaluation point would reveal the secret")
    if len({x % modulus for x in points}) != len(points):
        raise ValueError("duplicate evaluation points")
    coeffs = []
    for i, xi in enumerate(points):
        num, den = 1, 1
        for j, xj in enumerate(points):
            if j != i:
                num = num * xj % modulus
                den = den * (xj - xi) % modulus
        coeffs.append(num * scalar_inv(den, modulus) % modulus)
    return coeffs


@dataclass(frozen=True)
class QuotientTable:
    """Server-held ratios x_{i+1}/x_i for consecutive participants 1..n-1.

    These let the server form any x_j/x_i, and from those the recombination
    coefficients, without ever seeing an x value.
    """

    quotients: dict  # i -> x_{i+1}/x_i
    modulus: int

    def __post_init__(self):
        if any(v % self.modulus == 0 for v in self.quotients.values()):
            raise ValueError("zero quotient")

    def to_bytes(self) -> bytes:
        width = (self.modulus.bit_length() + 7) // 8
        out = struct.pack("!I", len(self.quotients))
        for i in sorted(self.quotients):
            out += struct.pack("!H", i) + self.quotients[i].to_bytes(width, "big")
        return out

    @classmethod
    def from_bytes(cls, data: bytes, modulus: int) -> "QuotientTable":
        width = (modulus.bit_length() + 7) // 8
        if len(data) < 4:
            raise EncodingError("truncated quotient table")
        (count,) = struct.unpack("!I", data[:4])
        if len(data) != 4 + count * (2 + width):
            raise EncodingError("quotient table length mismatch")
        quotients = {}
        pos = 4
        for _ in range(count):
            (i,) = struct.unpack("!H", data[pos:pos + 2])
            value = int.from_bytes(data[pos + 2:pos + 2 + width], "big")
            if value >= modulus:
                raise EncodingError("quotient exceeds modulus")
            quotients[i] = value
            pos += 2 + width
        return cls(quotients, modulus)


def ratio_from_quotients(table: QuotientTable, i: int, j: int) -> int:
    """x_j / x_i from the stored consecutive quotients."""
    if i == j:
        return 1
    if i > j:
        return scalar_inv(ratio_from_quotients(table, j, i), table.modulus)
    acc = 1
    for k in range(i, j):
        if k not in table.quotients:
            raise KeyError(f"quotient {k + 1}/{k} not in table")
        acc = acc * table.quotients[k] % table.modulus
    return acc


def lagrange_from_quotients(table: QuotientTable, subset: Sequence[int],
                            i: int) -> int:
    """l_i for the given subset, computed only from pairwise ratios.

    Each factor x_j/(x_j - x_i) equals (1 - x_i/x_j)^-1, and x_i/x_j comes
    from chaining stored quotients; no raw x value is touched.
    """
    if i not in subset:
        raise ValueError("index not in subset")
    mod = table.modulus
    acc = 1
    for j in subset:
        if j == i:
            continue
        ratio = ratio_from_quotients(table, j, i)  # x_i / x_j
        base = (1 - ratio) % mod
        if base == 0:
            raise ValueError("duplicate evaluation points (x_i = x_j)")
        acc = acc * scalar_inv(base, mod) % mod
    return acc


# ---------------------------------------------------------------------------
# blinded two-party multiplication
# ---------------------------------------------------------------------------

class MultiplyRole(Enum):
    P1 = "p1"
    P2 = "p2"
    SERVER = "server"


# which global step (1..6) each role acts on
_ROLE_STEPS = {MultiplyRole.P1: (1, 4), MultiplyRole.P2: (2, 5),
               MultiplyRole.SERVER: (3, 6)}

MULTIPLY_FRAME_SEQUENCE = (
    MsgType.MUL_BLINDED_X, MsgType.MUL_BLINDED_XY, MsgType.MUL_TRIPLE_BLIND,
    MsgType.MUL_PEEL_ONE, MsgType.MUL_PEEL_TWO, MsgType.MUL_PRODUCT,
)


@dataclass
class MultiplySession:
    """One party's half of Multiply(x, y); the server ends up with x*y and
    every value in flight is masked by a factor its receiver does not know."""

    role: MultiplyRole
    modulus: int
    blinding: int
    value: Optional[int] = None  # x for P1, y for P2
    steps_taken: int = 0

    def __post_init__(self):
        if self.blinding % self.modulus == 0:
            raise ValueError("blinding factor must be nonzero")
        if self.role is not MultiplyRole.SERVER:
            if self.value is None or self.value % self.modulus == 0:
                raise ValueError("party input must be a nonzero scalar")


def multiply_step(session: MultiplySession, incoming: Optional[int]) -> int:
    """Advance one step; returns the value this party sends (or, on the
    server's last step, the recovered product x*y)."""
    if session.steps_taken >= 2:
        raise ProtocolStateError("multiplication already finished for this party")
    step = _ROLE_STEPS[session.role][session.steps_taken]
    mod = session.modulus
    if step == 1:
        if incoming is not None:
            raise ProtocolStateError("first step takes no incoming value")
        out = session.blinding * session.value % mod
    else:
        if incoming is None or incoming % mod == 0:
            raise ValueError("incoming scalar must be nonzero")
        if step == 2:
            out = incoming * session.blinding % mod * session.value % mod
        elif step == 3:
            out = incoming * session.blinding % mod
        else:  # steps 4-6 peel this party's own blinding back off
            out = incoming * scalar_inv(session.blinding, mod) % mod
    session.steps_taken += 1
    return out


def run_multiply(x: int, y: int, modulus: int, rng: random.Random,
                 session_id: Optional[bytes] = None,
                 party_ids: tuple = (1, 2)) -> tuple:
    """Drive a full multiplication; returns (product, transcript frames)."""
    def blind():
        b = 0
        while b == 0:
            b = rng.randrange(modulus)
        return b

    p1 = MultiplySession(MultiplyRole.P1, modulus, blind(), x)
    p2 = MultiplySession(MultiplyRole.P2, modulus, blind(), y)
    server = MultiplySession(MultiplyRole.SERVER, modulus, blind())
    sid = session_id if session_id is not None else rng.randbytes(SESSION_ID_LENGTH)
    width = (modulus.bit_length() + 7) // 8

    order = [p1, p2, server, p1, p2, server]
    senders = [party_ids[0], party_ids[1], SERVER_ID,
               party_ids[0], party_ids[1], SERVER_ID]
    value: Optional[int] = None
    frames = []
    for machine, msg_type, sender in zip(order, MULTIPLY_FRAME_SEQUENCE, senders):
        value = multiply_step(machine, value)
        frames.append(Frame(msg_type, sid, sender, value.to_bytes(width, "big")))
    return value, frames


# ---------------------------------------------------------------------------
# homomorphic delivery of polynomial values
# ---------------------------------------------------------------------------

class SealedPolynomialEvaluator:
    """Stand-in for a homomorphic scheme: inputs are genuine public-key
    ciphertexts under the participant's own key, so the server-side
    ``apply_poly`` cannot read them; it attaches the polynomial to the sealed
    blob and the participant finishes the evaluation after decrypting.

    Every data flow matches a real homomorphic evaluator: the server role
    only ever handles ciphertext-shaped bytes.
    """

    def __init__(self, params: GroupParams, max_degree: int = 64):
        self.params = params
        self.max_degree = max_degree

    def encrypt_input(self, public, x: int, rng=None) -> bytes:
        ct = pke.encrypt(self.params, public, scalar_to_bytes(self.params, x), rng)
        return pke.ciphertext_to_bytes(self.params, ct)

    def apply_poly(self, blob: bytes, poly: Polynomial) -> bytes:
        if poly.degree > self.max_degree:
            raise ValueError(f"degree {poly.degree} exceeds evaluator limit "
                             f"{self.max_degree}")
        width = scalar_byte_length(self.params)
        sealed = struct.pack("!H", len(poly.coefficients)) + b"".join(
            c.to_bytes(width, "big") for c in poly.coefficients)
        return struct.pack("!I", len(blob)) + blob + sealed

    def decrypt_output(self, secret: int, blob: bytes) -> int:
        (ct_len,) = struct.unpack("!I", blob[:4])
        ct = pke.ciphertext_from_bytes(self.params, blob[4:4 + ct_len])
        x = scalar_from_bytes(self.params, pke.decrypt(self.params, secret, ct))
        rest = blob[4 + ct_len:]
        (count,) = struct.unpack("!H", rest[:2])
        width = scalar_byte_length(self.params)
        coeffs = tuple(int.from_bytes(rest[2 + i * width:2 + (i + 1) * width], "big")
                       for i in range(count))
        return Polynomial(coeffs, self.params.exponent_modulus)(x)


def homomorphic_eval(evaluator: SealedPolynomialEvaluator, blob: bytes,
                     poly: Polynomial) -> bytes:
    """Server-side application of a polynomial to an encrypted input."""
    return evaluator.apply_poly(blob, poly)


# ---------------------------------------------------------------------------
# threshold session
# ---------------------------------------------------------------------------

def _require_prime_order(params: GroupParams) -> None:
    if isinstance(params, ModpParams) and params.mode is ModpMode.PRIMITIVE:
        # order-2q generators make exponent sums sign-ambiguous, which breaks
        # the recombination identity; only prime-order settings are sound
        raise ValueError("threshold sessions require subgroup-mode modp or ec parameters")


def distinct_nonzero_scalars(modulus: int, count: int, rng: random.Random) -> list[int]:
    """Pairwise-distinct nonzero scalars; rejection keeps it exact even when
    the modulus is tiny."""
    if count >= modulus:
        raise ValueError("not enough nonzero field elements")
    out: list[int] = []
    seen = set()
    while len(out) < count:
        v = rng.randrange(1, modulus)
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


class ThresholdServer(ServerSession):
    """Dealer plus collector: holds the two polynomials and the quotient
    table, issues nonces and coefficients to a chosen subset, and verifies
    receipts exactly like the basic server."""

    def __init__(self, params: GroupParams, n: int, k: int, s0: int, t0: int,
                 keypair: pke.KeyPair, rng: random.Random,
                 evaluator: Optional[SealedPolynomialEvaluator] = None):
        _require_prime_order(params)
        if not 1 < k <= n:
            raise ValueError("threshold k must satisfy 1 < k <= n")
        mod = params.exponent_modulus
        self.k = k
        self.share_poly = Polynomial.random(s0, k - 1, mod, rng)
        self.mask_poly = Polynomial.random(t0, k - 1, mod, rng)
        self.quotient_table = QuotientTable({}, mod)
        self.subset: Optional[tuple] = None
        self.evaluator = evaluator if evaluator is not None \
            else SealedPolynomialEvaluator(params, max_degree=max(64, k))
        self._rng = rng
        super().__init__(params, n, keypair, rng)

    def eval_frame(self, input_frame: Frame) -> Frame:
        """Answer a THRESH_INPUT with both sealed polynomial evaluations."""
        if input_frame.msg_type is not MsgType.THRESH_INPUT:
            raise ProtocolStateError("expected a THRESH_INPUT frame")
        blobs = [homomorphic_eval(self.evaluator, input_frame.payload, poly)
                 for poly in (self.share_poly, self.mask_poly)]
        payload = b"".join(struct.pack("!I", len(b)) + b for b in blobs)
        return Frame(MsgType.THRESH_EVAL, self.session_id, SERVER_ID, payload)

    def record_quotient(self, index: int, value: int) -> None:
        if value % self.params.exponent_modulus == 0:
            raise ValueError("zero quotient")
        self.quotient_table.quotients[index] = value

    def begin_round(self, subset: Optional[Sequence[int]] = None) -> list[tuple]:
        """Pick (or accept) the k-subset; returns [(participant, frame), ...]
        pairing each chosen participant with its nonce and coefficient."""
        if subset is None:
            subset = self._rng.sample(range(1, self.n + 1), self.k)
        subset = tuple(sorted(subset))
        if len(subset) != self.k or len(set(subset)) != self.k:
            raise ValueError(f"subset must contain exactly k={self.k} distinct members")
        if not all(1 <= i <= self.n for i in subset):
            raise ValueError("subset member out of range")
        self.subset = subset
        # keep only the chosen participants' nonces live for this round
        self.nonces = {i: self.nonces[i] for i in subset}
        out = []
        width = scalar_byte_length(self.params)
        for i in subset:
            coeff = lagrange_from_quotients(self.quotient_table, subset, i)
            out.append((i, Frame(MsgType.THRESH_NONCE, self.session_id,
                                 SERVER_ID, self.nonces[i])))
            out.append((i, Frame(MsgType.THRESH_COEFF, self.session_id,
                                 SERVER_ID, coeff.to_bytes(width, "big"))))
        return out

    def absorb(self, frame: Frame) -> None:
        if frame.msg_type is MsgType.THRESH_SHARE:
            frame = Frame(MsgType.SHARE, frame.session_id, frame.sender,
                          frame.payload)
        super().absorb(frame)

    @property
    def complete(self) -> bool:
        return self.subset is not None and set(self.shares) == set(self.subset)

    def result_frame(self) -> Frame:
        frame = super().result_frame()
        return Frame(MsgType.THRESH_RESULT, frame.session_id, frame.sender,
                     frame.payload)


class ThresholdParticipant:
    """Holds the secret evaluation point x and, once served, the two
    polynomial values; contributes coefficient-scaled shares on demand."""

    def __init__(self, params: GroupParams, index: int, x: int,
                 server_public, rng: Optional[random.Random] = None):
        _require_prime_order(params)
        if x % params.exponent_modulus == 0:
            raise ValueError("evaluation point must be nonzero")
        self.params = params
        self.index = index
        self.x = x
        self.server_public = server_public
        self.rng = rng if rng is not None else random.SystemRandom()
        self.keypair = pke.generate_keypair(params, self.rng)
        self.share_value: Optional[int] = None
        self.mask_value: Optional[int] = None
        self.session_id: Optional[bytes] = None

    def input_frame(self, evaluator: SealedPolynomialEvaluator,
                    session_id: bytes) -> Frame:
        self.session_id = session_id
        blob = evaluator.encrypt_input(self.keypair.public, self.x, self.rng)
        return Frame(MsgType.THRESH_INPUT, session_id, self.index, blob)

    def receive_eval(self, frame: Frame, evaluator: SealedPolynomialEvaluator) -> None:
        if frame.msg_type is not MsgType.THRESH_EVAL:
            raise ProtocolStateError("expected a THRESH_EVAL frame")
        payload, values = frame.payload, []
        for _ in range(2):
            (blen,) = struct.unpack("!I", payload[:4])
            values.append(self.evaluator_decrypt(evaluator, payload[4:4 + blen]))
            payload = payload[4 + blen:]
        self.share_value, self.mask_value = values

    def evaluator_decrypt(self, evaluator: SealedPolynomialEvaluator,
                          blob: bytes) -> int:
        return evaluator.decrypt_output(self.keypair.secret, blob)

    def respond(self, nonce_frame: Frame, coeff_frame: Frame,
                m: Optional[int] = None) -> Frame:
        if self.share_value is None:
            raise ProtocolStateError("polynomial values not received yet")
        if nonce_frame.session_id != self.session_id:
            raise ProtocolStateError("nonce belongs to a different session")
        mod = self.params.exponent_modulus
        coeff = scalar_from_bytes(self.params, coeff_frame.payload)
        keys = ParticipantKeys(self.share_value * coeff % mod,
                               self.mask_value * coeff % mod)
        if m is None:
            element = member_share(self.params, keys)
        else:
            element = owner_share(self.params, keys, m)
        receipt = pke.encrypt(self.params, self.server_public,
                              nonce_frame.payload, self.rng)
        payload = (element_to_bytes(self.params, element)
                   + pke.ciphertext_to_bytes(self.params, receipt))
        return Frame(MsgType.THRESH_SHARE, self.session_id, self.index, payload)


@dataclass
class ThresholdRun:
    digest: object
    server: ThresholdServer
    participants: list
    transcript: list = field(default_factory=list)


def run_threshold_session(params: GroupParams, s0: int, t0: int, k: int, n: int,
                          m: int, rng: random.Random,
                          subset: Optional[Sequence[int]] = None,
                          owner: Optional[int] = None,
                          evaluator: Optional[SealedPolynomialEvaluator] = None
                          ) -> ThresholdRun:
    """Drive a full k-of-n round in process and return the stored digest.

    The digest equals g^(m + s0) * h^(t0) no matter which k-subset serves the
    request. The message owner must sit in the subset; by default the lowest
    chosen index plays that role.
    """
    _require_prime_order(params)
    mod = params.exponent_modulus
    server_keypair = pke.generate_keypair(params, rng)
    server = ThresholdServer(params, n, k, s0, t0, server_keypair, rng, evaluator)
    transcript: list[Frame] = []

    # participants draw distinct nonzero evaluation points
    xs = distinct_nonzero_scalars(mod, n, rng)
    participants = [ThresholdParticipant(params, i + 1, xs[i],
                                         server_keypair.public, rng)
                    for i in range(n)]

    # sealed polynomial delivery
    for part in participants:
        inp = part.input_frame(server.evaluator, server.session_id)
        transcript.append(inp)
        reply = server.eval_frame(inp)
        transcript.append(reply)
        part.receive_eval(reply, server.evaluator)

    # consecutive pairs hand the server their quotient via blinded multiplication
    for i in range(n - 1):
        left, right = participants[i], participants[i + 1]
        product, frames = run_multiply(scalar_inv(left.x, mod), right.x, mod,
                                       rng, session_id=server.session_id,
                                       party_ids=(left.index, right.index))
        transcript.extend(frames)
        server.record_quotient(left.index, product)

    # request round for the chosen subset
    issued = server.begin_round(subset)
    transcript.extend(frame for _, frame in issued)
    chosen = server.subset
    owner_index = min(chosen) if owner is None else owner
    if owner_index not in chosen:
        raise ValueError("message owner must belong to the chosen subset")
    by_index = {part.index: part for part in participants}
    frames_for = {}
    for index, frame in issued:
        frames_for.setdefault(index, []).append(frame)
    for index in chosen:
        nonce_frame, coeff_frame = frames_for[index]
        part = by_index[index]
        share = part.respond(nonce_frame, coeff_frame,
                             m if index == owner_index else None)
        transcript.append(share)
        server.absorb(share)
        if server.phase is Phase.FAILED:
            raise ProtocolStateError(
                f"threshold session failed: {server.error_code.name}")
    digest = server.finalize()
    transcript.append(server.result_frame())
    return ThresholdRun(digest=digest, server=server,
                        participants=participants, transcript=transcript)
