"""State machines for the n-party hashing session.

Flow: the owner asks for an upload, the server hands every participant a
fresh 32-byte nonce, each participant returns its share next to the nonce
encrypted under the server's public key, and the server keeps the combined
digest only if every receipt checks out. Any mismatch parks the session in a
terminal failed state with a specific error code; a failed session never
stores a digest.
"""

from __future__ import annotations

import hmac
import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .encoding import element_to_bytes, split_element
from .errors import AuthenticationError, EncodingError, ProtocolStateError
from .frames import (
    ErrorCode,
    Frame,
    MsgType,
    NONCE_LENGTH,
    SERVER_ID,
    SESSION_ID_LENGTH,
)
from .groups import GroupParams
from .hashing import ParticipantKeys, combine_shares, member_share, owner_share
from . import pke


class Phase(Enum):
    ISSUED = "issued"
    COLLECTING = "collecting"
    DONE = "done"
    FAILED = "failed"


@dataclass(frozen=True)
class OwnerRole:
    """Marks a session as the data owner's, carrying the message to mix in."""

    m: int
    blinding: Optional[int] = None
    second_message: Optional[int] = None


class ServerSession:
    """Server side of one run; mutated by a single logical thread."""

    def __init__(self, params: GroupParams, n: int, keypair: pke.KeyPair,
                 rng: random.Random):
        if n < 1:
            raise ValueError("need at least one participant")
        self.params = params
        self.n = n
        self.keypair = keypair
        self.session_id = rng.randbytes(SESSION_ID_LENGTH)
        self.nonces: dict[int, bytes] = {}
        seen = set()
        for index in range(1, n + 1):
            nonce = rng.randbytes(NONCE_LENGTH)
            while nonce in seen:  # distinct per participant
                nonce = rng.randbytes(NONCE_LENGTH)
            seen.add(nonce)
            self.nonces[index] = nonce
        self.shares: dict[int, object] = {}
        self.phase = Phase.ISSUED
        self.error_code: Optional[ErrorCode] = None
        self.digest = None

    # -- state transitions ---------------------------------------------

    def fail(self, code: ErrorCode) -> None:
        if self.phase is Phase.DONE:
            raise ProtocolStateError("session already finalized")
        self.phase = Phase.FAILED
        self.error_code = code
        self.shares.clear()

    def absorb(self, frame: Frame) -> None:
        """Process one SHARE frame; on any defect the session fails with a
        code identifying the defect."""
        if self.phase not in (Phase.ISSUED, Phase.COLLECTING):
            raise ProtocolStateError(f"cannot absorb in phase {self.phase.value}")
        if frame.msg_type is not MsgType.SHARE or frame.session_id != self.session_id:
            return self.fail(ErrorCode.MALFORMED)
        index = frame.sender
        if index not in self.nonces:
            return self.fail(ErrorCode.MALFORMED)
        if index in self.shares:
            return self.fail(ErrorCode.DUPLICATE)
        try:
            element, rest = split_element(self.params, frame.payload)
            ct = pke.ciphertext_from_bytes(self.params, rest)
        except (EncodingError, IndexError):
            return self.fail(ErrorCode.MALFORMED)
        try:
            echoed = pke.decrypt(self.params, self.keypair.secret, ct)
        except AuthenticationError:
            return self.fail(ErrorCode.DECRYPT_FAIL)
        if not hmac.compare_digest(echoed, self.nonces[index]):
            return self.fail(ErrorCode.NONCE_MISMATCH)
        self.shares[index] = element
        self.phase = Phase.COLLECTING

    @property
    def complete(self) -> bool:
        return len(self.shares) == self.n

    def finalize(self):
        if self.phase is Phase.FAILED:
            raise ProtocolStateError("session already failed")
        if self.phase is Phase.DONE:
            return self.digest
        if not self.complete:
            raise ProtocolStateError("shares missing")
        digest = combine_shares(self.params, [self.shares[i] for i in sorted(self.shares)])
        self.digest = digest
        self.shares.clear()  # only the digest is retained
        self.phase = Phase.DONE
        return digest

    # -- outbound frames -------------------------------------------------

    def nonce_frames(self) -> list[Frame]:
        """One NONCE frame per participant, in index order."""
        return [Frame(MsgType.NONCE, self.session_id, SERVER_ID, self.nonces[i])
                for i in range(1, self.n + 1)]

    def result_frame(self) -> Frame:
        if self.phase is not Phase.DONE:
            raise ProtocolStateError("no digest to publish")
        return Frame(MsgType.RESULT, self.session_id, SERVER_ID,
                     element_to_bytes(self.params, self.digest))

    def error_frame(self) -> Frame:
        if self.phase is not Phase.FAILED:
            raise ProtocolStateError("session has not failed")
        return Frame(MsgType.ERROR, self.session_id, SERVER_ID,
                     bytes([self.error_code]))


class ParticipantSession:
    """One participant's view of a run: respond to the nonce with a share."""

    def __init__(self, params: GroupParams, index: int, keys: ParticipantKeys,
                 server_public, owner: Optional[OwnerRole] = None,
                 rng: Optional[random.Random] = None,
                 session_id: Optional[bytes] = None):
        if index < 1:
            raise ValueError("participant indices are 1-based")
        self.params = params
        self.index = index
        self.keys = keys
        self.server_public = server_public
        self.owner = owner
        self.rng = rng if rng is not None else random.SystemRandom()
        self.session_id = session_id  # adopted from the first nonce if unset

    def respond(self, frame: Frame) -> Frame:
        if frame.msg_type is not MsgType.NONCE:
            raise ProtocolStateError("expected a NONCE frame")
        if self.session_id is None:
            self.session_id = frame.session_id
        elif frame.session_id != self.session_id:
            raise ProtocolStateError("nonce belongs to a different session")
        if self.owner is not None:
            element = owner_share(self.params, self.keys, self.owner.m,
                                  blinding=self.owner.blinding,
                                  m2=self.owner.second_message)
        else:
            element = member_share(self.params, self.keys)
        receipt = pke.encrypt(self.params, self.server_public, frame.payload,
                              self.rng)
        payload = (element_to_bytes(self.params, element)
                   + pke.ciphertext_to_bytes(self.params, receipt))
        return Frame(MsgType.SHARE, self.session_id, self.index, payload)

    def upload_request(self) -> Frame:
        """The opening frame; the real session id is assigned by the server."""
        return Frame(MsgType.UPLOAD_REQUEST, bytes(SESSION_ID_LENGTH), self.index)


# -- module-level views matching the operation names ------------------------

def server_begin(params: GroupParams, n: int, server_keypair: pke.KeyPair,
                 rng: random.Random):
    """Open a session: returns it plus the NONCE frames for participants 1..n."""
    session = ServerSession(params, n, server_keypair, rng)
    return session, session.nonce_frames()


def participant_respond(session: ParticipantSession, frame: Frame) -> Frame:
    return session.respond(frame)


def server_absorb(session: ServerSession, frame: Frame) -> ServerSession:
    session.absorb(frame)
    return session


def server_finalize(session: ServerSession):
    return session.finalize()
