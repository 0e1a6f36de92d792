"""Authenticated socket links carrying protocol frames.

A link opens with a handshake: both sides send the 32-byte digest of their
group parameters (mismatched parameter sets are rejected immediately), then
exchange fresh link public keys. Every frame afterwards travels as one
length-delimited record holding an authenticated ciphertext, so any
on-the-wire tampering is detected and surfaces as a transport error instead
of reaching the protocol layer.
"""

from __future__ import annotations

import random
import socket
import struct
from typing import Optional

from .encoding import element_byte_length, element_from_bytes, element_to_bytes, params_digest
from .errors import AuthenticationError, EncodingError, TransportError
from .groups import GroupParams
from . import pke

MAX_RECORD = 1 << 20


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportError("connection closed mid-record")
        buf += chunk
    return buf


class SecureChannel:
    """One end of an encrypted frame link over a connected stream socket."""

    def __init__(self, sock: socket.socket, params: GroupParams,
                 rng: Optional[random.Random] = None):
        self.sock = sock
        self.params = params
        self.rng = rng if rng is not None else random.SystemRandom()
        self.keypair = pke.generate_keypair(params, self.rng)
        self.peer_public = None

    def handshake(self) -> None:
        digest = params_digest(self.params)
        self.sock.sendall(digest)
        theirs = _read_exact(self.sock, len(digest))
        if theirs != digest:
            raise TransportError("peer uses a different parameter set")
        mine = element_to_bytes(self.params, self.keypair.public)
        self.sock.sendall(mine)
        raw = _read_exact(self.sock, element_byte_length(self.params))
        try:
            self.peer_public = element_from_bytes(self.params, raw)
        except EncodingError as exc:
            raise TransportError(f"bad link key from peer: {exc}") from exc

    def send_frame(self, frame_bytes: bytes) -> None:
        if self.peer_public is None:
            raise TransportError("handshake not complete")
        ct = pke.encrypt(self.params, self.peer_public, frame_bytes, self.rng)
        record = pke.ciphertext_to_bytes(self.params, ct)
        self.sock.sendall(struct.pack("!I", len(record)) + record)

    def recv_frame(self) -> bytes:
        if self.peer_public is None:
            raise TransportError("handshake not complete")
        (length,) = struct.unpack("!I", _read_exact(self.sock, 4))
        if length > MAX_RECORD:
            raise TransportError("record too large")
        record = _read_exact(self.sock, length)
        try:
            ct = pke.ciphertext_from_bytes(self.params, record)
            return pke.decrypt(self.params, self.keypair.secret, ct)
        except (EncodingError, AuthenticationError) as exc:
            raise TransportError(f"record rejected: {exc}") from exc

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def connect(host: str, port: int, params: GroupParams,
            rng: Optional[random.Random] = None) -> SecureChannel:
    sock = socket.create_connection((host, port))
    channel = SecureChannel(sock, params, rng)
    channel.handshake()
    return channel


def accept_one(listener: socket.socket, params: GroupParams,
               rng: Optional[random.Random] = None) -> SecureChannel:
    sock, _ = listener.accept()
    channel = SecureChannel(sock, params, rng)
    channel.handshake()
    return channel
