"""Exception taxonomy shared across the package."""


class ComhashError(Exception):
    """Base class for all comhash errors."""


class GroupError(ComhashError):
    """Invalid group parameters, elements, or arithmetic inputs."""


class EncodingError(ComhashError):
    """Malformed or non-canonical byte encodings."""


class AuthenticationError(ComhashError):
    """Ciphertext failed its integrity check."""


class FrameError(ComhashError):
    """Wire frame does not parse."""


class ProtocolStateError(ComhashError):
    """Operation not valid in the session's current phase."""


class TransportError(ComhashError):
    """Socket link handshake or record failure."""


class BenchError(ComhashError):
    """A benchmark run could not complete."""
