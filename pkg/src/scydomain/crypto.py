"""Signatures, canonical hashing and the commit-reveal envelope."""

import dataclasses
import hashlib
import json
import struct
from collections.abc import Mapping
from enum import Enum
from fractions import Fraction
from typing import Any

import jsoncanon
from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    PublicFormat,
)

from scydomain import exceptions
from scydomain.types_ import AccountId

__all__ = [
    "DIGEST_SIZE",
    "KEY_SIZE",
    "NONCE_SIZE",
    "DigestStream",
    "KeyPair",
    "SealedEnvelope",
    "SignalPayload",
    "account_id_of",
    "canonical_bytes",
    "canonical_digest",
    "derive_bytes",
    "digest",
    "hex_bytes",
    "keygen",
    "open_envelope",
    "seal",
    "to_canonical",
    "verify",
]

DIGEST_SIZE = 32
KEY_SIZE = 32
NONCE_SIZE = 12
_LENGTH = struct.Struct(">I")


def digest(data: bytes) -> bytes:
    """SHA-256 of raw bytes."""
    return hashlib.sha256(data).digest()


def to_canonical(value: Any) -> Any:
    """Convert a protocol value into plain JSON-compatible data.

    Bytes become ``0x``-prefixed hex, rationals ``[num, den]`` pairs, enums
    their values and dataclasses a field map (fields whose metadata sets
    ``canonical=False`` are left out). Maps keyed by anything but strings
    become pair lists sorted by the canonical bytes of their keys, so equal
    values always serialize identically.

    Args:
        value (Any): The value to convert.

    Returns:
        Any: Nested dicts, lists, strings, ints, bools and None.

    Raises:
        CanonicalFormError: If the value is a float or an unsupported type.
    """
    if value is None or isinstance(value, bool | str):
        return value
    if isinstance(value, Enum):
        return to_canonical(value.value)
    if isinstance(value, int):
        return value
    if isinstance(value, bytes | bytearray):
        return "0x" + bytes(value).hex()
    if isinstance(value, Fraction):
        return [value.numerator, value.denominator]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_canonical(getattr(value, f.name))
            for f in dataclasses.fields(value)
            if f.metadata.get("canonical", True)
        }
    if isinstance(value, Mapping):
        if all(isinstance(k, str) and not isinstance(k, Enum) for k in value):
            return {k: to_canonical(v) for k, v in value.items()}
        pairs = [[to_canonical(k), to_canonical(v)] for k, v in value.items()]
        pairs.sort(key=lambda pair: jsoncanon.canonicalize(pair[0]))
        return pairs
    if isinstance(value, list | tuple):
        return [to_canonical(v) for v in value]
    if isinstance(value, set | frozenset):
        items = [to_canonical(v) for v in value]
        items.sort(key=jsoncanon.canonicalize)
        return items
    raise exceptions.CanonicalFormError(value)


def canonical_bytes(value: Any) -> bytes:
    """Canonical UTF-8 JSON encoding of a protocol value."""
    return jsoncanon.canonicalize(to_canonical(value))


def canonical_digest(value: Any) -> bytes:
    """32-byte digest of a value's canonical encoding."""
    return digest(canonical_bytes(value))


def derive_bytes(size: int, *parts: Any) -> bytes:
    """Deterministically derive ``size`` bytes from canonical parts."""
    seed = canonical_digest(list(parts))
    out = b""
    counter = 0
    while len(out) < size:
        out += digest(seed + counter.to_bytes(8, "big"))
        counter += 1
    return out[:size]


def account_id_of(verify_key: bytes) -> AccountId:
    """Account id derived from a raw verification key."""
    return digest(verify_key)


@dataclasses.dataclass(frozen=True)
class KeyPair:
    """An Ed25519 signing key and its raw verification key."""

    signing_key: Ed25519PrivateKey = dataclasses.field(repr=False)
    verify_key: bytes

    @property
    def account(self) -> AccountId:
        """The account id this key pair controls."""
        return account_id_of(self.verify_key)

    def sign(self, message: bytes) -> bytes:
        """Sign a message with the private half of the pair."""
        return self.signing_key.sign(message)


def keygen(seed: bytes) -> KeyPair:
    """Derive a key pair from a 32-byte seed.

    Args:
        seed (bytes): 32 bytes of seed material.

    Returns:
        KeyPair: The same pair for the same seed, every time.

    Raises:
        ValueError: If the seed is not 32 bytes long.
    """
    if len(seed) != KEY_SIZE:
        raise ValueError(f"Key seed must be {KEY_SIZE} bytes, got {len(seed)}")
    signing_key = Ed25519PrivateKey.from_private_bytes(seed)
    verify_key = signing_key.public_key().public_bytes(
        Encoding.Raw, PublicFormat.Raw
    )
    return KeyPair(signing_key=signing_key, verify_key=verify_key)


def verify(signature: bytes, message: bytes, verify_key: bytes) -> bool:
    """Check an Ed25519 signature against a raw verification key."""
    try:
        Ed25519PublicKey.from_public_bytes(verify_key).verify(
            signature, message
        )
    except (InvalidSignature, ValueError):
        return False
    return True


@dataclasses.dataclass(frozen=True)
class SealedEnvelope:
    """AES-256-GCM ciphertext with the digest of its plaintext.

    The commit hash is bound into the ciphertext as associated data, so a
    wrong key and a lying commitment are told apart when opening.
    """

    nonce: bytes
    ciphertext: bytes
    commit_hash: bytes

    def to_wire(self) -> bytes:
        """Length-prefixed ``nonce ‖ ciphertext ‖ commit_hash``."""
        return b"".join(
            _LENGTH.pack(len(part)) + part
            for part in (self.nonce, self.ciphertext, self.commit_hash)
        )

    @classmethod
    def from_wire(cls, data: bytes) -> "SealedEnvelope":
        """Decode the length-prefixed wire form.

        Raises:
            WireFormatError: If the data is truncated or has trailing bytes.
        """
        parts: list[bytes] = []
        offset = 0
        for _ in range(3):
            if offset + _LENGTH.size > len(data):
                raise exceptions.WireFormatError("envelope", "truncated")
            (length,) = _LENGTH.unpack_from(data, offset)
            offset += _LENGTH.size
            if offset + length > len(data):
                raise exceptions.WireFormatError("envelope", "truncated")
            parts.append(data[offset : offset + length])
            offset += length
        if offset != len(data):
            raise exceptions.WireFormatError("envelope", "trailing bytes")
        return cls(nonce=parts[0], ciphertext=parts[1], commit_hash=parts[2])


def seal(
    payload: bytes,
    symmetric_key: bytes,
    nonce: bytes,
    *,
    commit_hash: bytes | None = None,
) -> SealedEnvelope:
    """Encrypt a payload and commit to its digest.

    Args:
        payload (bytes): The plaintext.
        symmetric_key (bytes): A 32-byte AES-256 key.
        nonce (bytes): A 12-byte nonce, never reused with the same key.
        commit_hash (bytes | None, optional): Commitment to bind instead of
            the payload digest. Only misbehaving senders pass one.
            Defaults to None.

    Returns:
        SealedEnvelope: The sealed payload.
    """
    commitment = digest(payload) if commit_hash is None else commit_hash
    ciphertext = AESGCM(symmetric_key).encrypt(nonce, payload, commitment)
    return SealedEnvelope(
        nonce=nonce, ciphertext=ciphertext, commit_hash=commitment
    )


def open_envelope(envelope: SealedEnvelope, symmetric_key: bytes) -> bytes:
    """Decrypt an envelope and check the payload against its commitment.

    Args:
        envelope (SealedEnvelope): The sealed payload.
        symmetric_key (bytes): The revealed key.

    Returns:
        bytes: The payload. Nothing is returned on failure.

    Raises:
        DecryptFailed: If the key is wrong or the envelope was tampered with.
        CommitMismatch: If the key is right but the commitment lies.
    """
    if len(symmetric_key) != KEY_SIZE:
        raise exceptions.DecryptFailed("key must be 32 bytes")
    try:
        payload = AESGCM(symmetric_key).decrypt(
            envelope.nonce, envelope.ciphertext, envelope.commit_hash
        )
    except (InvalidTag, ValueError) as e:
        raise exceptions.DecryptFailed() from e
    actual = digest(payload)
    if actual != envelope.commit_hash:
        raise exceptions.CommitMismatch(envelope.commit_hash, actual)
    return payload


@dataclasses.dataclass(frozen=True)
class SignalPayload:
    """An agent signal packed with its author's verification key."""

    signal: bytes
    author_key: bytes

    def to_bytes(self) -> bytes:
        """Canonical encoding sealed inside a signal envelope."""
        return canonical_bytes(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignalPayload":
        """Decode a payload produced by ``to_bytes``.

        Raises:
            WireFormatError: If the bytes are not a signal payload.
        """
        try:
            raw = json.loads(data)
            return cls(
                signal=hex_bytes(raw["signal"]),
                author_key=hex_bytes(raw["author_key"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise exceptions.WireFormatError("signal payload", str(e)) from e


def hex_bytes(value: Any) -> bytes:
    """Inverse of the canonical bytes encoding.

    Raises:
        ValueError: If the value is not a ``0x``-prefixed hex string.
    """
    if not isinstance(value, str) or not value.startswith("0x"):
        raise ValueError(f"Expected 0x-prefixed hex, got {value!r}")
    return bytes.fromhex(value[2:])


class DigestStream:
    """Counter-mode expansion of a seed into uniform integers.

    Every draw hashes ``seed ‖ counter``; nothing depends on a platform
    PRNG, so two implementations fed the same seed draw the same values.
    """

    def __init__(self, seed: bytes) -> None:
        """Initialize the stream.

        Args:
            seed (bytes): Seed material, usually a 32-byte digest.
        """
        self.seed = seed
        self._counter = 0

    def _next_word(self) -> int:
        block = digest(self.seed + self._counter.to_bytes(8, "big"))
        self._counter += 1
        return int.from_bytes(block[:8], "big")

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` without modulo bias.

        Raises:
            ValueError: If bound is not positive.
        """
        if bound <= 0:
            raise ValueError(f"Bound must be positive, got {bound}")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            word = self._next_word()
            if word < limit:
                return word % bound

    def chance(self, probability: Fraction) -> bool:
        """True with exactly the given rational probability."""
        if probability <= 0:
            return False
        if probability >= 1:
            return True
        return (
            self.below(probability.denominator) < probability.numerator
        )

    def shuffle(self, items: list[Any]) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
