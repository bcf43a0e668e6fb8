"""Hashing and Ed25519 signatures.

Digests, public keys and signatures travel as raw bytes internally and as
lowercase hex in every file format and API payload.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature as _InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ed25519

from .errors import InvalidKeyMaterial, InvalidSeed

DIGEST_LEN = 32
KEY_LEN = 32
SIG_LEN = 64

ZERO_DIGEST = b"\x00" * DIGEST_LEN


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def to_hex(raw: bytes) -> str:
    return raw.hex()


def from_hex(text: str, expected_len: int | None = None) -> bytes:
    raw = bytes.fromhex(text)
    if expected_len is not None and len(raw) != expected_len:
        raise InvalidKeyMaterial(f"expected {expected_len} bytes, got {len(raw)}")
    return raw


@dataclass(frozen=True)
class KeyPair:
    """Ed25519 keypair. The seed never appears in any serialized artifact."""

    private_seed: bytes
    public_key: bytes

    def __repr__(self) -> str:  # never leak the seed in logs
        return f"KeyPair(public_key={self.public_key.hex()})"


def keygen(seed: bytes | None = None) -> KeyPair:
    """Derive an Ed25519 keypair, deterministically if a 32-byte seed is given."""
    if seed is None:
        seed = secrets.token_bytes(KEY_LEN)
    elif len(seed) != KEY_LEN:
        raise InvalidSeed(f"seed must be {KEY_LEN} bytes, got {len(seed)}")
    sk = ed25519.Ed25519PrivateKey.from_private_bytes(seed)
    return KeyPair(private_seed=seed, public_key=sk.public_key().public_bytes_raw())


def sign(private_seed: bytes, message: bytes) -> bytes:
    if len(private_seed) != KEY_LEN:
        raise InvalidKeyMaterial(f"private seed must be {KEY_LEN} bytes")
    sk = ed25519.Ed25519PrivateKey.from_private_bytes(private_seed)
    return sk.sign(message)


def verify(public_key: bytes, message: bytes, signature: bytes) -> bool:
    if len(public_key) != KEY_LEN:
        raise InvalidKeyMaterial(f"public key must be {KEY_LEN} bytes")
    if len(signature) != SIG_LEN:
        raise InvalidKeyMaterial(f"signature must be {SIG_LEN} bytes")
    try:
        pk = ed25519.Ed25519PublicKey.from_public_bytes(public_key)
        pk.verify(signature, message)
        return True
    except (_InvalidSignature, ValueError):
        return False
