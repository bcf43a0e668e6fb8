"""Content-addressed blob store with GDPR erasure tombstones.

Directory layout: ``<root>/<hex[0:2]>/<hex[2:4]>/<hex>`` holds the raw blob,
``<hex>.tombstone`` alongside it records an erasure. The address of a blob is
the SHA-256 of its bytes, so every read is self-verifying.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import canonical, crypto
from .errors import (
    AlreadyErased,
    BlobErased,
    BlobNotFound,
    BlobTooLarge,
    IntegrityViolation,
)

DEFAULT_MAX_BLOB = 1 << 20  # 1 MiB


@dataclass(frozen=True)
class Tombstone:
    address: bytes
    erased_at: int
    reason: str
    admin_signature: bytes

    def signing_doc(self) -> dict:
        return {
            "address": self.address.hex(),
            "erased_at": self.erased_at,
            "reason": self.reason,
        }

    def to_doc(self) -> dict:
        doc = self.signing_doc()
        doc["admin_signature"] = self.admin_signature.hex()
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "Tombstone":
        return cls(
            address=bytes.fromhex(doc["address"]),
            erased_at=doc["erased_at"],
            reason=doc["reason"],
            admin_signature=bytes.fromhex(doc["admin_signature"]),
        )

    def verify(self, admin_public_key: bytes) -> bool:
        return crypto.verify(
            admin_public_key, canonical.encode(self.signing_doc()), self.admin_signature
        )


class CasStore:
    def __init__(self, root: str | os.PathLike, max_blob_size: int = DEFAULT_MAX_BLOB):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.max_blob_size = max_blob_size

    def _blob_path(self, address: bytes) -> Path:
        hx = address.hex()
        return self.root / hx[:2] / hx[2:4] / hx

    def _tombstone_path(self, address: bytes) -> Path:
        return self._blob_path(address).with_name(address.hex() + ".tombstone")

    def put(self, blob: bytes) -> bytes:
        """Store ``blob`` and return its address. Idempotent."""
        if not blob:
            raise ValueError("blob must be non-empty")
        if len(blob) > self.max_blob_size:
            raise BlobTooLarge(f"blob of {len(blob)} bytes exceeds {self.max_blob_size}")
        address = crypto.sha256(blob)
        path = self._blob_path(address)
        if path.exists():
            return address
        path.parent.mkdir(parents=True, exist_ok=True)
        # write-to-temp + atomic rename keeps concurrent puts of the same
        # bytes race-free
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".put-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return address

    def get(self, address: bytes) -> bytes:
        """Return the blob at ``address``, re-verifying its hash on every read."""
        ts_path = self._tombstone_path(address)
        if ts_path.exists():
            raise BlobErased(Tombstone.from_doc(canonical.decode(ts_path.read_bytes())))
        path = self._blob_path(address)
        if not path.exists():
            raise BlobNotFound(address.hex())
        blob = path.read_bytes()
        if crypto.sha256(blob) != address:
            raise IntegrityViolation(f"stored bytes at {address.hex()} fail re-hash")
        return blob

    def exists(self, address: bytes) -> bool:
        return self._blob_path(address).exists() or self._tombstone_path(address).exists()

    def erase(self, address: bytes, reason: str, admin_key: crypto.KeyPair,
              erased_at: int = 0) -> Tombstone:
        """Irrecoverably remove the blob and record a signed tombstone."""
        if self._tombstone_path(address).exists():
            raise AlreadyErased(address.hex())
        path = self._blob_path(address)
        if not path.exists():
            raise BlobNotFound(address.hex())
        stub = Tombstone(address=address, erased_at=erased_at, reason=reason,
                         admin_signature=b"")
        signature = crypto.sign(admin_key.private_seed, canonical.encode(stub.signing_doc()))
        tombstone = Tombstone(address=address, erased_at=erased_at, reason=reason,
                              admin_signature=signature)
        ts_path = self._tombstone_path(address)
        ts_path.write_bytes(canonical.encode(tombstone.to_doc()))
        path.unlink()
        return tombstone

    def tombstone(self, address: bytes) -> Tombstone | None:
        ts_path = self._tombstone_path(address)
        if not ts_path.exists():
            return None
        return Tombstone.from_doc(canonical.decode(ts_path.read_bytes()))
