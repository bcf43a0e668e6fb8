"""Simulated append-only, hash-chained ledger hosting the survey contracts.

One transaction per entry, synchronous validation, single serialized writer.
logical_time (== entry height) is the trusted ordering; wall_clock is
informational only.
"""

from __future__ import annotations

import struct
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import canonical, contract, crypto
from .errors import SnapshotCorrupt

SNAPSHOT_MAGIC = b"CODEWE-LEDGER-v1\n"


@dataclass(frozen=True)
class Transaction:
    kind: str
    contract_id: str
    body: dict
    sender_public_key: bytes
    sender_signature: bytes

    def signing_doc(self) -> dict:
        return {"kind": self.kind, "contract_id": self.contract_id, "body": self.body}

    def to_doc(self) -> dict:
        doc = self.signing_doc()
        doc["sender_public_key"] = self.sender_public_key.hex()
        doc["sender_signature"] = self.sender_signature.hex()
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "Transaction":
        return cls(
            kind=doc["kind"],
            contract_id=doc["contract_id"],
            body=doc["body"],
            sender_public_key=bytes.fromhex(doc["sender_public_key"]),
            sender_signature=bytes.fromhex(doc["sender_signature"]),
        )


def make_transaction(kind: str, contract_id: str, body: dict,
                     sender: crypto.KeyPair) -> Transaction:
    unsigned = Transaction(kind=kind, contract_id=contract_id, body=body,
                           sender_public_key=sender.public_key, sender_signature=b"")
    signature = crypto.sign(sender.private_seed, canonical.encode(unsigned.signing_doc()))
    return Transaction(kind=kind, contract_id=contract_id, body=body,
                       sender_public_key=sender.public_key, sender_signature=signature)


@dataclass(frozen=True)
class LedgerEntry:
    height: int
    prev_digest: bytes
    payload_digest: bytes
    logical_time: int
    wall_clock: int
    entry_digest: bytes

    def header_doc(self) -> dict:
        return {
            "height": self.height,
            "prev_digest": self.prev_digest.hex(),
            "payload_digest": self.payload_digest.hex(),
            "logical_time": self.logical_time,
            "wall_clock": self.wall_clock,
        }

    def to_doc(self) -> dict:
        doc = self.header_doc()
        doc["entry_digest"] = self.entry_digest.hex()
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "LedgerEntry":
        return cls(
            height=doc["height"],
            prev_digest=bytes.fromhex(doc["prev_digest"]),
            payload_digest=bytes.fromhex(doc["payload_digest"]),
            logical_time=doc["logical_time"],
            wall_clock=doc["wall_clock"],
            entry_digest=bytes.fromhex(doc["entry_digest"]),
        )


def entry_digest_of(header_doc: dict) -> bytes:
    return canonical.digest(header_doc)


@dataclass(frozen=True)
class TxReceipt:
    status: str  # "Accepted" | "Rejected"
    reason: str = ""
    height: int = -1
    entry_digest: bytes = b""

    @property
    def accepted(self) -> bool:
        return self.status == "Accepted"

    def to_doc(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "height": self.height,
            "entry_digest": self.entry_digest.hex(),
        }


class Ledger:
    """Append-only ledger; all writes funnel through a single lock."""

    def __init__(self, cas=None):
        self.cas = cas
        self.entries: list[LedgerEntry] = []
        self.transactions: list[Transaction] = []
        self.contracts: dict[str, contract.ContractState] = {}
        self._write_lock = threading.Lock()

    @property
    def height(self) -> int:
        return len(self.entries)

    def submit_tx(self, tx: Transaction, wall_clock: int | None = None) -> TxReceipt:
        with self._write_lock:
            if tx.kind not in contract.TX_KINDS:
                return TxReceipt("Rejected", reason=contract.R_MALFORMED)
            try:
                ok = crypto.verify(tx.sender_public_key,
                                   canonical.encode(tx.signing_doc()),
                                   tx.sender_signature)
            except Exception:
                ok = False
            if not ok:
                return TxReceipt("Rejected", reason=contract.R_INVALID_SIGNATURE)

            logical_time = len(self.entries)
            reason = contract.apply_transaction(self.contracts, tx, self.cas, logical_time)
            if reason is not None:
                return TxReceipt("Rejected", reason=reason)

            height = len(self.entries)
            prev = self.entries[-1].entry_digest if self.entries else crypto.ZERO_DIGEST
            header = {
                "height": height,
                "prev_digest": prev.hex(),
                "payload_digest": canonical.digest(tx.to_doc()).hex(),
                "logical_time": logical_time,
                "wall_clock": int(time.time()) if wall_clock is None else wall_clock,
            }
            entry = LedgerEntry(
                height=height,
                prev_digest=prev,
                payload_digest=bytes.fromhex(header["payload_digest"]),
                logical_time=logical_time,
                wall_clock=header["wall_clock"],
                entry_digest=entry_digest_of(header),
            )
            self.entries.append(entry)
            self.transactions.append(tx)
            return TxReceipt("Accepted", height=height, entry_digest=entry.entry_digest)

    def verify_chain(self) -> tuple[bool, int | None]:
        """True iff every entry recomputes and links; else first bad height."""
        prev = crypto.ZERO_DIGEST
        for i, (entry, tx) in enumerate(zip(self.entries, self.transactions)):
            if entry.height != i:
                return False, i
            if entry.prev_digest != prev:
                return False, i
            if entry.payload_digest != canonical.digest(tx.to_doc()):
                return False, i
            if entry.entry_digest != entry_digest_of(entry.header_doc()):
                return False, i
            if i > 0 and entry.logical_time <= self.entries[i - 1].logical_time:
                return False, i
            prev = entry.entry_digest
        return True, None

    def read_entries(self, contract_id: str | None = None,
                     kind: str | None = None) -> list[tuple[LedgerEntry, Transaction]]:
        out = []
        for entry, tx in zip(self.entries, self.transactions):
            if contract_id is not None and tx.contract_id != contract_id:
                continue
            if kind is not None and tx.kind != kind:
                continue
            out.append((entry, tx))
        return out

    def digest_sequence(self) -> tuple[bytes, ...]:
        return tuple(e.entry_digest for e in self.entries)

    # --- persistence ---

    def snapshot_to_file(self, path: str | Path) -> None:
        """Length-prefixed records (entry + tx per accepted transaction),
        terminated by a zero length and a 32-byte SHA-256 footer over
        everything preceding it.
        """
        with self._write_lock:
            chunks = [SNAPSHOT_MAGIC]
            for entry, tx in zip(self.entries, self.transactions):
                record = canonical.encode({"entry": entry.to_doc(), "tx": tx.to_doc()})
                chunks.append(struct.pack(">I", len(record)))
                chunks.append(record)
            chunks.append(struct.pack(">I", 0))
            body = b"".join(chunks)
            Path(path).write_bytes(body + crypto.sha256(body))

    @classmethod
    def restore_from_file(cls, path: str | Path, cas=None) -> "Ledger":
        data = Path(path).read_bytes()
        if len(data) < len(SNAPSHOT_MAGIC) + 4 + 32:
            raise SnapshotCorrupt("file too short")
        body, footer = data[:-32], data[-32:]
        if crypto.sha256(body) != footer:
            raise SnapshotCorrupt("digest footer mismatch")
        if not body.startswith(SNAPSHOT_MAGIC):
            raise SnapshotCorrupt("bad magic")
        records = []
        pos = len(SNAPSHOT_MAGIC)
        while True:
            if pos + 4 > len(body):
                raise SnapshotCorrupt("truncated record framing")
            (length,) = struct.unpack(">I", body[pos:pos + 4])
            pos += 4
            if length == 0:
                break
            if pos + length > len(body):
                raise SnapshotCorrupt("truncated record")
            records.append(canonical.decode(body[pos:pos + length]))
            pos += length
        if pos != len(body):
            raise SnapshotCorrupt("trailing bytes after terminator")

        ledger = cls(cas=cas)
        for record in records:
            recorded = LedgerEntry.from_doc(record["entry"])
            tx = Transaction.from_doc(record["tx"])
            receipt = ledger.submit_tx(tx, wall_clock=recorded.wall_clock)
            if not receipt.accepted or receipt.entry_digest != recorded.entry_digest:
                raise SnapshotCorrupt(
                    f"replay diverged at height {recorded.height}: "
                    f"{receipt.reason or 'digest mismatch'}")
        return ledger

    @classmethod
    def replay(cls, transactions: list[Transaction],
               wall_clocks: list[int] | None = None, cas=None) -> "Ledger":
        """Rebuild a ledger by replaying a transaction log from genesis."""
        ledger = cls(cas=cas)
        for i, tx in enumerate(transactions):
            wc = wall_clocks[i] if wall_clocks is not None else 0
            receipt = ledger.submit_tx(tx, wall_clock=wc)
            if not receipt.accepted:
                raise SnapshotCorrupt(f"replay rejected tx {i}: {receipt.reason}")
        return ledger
