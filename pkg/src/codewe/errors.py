"""Exception types shared across the codewe modules.

Ledger transaction rejections are *not* exceptions: they come back as
``TxReceipt`` values with a reason string, because a rejected transaction
is an expected protocol outcome, not a programming error.
"""


class CodeweError(Exception):
    """Base class for all codewe errors."""


class EncodingUnsupported(CodeweError):
    """Value contains a kind the canonical encoding refuses (e.g. float)."""


class InvalidSeed(CodeweError):
    """Key seed is not exactly 32 bytes."""


class InvalidKeyMaterial(CodeweError):
    """Key or signature bytes have the wrong length or shape."""


class EmptyTree(CodeweError):
    """Merkle root/proof requested over zero leaves."""


class IndexOutOfRange(CodeweError):
    """Merkle proof requested for an index >= leaf count."""


class SnapshotCorrupt(CodeweError):
    """Ledger snapshot file failed its digest footer or framing check."""


class BlobTooLarge(CodeweError):
    """Blob exceeds the CAS size limit."""


class BlobNotFound(CodeweError):
    """No blob stored at the given address."""


class BlobErased(CodeweError):
    """Blob was erased; carries the tombstone."""

    def __init__(self, tombstone):
        super().__init__("blob erased")
        self.tombstone = tombstone


class AlreadyErased(CodeweError):
    """Erase called twice for the same address."""


class IntegrityViolation(CodeweError):
    """Stored bytes no longer hash to their address (disk corruption)."""


# --- co-production workflow ---

class DuplicateStakeholder(CodeweError):
    """Panel has duplicate or missing stakeholder keys."""


class Unauthorized(CodeweError):
    """Actor is not on the panel / not the admin."""


class RecordFinalized(CodeweError):
    """Mutation attempted on a finalized co-production record."""


class UnknownItem(CodeweError):
    """Stigma flag references an item absent from the current draft."""


class StaleResolution(CodeweError):
    """Stigma resolution references a draft no newer than the flag."""


class FinalizationBlocked(CodeweError):
    """Unresolved stigma flags block finalization."""


class QuorumNotMet(CodeweError):
    """Sign-off quorum (role coverage + 2/3 of panel) not reached."""


class StaleSignOff(CodeweError):
    """Sign-off bound to a draft version that is not the latest."""


class ConflictRetry(CodeweError):
    """Optimistic version check failed; re-read and retry."""


# --- analysis / audit ---

class WrongPhase(CodeweError):
    """Operation requires a different contract phase."""


class ReportUnavailable(CodeweError):
    """Audit requested but no report is available."""


class NotYetAnalyzed(CodeweError):
    """Inclusion proof requested before the analysis commitment exists."""
