"""Independent verification that no response was omitted, altered, or forged.

Everything here reads only the ledger, the CAS, and published report files —
never the administrator's internal query store — so any party with access to
those can reproduce a finding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import canonical, contract, crypto
from .cas import CasStore
from .errors import (
    BlobErased,
    BlobNotFound,
    IntegrityViolation,
    NotYetAnalyzed,
    ReportUnavailable,
)
from .ledger import Ledger
from .merkle import MerkleProof, merkle_root, merkle_verify

CLEAN = "Clean"
DISCREPANT = "Discrepant"


@dataclass
class AuditFinding:
    contract_id: str
    chain_ok: bool = False
    commitment_count: int = 0
    analyzed_count: int = 0
    omitted: list[str] = field(default_factory=list)
    erased: list[str] = field(default_factory=list)
    integrity_failures: list[str] = field(default_factory=list)
    signature_failures: list[str] = field(default_factory=list)
    root_match: bool = False
    # default True so audit_completeness (which does not check the report
    # signature) keeps the spec verdict formula; full_audit sets it
    report_sig_ok: bool = True
    reasons: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        clean = (self.chain_ok and not self.omitted and not self.integrity_failures
                 and not self.signature_failures and self.root_match
                 and self.report_sig_ok)
        return CLEAN if clean else DISCREPANT

    def to_doc(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "chain_ok": self.chain_ok,
            "commitment_count": self.commitment_count,
            "analyzed_count": self.analyzed_count,
            "omitted": self.omitted,
            "erased": self.erased,
            "integrity_failures": self.integrity_failures,
            "signature_failures": self.signature_failures,
            "root_match": self.root_match,
            "report_sig_ok": self.report_sig_ok,
            "verdict": self.verdict,
            "reasons": self.reasons,
        }

    def summary(self) -> str:
        lines = [f"Audit of survey {self.contract_id[:16]}…: {self.verdict}"]
        lines.append(f"  hash chain intact: {'yes' if self.chain_ok else 'NO'}")
        lines.append(f"  commitments on-chain: {self.commitment_count}, "
                     f"analyzed: {self.analyzed_count}, erased: {len(self.erased)}")
        if self.omitted:
            lines.append(f"  OMITTED from analysis: {len(self.omitted)} response(s)")
        if self.integrity_failures:
            lines.append(f"  INTEGRITY failures: {len(self.integrity_failures)}")
        if self.signature_failures:
            lines.append(f"  SIGNATURE failures: {len(self.signature_failures)}")
        lines.append(f"  analysis root matches on-chain commitment: "
                     f"{'yes' if self.root_match else 'NO'}")
        lines.append(f"  report signature verifies: "
                     f"{'yes' if self.report_sig_ok else 'NO'}")
        for reason in self.reasons:
            lines.append(f"  - {reason}")
        return "\n".join(lines)


def _admin_key_from_chain(ldg: Ledger, contract_id: str) -> bytes | None:
    for _, tx in ldg.read_entries(contract_id, kind=contract.DEPLOY):
        return tx.sender_public_key
    return None


def audit_completeness(ldg: Ledger, cas: CasStore, contract_id: str,
                       report: dict) -> AuditFinding:
    """Set-compare on-chain commitments against the report's included and
    excluded lists; recompute and match the analysis root; verify the chain
    and every commitment signature."""
    if report is None:
        raise ReportUnavailable(contract_id)
    finding = AuditFinding(contract_id=contract_id)
    finding.chain_ok, bad = ldg.verify_chain()
    if not finding.chain_ok:
        finding.reasons.append(f"hash chain broken at height {bad}")

    commitments = [tx.body for _, tx in
                   ldg.read_entries(contract_id, kind=contract.SUBMIT_COMMITMENT)]
    finding.commitment_count = len(commitments)

    erased_on_chain = {tx.body["response_digest"] for _, tx in
                       ldg.read_entries(contract_id, kind=contract.RECORD_ERASURE)}

    included = list(report.get("included_digests", []))
    excluded = {e["digest"]: e["reason"] for e in report.get("excluded", [])}
    finding.analyzed_count = len(included)

    included_set = set(included)
    survey_id = bytes.fromhex(contract_id)
    for commitment in commitments:
        digest_hex = commitment["response_digest"]
        # forged commitment signatures are a discrepancy regardless of the
        # report's claims
        signing = canonical.encode(contract.commitment_signing_doc(
            survey_id,
            bytes.fromhex(digest_hex),
            bytes.fromhex(commitment["cas_address"])))
        try:
            sig_ok = crypto.verify(
                bytes.fromhex(commitment["respondent_public_key"]), signing,
                bytes.fromhex(commitment["respondent_signature"]))
        except Exception:
            sig_ok = False
        if not sig_ok:
            finding.signature_failures.append(digest_hex)
            continue
        if digest_hex in included_set:
            # re-check the blob the analysis claims to have used
            try:
                blob = cas.get(bytes.fromhex(digest_hex))
                if crypto.sha256(blob) != bytes.fromhex(digest_hex):
                    finding.integrity_failures.append(digest_hex)
            except BlobErased:
                finding.integrity_failures.append(digest_hex)
            except (BlobNotFound, IntegrityViolation):
                finding.integrity_failures.append(digest_hex)
            continue
        if digest_hex in erased_on_chain:
            finding.erased.append(digest_hex)
            continue
        reason = excluded.get(digest_hex)
        if reason == "erased":
            # report claims erasure without an on-chain erasure record
            finding.omitted.append(digest_hex)
        elif reason in ("integrity_failure", "signature_failure"):
            # verify the claimed exclusion independently
            justified = False
            if reason == "integrity_failure":
                try:
                    cas.get(bytes.fromhex(digest_hex))
                except (BlobNotFound, IntegrityViolation, BlobErased):
                    justified = True
            if not justified:
                finding.omitted.append(digest_hex)
        else:
            finding.omitted.append(digest_hex)

    state = ldg.contracts.get(contract_id)
    on_chain_root = state.analysis_root if state else None
    leaves = [bytes.fromhex(d) for d in included]
    recomputed = merkle_root(leaves) if leaves else crypto.sha256(b"")
    finding.root_match = (on_chain_root is not None and recomputed == on_chain_root
                          and report.get("analysis_root") == on_chain_root.hex())
    if not finding.root_match:
        finding.reasons.append("analysis root does not match on-chain commitment")
    if finding.omitted:
        finding.reasons.append(f"{len(finding.omitted)} response(s) omitted from analysis")
    if finding.signature_failures:
        finding.reasons.append("forged commitment signature(s) on-chain")
    if finding.integrity_failures:
        finding.reasons.append("analyzed blob(s) fail integrity re-check")
    return finding


def verify_inclusion(ldg: Ledger, contract_id: str, response_digest: bytes,
                     proof: MerkleProof) -> bool:
    state = ldg.contracts.get(contract_id)
    if state is None or state.phase != contract.ANALYZED:
        raise NotYetAnalyzed(contract_id)
    return merkle_verify(state.analysis_root, response_digest, proof)


def verify_report_signature(ldg: Ledger, contract_id: str, report: dict,
                            signature: bytes) -> bool:
    """True iff the admin signature over report_digest verifies and the digest
    matches the on-chain committed value."""
    state = ldg.contracts.get(contract_id)
    admin_pk = _admin_key_from_chain(ldg, contract_id)
    if state is None or state.report_digest is None or admin_pk is None:
        return False
    try:
        report_digest = canonical.digest(report)
    except Exception:
        return False
    if report_digest != state.report_digest:
        return False
    try:
        return crypto.verify(admin_pk, report_digest, signature)
    except Exception:
        return False


def full_audit(ldg: Ledger, cas: CasStore, contract_id: str, report: dict,
               report_signature: bytes) -> AuditFinding:
    """Chain verification + completeness + root + report-signature checks."""
    finding = audit_completeness(ldg, cas, contract_id, report)
    finding.report_sig_ok = verify_report_signature(ldg, contract_id, report,
                                                    report_signature)
    if not finding.report_sig_ok:
        finding.reasons.append("report signature or digest does not verify")
    return finding
