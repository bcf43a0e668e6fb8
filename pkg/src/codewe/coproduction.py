"""Co-production workflow: versioned survey drafting with participatory
proposals, feedback rounds, stigma review, and quorum sign-off.

A record is a single logical document. Every revision invalidates all prior
sign-offs, so no revised question can ride an old approval. Finalization
requires zero unresolved stigma flags, every role represented among the
sign-offs on the latest draft, and at least 2/3 of the panel signed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import canonical, crypto
from .errors import (
    ConflictRetry,
    DuplicateStakeholder,
    FinalizationBlocked,
    QuorumNotMet,
    RecordFinalized,
    StaleResolution,
    StaleSignOff,
    Unauthorized,
    UnknownItem,
)

ADMINISTRATOR = "Administrator"
RESEARCHER = "Researcher"
EMPLOYEE_PARTICIPANT = "EmployeeParticipant"
ROLES = (ADMINISTRATOR, RESEARCHER, EMPLOYEE_PARTICIPANT)

IN_PROGRESS = "InProgress"
FINALIZED = "Finalized"


@dataclass(frozen=True)
class Stakeholder:
    stakeholder_id: str
    role: str
    public_key: bytes

    def to_doc(self) -> dict:
        return {
            "stakeholder_id": self.stakeholder_id,
            "role": self.role,
            "public_key": self.public_key.hex(),
        }


def signoff_signing_doc(record_id: str, draft_version: int, draft_digest: bytes) -> dict:
    return {
        "record_id": record_id,
        "draft_version": draft_version,
        "draft_digest": draft_digest.hex(),
    }


@dataclass
class CoProductionRecord:
    record_id: str
    stakeholders: list[Stakeholder]
    drafts: list[dict]  # draft n has "version" == n+1
    proposals: list[dict] = field(default_factory=list)
    feedback_rounds: list[dict] = field(default_factory=list)
    stigma_flags: list[dict] = field(default_factory=list)
    signoffs: list[dict] = field(default_factory=list)
    status: str = IN_PROGRESS
    mutation_count: int = 0

    @property
    def latest_version(self) -> int:
        return len(self.drafts)

    @property
    def latest_draft(self) -> dict:
        return self.drafts[-1]

    def panelist(self, stakeholder_id: str) -> Stakeholder | None:
        for s in self.stakeholders:
            if s.stakeholder_id == stakeholder_id:
                return s
        return None

    def to_doc(self) -> dict:
        return {
            "record_id": self.record_id,
            "stakeholders": [s.to_doc() for s in self.stakeholders],
            "drafts": self.drafts,
            "proposals": self.proposals,
            "feedback_rounds": self.feedback_rounds,
            "stigma_flags": self.stigma_flags,
            "signoffs": self.signoffs,
            "status": self.status,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CoProductionRecord":
        return cls(
            record_id=doc["record_id"],
            stakeholders=[
                Stakeholder(s["stakeholder_id"], s["role"], bytes.fromhex(s["public_key"]))
                for s in doc["stakeholders"]
            ],
            drafts=doc["drafts"],
            proposals=doc["proposals"],
            feedback_rounds=doc["feedback_rounds"],
            stigma_flags=doc["stigma_flags"],
            signoffs=doc["signoffs"],
            status=doc["status"],
        )


def _check_mutable(record: CoProductionRecord, expected_version: int | None) -> None:
    if record.status == FINALIZED:
        raise RecordFinalized(record.record_id)
    if expected_version is not None and expected_version != record.mutation_count:
        raise ConflictRetry(
            f"expected mutation {expected_version}, record at {record.mutation_count}")


def open_codesign(initial_draft: dict, stakeholders: list[Stakeholder]) -> CoProductionRecord:
    if not stakeholders:
        raise DuplicateStakeholder("stakeholder panel must be non-empty")
    keys = [s.public_key for s in stakeholders]
    ids = [s.stakeholder_id for s in stakeholders]
    if len(set(keys)) != len(keys) or len(set(ids)) != len(ids):
        raise DuplicateStakeholder("stakeholder keys and ids must be distinct")
    for s in stakeholders:
        if s.role not in ROLES:
            raise DuplicateStakeholder(f"unknown role {s.role!r}")
    draft = dict(initial_draft)
    draft["version"] = 1
    record_id = canonical.digest({
        "stakeholders": [s.to_doc() for s in stakeholders],
        "draft": draft,
    }).hex()
    return CoProductionRecord(record_id=record_id, stakeholders=stakeholders, drafts=[draft])


def propose_revision(record: CoProductionRecord, stakeholder_id: str, change: dict,
                     rationale: str, expected_version: int | None = None) -> int:
    """Apply an item add/edit/remove, returning the new draft version.

    All prior sign-offs are invalidated: they reference older versions.
    """
    _check_mutable(record, expected_version)
    if record.panelist(stakeholder_id) is None:
        raise Unauthorized(stakeholder_id)
    draft = dict(record.latest_draft)
    items = [dict(it) for it in draft["items"]]
    op = change["op"]
    if op == "add":
        items.append(dict(change["item"]))
    elif op == "edit":
        idx = next((i for i, it in enumerate(items)
                    if it["item_id"] == change["item"]["item_id"]), None)
        if idx is None:
            raise UnknownItem(change["item"]["item_id"])
        items[idx] = dict(change["item"])
    elif op == "remove":
        before = len(items)
        items = [it for it in items if it["item_id"] != change["item_id"]]
        if len(items) == before:
            raise UnknownItem(change["item_id"])
    else:
        raise ValueError(f"unknown change op {op!r}")
    draft["items"] = items
    draft["version"] = record.latest_version + 1
    record.drafts.append(draft)
    record.proposals.append({
        "proposer": stakeholder_id,
        "change": change,
        "rationale": rationale,
        "draft_version": draft["version"],
    })
    record.signoffs = []
    record.mutation_count += 1
    return draft["version"]


def record_feedback(record: CoProductionRecord, comments: list[dict],
                    expected_version: int | None = None) -> None:
    _check_mutable(record, expected_version)
    record.feedback_rounds.append({
        "round": len(record.feedback_rounds) + 1,
        "draft_version": record.latest_version,
        "comments": comments,
    })
    record.mutation_count += 1


def flag_stigma(record: CoProductionRecord, item_id: str, raised_by: str,
                rationale: str, expected_version: int | None = None) -> int:
    _check_mutable(record, expected_version)
    if record.panelist(raised_by) is None:
        raise Unauthorized(raised_by)
    if not any(it["item_id"] == item_id for it in record.latest_draft["items"]):
        raise UnknownItem(item_id)
    flag_id = len(record.stigma_flags) + 1
    record.stigma_flags.append({
        "flag_id": flag_id,
        "item_id": item_id,
        "raised_by": raised_by,
        "rationale": rationale,
        "flagged_version": record.latest_version,
        "resolution": 0,
        "resolved": False,
    })
    record.mutation_count += 1
    return flag_id


def resolve_stigma(record: CoProductionRecord, flag_id: int, revised_version: int,
                   expected_version: int | None = None) -> None:
    _check_mutable(record, expected_version)
    flag = next((f for f in record.stigma_flags if f["flag_id"] == flag_id), None)
    if flag is None:
        raise UnknownItem(f"flag {flag_id}")
    if not flag["flagged_version"] < revised_version <= record.latest_version:
        raise StaleResolution(
            f"resolution must reference a draft after version {flag['flagged_version']}")
    flag["resolution"] = revised_version
    flag["resolved"] = True
    record.mutation_count += 1


def signoff(record: CoProductionRecord, stakeholder_id: str, draft_version: int,
            signature: bytes, expected_version: int | None = None) -> None:
    _check_mutable(record, expected_version)
    panelist = record.panelist(stakeholder_id)
    if panelist is None:
        raise Unauthorized(stakeholder_id)
    if draft_version != record.latest_version:
        raise StaleSignOff(f"draft {draft_version} is not the latest")
    signing = canonical.encode(signoff_signing_doc(
        record.record_id, draft_version, canonical.digest(record.latest_draft)))
    if not crypto.verify(panelist.public_key, signing, signature):
        raise StaleSignOff("signature does not verify against the latest draft")
    record.signoffs = [s for s in record.signoffs if s["stakeholder_id"] != stakeholder_id]
    record.signoffs.append({
        "stakeholder_id": stakeholder_id,
        "draft_version": draft_version,
        "signature": signature.hex(),
    })
    record.mutation_count += 1


def make_signoff_signature(record: CoProductionRecord, keypair: crypto.KeyPair) -> bytes:
    """Sign the latest draft; convenience for panelists."""
    signing = canonical.encode(signoff_signing_doc(
        record.record_id, record.latest_version, canonical.digest(record.latest_draft)))
    return crypto.sign(keypair.private_seed, signing)


def quorum_met(record: CoProductionRecord) -> bool:
    current = [s for s in record.signoffs if s["draft_version"] == record.latest_version]
    signed_ids = {s["stakeholder_id"] for s in current}
    signed_roles = {record.panelist(sid).role for sid in signed_ids}
    if not set(ROLES) <= signed_roles:
        return False
    return len(signed_ids) >= math.ceil(2 * len(record.stakeholders) / 3)


def finalize(record: CoProductionRecord, cas_store,
             expected_version: int | None = None) -> tuple[dict, bytes]:
    """Freeze the record, store it in CAS, and emit deployable SurveyParameters."""
    _check_mutable(record, expected_version)
    roles_present = {s.role for s in record.stakeholders}
    if not set(ROLES) <= roles_present:
        raise QuorumNotMet(f"panel missing roles: {set(ROLES) - roles_present}")
    unresolved = [f for f in record.stigma_flags if not f["resolved"]]
    if unresolved:
        raise FinalizationBlocked(
            f"{len(unresolved)} unresolved stigma flag(s) block finalization")
    final_draft = record.latest_draft
    # the zero-unresolved-flags gate backs the stigma_reviewed field; an item
    # explicitly marked unreviewed in the draft still blocks
    unreviewed = [it["item_id"] for it in final_draft["items"] if not it["stigma_reviewed"]]
    if unreviewed:
        raise FinalizationBlocked(f"items not stigma-reviewed: {unreviewed}")
    if not quorum_met(record):
        raise QuorumNotMet("need every role plus 2/3 of the panel on the latest draft")

    record.status = FINALIZED
    record_digest = cas_store.put(canonical.encode(record.to_doc()))

    params = {
        "title": final_draft["title"],
        "items": final_draft["items"],
        "scales": final_draft["scales"],
        "rules": final_draft["rules"],
        "version": final_draft["version"],
        "coproduction_digest": record_digest.hex(),
    }
    from .contract import compute_survey_id
    params["survey_id"] = compute_survey_id(params).hex()
    return params, record_digest
