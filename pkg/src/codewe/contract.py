"""Survey smart contract: a deterministic state machine executed by the ledger.

State is a pure function of the accepted transaction sequence, so replaying a
ledger from genesis reproduces it byte-for-byte. All validation reasons are
string constants carried in rejection receipts.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from . import canonical, crypto

# transaction kinds
DEPLOY = "Deploy"
OPEN = "Open"
CLOSE = "Close"
SUBMIT_COMMITMENT = "SubmitCommitment"
COMMIT_ANALYSIS = "CommitAnalysis"
RECORD_ERASURE = "RecordErasure"
TX_KINDS = (DEPLOY, OPEN, CLOSE, SUBMIT_COMMITMENT, COMMIT_ANALYSIS, RECORD_ERASURE)

# phases
DEPLOYED = "Deployed"
PHASE_OPEN = "Open"
CLOSED = "Closed"
ANALYZED = "Analyzed"
PHASES = (DEPLOYED, PHASE_OPEN, CLOSED, ANALYZED)

# rejection reasons
R_INVALID_SIGNATURE = "InvalidSignature"
R_UNKNOWN_CONTRACT = "UnknownContract"
R_DUPLICATE_CONTRACT = "DuplicateContract"
R_STIGMA_GATE = "StigmaGateFailed"
R_COPRODUCTION_MISSING = "CoProductionMissing"
R_INVALID_PARAMS = "InvalidParameters"
R_INVALID_TRANSITION = "InvalidTransition"
R_UNAUTHORIZED = "Unauthorized"
R_SURVEY_CLOSED = "SurveyClosed"
R_SURVEY_FULL = "SurveyFull"
R_TOKEN_REPLAY = "TokenReplay"
R_UNKNOWN_TOKEN = "UnknownToken"
R_DUPLICATE_KEY = "DuplicateKey"
R_ADDRESS_MISMATCH = "AddressMismatch"
R_ALREADY_ANALYZED = "AlreadyAnalyzed"
R_UNKNOWN_COMMITMENT = "UnknownCommitment"
R_ALREADY_ERASED = "AlreadyErased"
R_MALFORMED = "MalformedTransaction"

TOKEN_LEN = 16


@dataclass
class ContractState:
    phase: str
    params: dict
    params_digest: bytes
    admin_public_key: bytes
    token_digests: frozenset[str]
    commitments: list[dict] = field(default_factory=list)
    used_tokens: set[str] = field(default_factory=set)
    used_keys: set[str] = field(default_factory=set)
    analysis_root: bytes | None = None
    report_digest: bytes | None = None
    erasures: list[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        """Canonical view of the state, for replay-determinism comparisons."""
        return {
            "phase": self.phase,
            "params_digest": self.params_digest.hex(),
            "admin_public_key": self.admin_public_key.hex(),
            "commitments": self.commitments,
            "used_tokens": sorted(self.used_tokens),
            "used_keys": sorted(self.used_keys),
            "analysis_root": self.analysis_root.hex() if self.analysis_root else "",
            "report_digest": self.report_digest.hex() if self.report_digest else "",
            "erasures": self.erasures,
        }


def compute_survey_id(params: dict) -> bytes:
    """Digest of the parameter document minus its own id field."""
    body = {k: v for k, v in params.items() if k != "survey_id"}
    return canonical.digest(body)


def mint_tokens(count: int) -> list[bytes]:
    """Mint opaque one-time eligibility tokens, distributed out of band.

    Only their SHA-256 digests go on-chain, so reading the ledger does not
    grant submission rights.
    """
    return [secrets.token_bytes(TOKEN_LEN) for _ in range(count)]


def commitment_signing_doc(survey_id: bytes, response_digest: bytes, cas_address: bytes) -> dict:
    return {
        "survey_id": survey_id.hex(),
        "response_digest": response_digest.hex(),
        "cas_address": cas_address.hex(),
    }


def validate_params(params: dict, cas) -> str | None:
    """Return a rejection reason, or None when the parameters are deployable."""
    try:
        items = params["items"]
        scales = params["scales"]
        rules = params["rules"]
        if not isinstance(params["title"], str):
            return R_INVALID_PARAMS
        if params.get("version", 0) < 1:
            return R_INVALID_PARAMS
        if not items:
            return R_INVALID_PARAMS
        seen_ids = set()
        for item in items:
            if item["item_id"] in seen_ids:
                return R_INVALID_PARAMS
            seen_ids.add(item["item_id"])
            if item["scale_ref"] not in scales:
                return R_INVALID_PARAMS
            if not item["stigma_reviewed"]:
                return R_STIGMA_GATE
        for scale in scales.values():
            if scale["min"] >= scale["max"]:
                return R_INVALID_PARAMS
        if rules["max_responses"] < 1:
            return R_INVALID_PARAMS
        if rules["open_at"] >= rules["close_at"]:
            return R_INVALID_PARAMS
        coproduction_digest = bytes.fromhex(params["coproduction_digest"])
        if len(coproduction_digest) != 32:
            return R_INVALID_PARAMS
        # cas is None when replaying a bare snapshot; the check ran at
        # original deploy time
        if cas is not None and not cas.exists(coproduction_digest):
            return R_COPRODUCTION_MISSING
        if bytes.fromhex(params["survey_id"]) != compute_survey_id(params):
            return R_INVALID_PARAMS
    except (KeyError, TypeError, ValueError):
        return R_MALFORMED
    return None


def apply_transaction(states: dict[str, ContractState], tx, cas,
                      logical_time: int) -> str | None:
    """Validate ``tx`` against the state machine and apply it.

    Returns None on acceptance (state mutated), else a rejection reason
    (state untouched). The ledger has already verified the outer signature.
    """
    try:
        return _apply(states, tx, cas, logical_time)
    except (KeyError, TypeError, ValueError):
        return R_MALFORMED


def _apply(states, tx, cas, logical_time):
    if tx.kind == DEPLOY:
        if tx.contract_id in states:
            return R_DUPLICATE_CONTRACT
        params = tx.body["params"]
        reason = validate_params(params, cas)
        if reason is not None:
            return reason
        if tx.contract_id != params["survey_id"]:
            return R_MALFORMED
        token_digests = tx.body["token_digests"]
        if len(token_digests) != params["rules"]["eligibility_token_count"]:
            return R_MALFORMED
        states[tx.contract_id] = ContractState(
            phase=DEPLOYED,
            params=params,
            params_digest=canonical.digest(params),
            admin_public_key=tx.sender_public_key,
            token_digests=frozenset(token_digests),
        )
        return None

    state = states.get(tx.contract_id)
    if state is None:
        return R_UNKNOWN_CONTRACT

    if tx.kind == OPEN:
        if tx.sender_public_key != state.admin_public_key:
            return R_UNAUTHORIZED
        if state.phase != DEPLOYED:
            return R_INVALID_TRANSITION
        state.phase = PHASE_OPEN
        return None

    if tx.kind == CLOSE:
        if tx.sender_public_key != state.admin_public_key:
            return R_UNAUTHORIZED
        if state.phase != PHASE_OPEN:
            return R_INVALID_TRANSITION
        state.phase = CLOSED
        return None

    if tx.kind == SUBMIT_COMMITMENT:
        if state.phase != PHASE_OPEN:
            return R_SURVEY_CLOSED
        rules = state.params["rules"]
        # half-open window [open_at, close_at): the time bound wins even
        # while the phase is still Open
        if not rules["open_at"] <= logical_time < rules["close_at"]:
            return R_SURVEY_CLOSED
        body = tx.body
        response_digest = bytes.fromhex(body["response_digest"])
        cas_address = bytes.fromhex(body["cas_address"])
        respondent_pk = bytes.fromhex(body["respondent_public_key"])
        if cas_address != response_digest:
            return R_ADDRESS_MISMATCH
        if respondent_pk != tx.sender_public_key:
            return R_INVALID_SIGNATURE
        signing = canonical.encode(commitment_signing_doc(
            bytes.fromhex(tx.contract_id), response_digest, cas_address))
        if not crypto.verify(respondent_pk, signing,
                             bytes.fromhex(body["respondent_signature"])):
            return R_INVALID_SIGNATURE
        token = bytes.fromhex(body["eligibility_token"])
        if len(token) != TOKEN_LEN:
            return R_MALFORMED
        token_digest = crypto.sha256(token).hex()
        if token_digest not in state.token_digests:
            return R_UNKNOWN_TOKEN
        if token_digest in state.used_tokens:
            return R_TOKEN_REPLAY
        if body["respondent_public_key"] in state.used_keys:
            return R_DUPLICATE_KEY
        if len(state.commitments) >= rules["max_responses"]:
            return R_SURVEY_FULL
        state.commitments.append({
            "response_digest": body["response_digest"],
            "cas_address": body["cas_address"],
            "respondent_public_key": body["respondent_public_key"],
            "respondent_signature": body["respondent_signature"],
            "eligibility_token": body["eligibility_token"],
            "logical_time": logical_time,
        })
        state.used_tokens.add(token_digest)
        state.used_keys.add(body["respondent_public_key"])
        return None

    if tx.kind == COMMIT_ANALYSIS:
        if tx.sender_public_key != state.admin_public_key:
            return R_UNAUTHORIZED
        if state.phase == ANALYZED:
            return R_ALREADY_ANALYZED
        if state.phase != CLOSED:
            return R_INVALID_TRANSITION
        analysis_root = bytes.fromhex(tx.body["analysis_root"])
        report_digest = bytes.fromhex(tx.body["report_digest"])
        if len(analysis_root) != 32 or len(report_digest) != 32:
            return R_MALFORMED
        state.analysis_root = analysis_root
        state.report_digest = report_digest
        state.phase = ANALYZED
        return None

    if tx.kind == RECORD_ERASURE:
        if tx.sender_public_key != state.admin_public_key:
            return R_UNAUTHORIZED
        response_digest = tx.body["response_digest"]
        if response_digest not in {c["response_digest"] for c in state.commitments}:
            return R_UNKNOWN_COMMITMENT
        if response_digest in state.erasures:
            return R_ALREADY_ERASED
        state.erasures.append(response_digest)
        return None

    return R_MALFORMED
