"""HTTP service exposing the protocol to the web client.

Every state-changing endpoint is exactly the corresponding protocol
operation. The server never signs on behalf of respondents: both the
commitment signature and the transaction signature arrive from the client.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import analysis, audit, canonical, contract
from .cas import CasStore
from .errors import BlobTooLarge
from .ledger import Ledger, Transaction

# ledger rejection reason -> HTTP status
_STATUS = {
    contract.R_INVALID_SIGNATURE: 400,
    contract.R_MALFORMED: 400,
    contract.R_ADDRESS_MISMATCH: 400,
    contract.R_UNKNOWN_TOKEN: 403,
    contract.R_UNKNOWN_CONTRACT: 404,
    contract.R_UNKNOWN_COMMITMENT: 404,
    contract.R_TOKEN_REPLAY: 409,
    contract.R_DUPLICATE_KEY: 409,
    contract.R_SURVEY_CLOSED: 409,
    contract.R_SURVEY_FULL: 409,
    contract.R_INVALID_TRANSITION: 409,
    contract.R_ALREADY_ANALYZED: 409,
    contract.R_ALREADY_ERASED: 409,
    contract.R_UNAUTHORIZED: 403,
    contract.R_DUPLICATE_CONTRACT: 409,
    contract.R_STIGMA_GATE: 409,
    contract.R_COPRODUCTION_MISSING: 409,
    contract.R_INVALID_PARAMS: 400,
}


class _RateLimiter:
    """Sliding-window submissions-per-minute limit, per remote address."""

    def __init__(self, per_minute: int):
        self.per_minute = per_minute
        self._hits: dict[str, list[float]] = {}

    def allow(self, address: str) -> bool:
        if self.per_minute <= 0:
            return True
        now = time.monotonic()
        window = [t for t in self._hits.get(address, []) if now - t < 60.0]
        if len(window) >= self.per_minute:
            self._hits[address] = window
            return False
        window.append(now)
        self._hits[address] = window
        return True


def _reject(reason: str, detail: str = "") -> JSONResponse:
    return JSONResponse(status_code=_STATUS.get(reason, 400),
                        content={"reason": reason, "detail": detail})


def create_app(ldg: Ledger, cas: CasStore, report_dir: str | Path | None = None,
               codesign_record: dict | None = None,
               rate_limit_per_minute: int = 10,
               snapshot_path: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="codewe")
    limiter = _RateLimiter(rate_limit_per_minute)
    report_dir = Path(report_dir) if report_dir else None

    def survey_or_none(survey_id: str):
        return ldg.contracts.get(survey_id)

    @app.get("/surveys/{survey_id}")
    def get_survey(survey_id: str):
        state = survey_or_none(survey_id)
        if state is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        return {"params": state.params, "phase": state.phase,
                "admin_public_key": state.admin_public_key.hex()}

    @app.post("/surveys/{survey_id}/responses")
    async def post_response(survey_id: str, request: Request):
        client = request.client.host if request.client else "unknown"
        if not limiter.allow(client):
            return JSONResponse(status_code=429,
                                content={"reason": "RateLimited", "detail": ""})
        if survey_or_none(survey_id) is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        try:
            payload = await request.json()
            response_doc = payload["response"]
            inner_sig = payload["signature"]
            tx_sig = payload["tx_signature"]
            public_key = payload["public_key"]
            token = payload["token"]
            blob = canonical.encode(response_doc)
        except Exception as exc:
            return _reject(contract.R_MALFORMED, str(exc))
        try:
            address = cas.put(blob)
        except (BlobTooLarge, ValueError) as exc:
            return _reject(contract.R_MALFORMED, str(exc))
        body = {
            "response_digest": address.hex(),
            "cas_address": address.hex(),
            "respondent_public_key": public_key,
            "respondent_signature": inner_sig,
            "eligibility_token": token,
        }
        try:
            tx = Transaction(kind=contract.SUBMIT_COMMITMENT, contract_id=survey_id,
                             body=body, sender_public_key=bytes.fromhex(public_key),
                             sender_signature=bytes.fromhex(tx_sig))
        except ValueError as exc:
            return _reject(contract.R_MALFORMED, str(exc))
        receipt = ldg.submit_tx(tx)
        if not receipt.accepted:
            return _reject(receipt.reason)
        if snapshot_path is not None:
            ldg.snapshot_to_file(snapshot_path)
        return {"response_digest": address.hex(), "height": receipt.height,
                "entry_digest": receipt.entry_digest.hex()}

    @app.get("/surveys/{survey_id}/proof/{digest}")
    def get_proof(survey_id: str, digest: str):
        state = survey_or_none(survey_id)
        if state is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        if state.phase != contract.ANALYZED:
            return JSONResponse(status_code=404,
                                content={"reason": "NotYetAnalyzed", "detail": ""})
        proof_path = report_dir / "proofs" / f"{digest}.json" if report_dir else None
        if proof_path is None or not proof_path.exists():
            return JSONResponse(status_code=404,
                                content={"reason": "NotIncluded", "detail": ""})
        return {
            "proof": canonical.decode(proof_path.read_bytes()),
            "analysis_root": state.analysis_root.hex(),
        }

    @app.get("/surveys/{survey_id}/report")
    def get_report(survey_id: str):
        state = survey_or_none(survey_id)
        if state is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        if report_dir is None or not (report_dir / "report.json").exists():
            return JSONResponse(status_code=404,
                                content={"reason": "ReportUnavailable", "detail": ""})
        report, signature = analysis.load_report(report_dir)
        return {
            "report": report,
            "signature": signature.hex(),
            "analysis_root": state.analysis_root.hex() if state.analysis_root else "",
        }

    @app.get("/surveys/{survey_id}/audit")
    def get_audit(survey_id: str):
        state = survey_or_none(survey_id)
        if state is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        if report_dir is None or not (report_dir / "report.json").exists():
            return JSONResponse(status_code=404,
                                content={"reason": "ReportUnavailable", "detail": ""})
        report, signature = analysis.load_report(report_dir)
        finding = audit.full_audit(ldg, cas, survey_id, report, signature)
        return finding.to_doc()

    @app.get("/surveys/{survey_id}/codesign")
    def get_codesign(survey_id: str):
        if survey_or_none(survey_id) is None:
            return _reject(contract.R_UNKNOWN_CONTRACT)
        if codesign_record is None:
            return JSONResponse(status_code=404,
                                content={"reason": "RecordUnavailable", "detail": ""})
        # public summary only: no free text, no keys
        flags = codesign_record["stigma_flags"]
        return {
            "status": codesign_record["status"],
            "draft_version": len(codesign_record["drafts"]),
            "panel_size": len(codesign_record["stakeholders"]),
            "signoff_count": len(codesign_record["signoffs"]),
            "flags_total": len(flags),
            "flags_unresolved": sum(1 for f in flags if not f["resolved"]),
        }

    return app
