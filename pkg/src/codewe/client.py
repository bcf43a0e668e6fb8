"""Respondent-side helpers: build, sign, and package a survey submission.

Used by the CLI (standing in for the browser) and by tests; the same byte
rules are what the web client reimplements against the shared golden vectors.
"""

from __future__ import annotations

import secrets

from . import analysis, canonical, contract, crypto
from .ledger import Transaction, make_transaction


def build_submission(survey_id_hex: str, answers: dict[str, int],
                     keypair: crypto.KeyPair, token: bytes,
                     client_nonce: bytes | None = None):
    """Returns (response_doc, blob, commitment_body, tx)."""
    nonce = client_nonce if client_nonce is not None else secrets.token_bytes(16)
    survey_id = bytes.fromhex(survey_id_hex)
    doc = analysis.build_response_doc(survey_id, answers, keypair.public_key, nonce)
    blob = canonical.encode(doc)
    digest = crypto.sha256(blob)
    inner = crypto.sign(keypair.private_seed, canonical.encode(
        contract.commitment_signing_doc(survey_id, digest, digest)))
    body = {
        "response_digest": digest.hex(),
        "cas_address": digest.hex(),
        "respondent_public_key": keypair.public_key.hex(),
        "respondent_signature": inner.hex(),
        "eligibility_token": token.hex(),
    }
    tx = make_transaction(contract.SUBMIT_COMMITMENT, survey_id_hex, body, keypair)
    return doc, blob, body, tx


def submission_http_payload(doc: dict, body: dict, tx: Transaction) -> dict:
    """Shape the POST /surveys/{id}/responses body."""
    return {
        "response": doc,
        "signature": body["respondent_signature"],
        "tx_signature": tx.sender_signature.hex(),
        "public_key": body["respondent_public_key"],
        "token": body["eligibility_token"],
    }
