import random
from dataclasses import dataclass

import pytest

from codewe import analysis, canonical, contract, coproduction, crypto
from codewe.cas import CasStore
from codewe.client import build_submission
from codewe.ledger import Ledger, make_transaction


def seeded_key(tag: str) -> crypto.KeyPair:
    return crypto.keygen(crypto.sha256(tag.encode()))


def make_panel():
    """One stakeholder per role, deterministic keys."""
    roles = [
        ("admin", coproduction.ADMINISTRATOR),
        ("researcher", coproduction.RESEARCHER),
        ("employee", coproduction.EMPLOYEE_PARTICIPANT),
    ]
    keys = {sid: seeded_key(f"panel:{sid}") for sid, _ in roles}
    panel = [coproduction.Stakeholder(sid, role, keys[sid].public_key)
             for sid, role in roles]
    return panel, keys


def make_draft(n_items=3, max_responses=100, close_at=10 ** 6,
               eligibility_token_count=150):
    dimensions = ["mood", "energy", "belonging"]
    items = [
        {
            "item_id": f"q{i + 1}",
            "text": f"Question {i + 1} about workplace well-being",
            "dimension": dimensions[i % len(dimensions)],
            "scale_ref": "likert5",
            "reverse_scored": i % 3 == 2,
            "stigma_reviewed": True,
        }
        for i in range(n_items)
    ]
    return {
        "title": "Workplace well-being survey",
        "items": items,
        "scales": {
            "likert5": {
                "min": 1,
                "max": 5,
                "labels": ["strongly disagree", "disagree", "neutral",
                           "agree", "strongly agree"],
            }
        },
        "rules": {
            "max_responses": max_responses,
            "open_at": 0,
            "close_at": close_at,
            "one_response_per_key": True,
            "eligibility_token_count": eligibility_token_count,
        },
    }


def finalize_codesign(cas, draft=None):
    """Minimal honest co-production run: open, everyone signs, finalize."""
    panel, keys = make_panel()
    record = coproduction.open_codesign(draft or make_draft(), panel)
    for sid in keys:
        sig = coproduction.make_signoff_signature(record, keys[sid])
        coproduction.signoff(record, sid, record.latest_version, sig)
    params, record_digest = coproduction.finalize(record, cas)
    return params, record, keys


@dataclass
class Scenario:
    ledger: Ledger
    cas: CasStore
    params: dict
    admin: crypto.KeyPair
    tokens: list[bytes]
    respondents: list[crypto.KeyPair]
    response_digests: list[str]
    record: coproduction.CoProductionRecord

    @property
    def survey_id(self) -> str:
        return self.params["survey_id"]


def deploy_survey(ldg, cas, params, admin, tokens):
    tx = make_transaction(contract.DEPLOY, params["survey_id"], {
        "params": params,
        "token_digests": [crypto.sha256(t).hex() for t in tokens],
    }, admin)
    return ldg.submit_tx(tx)


def random_answers(params, rng):
    answers = {}
    for item in params["items"]:
        scale = params["scales"][item["scale_ref"]]
        answers[item["item_id"]] = rng.randint(scale["min"], scale["max"])
    return answers


def build_scenario(tmp_path, n_responses=5, n_items=3, seed=7, open_survey=True,
                   submit=True, max_responses=100):
    """Deploy a co-produced survey and (optionally) submit n responses."""
    rng = random.Random(seed)
    cas = CasStore(tmp_path / "cas")
    ldg = Ledger(cas=cas)
    draft = make_draft(n_items=n_items, max_responses=max_responses,
                       eligibility_token_count=max(n_responses + 10, 20))
    params, record, keys = finalize_codesign(cas, draft)
    admin = keys["admin"]
    tokens = contract.mint_tokens(params["rules"]["eligibility_token_count"])
    receipt = deploy_survey(ldg, cas, params, admin, tokens)
    assert receipt.accepted, receipt.reason

    scenario = Scenario(ledger=ldg, cas=cas, params=params, admin=admin,
                        tokens=tokens, respondents=[], response_digests=[],
                        record=record)
    if open_survey:
        assert ldg.submit_tx(make_transaction(
            contract.OPEN, scenario.survey_id, {}, admin)).accepted
    if open_survey and submit:
        for i in range(n_responses):
            submit_response(scenario, i, random_answers(params, rng),
                            nonce=rng.randbytes(16))
    return scenario


def submit_response(scenario, token_index, answers, keypair=None, nonce=None):
    keypair = keypair or crypto.keygen()
    _, blob, body, tx = build_submission(scenario.survey_id, answers, keypair,
                                         scenario.tokens[token_index],
                                         client_nonce=nonce)
    scenario.cas.put(blob)
    receipt = scenario.ledger.submit_tx(tx)
    if receipt.accepted:
        scenario.respondents.append(keypair)
        scenario.response_digests.append(body["response_digest"])
    return receipt


def close_survey(scenario):
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.CLOSE, scenario.survey_id, {}, scenario.admin))
    assert receipt.accepted, receipt.reason


def analyzed_scenario(tmp_path, n_responses=5, n_items=3, seed=7):
    scenario = build_scenario(tmp_path, n_responses=n_responses, n_items=n_items,
                              seed=seed)
    close_survey(scenario)
    bundle = analysis.build_report(scenario.ledger, scenario.cas,
                                   scenario.survey_id, scenario.admin)
    return scenario, bundle


@pytest.fixture
def cas_store(tmp_path):
    return CasStore(tmp_path / "cas")
