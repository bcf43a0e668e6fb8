import random

import conftest
from conftest import build_scenario, close_survey, random_answers, submit_response

from codewe import canonical, contract, crypto
from codewe.ledger import make_transaction


def test_deploy_happy_path(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    state = scenario.ledger.contracts[scenario.survey_id]
    assert state.phase == contract.DEPLOYED
    assert state.params_digest == canonical.digest(scenario.params)
    assert state.admin_public_key == scenario.admin.public_key


def test_deploy_stigma_gate(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    params = dict(scenario.params)
    items = [dict(it) for it in params["items"]]
    items[1]["stigma_reviewed"] = False
    params["items"] = items
    params["survey_id"] = contract.compute_survey_id(params).hex()
    receipt = conftest.deploy_survey(scenario.ledger, scenario.cas, params,
                                     scenario.admin, scenario.tokens)
    assert receipt.reason == contract.R_STIGMA_GATE


def test_deploy_missing_coproduction_record(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    params = dict(scenario.params)
    params["coproduction_digest"] = crypto.sha256(b"not in cas").hex()
    params["survey_id"] = contract.compute_survey_id(params).hex()
    receipt = conftest.deploy_survey(scenario.ledger, scenario.cas, params,
                                     scenario.admin, scenario.tokens)
    assert receipt.reason == contract.R_COPRODUCTION_MISSING


def test_duplicate_deploy_rejected(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    receipt = conftest.deploy_survey(scenario.ledger, scenario.cas,
                                     scenario.params, scenario.admin,
                                     scenario.tokens)
    assert receipt.reason == contract.R_DUPLICATE_CONTRACT


def test_survey_id_must_recompute(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    params = dict(scenario.params)
    params["title"] = "Tampered title"
    params["survey_id"] = "ef" * 32  # does not recompute from the document
    receipt = conftest.deploy_survey(scenario.ledger, scenario.cas, params,
                                     scenario.admin, scenario.tokens)
    assert receipt.reason == contract.R_INVALID_PARAMS


def test_phase_transitions_happy_path(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=1)
    state = scenario.ledger.contracts[scenario.survey_id]
    assert state.phase == contract.PHASE_OPEN
    close_survey(scenario)
    assert state.phase == contract.CLOSED


def test_close_when_deployed_invalid(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.CLOSE, scenario.survey_id, {}, scenario.admin))
    assert receipt.reason == contract.R_INVALID_TRANSITION


def test_non_admin_never_controls_lifecycle(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0)
    rng = random.Random(21)
    for _ in range(50):
        intruder = crypto.keygen(rng.randbytes(32))
        for kind in (contract.CLOSE, contract.OPEN, contract.COMMIT_ANALYSIS,
                     contract.RECORD_ERASURE):
            body = {}
            if kind == contract.COMMIT_ANALYSIS:
                body = {"analysis_root": "00" * 32, "report_digest": "00" * 32}
            if kind == contract.RECORD_ERASURE:
                body = {"response_digest": "00" * 32}
            receipt = scenario.ledger.submit_tx(make_transaction(
                kind, scenario.survey_id, body, intruder))
            assert receipt.reason in (contract.R_UNAUTHORIZED,
                                      contract.R_SURVEY_CLOSED)
    state = scenario.ledger.contracts[scenario.survey_id]
    assert state.phase == contract.PHASE_OPEN


def test_token_replay(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=1)
    rng = random.Random(2)
    receipt = submit_response(scenario, 0, random_answers(scenario.params, rng))
    assert receipt.reason == contract.R_TOKEN_REPLAY


def test_unknown_token(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0)
    scenario.tokens.append(b"\x99" * 16)  # never minted on-chain
    rng = random.Random(3)
    receipt = submit_response(scenario, len(scenario.tokens) - 1,
                              random_answers(scenario.params, rng))
    assert receipt.reason == contract.R_UNKNOWN_TOKEN


def test_duplicate_key(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0)
    rng = random.Random(4)
    respondent = crypto.keygen(rng.randbytes(32))
    assert submit_response(scenario, 0, random_answers(scenario.params, rng),
                           keypair=respondent).accepted
    receipt = submit_response(scenario, 1, random_answers(scenario.params, rng),
                              keypair=respondent)
    assert receipt.reason == contract.R_DUPLICATE_KEY


def test_survey_full(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=0, max_responses=5)
    rng = random.Random(5)
    for i in range(5):
        assert submit_response(scenario, i,
                               random_answers(scenario.params, rng)).accepted
    receipt = submit_response(scenario, 5, random_answers(scenario.params, rng))
    assert receipt.reason == contract.R_SURVEY_FULL


def test_submission_after_phase_close(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=1)
    close_survey(scenario)
    before = scenario.ledger.digest_sequence()
    rng = random.Random(6)
    receipt = submit_response(scenario, 1, random_answers(scenario.params, rng))
    assert receipt.reason == contract.R_SURVEY_CLOSED
    assert scenario.ledger.digest_sequence() == before


def test_time_window_half_open(tmp_path):
    # close_at equals the ledger height at submission time: rejected even
    # though the phase is still Open
    scenario = build_scenario(tmp_path, n_responses=0, open_survey=False)
    params = dict(scenario.params)
    rules = dict(params["rules"])
    # first deploy=0, this deploy=1, open=2 -> submissions at logical_time 3, 4
    rules["close_at"] = 4
    params["rules"] = rules
    params["title"] = "Windowed survey"
    params["survey_id"] = contract.compute_survey_id(params).hex()
    assert conftest.deploy_survey(scenario.ledger, scenario.cas, params,
                                  scenario.admin, scenario.tokens).accepted
    assert scenario.ledger.submit_tx(make_transaction(
        contract.OPEN, params["survey_id"], {}, scenario.admin)).accepted
    windowed = conftest.Scenario(ledger=scenario.ledger, cas=scenario.cas,
                                 params=params, admin=scenario.admin,
                                 tokens=scenario.tokens, respondents=[],
                                 response_digests=[], record=scenario.record)
    rng = random.Random(7)
    # logical_time == 2 < close_at: accepted
    assert submit_response(windowed, 0, random_answers(params, rng)).accepted
    # logical_time == 3 == close_at: rejected by the time rule
    receipt = submit_response(windowed, 1, random_answers(params, rng))
    assert receipt.reason == contract.R_SURVEY_CLOSED


def test_commit_analysis_lifecycle(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=2)
    body = {"analysis_root": "11" * 32, "report_digest": "22" * 32}
    # while Open: invalid
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.COMMIT_ANALYSIS, scenario.survey_id, body, scenario.admin))
    assert receipt.reason == contract.R_INVALID_TRANSITION
    close_survey(scenario)
    assert scenario.ledger.submit_tx(make_transaction(
        contract.COMMIT_ANALYSIS, scenario.survey_id, body,
        scenario.admin)).accepted
    state = scenario.ledger.contracts[scenario.survey_id]
    assert state.phase == contract.ANALYZED
    assert state.analysis_root.hex() == "11" * 32
    # second commit rejected, root immutable
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.COMMIT_ANALYSIS, scenario.survey_id,
        {"analysis_root": "33" * 32, "report_digest": "44" * 32}, scenario.admin))
    assert receipt.reason == contract.R_ALREADY_ANALYZED
    assert state.analysis_root.hex() == "11" * 32


def test_record_erasure(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=3)
    digest = scenario.response_digests[1]
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.RECORD_ERASURE, scenario.survey_id,
        {"response_digest": digest}, scenario.admin))
    assert receipt.accepted
    state = scenario.ledger.contracts[scenario.survey_id]
    assert state.erasures == [digest]
    # unknown digest
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.RECORD_ERASURE, scenario.survey_id,
        {"response_digest": "ab" * 32}, scenario.admin))
    assert receipt.reason == contract.R_UNKNOWN_COMMITMENT
    # double erase
    receipt = scenario.ledger.submit_tx(make_transaction(
        contract.RECORD_ERASURE, scenario.survey_id,
        {"response_digest": digest}, scenario.admin))
    assert receipt.reason == contract.R_ALREADY_ERASED


def test_commitment_sets_match_commitment_count(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=10)
    state = scenario.ledger.contracts[scenario.survey_id]
    assert len(state.used_tokens) == len(state.commitments) == 10
    assert len(state.used_keys) == 10


def test_commitments_immutable_after_acceptance(tmp_path):
    scenario = build_scenario(tmp_path, n_responses=4)
    state = scenario.ledger.contracts[scenario.survey_id]
    snapshot = canonical.encode(state.commitments)
    rng = random.Random(8)
    submit_response(scenario, 0, random_answers(scenario.params, rng))  # replay
    close_survey(scenario)
    assert canonical.encode(state.commitments) == snapshot
