import itertools
import math
import random

import pytest
from conftest import make_draft, make_panel, seeded_key

from codewe import canonical, coproduction, crypto
from codewe.cas import CasStore
from codewe.errors import (
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


def fresh_record(n_items=3):
    panel, keys = make_panel()
    return coproduction.open_codesign(make_draft(n_items=n_items), panel), keys


def sign_all(record, keys):
    for sid in keys:
        sig = coproduction.make_signoff_signature(record, keys[sid])
        coproduction.signoff(record, sid, record.latest_version, sig)


def test_open_codesign_starts_at_version_1():
    record, _ = fresh_record()
    assert record.status == coproduction.IN_PROGRESS
    assert record.latest_version == 1


def test_open_codesign_rejects_empty_or_duplicate_panel():
    with pytest.raises(DuplicateStakeholder):
        coproduction.open_codesign(make_draft(), [])
    key = seeded_key("dup")
    panel = [
        coproduction.Stakeholder("a", coproduction.ADMINISTRATOR, key.public_key),
        coproduction.Stakeholder("b", coproduction.RESEARCHER, key.public_key),
    ]
    with pytest.raises(DuplicateStakeholder):
        coproduction.open_codesign(make_draft(), panel)


def test_record_digest_stable_across_reencoding():
    record, _ = fresh_record()
    doc = record.to_doc()
    rebuilt = coproduction.CoProductionRecord.from_doc(canonical.decode(
        canonical.encode(doc)))
    assert canonical.digest(rebuilt.to_doc()) == canonical.digest(doc)


def test_propose_revision_bumps_version_and_invalidates_signoffs():
    record, keys = fresh_record()
    sign_all(record, keys)
    assert len(record.signoffs) == 3
    version = coproduction.propose_revision(
        record, "employee",
        {"op": "edit", "item": dict(record.latest_draft["items"][0],
                                    text="Reworded question")},
        "less loaded wording")
    assert version == 2
    assert record.signoffs == []


def test_propose_by_non_panelist():
    record, _ = fresh_record()
    with pytest.raises(Unauthorized):
        coproduction.propose_revision(record, "stranger",
                                      {"op": "remove", "item_id": "q1"}, "x")


def test_revision_sequences_monotone():
    rng = random.Random(13)
    record, keys = fresh_record(n_items=4)
    ids = list(keys)
    for i in range(10):
        op = rng.choice(["add", "edit"])
        if op == "add":
            change = {"op": "add", "item": {
                "item_id": f"new{i}", "text": "t", "dimension": "mood",
                "scale_ref": "likert5", "reverse_scored": False,
                "stigma_reviewed": True}}
        else:
            item = dict(rng.choice(record.latest_draft["items"]))
            item["text"] = f"edit {i}"
            change = {"op": "edit", "item": item}
        version = coproduction.propose_revision(record, rng.choice(ids), change, "r")
        assert version == i + 2
    assert [d["version"] for d in record.drafts] == list(range(1, 12))


def test_feedback_rounds_append_only():
    record, _ = fresh_record()
    coproduction.record_feedback(record, [{"author_role": "EmployeeParticipant",
                                           "comment": "clearer intro"}])
    coproduction.record_feedback(record, [{"author_role": "Researcher",
                                           "comment": "add energy item"}])
    assert [r["round"] for r in record.feedback_rounds] == [1, 2]


def test_mutations_fail_after_finalize(cas_store):
    record, keys = fresh_record()
    sign_all(record, keys)
    params, digest = coproduction.finalize(record, cas_store)
    assert record.status == coproduction.FINALIZED
    with pytest.raises(RecordFinalized):
        coproduction.propose_revision(record, "admin",
                                      {"op": "remove", "item_id": "q1"}, "x")
    with pytest.raises(RecordFinalized):
        coproduction.record_feedback(record, [])
    with pytest.raises(RecordFinalized):
        coproduction.flag_stigma(record, "q1", "admin", "late flag")
    # the stored record digest never changes
    assert cas_store.get(digest) == canonical.encode(record.to_doc())
    assert params["coproduction_digest"] == digest.hex()


def test_flag_blocks_finalization(cas_store):
    record, keys = fresh_record()
    coproduction.flag_stigma(record, "q2", "employee", "may deter honest answers")
    sign_all(record, keys)
    with pytest.raises(FinalizationBlocked):
        coproduction.finalize(record, cas_store)


def test_flag_revise_resolve_finalize(cas_store):
    record, keys = fresh_record()
    flag_id = coproduction.flag_stigma(record, "q2", "employee", "stigmatizing")
    revised = dict(record.latest_draft["items"][1], text="Neutral wording")
    version = coproduction.propose_revision(record, "employee",
                                            {"op": "edit", "item": revised},
                                            "address flag")
    coproduction.resolve_stigma(record, flag_id, version)
    sign_all(record, keys)
    params, _ = coproduction.finalize(record, cas_store)
    assert all(it["stigma_reviewed"] for it in params["items"])


def test_flag_unknown_item_and_stale_resolution():
    record, _ = fresh_record()
    with pytest.raises(UnknownItem):
        coproduction.flag_stigma(record, "qX", "employee", "?")
    flag_id = coproduction.flag_stigma(record, "q1", "employee", "stigma")
    with pytest.raises(StaleResolution):
        coproduction.resolve_stigma(record, flag_id, 1)  # not a later draft


@pytest.mark.parametrize("n_flags", range(1, 6))
def test_n_flags_resolve_all_but_one_still_blocked(cas_store, n_flags):
    record, keys = fresh_record(n_items=6)
    flag_ids = [coproduction.flag_stigma(record, f"q{i + 1}", "employee", "s")
                for i in range(n_flags)]
    version = coproduction.propose_revision(
        record, "researcher",
        {"op": "edit", "item": dict(record.latest_draft["items"][0],
                                    text="reworded")},
        "bulk rewording")
    for flag_id in flag_ids[:-1]:
        coproduction.resolve_stigma(record, flag_id, version)
    sign_all(record, keys)
    with pytest.raises(FinalizationBlocked):
        coproduction.finalize(record, cas_store)
    coproduction.resolve_stigma(record, flag_ids[-1], version)
    coproduction.finalize(record, cas_store)


def test_stale_signoff_rejected():
    record, keys = fresh_record()
    with pytest.raises(StaleSignOff):
        coproduction.signoff(record, "admin", 0,
                             coproduction.make_signoff_signature(record,
                                                                 keys["admin"]))
    # signature over an older draft digest fails even with the right version
    old_sig = coproduction.make_signoff_signature(record, keys["admin"])
    coproduction.propose_revision(record, "admin",
                                  {"op": "edit",
                                   "item": dict(record.latest_draft["items"][0],
                                                text="v2")}, "r")
    with pytest.raises(StaleSignOff):
        coproduction.signoff(record, "admin", record.latest_version, old_sig)


def test_minimal_quorum_three_roles(cas_store):
    record, keys = fresh_record()
    sign_all(record, keys)
    params, _ = coproduction.finalize(record, cas_store)
    assert params["survey_id"]


def test_quorum_arithmetic_six_panelists_three_sign(cas_store):
    roles = [coproduction.ADMINISTRATOR, coproduction.RESEARCHER,
             coproduction.EMPLOYEE_PARTICIPANT] * 2
    keys = {f"s{i}": seeded_key(f"six:{i}") for i in range(6)}
    panel = [coproduction.Stakeholder(f"s{i}", roles[i], keys[f"s{i}"].public_key)
             for i in range(6)]
    record = coproduction.open_codesign(make_draft(), panel)
    for sid in ["s0", "s1", "s2"]:  # one per role but 3 < ceil(2/3 * 6) = 4
        coproduction.signoff(record, sid, 1,
                             coproduction.make_signoff_signature(record, keys[sid]))
    with pytest.raises(QuorumNotMet):
        coproduction.finalize(record, cas_store)


def quorum_oracle(roles, signer_indices):
    """Independent brute-force quorum predicate."""
    signed_roles = {roles[i] for i in signer_indices}
    return (signed_roles >= set(coproduction.ROLES)
            and len(signer_indices) >= math.ceil(2 * len(roles) / 3))


def test_quorum_matches_bruteforce_oracle(tmp_path):
    rng = random.Random(99)
    for trial in range(10):
        n = rng.randint(3, 7) if trial else 9  # one full-size panel, rest smaller
        roles = [coproduction.ROLES[rng.randrange(3)] for _ in range(n)]
        keys = [seeded_key(f"oracle:{trial}:{i}") for i in range(n)]
        panel = [coproduction.Stakeholder(f"p{i}", roles[i], keys[i].public_key)
                 for i in range(n)]
        for r in range(n + 1):
            for subset in itertools.combinations(range(n), r):
                record = coproduction.open_codesign(make_draft(), panel)
                for i in subset:
                    coproduction.signoff(
                        record, f"p{i}", 1,
                        coproduction.make_signoff_signature(record, keys[i]))
                expected = quorum_oracle(roles, subset)
                assert coproduction.quorum_met(record) == expected
                store = CasStore(tmp_path / "cas")
                if expected:
                    coproduction.finalize(record, store)
                else:
                    with pytest.raises(QuorumNotMet):
                        coproduction.finalize(record, store)


def test_optimistic_version_conflict():
    record, _ = fresh_record()
    coproduction.record_feedback(record, [], expected_version=0)
    with pytest.raises(ConflictRetry):
        coproduction.record_feedback(record, [], expected_version=0)
