"""Command-line interface for administrators, co-production facilitators,
respondents (standing in for the browser), and auditors."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analysis, audit, canonical, contract, coproduction, crypto
from .cas import CasStore
from .client import build_submission
from .config import load_config, load_keypair, save_keypair
from .errors import CodeweError, SnapshotCorrupt
from .ledger import Ledger, make_transaction


def _load_ledger(path: str, cas: CasStore | None) -> Ledger:
    if Path(path).exists():
        return Ledger.restore_from_file(path, cas=cas)
    return Ledger(cas=cas)


def _emit(doc, output: str) -> None:
    if output == "json":
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
    else:
        if isinstance(doc, dict):
            for key in sorted(doc):
                click.echo(f"{key}: {doc[key]}")
        else:
            click.echo(doc)


def _read_record(path: str) -> coproduction.CoProductionRecord:
    return coproduction.CoProductionRecord.from_doc(
        canonical.decode(Path(path).read_bytes()))


def _write_record(record: coproduction.CoProductionRecord, path: str) -> None:
    Path(path).write_bytes(canonical.encode(record.to_doc()))


output_option = click.option("--output", type=click.Choice(["json", "text"]),
                             default="text")
ledger_option = click.option("--ledger", "ledger_path", default="ledger.snapshot",
                             show_default=True)
cas_option = click.option("--cas", "cas_dir", default="cas", show_default=True)


@click.group()
def main():
    """codewe: co-produced decentralised well-being surveys."""


@main.command()
@click.option("--out", "out_path", required=True)
@click.option("--seed", default=None, help="32-byte hex seed (tests only)")
@output_option
def keygen(out_path, seed, output):
    """Generate an Ed25519 keypair and write it to a key file."""
    pair = crypto.keygen(bytes.fromhex(seed) if seed else None)
    save_keypair(pair, out_path)
    _emit({"public_key": pair.public_key.hex(), "key_file": out_path}, output)


# --- co-production ---

@main.group()
def codesign():
    """Co-production workflow commands."""


@codesign.command("open")
@click.option("--draft", "draft_path", required=True)
@click.option("--stakeholders", "panel_path", required=True,
              help="JSON list of {stakeholder_id, role, public_key}")
@click.option("--record", "record_path", required=True)
@output_option
def codesign_open(draft_path, panel_path, record_path, output):
    draft = json.loads(Path(draft_path).read_text())
    panel = [
        coproduction.Stakeholder(s["stakeholder_id"], s["role"],
                                 bytes.fromhex(s["public_key"]))
        for s in json.loads(Path(panel_path).read_text())
    ]
    record = coproduction.open_codesign(draft, panel)
    _write_record(record, record_path)
    _emit({"record_id": record.record_id, "version": record.latest_version}, output)


@codesign.command("propose")
@click.option("--record", "record_path", required=True)
@click.option("--by", "stakeholder_id", required=True)
@click.option("--change", "change_json", required=True, help="JSON change document")
@click.option("--rationale", required=True)
@output_option
def codesign_propose(record_path, stakeholder_id, change_json, rationale, output):
    record = _read_record(record_path)
    version = coproduction.propose_revision(record, stakeholder_id,
                                            json.loads(change_json), rationale)
    _write_record(record, record_path)
    _emit({"version": version}, output)


@codesign.command("feedback")
@click.option("--record", "record_path", required=True)
@click.option("--comments", "comments_json", required=True, help="JSON list")
@output_option
def codesign_feedback(record_path, comments_json, output):
    record = _read_record(record_path)
    coproduction.record_feedback(record, json.loads(comments_json))
    _write_record(record, record_path)
    _emit({"rounds": len(record.feedback_rounds)}, output)


@codesign.command("flag")
@click.option("--record", "record_path", required=True)
@click.option("--item", "item_id", required=True)
@click.option("--by", "raised_by", required=True)
@click.option("--rationale", required=True)
@output_option
def codesign_flag(record_path, item_id, raised_by, rationale, output):
    record = _read_record(record_path)
    flag_id = coproduction.flag_stigma(record, item_id, raised_by, rationale)
    _write_record(record, record_path)
    _emit({"flag_id": flag_id}, output)


@codesign.command("resolve")
@click.option("--record", "record_path", required=True)
@click.option("--flag-id", type=int, required=True)
@click.option("--version", "revised_version", type=int, required=True)
@output_option
def codesign_resolve(record_path, flag_id, revised_version, output):
    record = _read_record(record_path)
    coproduction.resolve_stigma(record, flag_id, revised_version)
    _write_record(record, record_path)
    _emit({"resolved": flag_id}, output)


@codesign.command("signoff")
@click.option("--record", "record_path", required=True)
@click.option("--by", "stakeholder_id", required=True)
@click.option("--key", "key_path", required=True)
@output_option
def codesign_signoff(record_path, stakeholder_id, key_path, output):
    record = _read_record(record_path)
    pair = load_keypair(key_path)
    signature = coproduction.make_signoff_signature(record, pair)
    coproduction.signoff(record, stakeholder_id, record.latest_version, signature)
    _write_record(record, record_path)
    _emit({"signoffs": len(record.signoffs)}, output)


@codesign.command("finalize")
@click.option("--record", "record_path", required=True)
@cas_option
@click.option("--params-out", "params_path", required=True)
@output_option
def codesign_finalize(record_path, cas_dir, params_path, output):
    record = _read_record(record_path)
    params, record_digest = coproduction.finalize(record, CasStore(cas_dir))
    _write_record(record, record_path)
    Path(params_path).write_bytes(canonical.encode(params))
    _emit({"survey_id": params["survey_id"],
           "coproduction_digest": record_digest.hex()}, output)


# --- tokens ---

@main.group()
def tokens():
    """Eligibility token handling (distribution stays out of band)."""


@tokens.command("mint")
@click.option("--count", type=int, required=True)
@click.option("--out", "out_path", required=True)
@output_option
def tokens_mint(count, out_path, output):
    minted = contract.mint_tokens(count)
    Path(out_path).write_text(json.dumps({"tokens": [t.hex() for t in minted]}) + "\n")
    _emit({"count": count, "token_file": out_path}, output)


@tokens.command("export")
@click.option("--tokens", "tokens_path", required=True)
@output_option
def tokens_export(tokens_path, output):
    doc = json.loads(Path(tokens_path).read_text())
    _emit(doc if output == "json" else "\n".join(doc["tokens"]), output)


def _load_tokens(path: str) -> list[bytes]:
    return [bytes.fromhex(t) for t in json.loads(Path(path).read_text())["tokens"]]


# --- contract lifecycle ---

@main.command()
@click.option("--params", "params_path", required=True)
@click.option("--key", "key_path", required=True)
@click.option("--tokens", "tokens_path", required=True)
@ledger_option
@cas_option
@output_option
def deploy(params_path, key_path, tokens_path, ledger_path, cas_dir, output):
    """Deploy a finalized survey; token digests go on-chain."""
    cas = CasStore(cas_dir)
    ldg = _load_ledger(ledger_path, cas)
    params = canonical.decode(Path(params_path).read_bytes())
    pair = load_keypair(key_path)
    minted = _load_tokens(tokens_path)
    tx = make_transaction(contract.DEPLOY, params["survey_id"], {
        "params": params,
        "token_digests": [crypto.sha256(t).hex() for t in minted],
    }, pair)
    receipt = ldg.submit_tx(tx)
    if not receipt.accepted:
        _emit({"status": "Rejected", "reason": receipt.reason}, output)
        sys.exit(1)
    ldg.snapshot_to_file(ledger_path)
    _emit({"survey_id": params["survey_id"], "height": receipt.height}, output)


def _phase_command(kind: str):
    @click.option("--survey", "survey_id", required=True)
    @click.option("--key", "key_path", required=True)
    @ledger_option
    @cas_option
    @output_option
    def cmd(survey_id, key_path, ledger_path, cas_dir, output):
        cas = CasStore(cas_dir)
        ldg = _load_ledger(ledger_path, cas)
        receipt = ldg.submit_tx(make_transaction(kind, survey_id, {},
                                                 load_keypair(key_path)))
        if not receipt.accepted:
            _emit({"status": "Rejected", "reason": receipt.reason}, output)
            sys.exit(1)
        ldg.snapshot_to_file(ledger_path)
        _emit({"survey_id": survey_id, "phase": ldg.contracts[survey_id].phase,
               "height": receipt.height}, output)
    return cmd


main.command("open")(_phase_command(contract.OPEN))
main.command("close")(_phase_command(contract.CLOSE))


@main.command()
@click.option("--survey", "survey_id", required=True)
@click.option("--key", "key_path", required=True)
@click.option("--token", "token_hex", required=True)
@click.option("--answers", "answers_json", required=True,
              help='JSON map item_id -> value')
@ledger_option
@cas_option
@output_option
def submit(survey_id, key_path, token_hex, answers_json, ledger_path, cas_dir, output):
    """Submit a signed response (CLI stand-in for the web client)."""
    cas = CasStore(cas_dir)
    ldg = _load_ledger(ledger_path, cas)
    pair = load_keypair(key_path)
    answers = json.loads(answers_json)
    _, blob, body, tx = build_submission(survey_id, answers, pair,
                                         bytes.fromhex(token_hex))
    cas.put(blob)
    receipt = ldg.submit_tx(tx)
    if not receipt.accepted:
        _emit({"status": "Rejected", "reason": receipt.reason}, output)
        sys.exit(1)
    ldg.snapshot_to_file(ledger_path)
    _emit({"response_digest": body["response_digest"], "height": receipt.height},
          output)


@main.command()
@click.option("--survey", "survey_id", required=True)
@click.option("--key", "key_path", required=True)
@click.option("--out", "out_dir", default="reports", show_default=True)
@ledger_option
@cas_option
@output_option
def analyze(survey_id, key_path, out_dir, ledger_path, cas_dir, output):
    """Ingest, score, sign the report, and commit the analysis root on-chain."""
    cas = CasStore(cas_dir)
    ldg = _load_ledger(ledger_path, cas)
    bundle = analysis.build_report(ldg, cas, survey_id, load_keypair(key_path))
    analysis.export_report(bundle, out_dir)
    ldg.snapshot_to_file(ledger_path)
    _emit({"analysis_root": bundle.report["analysis_root"],
           "report_digest": bundle.report_digest.hex(),
           "included": len(bundle.report["included_digests"]),
           "excluded": len(bundle.report["excluded"]),
           "out_dir": out_dir}, output)


@main.group()
def report():
    """Published report handling."""


@report.command("export")
@click.option("--report-dir", "report_dir", default="reports", show_default=True)
@click.option("--plots-out", "plots_dir", default=None,
              help="also render charts into this directory")
@output_option
def report_export(report_dir, plots_dir, output):
    doc, signature = analysis.load_report(report_dir)
    written = []
    if plots_dir:
        written = [str(p) for p in analysis.export_plots(doc, plots_dir)]
    _emit({"report_digest": canonical.digest(doc).hex(),
           "signature": signature.hex(), "plots": written}, output)


@main.command("audit")
@click.option("--survey", "survey_id", required=True)
@ledger_option
@cas_option
@click.option("--report", "report_dir", default="reports", show_default=True)
@output_option
def audit_cmd(survey_id, ledger_path, cas_dir, report_dir, output):
    """Full independent audit. Exit 0 = Clean, 2 = Discrepant, 3 = unavailable."""
    try:
        cas = CasStore(cas_dir)
        ldg = _load_ledger(ledger_path, cas)
        doc, signature = analysis.load_report(report_dir)
    except (OSError, SnapshotCorrupt, ValueError):
        click.echo("audit inputs unavailable", err=True)
        sys.exit(3)
    finding = audit.full_audit(ldg, cas, survey_id, doc, signature)
    if output == "json":
        _emit(finding.to_doc(), output)
    else:
        click.echo(finding.summary())
    sys.exit(0 if finding.verdict == audit.CLEAN else 2)


@main.group("ledger")
def ledger_group():
    """Ledger snapshot tooling."""


@ledger_group.command("verify")
@click.argument("snapshot", type=click.Path(exists=True))
@output_option
def ledger_verify(snapshot, output):
    """Exit 0 if the snapshot's hash chain verifies, 1 otherwise."""
    try:
        ldg = Ledger.restore_from_file(snapshot)
    except SnapshotCorrupt as exc:
        _emit({"ok": False, "error": str(exc)}, output)
        sys.exit(1)
    ok, bad = ldg.verify_chain()
    _emit({"ok": ok, "height": ldg.height,
           "first_bad_height": -1 if bad is None else bad}, output)
    sys.exit(0 if ok else 1)


@main.group("cas")
def cas_group():
    """Content-addressed store tooling."""


@cas_group.command("put")
@click.argument("file", type=click.Path(exists=True))
@cas_option
@output_option
def cas_put(file, cas_dir, output):
    address = CasStore(cas_dir).put(Path(file).read_bytes())
    _emit({"address": address.hex()}, output)


@cas_group.command("get")
@click.argument("address")
@cas_option
def cas_get(address, cas_dir):
    sys.stdout.buffer.write(CasStore(cas_dir).get(bytes.fromhex(address)))


@cas_group.command("erase")
@click.argument("address")
@click.option("--key", "key_path", required=True)
@click.option("--reason", default="gdpr-erasure-request", show_default=True)
@click.option("--survey", "survey_id", required=True)
@ledger_option
@cas_option
@output_option
def cas_erase(address, key_path, reason, survey_id, ledger_path, cas_dir, output):
    """Erase a blob, record the tombstone, and emit a RecordErasure tx."""
    cas = CasStore(cas_dir)
    ldg = _load_ledger(ledger_path, cas)
    pair = load_keypair(key_path)
    tombstone = cas.erase(bytes.fromhex(address), reason, pair,
                          erased_at=ldg.height)
    receipt = ldg.submit_tx(make_transaction(
        contract.RECORD_ERASURE, survey_id, {"response_digest": address}, pair))
    if not receipt.accepted:
        _emit({"status": "Rejected", "reason": receipt.reason}, output)
        sys.exit(1)
    ldg.snapshot_to_file(ledger_path)
    _emit({"erased": address, "tombstone_signature": tombstone.admin_signature.hex(),
           "height": receipt.height}, output)


@main.command()
@click.option("--config", "config_path", default=None)
def serve(config_path):
    """Run the HTTP service."""
    import uvicorn
    from .service import create_app

    cfg = load_config(config_path)
    cas = CasStore(cfg.cas_dir)
    ldg = _load_ledger(cfg.ledger_path, cas)
    record = None
    if cfg.codesign_record_path and Path(cfg.codesign_record_path).exists():
        record = canonical.decode(Path(cfg.codesign_record_path).read_bytes())
    app = create_app(ldg, cas, report_dir=cfg.report_dir, codesign_record=record,
                     rate_limit_per_minute=cfg.rate_limit_per_minute,
                     snapshot_path=cfg.ledger_path)
    uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port)


def _cli_entry():  # pragma: no cover
    try:
        main(standalone_mode=True)
    except CodeweError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    _cli_entry()
