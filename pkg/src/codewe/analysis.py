"""Analysis data plane: ingest committed responses from CAS into a query
store, verify them, score Likert instruments, and produce the signed,
Merkle-committed report.

Statistics use exact rational arithmetic rendered to 4 decimal places
(half-even), so independently recomputed reports are byte-identical.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import canonical, contract, crypto
from .cas import CasStore
from .errors import BlobErased, BlobNotFound, IntegrityViolation, WrongPhase
from .ledger import Ledger, make_transaction
from .merkle import merkle_prove, merkle_root

EXCL_ERASED = "erased"
EXCL_INTEGRITY = "integrity_failure"
EXCL_SIGNATURE = "signature_failure"

# root committed for an empty analysis; RFC 6962 defines the empty tree
# root as the hash of the empty string
EMPTY_ROOT = crypto.sha256(b"")


def render_fraction(value: Fraction, places: int = 4) -> str:
    """Exact decimal rendering with half-even rounding at ``places``."""
    scale = 10 ** places
    num, den = value.numerator * scale, value.denominator
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q % 2 == 1):
        q += 1
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // scale}.{q % scale:0{places}d}"


def fold_value(value: int, scale: dict, reverse_scored: bool) -> int:
    return scale["min"] + scale["max"] - value if reverse_scored else value


def build_response_doc(survey_id: bytes, answers: dict[str, int],
                       respondent_public_key: bytes, client_nonce: bytes) -> dict:
    return {
        "survey_id": survey_id.hex(),
        "answers": answers,
        "respondent_public_key": respondent_public_key.hex(),
        "client_nonce": client_nonce.hex(),
    }


def validate_response_doc(doc: dict, params: dict) -> bool:
    """Every item answered exactly once, each value within its scale."""
    try:
        if doc["survey_id"] != params["survey_id"]:
            return False
        answers = doc["answers"]
        item_ids = {it["item_id"] for it in params["items"]}
        if set(answers) != item_ids:
            return False
        for item in params["items"]:
            value = answers[item["item_id"]]
            if isinstance(value, bool) or not isinstance(value, int):
                return False
            scale = params["scales"][item["scale_ref"]]
            if not scale["min"] <= value <= scale["max"]:
                return False
        if len(bytes.fromhex(doc["client_nonce"])) != 16:
            return False
        bytes.fromhex(doc["respondent_public_key"])
    except (KeyError, TypeError, ValueError):
        return False
    return True


class QueryStore:
    """Embedded relational cache of verified responses, rebuildable from
    ledger + CAS alone."""

    def __init__(self):
        self._db = sqlite3.connect(":memory:")
        self._db.execute(
            "CREATE TABLE responses ("
            "response_digest TEXT, item_id TEXT, value INTEGER,"
            "dimension TEXT, logical_time INTEGER)")
        self._db.execute("CREATE INDEX idx_item ON responses (item_id)")

    def add_response(self, response_digest: str, answers: dict[str, int],
                     params: dict, logical_time: int) -> None:
        rows = [
            (response_digest, it["item_id"], answers[it["item_id"]],
             it["dimension"], logical_time)
            for it in params["items"]
        ]
        self._db.executemany("INSERT INTO responses VALUES (?,?,?,?,?)", rows)

    def row_count(self) -> int:
        return self._db.execute("SELECT COUNT(*) FROM responses").fetchone()[0]

    def item_values(self, item_id: str) -> list[int]:
        cur = self._db.execute(
            "SELECT value FROM responses WHERE item_id = ? "
            "ORDER BY logical_time", (item_id,))
        return [r[0] for r in cur.fetchall()]

    def response_answers(self) -> list[tuple[str, dict[str, int]]]:
        """(response_digest, answers) in ledger order."""
        cur = self._db.execute(
            "SELECT response_digest, item_id, value, logical_time FROM responses "
            "ORDER BY logical_time")
        out: dict[str, dict[str, int]] = {}
        order: list[str] = []
        for digest, item_id, value, _ in cur.fetchall():
            if digest not in out:
                out[digest] = {}
                order.append(digest)
            out[digest][item_id] = value
        return [(d, out[d]) for d in order]


def ingest(ldg: Ledger, cas: CasStore, contract_id: str):
    """Fetch, verify, and load every on-chain commitment.

    Returns (store, included_digests, excluded) where excluded entries carry
    one of the reasons erased / integrity_failure / signature_failure.
    Deterministic given the same ledger + CAS.
    """
    state = ldg.contracts.get(contract_id)
    if state is None or state.phase not in (contract.CLOSED, contract.ANALYZED):
        raise WrongPhase(f"contract must be Closed, is "
                         f"{state.phase if state else 'unknown'}")
    params = state.params
    erased_on_chain = set(state.erasures)
    store = QueryStore()
    included: list[str] = []
    excluded: list[dict] = []

    for commitment in state.commitments:
        digest_hex = commitment["response_digest"]
        if digest_hex in erased_on_chain:
            excluded.append({"digest": digest_hex, "reason": EXCL_ERASED})
            continue
        try:
            blob = cas.get(bytes.fromhex(digest_hex))
        except BlobErased:
            excluded.append({"digest": digest_hex, "reason": EXCL_ERASED})
            continue
        except (BlobNotFound, IntegrityViolation):
            excluded.append({"digest": digest_hex, "reason": EXCL_INTEGRITY})
            continue
        if crypto.sha256(blob) != bytes.fromhex(digest_hex):
            excluded.append({"digest": digest_hex, "reason": EXCL_INTEGRITY})
            continue
        signing = canonical.encode(contract.commitment_signing_doc(
            bytes.fromhex(contract_id),
            bytes.fromhex(digest_hex),
            bytes.fromhex(commitment["cas_address"])))
        if not crypto.verify(bytes.fromhex(commitment["respondent_public_key"]),
                             signing,
                             bytes.fromhex(commitment["respondent_signature"])):
            excluded.append({"digest": digest_hex, "reason": EXCL_SIGNATURE})
            continue
        try:
            doc = canonical.decode(blob)
        except Exception:
            excluded.append({"digest": digest_hex, "reason": EXCL_INTEGRITY})
            continue
        if (not validate_response_doc(doc, params)
                or canonical.encode(doc) != blob
                or doc["respondent_public_key"] != commitment["respondent_public_key"]):
            excluded.append({"digest": digest_hex, "reason": EXCL_INTEGRITY})
            continue
        store.add_response(digest_hex, doc["answers"], params, commitment["logical_time"])
        included.append(digest_hex)

    return store, included, excluded


def _stats(values: list[int]) -> dict:
    if not values:
        return {"n": 0, "distribution": {}}
    ordered = sorted(values)
    return {
        "n": len(values),
        "mean": render_fraction(Fraction(sum(values), len(values))),
        "median": ordered[(len(ordered) - 1) // 2],  # lower-middle for even n
        "distribution": {str(v): ordered.count(v) for v in sorted(set(ordered))},
    }


def score(store: QueryStore, params: dict) -> dict:
    """Per-item, per-dimension, and total-score statistics with reverse-scored
    items folded as min+max-value."""
    item_stats: dict[str, dict] = {}
    dim_values: dict[str, list[int]] = {}
    for item in params["items"]:
        scale = params["scales"][item["scale_ref"]]
        folded = [fold_value(v, scale, item["reverse_scored"])
                  for v in store.item_values(item["item_id"])]
        item_stats[item["item_id"]] = _stats(folded)
        dim_values.setdefault(item["dimension"], []).extend(folded)

    dimensions = {}
    for dim, values in sorted(dim_values.items()):
        dimensions[dim] = {"n": len(values)}
        if values:
            dimensions[dim]["mean"] = render_fraction(Fraction(sum(values), len(values)))

    totals = []
    for _, answers in store.response_answers():
        total = 0
        for item in params["items"]:
            scale = params["scales"][item["scale_ref"]]
            total += fold_value(answers[item["item_id"]], scale, item["reverse_scored"])
        totals.append(total)

    return {"items": item_stats, "dimensions": dimensions, "total": _stats(totals)}


@dataclass(frozen=True)
class ReportBundle:
    report: dict            # canonical report document
    report_digest: bytes
    admin_signature: bytes
    proofs: dict[str, dict]  # response_digest hex -> proof doc


def proof_to_doc(proof) -> dict:
    return {
        "leaf_index": proof.leaf_index,
        "siblings": [s.hex() for s in proof.siblings],
        "tree_size": proof.tree_size,
    }


def proof_from_doc(doc):
    from .merkle import MerkleProof
    return MerkleProof(leaf_index=doc["leaf_index"],
                       siblings=tuple(bytes.fromhex(s) for s in doc["siblings"]),
                       tree_size=doc["tree_size"])


def assemble_report(ldg: Ledger, cas: CasStore, contract_id: str) -> tuple[dict, dict[str, dict]]:
    """Deterministic (pre-signature) report + per-respondent proofs."""
    store, included, excluded = ingest(ldg, cas, contract_id)
    state = ldg.contracts[contract_id]
    leaves = [bytes.fromhex(d) for d in included]
    root = merkle_root(leaves) if leaves else EMPTY_ROOT
    report = {
        "survey_id": contract_id,
        "included_digests": included,
        "excluded": excluded,
        "analysis_root": root.hex(),
    }
    report.update(score(store, state.params))
    proofs = {
        d: proof_to_doc(merkle_prove(leaves, i))
        for i, d in enumerate(included)
    }
    return report, proofs


def build_report(ldg: Ledger, cas: CasStore, contract_id: str,
                 admin_key: crypto.KeyPair) -> ReportBundle:
    """Assemble the report, sign it, and commit analysis_root + report_digest
    on-chain."""
    report, proofs = assemble_report(ldg, cas, contract_id)
    report_digest = canonical.digest(report)
    signature = crypto.sign(admin_key.private_seed, report_digest)
    tx = make_transaction(contract.COMMIT_ANALYSIS, contract_id, {
        "analysis_root": report["analysis_root"],
        "report_digest": report_digest.hex(),
    }, admin_key)
    receipt = ldg.submit_tx(tx)
    if not receipt.accepted:
        raise WrongPhase(f"commit rejected: {receipt.reason}")
    return ReportBundle(report=report, report_digest=report_digest,
                        admin_signature=signature, proofs=proofs)


def export_report(bundle: ReportBundle, out_dir: str | Path) -> Path:
    """Write report.json (canonical), detached report.json.sig, and one proof
    file per included response."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(canonical.encode(bundle.report))
    (out / "report.json.sig").write_text(bundle.admin_signature.hex() + "\n")
    proof_dir = out / "proofs"
    proof_dir.mkdir(exist_ok=True)
    for digest_hex, proof_doc in bundle.proofs.items():
        (proof_dir / f"{digest_hex}.json").write_bytes(canonical.encode(proof_doc))
    return out


def load_report(out_dir: str | Path) -> tuple[dict, bytes]:
    out = Path(out_dir)
    report = canonical.decode((out / "report.json").read_bytes())
    signature = bytes.fromhex((out / "report.json.sig").read_text().strip())
    return report, signature


def export_plots(report: dict, out_dir: str | Path) -> list[Path]:
    """Deterministic SVG charts: one distribution bar chart per item plus a
    per-dimension means chart."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "codewe"

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def save(fig, name: str) -> None:
        path = out / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    for item_id in sorted(report["items"]):
        stats = report["items"][item_id]
        fig, ax = plt.subplots(figsize=(4, 3))
        dist = stats.get("distribution", {})
        if dist:
            keys = sorted(dist, key=int)
            ax.bar(keys, [dist[k] for k in keys], color="#4878a8")
        else:
            ax.text(0.5, 0.5, "no data", ha="center", va="center")
        ax.set_title(f"{item_id} (n={stats['n']})")
        ax.set_xlabel("folded value")
        ax.set_ylabel("count")
        fig.tight_layout()
        save(fig, f"item_{item_id}.svg")

    fig, ax = plt.subplots(figsize=(5, 3))
    dims = sorted(d for d in report["dimensions"] if "mean" in report["dimensions"][d])
    if dims:
        ax.bar(dims, [float(report["dimensions"][d]["mean"]) for d in dims],
               color="#6aa84f")
    else:
        ax.text(0.5, 0.5, "no data", ha="center", va="center")
    ax.set_title("per-dimension means")
    ax.set_ylabel("mean (folded)")
    fig.tight_layout()
    save(fig, "dimensions.svg")
    return written
