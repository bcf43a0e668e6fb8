/**
 * Stakeholder console logic: co-design status board, report viewer state
 * (with the verified-signature badge), and the audit summary view. All
 * read-only; badges appear only after local verification passes.
 */

import type { ApiClient } from "./api.js";
import { fetchVerifiedReport, type VerifiedReport } from "./verify.js";

export interface StatusBoard {
  status: string;
  draftVersion: number;
  panelSize: number;
  signoffProgress: string;
  unresolvedFlags: number;
  allGreen: boolean;
}

export interface CodesignSummary {
  status: string;
  draft_version: number;
  panel_size: number;
  signoff_count: number;
  flags_total: number;
  flags_unresolved: number;
}

export function statusBoard(summary: CodesignSummary): StatusBoard {
  return {
    status: summary.status,
    draftVersion: summary.draft_version,
    panelSize: summary.panel_size,
    signoffProgress: `${summary.signoff_count}/${summary.panel_size}`,
    unresolvedFlags: summary.flags_unresolved,
    allGreen: summary.status === "Finalized" && summary.flags_unresolved === 0,
  };
}

export interface AuditView {
  verdict: string;
  omittedCount: number;
  erasedCount: number;
  integrityFailures: number;
  signatureFailures: number;
  chainOk: boolean;
  allGreen: boolean;
}

export function auditView(finding: Record<string, unknown>): AuditView {
  const omitted = (finding["omitted"] as string[] | undefined) ?? [];
  const erased = (finding["erased"] as string[] | undefined) ?? [];
  const integrity =
    (finding["integrity_failures"] as string[] | undefined) ?? [];
  const signatures =
    (finding["signature_failures"] as string[] | undefined) ?? [];
  const verdict = String(finding["verdict"] ?? "Unknown");
  return {
    verdict,
    omittedCount: omitted.length,
    erasedCount: erased.length,
    integrityFailures: integrity.length,
    signatureFailures: signatures.length,
    chainOk: finding["chain_ok"] === true,
    allGreen: verdict === "Clean",
  };
}

export interface ConsoleState {
  board: StatusBoard | null;
  report: VerifiedReport;
  audit: AuditView | null;
}

export async function loadConsole(
  api: ApiClient,
  surveyId: string,
): Promise<ConsoleState> {
  const codesign = await api.getCodesign(surveyId);
  const auditResult = await api.getAudit(surveyId);
  const report = await fetchVerifiedReport(api, surveyId);
  return {
    board: codesign.ok
      ? statusBoard(codesign.value as unknown as CodesignSummary)
      : null,
    report,
    audit: auditResult.ok ? auditView(auditResult.value) : null,
  };
}
