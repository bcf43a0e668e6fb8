/**
 * Verification flow: all inclusion and signature math runs locally over raw
 * data fetched from the server; the server's own verdicts are never trusted.
 * Network failures surface as a retryable state, never as "not included".
 */

import type { ApiClient, ProofDoc } from "./api.js";
import { encode, type CanonicalValue } from "./canonical.js";
import { fromHex, sha256, toHex, verify } from "./crypto.js";
import { merkleVerify, type MerkleProof } from "./merkle.js";

export type InclusionStatus =
  | { status: "included"; analysisRoot: string }
  | { status: "not-included"; failedCheck: string }
  | { status: "not-yet-analyzed" };

export function proofFromDoc(doc: ProofDoc): MerkleProof {
  return {
    leafIndex: doc.leaf_index,
    siblings: doc.siblings.map(fromHex),
    treeSize: doc.tree_size,
  };
}

/**
 * Verify a receipt against the server's published analysis root by
 * recomputing the Merkle path locally. NetworkError propagates so callers
 * can offer a retry.
 */
export async function verifyInclusion(
  api: ApiClient,
  surveyId: string,
  responseDigestHex: string,
): Promise<InclusionStatus> {
  const result = await api.getProof(surveyId, responseDigestHex);
  if (!result.ok) {
    if (result.rejection.reason === "NotYetAnalyzed") {
      return { status: "not-yet-analyzed" };
    }
    // the server claims the response is absent from the analysis set; that
    // is exactly a completeness failure from the respondent's point of view
    return { status: "not-included", failedCheck: "completeness" };
  }
  const proof = proofFromDoc(result.value.proof);
  const ok = await merkleVerify(
    fromHex(result.value.analysis_root),
    fromHex(responseDigestHex),
    proof,
  );
  if (!ok) {
    return { status: "not-included", failedCheck: "merkle-proof" };
  }
  return { status: "included", analysisRoot: result.value.analysis_root };
}

export interface ReportVerification {
  verified: boolean;
  failedCheck: string | null;
  reportDigest: string;
}

/** Recompute the report digest and check the admin signature locally. */
export async function verifyReportSignature(
  report: Record<string, CanonicalValue>,
  signatureHex: string,
  adminPublicKeyHex: string,
): Promise<ReportVerification> {
  const reportDigest = await sha256(encode(report));
  const ok = await verify(
    fromHex(adminPublicKeyHex),
    reportDigest,
    fromHex(signatureHex),
  );
  return {
    verified: ok,
    failedCheck: ok ? null : "report-signature",
    reportDigest: toHex(reportDigest),
  };
}

export interface VerifiedReport {
  available: boolean;
  report: Record<string, CanonicalValue> | null;
  badge: "verified" | "unverified";
}

/** Fetch the report and verify its signature before rendering. */
export async function fetchVerifiedReport(
  api: ApiClient,
  surveyId: string,
): Promise<VerifiedReport> {
  const survey = await api.getSurvey(surveyId);
  const result = await api.getReport(surveyId);
  if (!survey.ok || !result.ok) {
    return { available: false, report: null, badge: "unverified" };
  }
  const check = await verifyReportSignature(
    result.value.report,
    result.value.signature,
    survey.value.admin_public_key,
  );
  // never a silent render: an unverifiable report is explicitly unverified
  return {
    available: true,
    report: result.value.report,
    badge: check.verified ? "verified" : "unverified",
  };
}
