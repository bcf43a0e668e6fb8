/**
 * Survey flow: validate answers, canonical-encode, sign locally, submit,
 * and confirm the server's receipt digest against the locally computed one
 * before anything is stored or shown as success.
 */

import type { ApiClient, SurveyInfo } from "./api.js";
import { encode, type CanonicalValue } from "./canonical.js";
import { sha256, sign, toHex } from "./crypto.js";
import { saveIdentity, type LocalIdentity, type StorageLike } from "./identity.js";

export interface SurveyItem {
  item_id: string;
  text: string;
  dimension: string;
  scale_ref: string;
  reverse_scored: boolean;
  stigma_reviewed: boolean;
}

export interface SurveyParams {
  survey_id: string;
  title: string;
  items: SurveyItem[];
  scales: Record<string, { min: number; max: number; labels?: string[] }>;
  rules: Record<string, CanonicalValue>;
}

export interface FormState {
  canSubmit: boolean;
  missingItems: string[];
  outOfRangeItems: string[];
}

/** Drives the submit button: disabled until every item has an in-range answer. */
export function validateAnswers(
  params: SurveyParams,
  answers: Record<string, number>,
): FormState {
  const missingItems: string[] = [];
  const outOfRangeItems: string[] = [];
  for (const item of params.items) {
    const value = answers[item.item_id];
    if (value === undefined) {
      missingItems.push(item.item_id);
      continue;
    }
    const scale = params.scales[item.scale_ref];
    if (
      scale === undefined ||
      !Number.isInteger(value) ||
      value < scale.min ||
      value > scale.max
    ) {
      outOfRangeItems.push(item.item_id);
    }
  }
  const extras = Object.keys(answers).filter(
    (id) => !params.items.some((item) => item.item_id === id),
  );
  return {
    canSubmit:
      missingItems.length === 0 &&
      outOfRangeItems.length === 0 &&
      extras.length === 0,
    missingItems,
    outOfRangeItems,
  };
}

// plain-language explanations shown next to the server's verbatim reason
export const REASON_EXPLANATIONS: Record<string, string> = {
  TokenReplay: "This eligibility token has already been used.",
  UnknownToken: "This eligibility token is not valid for this survey.",
  DuplicateKey: "A response from this identity was already recorded.",
  SurveyClosed: "The survey is no longer accepting responses.",
  SurveyFull: "The survey has reached its maximum number of responses.",
  InvalidSignature: "The signed submission did not verify; please retry.",
  RateLimited: "Too many submissions from this connection; wait a minute.",
  MalformedTransaction: "The submission was not understood by the server.",
};

export type SubmissionOutcome =
  | { status: "accepted"; receipt: { responseDigest: string; height: number; entryDigest: string } }
  | { status: "rejected"; reason: string; explanation: string; detail: string }
  | { status: "digest-mismatch"; localDigest: string; serverDigest: string };

export function buildResponseDoc(
  surveyId: string,
  answers: Record<string, number>,
  publicKeyHex: string,
  nonceHex: string,
): Record<string, CanonicalValue> {
  return {
    survey_id: surveyId,
    answers,
    respondent_public_key: publicKeyHex,
    client_nonce: nonceHex,
  };
}

export function commitmentSigningDoc(
  surveyId: string,
  responseDigestHex: string,
): Record<string, CanonicalValue> {
  return {
    survey_id: surveyId,
    response_digest: responseDigestHex,
    cas_address: responseDigestHex,
  };
}

/**
 * Sign and submit; the receipt is stored on the identity only after the
 * server's digest matches the locally computed one.
 */
export async function submitSurvey(
  api: ApiClient,
  storage: StorageLike,
  identity: LocalIdentity,
  survey: SurveyInfo,
  answers: Record<string, number>,
  nonce?: Uint8Array,
): Promise<SubmissionOutcome> {
  const params = survey.params as unknown as SurveyParams;
  const form = validateAnswers(params, answers);
  if (!form.canSubmit) {
    return {
      status: "rejected",
      reason: "IncompleteForm",
      explanation: "Answer every item within its scale before submitting.",
      detail: [...form.missingItems, ...form.outOfRangeItems].join(","),
    };
  }
  const clientNonce =
    nonce ?? globalThis.crypto.getRandomValues(new Uint8Array(16));
  const publicKeyHex = toHex(identity.publicKey);
  const doc = buildResponseDoc(
    params.survey_id,
    answers,
    publicKeyHex,
    toHex(clientNonce),
  );
  const digestHex = toHex(await sha256(encode(doc)));

  const innerSignature = await sign(
    identity.privateSeed,
    encode(commitmentSigningDoc(params.survey_id, digestHex)),
  );
  const body: Record<string, CanonicalValue> = {
    response_digest: digestHex,
    cas_address: digestHex,
    respondent_public_key: publicKeyHex,
    respondent_signature: toHex(innerSignature),
    eligibility_token: identity.token,
  };
  const txSignature = await sign(
    identity.privateSeed,
    encode({
      kind: "SubmitCommitment",
      contract_id: params.survey_id,
      body,
    }),
  );

  const result = await api.postResponse(params.survey_id, {
    response: doc,
    signature: toHex(innerSignature),
    tx_signature: toHex(txSignature),
    public_key: publicKeyHex,
    token: identity.token,
  });
  if (!result.ok) {
    return {
      status: "rejected",
      reason: result.rejection.reason,
      explanation:
        REASON_EXPLANATIONS[result.rejection.reason] ??
        "The server rejected the submission.",
      detail: result.rejection.detail,
    };
  }
  if (result.value.response_digest !== digestHex) {
    // prominent warning upstream; the receipt is NOT stored
    return {
      status: "digest-mismatch",
      localDigest: digestHex,
      serverDigest: result.value.response_digest,
    };
  }
  identity.receipt = {
    responseDigest: digestHex,
    height: result.value.height,
    entryDigest: result.value.entry_digest,
  };
  saveIdentity(storage, identity);
  return { status: "accepted", receipt: identity.receipt };
}
