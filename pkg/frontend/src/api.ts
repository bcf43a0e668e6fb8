/**
 * Thin typed wrapper over the HTTP service. The fetch implementation is
 * injectable so tests can run against fixture servers; network failures
 * surface as NetworkError (a retryable state), never as a verdict.
 */

import type { CanonicalValue } from "./canonical.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class NetworkError extends Error {
  readonly retryable = true;
}

export interface Rejection {
  status: number;
  reason: string;
  detail: string;
}

export type ApiResult<T> =
  | { ok: true; value: T }
  | { ok: false; rejection: Rejection };

export interface SurveyInfo {
  params: Record<string, CanonicalValue>;
  phase: string;
  admin_public_key: string;
}

export interface SubmitReceipt {
  response_digest: string;
  height: number;
  entry_digest: string;
}

export interface ProofDoc {
  leaf_index: number;
  siblings: string[];
  tree_size: number;
}

export interface ProofResponse {
  proof: ProofDoc;
  analysis_root: string;
}

export interface ReportResponse {
  report: Record<string, CanonicalValue>;
  signature: string;
  analysis_root: string;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(
    path: string,
    init?: { method?: string; body?: string },
  ): Promise<ApiResult<T>> {
    let response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        ...init,
        headers: init?.body ? { "content-type": "application/json" } : undefined,
      });
    } catch (error) {
      throw new NetworkError(String(error));
    }
    const body = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      return {
        ok: false,
        rejection: {
          status: response.status,
          reason: String(body["reason"] ?? "Unknown"),
          detail: String(body["detail"] ?? ""),
        },
      };
    }
    return { ok: true, value: body as T };
  }

  getSurvey(surveyId: string): Promise<ApiResult<SurveyInfo>> {
    return this.request(`/surveys/${surveyId}`);
  }

  postResponse(
    surveyId: string,
    payload: Record<string, unknown>,
  ): Promise<ApiResult<SubmitReceipt>> {
    return this.request(`/surveys/${surveyId}/responses`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  getProof(surveyId: string, digestHex: string): Promise<ApiResult<ProofResponse>> {
    return this.request(`/surveys/${surveyId}/proof/${digestHex}`);
  }

  getReport(surveyId: string): Promise<ApiResult<ReportResponse>> {
    return this.request(`/surveys/${surveyId}/report`);
  }

  getAudit(surveyId: string): Promise<ApiResult<Record<string, unknown>>> {
    return this.request(`/surveys/${surveyId}/audit`);
  }

  getCodesign(surveyId: string): Promise<ApiResult<Record<string, unknown>>> {
    return this.request(`/surveys/${surveyId}/codesign`);
  }
}
