import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiClient, type FetchLike } from "../src/api.js";
import type { CanonicalValue } from "../src/canonical.js";
import { auditView, loadConsole, statusBoard } from "../src/console.js";

const fixture = JSON.parse(
  readFileSync(
    new URL("./fixtures/omission_fixture.json", import.meta.url),
    "utf-8",
  ),
) as {
  survey_id: string;
  survey: Record<string, unknown>;
  report: Record<string, CanonicalValue>;
  report_signature: string;
};

describe("statusBoard", () => {
  it("is green only when finalized with no unresolved flags", () => {
    const board = statusBoard({
      status: "Finalized",
      draft_version: 3,
      panel_size: 5,
      signoff_count: 5,
      flags_total: 2,
      flags_unresolved: 0,
    });
    expect(board.signoffProgress).toBe("5/5");
    expect(board.unresolvedFlags).toBe(0);
    expect(board.allGreen).toBe(true);
  });

  it("stays amber while flags are open or signoffs are missing", () => {
    expect(
      statusBoard({
        status: "Finalized",
        draft_version: 2,
        panel_size: 4,
        signoff_count: 4,
        flags_total: 1,
        flags_unresolved: 1,
      }).allGreen,
    ).toBe(false);
    expect(
      statusBoard({
        status: "Drafting",
        draft_version: 1,
        panel_size: 4,
        signoff_count: 2,
        flags_total: 0,
        flags_unresolved: 0,
      }).allGreen,
    ).toBe(false);
  });
});

describe("auditView", () => {
  it("renders a clean finding as all green", () => {
    const view = auditView({
      verdict: "Clean",
      chain_ok: true,
      omitted: [],
      erased: ["aa".repeat(32)],
      integrity_failures: [],
      signature_failures: [],
    });
    expect(view.allGreen).toBe(true);
    expect(view.erasedCount).toBe(1);
    expect(view.chainOk).toBe(true);
  });

  it("surfaces omissions from a discrepant finding", () => {
    const view = auditView({
      verdict: "Discrepant",
      chain_ok: true,
      omitted: ["bb".repeat(32), "cc".repeat(32)],
      erased: [],
      integrity_failures: ["dd".repeat(32)],
      signature_failures: [],
    });
    expect(view.allGreen).toBe(false);
    expect(view.omittedCount).toBe(2);
    expect(view.integrityFailures).toBe(1);
  });
});

function consoleServer(auditVerdict: string): FetchLike {
  const sid = fixture.survey_id;
  return async (url) => {
    const respond = (status: number, body: unknown) => ({
      status,
      json: async () => body,
    });
    if (url.endsWith(`/surveys/${sid}`)) return respond(200, fixture.survey);
    if (url.endsWith("/codesign")) {
      return respond(200, {
        status: "Finalized",
        draft_version: 1,
        panel_size: 3,
        signoff_count: 3,
        flags_total: 0,
        flags_unresolved: 0,
      });
    }
    if (url.endsWith("/audit")) {
      return respond(200, {
        verdict: auditVerdict,
        chain_ok: true,
        omitted: auditVerdict === "Clean" ? [] : [fixture.survey_id],
        erased: [],
        integrity_failures: [],
        signature_failures: [],
      });
    }
    if (url.endsWith("/report")) {
      return respond(200, {
        report: fixture.report,
        signature: fixture.report_signature,
        analysis_root: fixture.report["analysis_root"],
      });
    }
    return respond(404, { reason: "Unknown", detail: url });
  };
}

describe("loadConsole", () => {
  it("assembles the board, verified report, and audit view", async () => {
    const api = new ApiClient("http://svc", consoleServer("Clean"));
    const state = await loadConsole(api, fixture.survey_id);
    expect(state.board?.allGreen).toBe(true);
    expect(state.report.available).toBe(true);
    expect(state.report.badge).toBe("verified");
    expect(state.audit?.allGreen).toBe(true);
  });

  it("shows a discrepant audit without hiding the report", async () => {
    const api = new ApiClient("http://svc", consoleServer("Discrepant"));
    const state = await loadConsole(api, fixture.survey_id);
    expect(state.audit?.allGreen).toBe(false);
    expect(state.audit?.omittedCount).toBe(1);
    expect(state.report.available).toBe(true);
  });
});
