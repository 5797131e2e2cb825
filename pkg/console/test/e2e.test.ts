/**
 * End-to-end: the console against a locally running gateway.
 *
 * Spawns the Python gateway with a test-generated operator key, drives a
 * critical call into suspension, proves a tampered signature is rejected
 * (status stays PENDING), then approves with the real key and checks the
 * run completed with an APPROVED audit record. Requires the `intentgate`
 * package installed in the active Python environment.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { reviewAndSign, toChallengeView } from "../src/challenges.js";
import { toAuditView } from "../src/audit.js";
import { toEpaView } from "../src/epa.js";
import { OperatorKey } from "../src/signing.js";

const PORT = 8700 + (process.pid % 200);
const BASE = `http://127.0.0.1:${PORT}`;
const OPERATOR_ID = "op-e2e";

let server: ChildProcess;
let client: GatewayClient;
let operatorKey: OperatorKey;

beforeAll(async () => {
  const generated = OperatorKey.generate();
  operatorKey = generated.key;

  const dir = mkdtempSync(join(tmpdir(), "intentgate-console-"));
  const operatorsPath = join(dir, "operators.json");
  writeFileSync(
    operatorsPath,
    JSON.stringify([{ operator_id: OPERATOR_ID, public_key_hex: operatorKey.publicKeyHex }]),
  );
  const configPath = join(dir, "config.json");
  writeFileSync(configPath, JSON.stringify({ operators_path: operatorsPath, port: PORT }));

  server = spawn("python3", ["-m", "intentgate.cli", "serve", "--config", configPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  server.stderr?.on("data", () => {});

  client = new GatewayClient(BASE);
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const health = await client.health();
      if (health.status === "ok") break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("gateway did not come up");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe("operator console against a live gateway", () => {
  it("steers a suspended critical run end to end", async () => {
    const trace = await client.submitIntent(
      "Revoke all access for user U-2 on document D-8821",
      "NHI-FIN-AGENT",
    );
    expect(trace.status).toBe("SUSPENDED");
    const challengeId = trace.challenge_id as string;

    // console lists the pending critical challenge
    const pending = await client.pendingChallenges();
    expect(pending.map((c) => c.challenge_id)).toContain(challengeId);
    const view = toChallengeView(pending.find((c) => c.challenge_id === challengeId)!);
    expect(view.toolName).toBe("revoke_document_access");
    expect(view.decidable).toBe(true);

    // a tampered signature (wrong key) is rejected verbatim and the
    // challenge stays PENDING: the console holds no authority
    const wrongKey = OperatorKey.generate().key;
    const rejected = await reviewAndSign(client, view, "approve", OPERATOR_ID, wrongKey);
    expect(rejected.ok).toBe(false);
    expect(rejected.error).toBe("BadSignature");
    expect(rejected.httpStatus).toBe(403);
    const stillPending = await client.pendingChallenges();
    expect(stillPending.map((c) => c.challenge_id)).toContain(challengeId);

    // the registered key approves; the suspended run completes
    const approved = await reviewAndSign(client, view, "approve", OPERATOR_ID, operatorKey);
    expect(approved.ok).toBe(true);
    expect(approved.status).toBe("APPROVED");
    expect(approved.execution?.ok).toBe(true);
    expect(approved.execution?.detail).toContain("D-8821 -> REVOKED");

    // the follow-up audit record seals the approval and the chain verifies
    const { records, chain } = await client.audit();
    const auditView = toAuditView(records, chain);
    expect(auditView.chainValid).toBe(true);
    const last = auditView.rows[auditView.rows.length - 1];
    expect(last.decision).toBe(`ALLOW:APPROVED_BY:${OPERATOR_ID}`);
    expect(last.badge).toBe("green");
  }, 20_000);

  it("signed denial terminates the suspended run", async () => {
    const trace = await client.submitIntent(
      "Revoke read access for user U-FIN-AN on document D-8823",
      "NHI-FIN-AGENT",
    );
    expect(trace.status).toBe("SUSPENDED");
    const pending = await client.pendingChallenges();
    const view = toChallengeView(
      pending.find((c) => c.challenge_id === (trace.challenge_id as string))!,
    );
    const denied = await reviewAndSign(client, view, "deny", OPERATOR_ID, operatorKey);
    expect(denied.ok).toBe(true);
    expect(denied.status).toBe("DENIED");
    const { records } = await client.audit();
    expect(records[records.length - 1].decision).toBe(`DENY:HUMAN_DENIED:${OPERATOR_ID}`);
  }, 20_000);

  it("renders the served workflow graph", async () => {
    const fixed = toEpaView(await client.epa(false));
    expect(fixed.edges).toHaveLength(5);
    const buggy = toEpaView(await client.epa(true));
    expect(buggy.edges).toHaveLength(6);
    expect(buggy.edges.filter((e) => e.buggy && e.selfLoop)).toHaveLength(1);
  }, 20_000);
});
