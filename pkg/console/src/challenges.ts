/**
 * Challenge review: view models and the sign-and-submit flow.
 *
 * The rendered digest is always the server-supplied one; the console has
 * no recomputation authority and a wrong key simply collects a server
 * rejection.
 */

import type { DecisionResponse, GatewayClient, PendingChallenge } from "./api.js";
import type { OperatorKey } from "./signing.js";

export interface ChallengeView {
  challengeId: string;
  toolName: string;
  prettyArgs: string;
  reasoningTrace: string;
  digestHex: string;
  expiresInSeconds: number;
  status: string;
  decidable: boolean;
}

export function toChallengeView(challenge: PendingChallenge, now: Date = new Date()): ChallengeView {
  const expiresInSeconds = Math.floor(
    (new Date(challenge.expires_at).getTime() - now.getTime()) / 1000,
  );
  return {
    challengeId: challenge.challenge_id,
    toolName: challenge.tool_name,
    prettyArgs: JSON.stringify(challenge.args, Object.keys(challenge.args).sort(), 2),
    reasoningTrace: challenge.reasoning_trace,
    digestHex: challenge.digest,
    expiresInSeconds,
    status: challenge.status,
    decidable: challenge.status === "PENDING" && expiresInSeconds > 0,
  };
}

export function renderChallenge(view: ChallengeView): string {
  const countdown = view.decidable
    ? `expires in ${view.expiresInSeconds}s`
    : "EXPIRED — actions disabled";
  return [
    `challenge ${view.challengeId} [${view.status}] (${countdown})`,
    `  tool:   ${view.toolName}`,
    `  args:   ${view.prettyArgs.split("\n").join("\n          ")}`,
    `  trace:  ${view.reasoningTrace}`,
    `  digest: ${view.digestHex}`,
  ].join("\n");
}

/**
 * Sign the challenge digest locally and submit the decision; the server's
 * verdict (including a verbatim BadSignature) is returned, never masked.
 */
export async function reviewAndSign(
  client: GatewayClient,
  view: ChallengeView,
  decision: "approve" | "deny",
  operatorId: string,
  key: OperatorKey,
): Promise<DecisionResponse> {
  if (!view.decidable) {
    return { ok: false, error: "challenge is not decidable (expired or terminal)", httpStatus: 0 };
  }
  const signature = key.signDigestHex(view.digestHex);
  return client.decide(view.challengeId, decision, operatorId, signature);
}
