#!/usr/bin/env node
/**
 * Polling operator console.
 *
 * Usage:
 *   node dist/console.js --gateway http://127.0.0.1:8000 \
 *       --operator demo-operator --key ../demos/demo_operator_key.hex \
 *       [--interval 5] [--auto approve|deny] [--once] [--show audit|epa]
 *
 * Without --auto the console lists pending challenges, the audit chain and
 * the graph; with --auto it signs every decidable challenge with the local
 * key (intended for scripted demos, not production).
 */

import { GatewayClient, GatewayUnreachable } from "./api.js";
import { renderAudit, toAuditView } from "./audit.js";
import { renderChallenge, reviewAndSign, toChallengeView } from "./challenges.js";
import { renderEpa, toEpaView } from "./epa.js";
import { OperatorKey } from "./signing.js";

interface Options {
  gateway: string;
  operator: string;
  keyPath: string | null;
  intervalSeconds: number;
  auto: "approve" | "deny" | null;
  once: boolean;
  show: Set<string>;
}

function parseArgs(argv: string[]): Options {
  const options: Options = {
    gateway: "http://127.0.0.1:8000",
    operator: "demo-operator",
    keyPath: null,
    intervalSeconds: 5,
    auto: null,
    once: false,
    show: new Set(["challenges"]),
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--gateway") options.gateway = argv[++i];
    else if (arg === "--operator") options.operator = argv[++i];
    else if (arg === "--key") options.keyPath = argv[++i];
    else if (arg === "--interval") options.intervalSeconds = Number(argv[++i]);
    else if (arg === "--auto") options.auto = argv[++i] as "approve" | "deny";
    else if (arg === "--once") options.once = true;
    else if (arg === "--show") options.show.add(argv[++i]);
    else throw new Error(`unknown argument: ${arg}`);
  }
  return options;
}

async function tick(client: GatewayClient, options: Options, key: OperatorKey | null) {
  const pending = await client.pendingChallenges();
  if (pending.length === 0) {
    console.log("no pending challenges");
  }
  for (const challenge of pending) {
    const view = toChallengeView(challenge);
    console.log(renderChallenge(view));
    if (options.auto && key && view.decidable) {
      const result = await reviewAndSign(client, view, options.auto, options.operator, key);
      console.log(
        result.ok
          ? `  -> ${result.status} (audit seq ${result.audit_seq})`
          : `  -> rejected: ${result.error}`,
      );
    }
  }
  if (options.show.has("audit")) {
    const { records, chain } = await client.audit();
    console.log(renderAudit(toAuditView(records, chain)));
  }
  if (options.show.has("epa")) {
    console.log(renderEpa(toEpaView(await client.epa())));
  }
}

async function main() {
  const options = parseArgs(process.argv.slice(2));
  const key = options.keyPath ? OperatorKey.fromSeedFile(options.keyPath) : null;
  const client = new GatewayClient(options.gateway);
  for (;;) {
    try {
      await tick(client, options, key);
    } catch (error) {
      if (error instanceof GatewayUnreachable) {
        console.error(`gateway unreachable, will retry: ${error.message}`);
      } else {
        throw error;
      }
    }
    if (options.once) break;
    await new Promise((resolve) => setTimeout(resolve, options.intervalSeconds * 1000));
  }
}

main().catch((error) => {
  console.error(String(error));
  process.exit(1);
});
