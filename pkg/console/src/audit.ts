/**
 * Audit chain view: one badge per record, derived from the server-reported
 * verification status (a break at record k turns every badge from k on red).
 */

import type { AuditRecord, ChainStatus } from "./api.js";

export type Badge = "green" | "red";

export interface AuditRow {
  seq: number;
  timestamp: string;
  decision: string;
  toolName: string;
  mutationSummary: string;
  hashPrefix: string;
  badge: Badge;
}

export interface AuditView {
  rows: AuditRow[];
  chainValid: boolean;
  brokenAt: number | null;
  emptyState: boolean;
}

export function toAuditView(records: AuditRecord[], chain: ChainStatus): AuditView {
  const rows = records.map((record) => ({
    seq: record.seq,
    timestamp: record.timestamp,
    decision: record.decision,
    toolName: record.tool_name,
    mutationSummary: record.mutation_summary,
    hashPrefix: record.hash.slice(0, 12),
    badge: (chain.valid || record.seq < (chain.broken_at ?? 0) ? "green" : "red") as Badge,
  }));
  return {
    rows,
    chainValid: chain.valid,
    brokenAt: chain.broken_at,
    emptyState: records.length === 0,
  };
}

export function renderAudit(view: AuditView): string {
  if (view.emptyState) {
    return "audit ledger is empty";
  }
  const header = view.chainValid
    ? "audit chain: VALID"
    : `audit chain: BROKEN at seq ${view.brokenAt}`;
  const lines = view.rows.map(
    (row) =>
      `${row.badge === "green" ? "[ok]" : "[!!]"} seq ${row.seq}  ${row.hashPrefix}..  ` +
      `${row.decision}  ${row.toolName || "-"}  ${row.mutationSummary}`,
  );
  return [header, ...lines].join("\n");
}
