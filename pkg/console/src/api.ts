/**
 * HTTP client for the gateway API.
 *
 * The console consumes the gateway exactly as served: it never recomputes
 * digests or decides anything locally. Network failures raise
 * GatewayUnreachable (retryable); application rejections (bad signature,
 * expired challenge, ...) come back as ordinary results carrying the
 * server's verdict verbatim.
 */

export interface PendingChallenge {
  challenge_id: string;
  tool_name: string;
  args: Record<string, unknown>;
  reasoning_trace: string;
  digest: string; // hex, server-computed
  created_at: string;
  expires_at: string;
  status: string;
}

export interface AuditRecord {
  seq: number;
  timestamp: string;
  intent: string;
  plan_digest: string;
  decision: string;
  tool_name: string;
  args: string;
  mutation_summary: string;
  prev_hash: string;
  hash: string;
}

export interface ChainStatus {
  valid: boolean;
  broken_at: number | null;
}

export interface EpaState {
  label: string;
  enabled: string[];
}

export interface EpaGraph {
  name: string;
  initial: string;
  buggy: boolean;
  states: EpaState[];
  transitions: [string, string, string][];
  buggy_edges: [string, string, string][];
}

export interface DecisionResponse {
  ok: boolean;
  status?: string;
  error?: string; // server detail, verbatim
  httpStatus: number;
  audit_seq?: number;
  execution?: { ok: boolean; detail: string } | null;
}

export class GatewayUnreachable extends Error {
  readonly retryable = true;
}

export class GatewayClient {
  constructor(readonly baseUrl: string) {}

  private async get(path: string): Promise<unknown> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path);
    } catch (cause) {
      throw new GatewayUnreachable(`GET ${path}: ${String(cause)}`);
    }
    if (!response.ok) {
      throw new Error(`GET ${path} -> ${response.status}`);
    }
    return response.json();
  }

  async health(): Promise<{ status: string; components: Record<string, number> }> {
    return (await this.get("/health")) as { status: string; components: Record<string, number> };
  }

  async pendingChallenges(): Promise<PendingChallenge[]> {
    const body = (await this.get("/approvals")) as { pending: PendingChallenge[] };
    return body.pending;
  }

  async audit(): Promise<{ records: AuditRecord[]; chain: ChainStatus }> {
    return (await this.get("/audit")) as { records: AuditRecord[]; chain: ChainStatus };
  }

  async epa(buggy = false): Promise<EpaGraph> {
    return (await this.get(`/epa?buggy=${buggy}`)) as EpaGraph;
  }

  async submitIntent(
    intent: string,
    subjectId: string,
    context: { text: string; source: string }[] = [],
  ): Promise<Record<string, unknown>> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + "/intent", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ intent, subject_id: subjectId, context }),
      });
    } catch (cause) {
      throw new GatewayUnreachable(`POST /intent: ${String(cause)}`);
    }
    return (await response.json()) as Record<string, unknown>;
  }

  /** POST an approve/deny decision; 4xx rejections become {ok: false, error}. */
  async decide(
    challengeId: string,
    decision: "approve" | "deny",
    operatorId: string,
    signatureBase64: string,
  ): Promise<DecisionResponse> {
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}/approvals/${challengeId}/${decision}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ operator_id: operatorId, signature: signatureBase64 }),
      });
    } catch (cause) {
      throw new GatewayUnreachable(`POST /approvals/${challengeId}/${decision}: ${String(cause)}`);
    }
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      return {
        ok: false,
        error: String(body.detail ?? response.status),
        httpStatus: response.status,
      };
    }
    return {
      ok: true,
      status: String(body.status),
      httpStatus: response.status,
      audit_seq: body.audit_seq as number | undefined,
      execution: (body.execution ?? null) as DecisionResponse["execution"],
    };
  }
}
