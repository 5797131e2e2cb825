export {
  GatewayClient,
  GatewayUnreachable,
  type AuditRecord,
  type ChainStatus,
  type DecisionResponse,
  type EpaGraph,
  type PendingChallenge,
} from "./api.js";
export { renderAudit, toAuditView, type AuditView, type Badge } from "./audit.js";
export {
  renderChallenge,
  reviewAndSign,
  toChallengeView,
  type ChallengeView,
} from "./challenges.js";
export { renderEpa, toEpaView, type EpaView } from "./epa.js";
export { OperatorKey, spkiFromRawPublicHex } from "./signing.js";
