/**
 * Client-side Ed25519 signing.
 *
 * The operator's signing key is loaded locally (a 32-byte hex seed file)
 * and never leaves this process; only signatures travel to the gateway.
 */

import { createPrivateKey, createPublicKey, generateKeyPairSync, sign, type KeyObject } from "node:crypto";
import { readFileSync } from "node:fs";

// DER prefixes for wrapping raw Ed25519 key material
const PKCS8_PREFIX = Buffer.from("302e020100300506032b657004220420", "hex");
const SPKI_PREFIX = Buffer.from("302a300506032b6570032100", "hex");

export class OperatorKey {
  private constructor(
    readonly key: KeyObject,
    readonly publicKeyHex: string,
  ) {}

  static fromSeedHex(seedHex: string): OperatorKey {
    const seed = Buffer.from(seedHex.trim(), "hex");
    if (seed.length !== 32) {
      throw new Error(`operator key seed must be 32 bytes, got ${seed.length}`);
    }
    const key = createPrivateKey({
      key: Buffer.concat([PKCS8_PREFIX, seed]),
      format: "der",
      type: "pkcs8",
    });
    const spki = createPublicKey(key).export({ format: "der", type: "spki" }) as Buffer;
    return new OperatorKey(key, spki.subarray(spki.length - 32).toString("hex"));
  }

  static fromSeedFile(path: string): OperatorKey {
    return OperatorKey.fromSeedHex(readFileSync(path, "utf-8"));
  }

  static generate(): { key: OperatorKey; seedHex: string } {
    const pair = generateKeyPairSync("ed25519");
    const pkcs8 = pair.privateKey.export({ format: "der", type: "pkcs8" }) as Buffer;
    const seedHex = pkcs8.subarray(pkcs8.length - 32).toString("hex");
    return { key: OperatorKey.fromSeedHex(seedHex), seedHex };
  }

  /** Sign the server-supplied challenge digest (hex); returns base64. */
  signDigestHex(digestHex: string): string {
    const digest = Buffer.from(digestHex, "hex");
    return sign(null, digest, this.key).toString("base64");
  }
}

/** Raw-public-bytes helper for registering a key with the gateway. */
export function spkiFromRawPublicHex(publicKeyHex: string): Buffer {
  return Buffer.concat([SPKI_PREFIX, Buffer.from(publicKeyHex, "hex")]);
}
