/**
 * Hashing and signatures over the Web Crypto API, so the same code runs in
 * browsers and in Node 20+ (where globalThis.crypto is webcrypto).
 */

import { encode, type CanonicalValue } from "./canonical.js";

const subtle = globalThis.crypto.subtle;

export function toHex(bytes: Uint8Array): string {
  let out = "";
  for (const b of bytes) out += b.toString(16).padStart(2, "0");
  return out;
}

export function fromHex(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-fA-F]/.test(hex)) {
    throw new Error(`invalid hex: ${hex.slice(0, 16)}...`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i += 1) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function concat(...parts: Uint8Array[]): Uint8Array {
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

export function equalBytes(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  let diff = 0;
  for (let i = 0; i < a.length; i += 1) diff |= a[i]! ^ b[i]!;
  return diff === 0;
}

export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  return new Uint8Array(await subtle.digest("SHA-256", data as BufferSource));
}

export async function digest(value: CanonicalValue): Promise<Uint8Array> {
  return sha256(encode(value));
}

// PKCS#8 wrapper for a raw Ed25519 seed (RFC 8410 structure)
const PKCS8_PREFIX = fromHex("302e020100300506032b657004220420");

function seedToPkcs8(seed: Uint8Array): Uint8Array {
  if (seed.length !== 32) throw new Error("seed must be 32 bytes");
  return concat(PKCS8_PREFIX, seed);
}

export interface KeyPair {
  privateSeed: Uint8Array;
  publicKey: Uint8Array;
}

async function importPrivate(seed: Uint8Array): Promise<CryptoKey> {
  return subtle.importKey("pkcs8", seedToPkcs8(seed) as BufferSource,
    { name: "Ed25519" }, true, ["sign"]);
}

function base64UrlToBytes(value: string): Uint8Array {
  const b64 = value.replace(/-/g, "+").replace(/_/g, "/");
  const padded = b64 + "=".repeat((4 - (b64.length % 4)) % 4);
  const raw = atob(padded);
  const out = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i += 1) out[i] = raw.charCodeAt(i);
  return out;
}

/** Derive the keypair from a 32-byte seed, or generate a fresh one. */
export async function keygen(seed?: Uint8Array): Promise<KeyPair> {
  const privateSeed =
    seed ?? globalThis.crypto.getRandomValues(new Uint8Array(32));
  const key = await importPrivate(privateSeed);
  const jwk = await subtle.exportKey("jwk", key);
  if (jwk.x === undefined) throw new Error("public key derivation failed");
  return { privateSeed, publicKey: base64UrlToBytes(jwk.x) };
}

export async function sign(
  privateSeed: Uint8Array,
  message: Uint8Array,
): Promise<Uint8Array> {
  const key = await importPrivate(privateSeed);
  return new Uint8Array(
    await subtle.sign({ name: "Ed25519" }, key, message as BufferSource),
  );
}

export async function verify(
  publicKey: Uint8Array,
  message: Uint8Array,
  signature: Uint8Array,
): Promise<boolean> {
  if (publicKey.length !== 32 || signature.length !== 64) return false;
  try {
    const key = await subtle.importKey("raw", publicKey as BufferSource,
      { name: "Ed25519" }, false, ["verify"]);
    return await subtle.verify(
      { name: "Ed25519" },
      key,
      signature as BufferSource,
      message as BufferSource,
    );
  } catch {
    return false;
  }
}
