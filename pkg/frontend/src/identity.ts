/**
 * Per-survey local identity: a keypair generated in the browser, the pasted
 * eligibility token, and (after a verified submission) the receipt. The
 * private seed lives only in the provided storage, under user control, and
 * never appears in any network payload.
 */

import { fromHex, keygen, toHex } from "./crypto.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface Receipt {
  responseDigest: string;
  height: number;
  entryDigest: string;
}

export interface LocalIdentity {
  surveyId: string;
  privateSeed: Uint8Array;
  publicKey: Uint8Array;
  token: string;
  receipt: Receipt | null;
}

/** In-memory Storage for tests and non-browser hosts. */
export class MemoryStorage implements StorageLike {
  private readonly map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

function storageKey(surveyId: string): string {
  return `codewe:identity:${surveyId}`;
}

export async function createIdentity(
  storage: StorageLike,
  surveyId: string,
  token: string,
  seed?: Uint8Array,
): Promise<LocalIdentity> {
  const pair = await keygen(seed);
  const identity: LocalIdentity = {
    surveyId,
    privateSeed: pair.privateSeed,
    publicKey: pair.publicKey,
    token,
    receipt: null,
  };
  saveIdentity(storage, identity);
  return identity;
}

export function saveIdentity(storage: StorageLike, identity: LocalIdentity): void {
  storage.setItem(
    storageKey(identity.surveyId),
    JSON.stringify({
      private_seed: toHex(identity.privateSeed),
      public_key: toHex(identity.publicKey),
      token: identity.token,
      receipt: identity.receipt,
    }),
  );
}

export function loadIdentity(
  storage: StorageLike,
  surveyId: string,
): LocalIdentity | null {
  const raw = storage.getItem(storageKey(surveyId));
  if (raw === null) return null;
  const doc = JSON.parse(raw) as {
    private_seed: string;
    public_key: string;
    token: string;
    receipt: Receipt | null;
  };
  return {
    surveyId,
    privateSeed: fromHex(doc.private_seed),
    publicKey: fromHex(doc.public_key),
    token: doc.token,
    receipt: doc.receipt,
  };
}

/** The explicit "forget identity" action: removes key, token, and receipt. */
export function forgetIdentity(storage: StorageLike, surveyId: string): void {
  storage.removeItem(storageKey(surveyId));
}
