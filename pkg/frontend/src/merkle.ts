/**
 * RFC 6962-style Merkle trees: leaf hash 0x00 || leaf, node hash
 * 0x01 || left || right, split at the largest power of two below the
 * leaf count. Verification runs entirely locally.
 */

import { concat, equalBytes, sha256 } from "./crypto.js";

export interface MerkleProof {
  leafIndex: number;
  siblings: Uint8Array[];
  treeSize: number;
}

const LEAF_PREFIX = new Uint8Array([0x00]);
const NODE_PREFIX = new Uint8Array([0x01]);

export async function leafHash(leaf: Uint8Array): Promise<Uint8Array> {
  return sha256(concat(LEAF_PREFIX, leaf));
}

export async function nodeHash(
  left: Uint8Array,
  right: Uint8Array,
): Promise<Uint8Array> {
  return sha256(concat(NODE_PREFIX, left, right));
}

function splitPoint(n: number): number {
  let k = 1;
  while (2 * k < n) k *= 2;
  return k;
}

export async function merkleRoot(leaves: Uint8Array[]): Promise<Uint8Array> {
  if (leaves.length === 0) throw new Error("empty tree has no root");
  if (leaves.length === 1) return leafHash(leaves[0]!);
  const k = splitPoint(leaves.length);
  return nodeHash(
    await merkleRoot(leaves.slice(0, k)),
    await merkleRoot(leaves.slice(k)),
  );
}

export async function merkleProve(
  leaves: Uint8Array[],
  index: number,
): Promise<MerkleProof> {
  if (index < 0 || index >= leaves.length) throw new Error("index out of range");
  const siblings: Uint8Array[] = [];
  async function path(slice: Uint8Array[], i: number): Promise<void> {
    if (slice.length === 1) return;
    const k = splitPoint(slice.length);
    if (i < k) {
      await path(slice.slice(0, k), i);
      siblings.push(await merkleRoot(slice.slice(k)));
    } else {
      await path(slice.slice(k), i - k);
      siblings.push(await merkleRoot(slice.slice(0, k)));
    }
  }
  await path(leaves, index);
  return { leafIndex: index, siblings, treeSize: leaves.length };
}

/** RFC 9162 §2.1.3.2 inclusion-proof verification. */
export async function merkleVerify(
  root: Uint8Array,
  leaf: Uint8Array,
  proof: MerkleProof,
): Promise<boolean> {
  if (proof.leafIndex < 0 || proof.leafIndex >= proof.treeSize) return false;
  let fn = proof.leafIndex;
  let sn = proof.treeSize - 1;
  let r = await leafHash(leaf);
  for (const sibling of proof.siblings) {
    if (sn === 0) return false;
    if (fn % 2 === 1 || fn === sn) {
      r = await nodeHash(sibling, r);
      while (fn % 2 === 0 && fn !== 0) {
        fn = Math.floor(fn / 2);
        sn = Math.floor(sn / 2);
      }
    } else {
      r = await nodeHash(r, sibling);
    }
    fn = Math.floor(fn / 2);
    sn = Math.floor(sn / 2);
  }
  return sn === 0 && equalBytes(r, root);
}
