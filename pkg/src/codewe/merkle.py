"""RFC 6962-style Merkle trees over 32-byte digests.

Leaf nodes are hash(0x00 || leaf), interior nodes hash(0x01 || left || right),
and unbalanced trees split at the largest power of two strictly below n.
The prefixes domain-separate leaves from interior nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import sha256
from .errors import EmptyTree, IndexOutOfRange

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


@dataclass(frozen=True)
class MerkleProof:
    leaf_index: int
    siblings: tuple[bytes, ...]
    tree_size: int


def leaf_hash(leaf: bytes) -> bytes:
    return sha256(LEAF_PREFIX + leaf)


def node_hash(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_PREFIX + left + right)


def _split(n: int) -> int:
    # largest power of two strictly less than n (n >= 2)
    k = 1
    while k * 2 < n:
        k *= 2
    return k


def merkle_root(leaves: list[bytes]) -> bytes:
    if not leaves:
        raise EmptyTree("cannot compute root of zero leaves")
    n = len(leaves)
    if n == 1:
        return leaf_hash(leaves[0])
    k = _split(n)
    return node_hash(merkle_root(leaves[:k]), merkle_root(leaves[k:]))


def merkle_prove(leaves: list[bytes], index: int) -> MerkleProof:
    if not leaves:
        raise EmptyTree("cannot prove against zero leaves")
    if not 0 <= index < len(leaves):
        raise IndexOutOfRange(f"index {index} out of range for {len(leaves)} leaves")

    def path(m: int, sub: list[bytes]) -> list[bytes]:
        n = len(sub)
        if n == 1:
            return []
        k = _split(n)
        if m < k:
            return path(m, sub[:k]) + [merkle_root(sub[k:])]
        return path(m - k, sub[k:]) + [merkle_root(sub[:k])]

    return MerkleProof(leaf_index=index, siblings=tuple(path(index, leaves)), tree_size=len(leaves))


def merkle_verify(root: bytes, leaf: bytes, proof: MerkleProof) -> bool:
    """Recompute the root from leaf + proof; pure, no external state."""
    fn, sn = proof.leaf_index, proof.tree_size - 1
    if proof.tree_size < 1 or fn > sn:
        return False
    r = leaf_hash(leaf)
    for sibling in proof.siblings:
        if sn == 0:
            return False
        if fn % 2 == 1 or fn == sn:
            r = node_hash(sibling, r)
            if fn % 2 == 0:
                while fn % 2 == 0 and fn != 0:
                    fn >>= 1
                    sn >>= 1
        else:
            r = node_hash(r, sibling)
        fn >>= 1
        sn >>= 1
    return sn == 0 and r == root
