"""codewe: co-produced decentralised well-being surveys.

Signed responses committed to a simulated hash-chained ledger, blobs in
content-addressed storage, Merkle-committed analysis reports, and
independently runnable omission/tamper audits.
"""

__version__ = "0.1.0"
