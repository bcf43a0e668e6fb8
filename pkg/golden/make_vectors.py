"""Regenerate encoding_vectors.json, the cross-implementation golden fixtures.

Run from the repository root after any change to the canonical encoding:

    python3 golden/make_vectors.py
"""

import json
from pathlib import Path

from codewe import canonical

# 20 fixtures chosen to pin every encoding rule: key ordering by code point,
# NFC normalization (note the decomposed inputs), raw UTF-8 output, JSON
# escapes, bool/int distinction, and big integers
VALUES = [
    {},
    [],
    "",
    "plain ascii",
    True,
    False,
    0,
    -1,
    123456789012345678901234567890,
    {"b": 1, "a": 2, "A": 3, "0": 4},
    {"outer": {"z": [1, 2, 3], "a": {"nested": True}}},
    ["mixed", 1, False, {"k": "v"}, []],
    "line\nbreak\tand \"quotes\" and \\backslash",
    "\x07 control char",
    "café",
    "café",
    "\U0001f600 emoji and 中文",
    {"kéy": "decomposed key folds to NFC"},
    {"answers": {"q1": 5, "q2": 3}, "nonce": "00ff", "survey_id": "ab" * 32},
    [[-5, 0, 5], ["å", "ä", "ö"], [True, False]],
]


def main() -> None:
    vectors = []
    for value in VALUES:
        vectors.append({
            "value": value,
            "encoded_hex": canonical.encode(value).hex(),
            "digest_hex": canonical.digest(value).hex(),
        })
    out = Path(__file__).with_name("encoding_vectors.json")
    out.write_text(json.dumps({"vectors": vectors}, indent=2, ensure_ascii=True,
                              sort_keys=True) + "\n")
    print(f"wrote {len(vectors)} vectors to {out}")


if __name__ == "__main__":
    main()
