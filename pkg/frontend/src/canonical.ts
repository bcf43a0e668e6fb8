/**
 * Canonical deterministic encoding. Every signature and digest in the
 * protocol is computed over these bytes, so this must match the server
 * byte for byte; the shared fixtures in golden/encoding_vectors.json pin
 * the contract.
 *
 * Rules: maps with string keys, arrays, strings, booleans, and integers
 * only; strings NFC-normalized; keys sorted by Unicode code point; no
 * whitespace; raw UTF-8 output with only the mandatory JSON escapes.
 */

export type CanonicalValue =
  | string
  | number
  | bigint
  | boolean
  | CanonicalValue[]
  | { [key: string]: CanonicalValue };

export class EncodingUnsupported extends Error {}

const encoder = new TextEncoder();

/** Compare strings by Unicode code point (not UTF-16 code unit). */
export function codePointCompare(a: string, b: string): number {
  const ia = a[Symbol.iterator]();
  const ib = b[Symbol.iterator]();
  for (;;) {
    const ra = ia.next();
    const rb = ib.next();
    if (ra.done && rb.done) return 0;
    if (ra.done) return -1;
    if (rb.done) return 1;
    const ca = ra.value.codePointAt(0)!;
    const cb = rb.value.codePointAt(0)!;
    if (ca !== cb) return ca - cb;
  }
}

const SHORT_ESCAPES: Record<string, string> = {
  '"': '\\"',
  "\\": "\\\\",
  "\b": "\\b",
  "\t": "\\t",
  "\n": "\\n",
  "\f": "\\f",
  "\r": "\\r",
};

function escapeString(value: string): string {
  let out = '"';
  for (const ch of value) {
    const short = SHORT_ESCAPES[ch];
    if (short !== undefined) {
      out += short;
    } else {
      const cp = ch.codePointAt(0)!;
      if (cp < 0x20) {
        out += "\\u" + cp.toString(16).padStart(4, "0");
      } else {
        out += ch;
      }
    }
  }
  return out + '"';
}

function serialize(value: CanonicalValue): string {
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "bigint") return value.toString();
  if (typeof value === "number") {
    if (!Number.isSafeInteger(value)) {
      throw new EncodingUnsupported(
        `only integers are encodable, got ${value}; use bigint beyond 2^53`,
      );
    }
    // normalize -0 to 0
    return String(value === 0 ? 0 : value);
  }
  if (typeof value === "string") return escapeString(value.normalize("NFC"));
  if (Array.isArray(value)) {
    return "[" + value.map(serialize).join(",") + "]";
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value).map(
      ([k, v]) => [k.normalize("NFC"), v] as const,
    );
    entries.sort((x, y) => codePointCompare(x[0], y[0]));
    return (
      "{" +
      entries.map(([k, v]) => escapeString(k) + ":" + serialize(v)).join(",") +
      "}"
    );
  }
  throw new EncodingUnsupported(`unsupported value kind: ${String(value)}`);
}

export function encode(value: CanonicalValue): Uint8Array {
  return encoder.encode(serialize(value));
}

/**
 * Strict parser for the canonical subset. Unlike JSON.parse it preserves
 * integers beyond 2^53 as bigint and rejects floats and null, so a
 * decode/encode round trip is byte-exact.
 */
export function decode(data: Uint8Array | string): CanonicalValue {
  const text =
    typeof data === "string" ? data : new TextDecoder("utf-8", { fatal: true }).decode(data);
  const parser = new Parser(text);
  const value = parser.parseValue();
  parser.skipWhitespace();
  if (!parser.atEnd()) throw new SyntaxError("trailing characters");
  return value;
}

class Parser {
  private pos = 0;
  constructor(private readonly text: string) {}

  atEnd(): boolean {
    return this.pos >= this.text.length;
  }

  skipWhitespace(): void {
    for (;;) {
      const ch = this.text[this.pos];
      if (ch !== " " && ch !== "\t" && ch !== "\n" && ch !== "\r") return;
      this.pos += 1;
    }
  }

  private expect(ch: string): void {
    if (this.text[this.pos] !== ch) {
      throw new SyntaxError(`expected ${ch} at ${this.pos}`);
    }
    this.pos += 1;
  }

  parseValue(): CanonicalValue {
    this.skipWhitespace();
    const ch = this.text[this.pos];
    if (ch === "{") return this.parseObject();
    if (ch === "[") return this.parseArray();
    if (ch === '"') return this.parseString();
    if (ch === "t" || ch === "f") return this.parseBool();
    if (ch === "-" || (ch !== undefined && ch >= "0" && ch <= "9")) {
      return this.parseInteger();
    }
    throw new SyntaxError(`unexpected input at ${this.pos}`);
  }

  private parseBool(): boolean {
    if (this.text.startsWith("true", this.pos)) {
      this.pos += 4;
      return true;
    }
    if (this.text.startsWith("false", this.pos)) {
      this.pos += 5;
      return false;
    }
    throw new SyntaxError(`bad literal at ${this.pos}`);
  }

  private parseInteger(): number | bigint {
    const match = /^-?(0|[1-9][0-9]*)/.exec(this.text.slice(this.pos));
    if (match === null) throw new SyntaxError(`bad number at ${this.pos}`);
    const after = this.text[this.pos + match[0].length];
    if (after === "." || after === "e" || after === "E") {
      throw new SyntaxError("floats are not part of the canonical subset");
    }
    this.pos += match[0].length;
    const big = BigInt(match[0]);
    return big >= BigInt(Number.MIN_SAFE_INTEGER) &&
      big <= BigInt(Number.MAX_SAFE_INTEGER)
      ? Number(big)
      : big;
  }

  private parseString(): string {
    this.expect('"');
    let out = "";
    for (;;) {
      const ch = this.text[this.pos];
      if (ch === undefined) throw new SyntaxError("unterminated string");
      if (ch === '"') {
        this.pos += 1;
        return out;
      }
      if (ch === "\\") {
        const esc = this.text[this.pos + 1];
        this.pos += 2;
        if (esc === "u") {
          const hex = this.text.slice(this.pos, this.pos + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) {
            throw new SyntaxError("bad unicode escape");
          }
          out += String.fromCharCode(parseInt(hex, 16));
          this.pos += 4;
        } else {
          const simple: Record<string, string> = {
            '"': '"',
            "\\": "\\",
            "/": "/",
            b: "\b",
            f: "\f",
            n: "\n",
            r: "\r",
            t: "\t",
          };
          const mapped = esc === undefined ? undefined : simple[esc];
          if (mapped === undefined) throw new SyntaxError("bad escape");
          out += mapped;
        }
      } else {
        out += ch;
        this.pos += 1;
      }
    }
  }

  private parseArray(): CanonicalValue[] {
    this.expect("[");
    this.skipWhitespace();
    const out: CanonicalValue[] = [];
    if (this.text[this.pos] === "]") {
      this.pos += 1;
      return out;
    }
    for (;;) {
      out.push(this.parseValue());
      this.skipWhitespace();
      if (this.text[this.pos] === ",") {
        this.pos += 1;
        continue;
      }
      this.expect("]");
      return out;
    }
  }

  private parseObject(): { [key: string]: CanonicalValue } {
    this.expect("{");
    this.skipWhitespace();
    const out: { [key: string]: CanonicalValue } = {};
    if (this.text[this.pos] === "}") {
      this.pos += 1;
      return out;
    }
    for (;;) {
      this.skipWhitespace();
      const key = this.parseString();
      this.skipWhitespace();
      this.expect(":");
      out[key] = this.parseValue();
      this.skipWhitespace();
      if (this.text[this.pos] === ",") {
        this.pos += 1;
        continue;
      }
      this.expect("}");
      return out;
    }
  }
}
