/**
 * Number and string formatting byte-compatible with the simulation engine.
 *
 * The engine serializes floats with the shortest decimal that round-trips
 * IEEE-754 double (CPython's repr) and JSON strings with ASCII-only escapes.
 * JS toExponential() produces the same shortest digit string, so matching
 * the engine is a re-layout problem, not a re-rounding one: take the digits
 * and the decimal exponent, then apply the engine's fixed/scientific rules.
 */

/** Shortest round-trip decimal, laid out exactly like CPython's repr(). */
export function floatRepr(x: number): string {
  if (!Number.isFinite(x)) {
    throw new Error(`cannot serialize non-finite number ${x}`);
  }
  if (Object.is(x, -0)) {
    return "-0.0";
  }
  const sign = x < 0 ? "-" : "";
  const abs = Math.abs(x);
  // "d.dddde+k" with exactly the digits needed to uniquely identify abs
  const sci = abs.toExponential();
  const eIdx = sci.indexOf("e");
  const digits = sci.slice(0, eIdx).replace(".", "");
  const exp = parseInt(sci.slice(eIdx + 1), 10);
  if (exp < -4 || exp >= 16) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const expAbs = String(Math.abs(exp)).padStart(2, "0");
    return `${sign}${mantissa}e${exp < 0 ? "-" : "+"}${expAbs}`;
  }
  const decpt = exp + 1; // digits before the decimal point
  if (decpt <= 0) {
    return `${sign}0.${"0".repeat(-decpt)}${digits}`;
  }
  if (decpt >= digits.length) {
    return `${sign}${digits}${"0".repeat(decpt - digits.length)}.0`;
  }
  return `${sign}${digits.slice(0, decpt)}.${digits.slice(decpt)}`;
}

/** JSON string literal with ASCII-only output (non-ASCII as \uXXXX). */
export function jsonString(s: string): string {
  let out = '"';
  for (const ch of s) {
    const code = ch.codePointAt(0)!;
    if (ch === '"') {
      out += '\\"';
    } else if (ch === "\\") {
      out += "\\\\";
    } else if (ch === "\n") {
      out += "\\n";
    } else if (ch === "\t") {
      out += "\\t";
    } else if (ch === "\r") {
      out += "\\r";
    } else if (ch === "\b") {
      out += "\\b";
    } else if (ch === "\f") {
      out += "\\f";
    } else if (code >= 0x20 && code < 0x7f) {
      out += ch;
    } else if (code > 0xffff) {
      // JSON escapes astral code points as surrogate pairs
      const high = 0xd800 + ((code - 0x10000) >> 10);
      const low = 0xdc00 + ((code - 0x10000) & 0x3ff);
      out += `\\u${high.toString(16).padStart(4, "0")}`;
      out += `\\u${low.toString(16).padStart(4, "0")}`;
    } else {
      out += `\\u${code.toString(16).padStart(4, "0")}`;
    }
  }
  return out + '"';
}

/**
 * Printf-style %.<sig>g used by validation reports: <sig> significant
 * digits, trailing zeros stripped, scientific form outside [1e-4, 10^sig).
 * Exact decimal half-ties may round differently than C printf (this rounds
 * ties away from zero); report values never sit on such ties.
 */
export function gFormat(x: number, sig = 6): string {
  if (!Number.isFinite(x)) {
    return String(x);
  }
  if (x === 0) {
    return Object.is(x, -0) ? "-0" : "0";
  }
  const sign = x < 0 ? "-" : "";
  const abs = Math.abs(x);
  const sci = abs.toExponential(sig - 1);
  const eIdx = sci.indexOf("e");
  let digits = sci.slice(0, eIdx).replace(".", "");
  const exp = parseInt(sci.slice(eIdx + 1), 10);
  digits = digits.replace(/0+$/, "") || "0";
  if (exp < -4 || exp >= sig) {
    const mantissa = digits.length > 1 ? `${digits[0]}.${digits.slice(1)}` : digits;
    const expAbs = String(Math.abs(exp)).padStart(2, "0");
    return `${sign}${mantissa}e${exp < 0 ? "-" : "+"}${expAbs}`;
  }
  const decpt = exp + 1;
  if (decpt <= 0) {
    return `${sign}0.${"0".repeat(-decpt)}${digits}`;
  }
  if (decpt >= digits.length) {
    return `${sign}${digits}${"0".repeat(decpt - digits.length)}`;
  }
  return `${sign}${digits.slice(0, decpt)}.${digits.slice(decpt)}`;
}
