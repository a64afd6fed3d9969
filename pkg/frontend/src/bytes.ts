// Violation spans are byte offsets into the page's UTF-8 encoding;
// JavaScript strings are UTF-16. Conversion walks code points once.

function utf8Length(codePoint: number): number {
  if (codePoint < 0x80) return 1;
  if (codePoint < 0x800) return 2;
  if (codePoint < 0x10000) return 3;
  return 4;
}

/**
 * Map a UTF-8 byte offset to a UTF-16 char offset (clamped to the text).
 * Offsets inside a multi-byte sequence round down to its start.
 */
export function byteToChar(text: string, byteOffset: number): number {
  if (byteOffset <= 0) return 0;
  let bytes = 0;
  let chars = 0;
  for (const ch of text) {
    const width = utf8Length(ch.codePointAt(0)!);
    if (bytes + width > byteOffset) return chars;
    bytes += width;
    chars += ch.length; // 2 for astral code points
    if (bytes === byteOffset) return chars;
  }
  return text.length;
}

/** Inverse of byteToChar for positions produced by the editor. */
export function charToByte(text: string, charOffset: number): number {
  let bytes = 0;
  let chars = 0;
  for (const ch of text) {
    if (chars >= charOffset) return bytes;
    bytes += utf8Length(ch.codePointAt(0)!);
    chars += ch.length;
  }
  return bytes;
}
