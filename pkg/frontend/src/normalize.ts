/** Client-side preview of the server's tag normalization, used only to
 * validate input before submission (the server remains authoritative):
 * punctuation and quotes are stripped, whitespace collapsed, and the tag
 * capped at four words. Returns null when nothing survives. */

const TAG_WORD_LIMIT = 4;

export function normalizeTagPreview(raw: string): string | null {
  let cleaned = "";
  for (const ch of raw) {
    cleaned += /[\p{L}\p{N}]/u.test(ch) || /\s/.test(ch) ? ch : " ";
  }
  const words = cleaned.split(/\s+/).filter((w) => w.length > 0);
  if (words.length === 0) {
    return null;
  }
  return words.slice(0, TAG_WORD_LIMIT).join(" ");
}
