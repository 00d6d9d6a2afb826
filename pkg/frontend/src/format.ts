/** Numbers from the service are displayed verbatim (String of the parsed
 * double reproduces the wire text for JSON round-trippable values); the only
 * client-side arithmetic allowed is percent formatting. */

export function verbatim(value: number | null): string {
  return value === null ? "n/a" : String(value);
}

export function percent1(ratio: number | null): string {
  if (ratio === null) return "n/a";
  return `${(ratio * 100).toFixed(1)}%`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
