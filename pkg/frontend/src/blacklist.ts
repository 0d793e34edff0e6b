/** Parser mirroring the pipeline's blacklist line grammar.
 *
 * Used to sanity-check an exported file before offering it for download:
 * `name owner/repo`, `suffix s`, `owner login`, `#` comments, blank lines.
 */

export interface ParsedRule {
  kind: 'name' | 'suffix' | 'owner';
  value: string;
}

export interface ParseResult {
  rules: ParsedRule[];
  rejects: { line: number; text: string }[];
}

const KINDS = new Set(['name', 'suffix', 'owner']);

export function parseBlacklist(text: string): ParseResult {
  const rules: ParsedRule[] = [];
  const rejects: { line: number; text: string }[] = [];
  text.split('\n').forEach((raw, index) => {
    const body = raw.trim();
    if (body === '' || body.startsWith('#')) return;
    const parts = body.split(/\s+/);
    if (parts.length !== 2 || !KINDS.has(parts[0])) {
      rejects.push({ line: index + 1, text: body });
      return;
    }
    rules.push({ kind: parts[0] as ParsedRule['kind'], value: parts[1] });
  });
  return { rules, rejects };
}
