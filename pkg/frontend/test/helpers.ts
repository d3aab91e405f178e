import { readFileSync } from 'node:fs';

export function fixture<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export function fixtureText(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}.json`, import.meta.url),
    'utf8');
}

export function unescapeHtml(text: string): string {
  return text
    .replace(/&quot;/g, '"')
    .replace(/&lt;/g, '<')
    .replace(/&gt;/g, '>')
    .replace(/&amp;/g, '&');
}

// Every element tagged data-field, as [path, rendered text].
export function renderedFields(html: string): [string, string][] {
  const out: [string, string][] = [];
  const re = /data-field="([^"]+)"[^>]*>([^<]*)</g;
  for (let m = re.exec(html); m; m = re.exec(html)) {
    out.push([m[1] as string, unescapeHtml(m[2] as string)]);
  }
  return out;
}

// Walk a reply object by a dotted path; numeric segments index arrays.
export function lookup(doc: unknown, path: string): unknown {
  let node: unknown = doc;
  for (const part of path.split('.')) {
    if (node === null || typeof node !== 'object') return undefined;
    node = Array.isArray(node)
      ? node[Number(part)]
      : (node as Record<string, unknown>)[part];
  }
  return node;
}
