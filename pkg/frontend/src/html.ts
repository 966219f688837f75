/** Tiny string-template helpers; views render to plain HTML strings. */

const ESCAPES: Record<string, string> = {
  '&': '&amp;',
  '<': '&lt;',
  '>': '&gt;',
  '"': '&quot;',
  "'": '&#39;',
};

export function escapeHtml(value: unknown): string {
  return String(value).replace(/[&<>"']/g, (ch) => ESCAPES[ch]);
}

/** Tagged template that escapes every interpolation (raw() opts out). */
export function html(strings: TemplateStringsArray, ...values: unknown[]): string {
  let out = '';
  strings.forEach((chunk, i) => {
    out += chunk;
    if (i < values.length) {
      const value = values[i];
      if (value instanceof Raw) {
        out += value.content;
      } else if (Array.isArray(value)) {
        out += value.map((v) => (v instanceof Raw ? v.content : escapeHtml(v))).join('');
      } else {
        out += escapeHtml(value);
      }
    }
  });
  return out;
}

class Raw {
  constructor(public readonly content: string) {}
}

export function raw(content: string): Raw {
  return new Raw(content);
}
