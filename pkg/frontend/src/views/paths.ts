/**
 * Conversation-path explorer: pick source and target dialogs, render every
 * simple path the server enumerated, and say so when the list was truncated.
 */
import { html, raw } from '../html.js';
import type { PathsResponse } from '../types.js';

export function renderPathControls(dialogs: string[], src?: string, dst?: string): string {
  const options = (selected?: string) =>
    dialogs
      .map((name) => html`<option value="${name}" ${name === selected ? raw('selected') : ''}>${name}</option>`)
      .join('');
  return html`<form class="path-controls">
    <label>source <select name="src">${raw(options(src))}</select></label>
    <label>target <select name="dst">${raw(options(dst))}</select></label>
    <button type="submit">explore</button>
  </form>`;
}

export function renderPaths(result: PathsResponse): string {
  if (!result.paths.length) {
    return html`<div class="empty-state"><p>No conversation path connects these dialogs.</p></div>`;
  }
  const items = result.paths
    .map((path, index) => {
      const hops = path.nodes
        .map((node, i) => (i === 0 ? html`<span class="node">${node}</span>` : html`<span class="edge">${path.edge_labels[i - 1]}</span><span class="node">${node}</span>`))
        .join('');
      return html`<li class="path" data-index="${index}" data-field="paths.${index}.length" data-length="${path.length}">
        ${raw(hops)}
      </li>`;
    })
    .join('');
  const notice = result.truncated
    ? html`<p class="truncated-notice">More paths exist — the enumeration hit its cap. Narrow the
        search or raise max_paths.</p>`
    : '';
  return html`<div class="paths">
    <ol>${raw(items)}</ol>
    ${raw(notice)}
  </div>`;
}
