/**
 * Dialog-act map review: show every act with its message variants, highlight
 * the acts awaiting human confirmation, and build the optimistic-concurrency
 * revision payloads the PUT endpoint expects.
 */
import { html, raw } from '../html.js';
import type { MapsResponse, RevisionPayload } from '../types.js';

export interface MapsViewState {
  /** Set after a PUT came back 409: somebody revised under us. */
  conflict?: boolean;
  /** Last successfully saved version, for the "saved" toast. */
  savedVersion?: string;
}

export function pendingCount(maps: MapsResponse): number {
  return Object.values(maps.needs_review).reduce((total, acts) => total + acts.length, 0);
}

export function renderMapsView(maps: MapsResponse, state: MapsViewState = {}): string {
  const pending = pendingCount(maps);
  const banner = state.conflict
    ? html`<div class="banner conflict" role="alert">
        Someone else revised these maps (version changed). Reload to pick up
        their edits — your input is still in the form and has not been lost.
      </div>`
    : '';
  const saved = state.savedVersion
    ? html`<div class="banner saved">Saved as version <code>${state.savedVersion}</code>.</div>`
    : '';
  const dialogs = Object.values(maps.maps)
    .map((entry) => {
      const flagged = new Set(entry.needs_review);
      const acts = Object.entries(entry.acts)
        .map(([act, variants]) => {
          const variantItems = variants
            .map(
              (variant) => html`<li class="variant">
                <span class="variant-text">${variant}</span>
                <button class="remove-variant" data-dialog="${entry.dialog}" data-act="${act}"
                        data-variant="${variant}">remove</button>
              </li>`,
            )
            .join('');
          return html`<section class="act ${flagged.has(act) ? 'needs-review' : ''}" data-act="${act}">
            <h4>${act}${flagged.has(act) ? raw(' <span class="flag">needs review</span>') : ''}</h4>
            <ul>${raw(variantItems)}</ul>
            <form class="add-variant" data-dialog="${entry.dialog}" data-act="${act}">
              <input name="variant" placeholder="add a message variant" />
              <button type="submit">add</button>
              <button type="button" class="confirm-act" data-dialog="${entry.dialog}" data-act="${act}">
                confirm as-is
              </button>
            </form>
          </section>`;
        })
        .join('');
      return html`<article class="dialog-map" data-dialog="${entry.dialog}">
        <h3>${entry.dialog}</h3>
        ${raw(acts)}
      </article>`;
    })
    .join('');
  const runButton = html`<button class="run-session" ${pending > 0 ? raw('disabled') : ''}>
    Run simulation session
  </button>`;
  return html`<div class="maps-view" data-version="${maps.version}">
    ${raw(banner)}${raw(saved)}
    <p class="review-status" data-field="pending_review">${pending}</p>
    ${raw(dialogs)}
    ${raw(runButton)}
  </div>`;
}

/** PUT payload for adding a variant (also clears the act's review flag server-side). */
export function buildAddVariant(
  maps: MapsResponse,
  dialog: string,
  act: string,
  variant: string,
  author = 'dashboard',
): RevisionPayload {
  return {
    base_version: maps.version,
    revision: { dialog, act, add_variants: [variant], author },
  };
}

export function buildRemoveVariant(
  maps: MapsResponse,
  dialog: string,
  act: string,
  variant: string,
  author = 'dashboard',
): RevisionPayload {
  return {
    base_version: maps.version,
    revision: { dialog, act, remove_variants: [variant], author },
  };
}

/** Confirm-as-is: re-adding an existing variant is a no-op edit that clears the flag. */
export function buildConfirmAct(
  maps: MapsResponse,
  dialog: string,
  act: string,
  author = 'dashboard',
): RevisionPayload {
  const variants = maps.maps[dialog]?.acts[act] ?? [];
  if (!variants.length) {
    throw new Error(`act '${act}' of dialog '${dialog}' has no variants to confirm`);
  }
  return {
    base_version: maps.version,
    revision: { dialog, act, add_variants: [variants[0]], author },
  };
}
