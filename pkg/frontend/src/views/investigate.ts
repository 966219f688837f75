/**
 * Error investigation: misrouted paraphrases grouped by original utterance
 * (server keeps them sorted by error count, descending — rendered verbatim),
 * plus suggestion cards whose accept buttons post back to the API.
 */
import { html, raw } from '../html.js';
import type { ErrorGroup, Suggestion } from '../types.js';

export function renderErrorGroupPicker(groups: ErrorGroup[]): string {
  if (!groups.length) {
    return html`<div class="empty-state"><p>No intent errors in this session.</p></div>`;
  }
  const options = groups
    .map(
      (group, index) => html`<option value="${index}" data-field="groups.${index}.size">
        ${group.original_utterance} (${group.size} errors)
      </option>`,
    )
    .join('');
  return html`<select class="error-groups" size="${Math.min(groups.length, 8)}">${raw(options)}</select>`;
}

export function renderErrorGroupDetail(group: ErrorGroup): string {
  const members = group.members
    .map(
      (member) => html`<tr data-episode="${member.episode_id}">
        <td>${member.paraphrase}</td>
        <td data-field="predicted_intent">${member.predicted_intent}</td>
      </tr>`,
    )
    .join('');
  return html`<section class="error-group" data-utterance="${group.original_utterance}">
    <h3>${group.original_utterance}</h3>
    <p>true intent: <strong>${group.true_intent}</strong> · <span data-field="size">${group.size}</span> misrouted paraphrases</p>
    <table>
      <thead><tr><th>paraphrase</th><th>predicted</th></tr></thead>
      <tbody>${raw(members)}</tbody>
    </table>
  </section>`;
}

export function renderSuggestionCard(suggestion: Suggestion): string {
  const action =
    suggestion.kind === 'MoveIntent'
      ? html`<p class="action">Move <em>${suggestion.target_utterance}</em> from
          <strong>${suggestion.true_intent}</strong> to <strong>${suggestion.proposed_intent}</strong>.</p>`
      : suggestion.kind === 'AugmentTraining'
        ? html`<p class="action">Add ${suggestion.queries.length} paraphrases to the
            <strong>${suggestion.true_intent}</strong> training set:</p>
            <ul>${raw(suggestion.queries.map((q) => html`<li>${q}</li>`).join(''))}</ul>`
        : html`<p class="action">Needs human review.</p>`;
  const button = suggestion.accepted
    ? html`<span class="accepted-badge">accepted</span>`
    : html`<button class="accept" data-id="${suggestion.id}">accept</button>`;
  return html`<article class="suggestion ${suggestion.accepted ? 'accepted' : ''}" data-id="${suggestion.id}"
      data-kind="${suggestion.kind}">
    <header><span class="kind">${suggestion.kind}</span> ${raw(button)}</header>
    ${raw(action)}
    <footer class="rationale">${suggestion.rationale}</footer>
  </article>`;
}

export function renderSuggestionList(suggestions: Suggestion[]): string {
  if (!suggestions.length) {
    return html`<div class="empty-state"><p>No remediation suggestions for this session.</p></div>`;
  }
  return html`<div class="suggestions">${raw(suggestions.map(renderSuggestionCard).join(''))}</div>`;
}
