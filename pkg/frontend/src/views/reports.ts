/**
 * Health reports, three levels deep: historical trend across sessions, one
 * session's summary, and the per-dialog drill-down (intent metrics with
 * confidence intervals, confusion row, NER error counts).
 *
 * Every number is rendered with a data-field attribute naming the API field
 * it came from; the snapshot suite walks payloads and checks the rendered
 * value of each field, which is what keeps this dashboard honest.
 */
import { formatDelta, formatInterval, formatRate, formatScore, formatTimestamp } from '../format.js';
import { html, raw } from '../html.js';
import type { SessionReport, TrendDocument } from '../types.js';

export function renderEmptyState(what: string): string {
  return html`<div class="empty-state">
    <p>No ${what} yet. Parse a bot, review its dialog-act maps, and run a session.</p>
  </div>`;
}

export function renderTrendView(trend: TrendDocument): string {
  if (!trend.sessions.length) {
    return renderEmptyState('test sessions');
  }
  const rows = trend.sessions
    .map(
      (entry) => html`<tr data-session="${entry.session_id}">
        <td>${entry.session_id}</td>
        <td>${formatTimestamp(entry.generated_at)}</td>
        <td data-field="goal_success_rate">${formatRate(entry.goal_success_rate)}</td>
        <td data-field="delta_success_rate">${formatDelta(entry.delta_success_rate)}</td>
        <td data-field="macro_f1">${formatScore(entry.macro_f1)}</td>
        <td data-field="delta_macro_f1">${formatDelta(entry.delta_macro_f1)}</td>
      </tr>`,
    )
    .join('');
  return html`<table class="trend">
    <thead>
      <tr><th>session</th><th>generated</th><th>success rate</th><th>Δ</th><th>macro F1</th><th>Δ</th></tr>
    </thead>
    <tbody>${raw(rows)}</tbody>
  </table>`;
}

export function renderSummaryView(report: SessionReport): string {
  const nerRows = Object.entries(report.ner_error_counts)
    .map(
      ([slot, count]) => html`<tr>
        <td>${slot}</td>
        <td data-field="ner_error_counts.${slot}">${count}</td>
      </tr>`,
    )
    .join('');
  return html`<section class="session-summary" data-session="${report.session_id}">
    <h2>Session ${report.session_id}</h2>
    <dl class="counters">
      <dt>episodes</dt><dd data-field="counts.episodes">${report.counts.episodes}</dd>
      <dt>intents</dt><dd data-field="counts.intents">${report.counts.intents}</dd>
      <dt>entities</dt><dd data-field="counts.entities">${report.counts.entities}</dd>
      <dt>goal success rate</dt>
      <dd data-field="goal_success_rate">${formatRate(report.goal_success_rate)}</dd>
    </dl>
    <table class="ner-errors">
      <thead><tr><th>slot</th><th>NER errors</th></tr></thead>
      <tbody>${raw(nerRows || '<tr><td colspan="2">none</td></tr>')}</tbody>
    </table>
  </section>`;
}

export function renderDialogDetailView(report: SessionReport, dialog: string): string {
  const metrics = report.intent_metrics[dialog];
  if (!metrics) {
    return renderEmptyState(`metrics for ${dialog}`);
  }
  const labels = report.confusion.labels;
  const rowIndex = labels.indexOf(dialog);
  const confusionCells =
    rowIndex < 0
      ? ''
      : labels
          .map(
            (predicted, j) => html`<tr>
              <td>${predicted}</td>
              <td data-field="confusion.${dialog}.${predicted}">${report.confusion.counts[rowIndex][j]}</td>
            </tr>`,
          )
          .join('');
  return html`<section class="dialog-detail" data-dialog="${dialog}">
    <h3>${dialog}</h3>
    <dl class="intent-metrics">
      <dt>precision</dt><dd data-field="intent_metrics.${dialog}.precision">${formatScore(metrics.precision)}</dd>
      <dt>recall</dt><dd data-field="intent_metrics.${dialog}.recall">${formatScore(metrics.recall)}</dd>
      <dt>F1</dt><dd data-field="intent_metrics.${dialog}.f1">${formatScore(metrics.f1)}</dd>
      <dt>95% CI</dt>
      <dd data-field="intent_metrics.${dialog}.ci">${formatInterval(metrics.ci_low, metrics.ci_high)}</dd>
      <dt>support</dt><dd data-field="intent_metrics.${dialog}.support">${metrics.support}</dd>
    </dl>
    <table class="confusion-row">
      <thead><tr><th>predicted as</th><th>count</th></tr></thead>
      <tbody>${raw(confusionCells)}</tbody>
    </table>
  </section>`;
}
