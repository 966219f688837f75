/**
 * Single-page shell: hash routing over the views, all data via ApiClient.
 * Base URL comes from ?api=... or defaults to same-origin.
 */
import { ApiClient, ApiError } from './api.js';
import { html, raw } from './html.js';
import { pollSession } from './polling.js';
import type { MapsResponse } from './types.js';
import { buildAddVariant, buildConfirmAct, buildRemoveVariant, renderMapsView } from './views/maps.js';
import { renderErrorGroupDetail, renderErrorGroupPicker, renderSuggestionList } from './views/investigate.js';
import { renderPathControls, renderPaths } from './views/paths.js';
import { renderDialogDetailView, renderEmptyState, renderSummaryView, renderTrendView } from './views/reports.js';

interface AppState {
  botId?: string;
  maps?: MapsResponse;
  conflict: boolean;
  savedVersion?: string;
}

export function createApp(root: HTMLElement, client: ApiClient) {
  const state: AppState = { conflict: false };

  const render = (content: string) => {
    root.innerHTML = content;
  };

  async function showBots() {
    const { bots } = await client.listBots();
    if (!bots.length) {
      render(renderEmptyState('bots'));
      return;
    }
    const items = bots
      .map((bot) => html`<li><a href="#/bots/${bot.id}/maps">${bot.bot_name}</a> <code>${bot.id}</code></li>`)
      .join('');
    render(html`<h2>Bots</h2><ul class="bots">${raw(items)}</ul>`);
  }

  async function showMaps(botId: string) {
    state.botId = botId;
    state.maps = await client.getMaps(botId);
    render(renderMapsView(state.maps, { conflict: state.conflict, savedVersion: state.savedVersion }));
    state.conflict = false;
    state.savedVersion = undefined;
    wireMapForms(botId);
  }

  function wireMapForms(botId: string) {
    root.querySelectorAll<HTMLFormElement>('form.add-variant').forEach((form) => {
      form.addEventListener('submit', async (event) => {
        event.preventDefault();
        const input = form.querySelector<HTMLInputElement>('input[name=variant]');
        if (!input?.value || !state.maps) return;
        await submitRevision(botId, buildAddVariant(state.maps, form.dataset.dialog!, form.dataset.act!, input.value));
      });
    });
    root.querySelectorAll<HTMLButtonElement>('button.confirm-act').forEach((button) => {
      button.addEventListener('click', async () => {
        if (!state.maps) return;
        await submitRevision(botId, buildConfirmAct(state.maps, button.dataset.dialog!, button.dataset.act!));
      });
    });
    root.querySelectorAll<HTMLButtonElement>('button.remove-variant').forEach((button) => {
      button.addEventListener('click', async () => {
        if (!state.maps) return;
        await submitRevision(
          botId,
          buildRemoveVariant(state.maps, button.dataset.dialog!, button.dataset.act!, button.dataset.variant!),
        );
      });
    });
  }

  async function submitRevision(botId: string, payload: ReturnType<typeof buildAddVariant>) {
    try {
      const { version } = await client.putRevision(botId, payload);
      state.savedVersion = version;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        state.conflict = true;
      } else {
        throw error;
      }
    }
    await showMaps(botId);
  }

  async function showTrend(botId: string) {
    const trend = await client.getTrend(botId);
    render(html`<h2>Performance trend</h2>${raw(renderTrendView(trend))}`);
  }

  async function showReport(sessionId: string, dialog?: string) {
    try {
      const report = await client.getReport(sessionId);
      const detail = dialog ? renderDialogDetailView(report, dialog) : '';
      const links = Object.keys(report.intent_metrics)
        .map((name) => html`<a href="#/sessions/${sessionId}/report/${name}">${name}</a>`)
        .join(' · ');
      render(html`${raw(renderSummaryView(report))}<nav class="dialogs">${raw(links)}</nav>${raw(detail)}`);
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        const record = await pollSession(client, sessionId, { intervalMs: 2000 });
        if (record.status === 'Done') {
          await showReport(sessionId, dialog);
          return;
        }
        render(renderEmptyState(`report (session ${record.status})`));
        return;
      }
      throw error;
    }
  }

  async function showInvestigate(sessionId: string, groupIndex = 0) {
    const [errors, suggestions] = await Promise.all([
      client.getErrors(sessionId),
      client.getSuggestions(sessionId),
    ]);
    const detail = errors.groups[groupIndex] ? renderErrorGroupDetail(errors.groups[groupIndex]) : '';
    render(html`<h2>Investigate</h2>
      ${raw(renderErrorGroupPicker(errors.groups))}
      ${raw(detail)}
      ${raw(renderSuggestionList(suggestions.suggestions))}`);
    root.querySelectorAll<HTMLButtonElement>('button.accept').forEach((button) => {
      button.addEventListener('click', async () => {
        await client.acceptSuggestion(sessionId, button.dataset.id!);
        await showInvestigate(sessionId, groupIndex);
      });
    });
  }

  async function showPaths(botId: string, src?: string, dst?: string) {
    const bot = (await client.getBot(botId)) as { dialogs: Array<{ name: string }> };
    const dialogs = bot.dialogs.map((d) => d.name);
    const from = src ?? dialogs[0];
    const to = dst ?? dialogs[dialogs.length - 1];
    const result = await client.getPaths(botId, from, to);
    render(html`<h2>Path explorer</h2>${raw(renderPathControls(dialogs, from, to))}${raw(renderPaths(result))}`);
    root.querySelector<HTMLFormElement>('form.path-controls')?.addEventListener('submit', (event) => {
      event.preventDefault();
      const data = new FormData(event.target as HTMLFormElement);
      location.hash = `#/bots/${botId}/paths/${data.get('src')}/${data.get('dst')}`;
    });
  }

  async function route() {
    const segments = location.hash.replace(/^#\/?/, '').split('/').filter(Boolean);
    try {
      if (!segments.length) return showBots();
      if (segments[0] === 'bots' && segments[2] === 'maps') return showMaps(segments[1]);
      if (segments[0] === 'bots' && segments[2] === 'trend') return showTrend(segments[1]);
      if (segments[0] === 'bots' && segments[2] === 'paths') return showPaths(segments[1], segments[3], segments[4]);
      if (segments[0] === 'sessions' && segments[2] === 'report') return showReport(segments[1], segments[3]);
      if (segments[0] === 'sessions' && segments[2] === 'investigate') return showInvestigate(segments[1]);
      return showBots();
    } catch (error) {
      render(html`<div class="banner error">${String(error)}</div>`);
    }
  }

  window.addEventListener('hashchange', route);
  return { route, showBots, showMaps, showReport, showInvestigate, showPaths, showTrend };
}

export function bootstrap() {
  const params = new URLSearchParams(location.search);
  const base = params.get('api') ?? '';
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const app = createApp(root, new ApiClient(base));
  void app.route();
}
