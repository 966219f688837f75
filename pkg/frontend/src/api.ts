/**
 * Thin client over the botprobe HTTP API.
 *
 * Every dashboard mutation goes through these documented endpoints; there is
 * no direct file access.  The fetch implementation is injectable so tests
 * can run against an in-memory contract stub.
 */
import type {
  BotSummary,
  ErrorsResponse,
  MapsResponse,
  PathsResponse,
  RevisionPayload,
  SessionRecord,
  SessionReport,
  SessionsResponse,
  SuggestionsResponse,
  TrendDocument,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly body: unknown = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const code = parsed && typeof parsed === 'object' ? ((parsed as any).code ?? 'error') : 'error';
      const message = parsed && typeof parsed === 'object' ? ((parsed as any).message ?? text) : text;
      throw new ApiError(response.status, code, message, parsed);
    }
    return parsed as T;
  }

  listBots(): Promise<{ bots: BotSummary[] }> {
    return this.request('GET', '/bots');
  }

  getBot(botId: string): Promise<Record<string, unknown>> {
    return this.request('GET', `/bots/${botId}`);
  }

  parseBot(botId: string): Promise<MapsResponse & { maps_version: string }> {
    return this.request('POST', `/bots/${botId}/parse`);
  }

  getMaps(botId: string): Promise<MapsResponse> {
    return this.request('GET', `/bots/${botId}/dialog-act-maps`);
  }

  putRevision(botId: string, payload: RevisionPayload): Promise<{ version: string }> {
    return this.request('PUT', `/bots/${botId}/dialog-act-maps`, payload);
  }

  getPaths(botId: string, src: string, dst: string, maxDepth = 20, maxPaths = 500): Promise<PathsResponse> {
    const query = new URLSearchParams({
      src,
      dst,
      max_depth: String(maxDepth),
      max_paths: String(maxPaths),
    });
    return this.request('GET', `/bots/${botId}/graph/paths?${query}`);
  }

  createGoals(botId: string, payload: Record<string, unknown>): Promise<{ goals_id: string; count: number }> {
    return this.request('POST', `/bots/${botId}/goals`, payload);
  }

  createSession(payload: Record<string, unknown>): Promise<SessionRecord> {
    return this.request('POST', '/sessions', payload);
  }

  runSession(sessionId: string): Promise<SessionRecord> {
    return this.request('POST', `/sessions/${sessionId}/run`);
  }

  listSessions(botId?: string): Promise<SessionsResponse> {
    const suffix = botId ? `?bot_id=${encodeURIComponent(botId)}` : '';
    return this.request('GET', `/sessions${suffix}`);
  }

  getSession(sessionId: string): Promise<SessionRecord> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  getReport(sessionId: string): Promise<SessionReport> {
    return this.request('GET', `/sessions/${sessionId}/report`);
  }

  getErrors(sessionId: string, intent?: string): Promise<ErrorsResponse> {
    const suffix = intent ? `?intent=${encodeURIComponent(intent)}` : '';
    return this.request('GET', `/sessions/${sessionId}/errors${suffix}`);
  }

  getSuggestions(sessionId: string): Promise<SuggestionsResponse> {
    return this.request('GET', `/sessions/${sessionId}/suggestions`);
  }

  acceptSuggestion(sessionId: string, suggestionId: string, queries?: string[]): Promise<{ accepted: string[] }> {
    return this.request('POST', `/sessions/${sessionId}/suggestions/accept`, {
      id: suggestionId,
      queries,
    });
  }

  getTrend(botId: string): Promise<TrendDocument> {
    return this.request('GET', `/trend?bot_id=${encodeURIComponent(botId)}`);
  }
}
