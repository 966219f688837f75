/**
 * View-model records mirroring the API payloads, verbatim.
 *
 * These are render-only: the dashboard never mutates metrics client-side,
 * every number on screen traces back to one of these fields.
 */

export interface BotSummary {
  id: string;
  bot_name: string;
  created_at: string;
}

export interface DialogActMapDoc {
  dialog: string;
  acts: Record<string, string[]>;
  needs_review: string[];
}

export interface MapsResponse {
  version: string;
  maps: Record<string, DialogActMapDoc>;
  needs_review: Record<string, string[]>;
}

export interface RevisionPayload {
  base_version: string;
  revision: {
    dialog: string;
    act: string;
    add_variants?: string[];
    remove_variants?: string[];
    author?: string;
  };
}

export interface IntentMetrics {
  precision: number;
  recall: number;
  f1: number;
  ci_low: number;
  ci_high: number;
  support: number;
}

export interface ConfusionMatrix {
  labels: string[];
  counts: number[][];
}

export interface SessionReport {
  session_id: string;
  counts: { episodes: number; intents: number; entities: number };
  goal_success_rate: number;
  intent_metrics: Record<string, IntentMetrics>;
  ner_error_counts: Record<string, number>;
  confusion: ConfusionMatrix;
  generated_at: string | null;
}

export interface TrendEntry {
  session_id: string;
  generated_at: string | null;
  goal_success_rate: number;
  macro_f1: number;
  delta_success_rate: number | null;
  delta_macro_f1: number | null;
}

export interface TrendDocument {
  sessions: TrendEntry[];
}

export interface ErrorGroupMember {
  paraphrase: string;
  predicted_intent: string;
  episode_id: string;
}

export interface ErrorGroup {
  original_utterance: string;
  true_intent: string;
  members: ErrorGroupMember[];
  size: number;
}

export interface ErrorsResponse {
  groups: ErrorGroup[];
  failed_episodes: unknown[];
}

export interface Suggestion {
  id: string;
  kind: 'AugmentTraining' | 'MoveIntent' | 'Review';
  target_utterance: string;
  true_intent: string;
  evidence: ErrorGroup;
  proposed_intent: string | null;
  queries: string[];
  rationale: string;
  accepted: boolean;
}

export interface SuggestionsResponse {
  suggestions: Suggestion[];
}

export interface PathRecord {
  nodes: string[];
  edge_labels: string[];
  length: number;
}

export interface PathsResponse {
  paths: PathRecord[];
  truncated: boolean;
}

export interface SessionRecord {
  id: string;
  bot_id: string;
  created_at: string;
  status: 'Draft' | 'NeedsReview' | 'Running' | 'Done' | 'Failed';
  config: Record<string, unknown>;
  goals_id: string | null;
  connector: string;
  artifacts: Record<string, string>;
  failure_reason: string | null;
}

export interface SessionsResponse {
  sessions: SessionRecord[];
}
