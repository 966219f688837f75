/**
 * Display formatting only — the single place numbers are turned into text.
 * Never derives new metrics; that is the server's job.
 */

export function formatRate(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function formatScore(value: number): string {
  return value.toFixed(3);
}

export function formatDelta(value: number | null): string {
  if (value === null) {
    return '—';
  }
  const sign = value > 0 ? '+' : '';
  return `${sign}${(value * 100).toFixed(1)}pp`;
}

export function formatInterval(low: number, high: number): string {
  return `[${formatScore(low)}, ${formatScore(high)}]`;
}

export function formatTimestamp(value: string | null): string {
  return value ?? 'n/a';
}
