/** View models for the four-panel layout: (1) detected/processed events,
 * (2) the instance graph (graph.ts), (3) context with per-step changes and
 * the simulation log below it, (4) watch points. All pure functions of the
 * latest state view, so a reload rebuilds the display from one GET. */

import type { StateView } from "./types.js";

export interface EventRow {
  at: number;
  label: string;
  processed: boolean;
}

export function eventListView(state: StateView): EventRow[] {
  return state.events.map((event) => ({
    at: event.at,
    label: event.label || "(unnamed event)",
    processed: event.applied,
  }));
}

export interface ContextRow {
  name: string;
  value: unknown;
  changed: boolean;
  previous?: unknown;
}

export function contextPanelView(state: StateView): {
  rows: ContextRow[];
  log: { step: number; clock: number; category: string; message: string }[];
} {
  const changed = new Map<string, unknown>();
  for (const [name, previous] of state.context.lastDiff) {
    changed.set(name, previous);
  }
  const rows = Object.keys(state.context.bindings)
    .sort()
    .map((name) => ({
      name,
      value: state.context.bindings[name],
      changed: changed.has(name),
      ...(changed.has(name) ? { previous: changed.get(name) } : {}),
    }));
  return { rows, log: state.logTail };
}

export interface WatchRow {
  id: string;
  expr: string;
  value: unknown;
  history: [number, unknown][];
}

export function watchPointsView(state: StateView): WatchRow[] {
  return state.watchPoints.map((wp) => ({
    id: wp.id,
    expr: wp.expr,
    value: wp.lastValue,
    history: wp.history,
  }));
}
