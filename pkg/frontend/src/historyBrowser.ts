/** History browsing: list recorded instances with labels, flip labels,
 * request a replay session, and show the per-scenario metrics table. */

import type { ApiClient } from "./api.js";
import type { InstanceSummary, MetricsTable } from "./types.js";

export interface HistoryRow {
  instanceId: string;
  sequence: string;
  totalTime: number;
  totalCost: number;
  completion: string;
  label: string;
}

export function historyRows(instances: InstanceSummary[]): HistoryRow[] {
  return instances.map((inst) => ({
    instanceId: inst.instanceId,
    sequence: inst.activitySequence.join(" -> "),
    totalTime: inst.totalTime,
    totalCost: inst.totalCost,
    completion: inst.completionStatus,
    label: inst.label,
  }));
}

export async function setLabel(
  client: ApiClient,
  instanceId: string,
  label: "good" | "bad" | "unlabeled",
): Promise<void> {
  await client.label(instanceId, label);
}

/** Replaying creates a fresh session over the same scenario and issues the
 * replay command; the caller owns displaying it. */
export async function replayInstance(
  client: ApiClient,
  scenarioId: string,
  instance: InstanceSummary,
): Promise<{ sessionId: string; ok: boolean; message: string }> {
  const session = await client.createSession(scenarioId, instance.seed);
  try {
    const response = await client.command(session.sessionId, {
      type: "replay",
      instanceId: instance.instanceId,
    });
    return { sessionId: session.sessionId, ok: response.ok, message: response.message };
  } catch (error) {
    const body = (error as { body?: { message?: string } }).body;
    return {
      sessionId: session.sessionId,
      ok: false,
      message: body?.message ?? String(error),
    };
  }
}

export interface MetricsRow {
  label: string;
  count: number;
  timeMean?: number;
  timeMin?: number;
  timeMax?: number;
  costMean?: number;
  costMin?: number;
  costMax?: number;
}

export function metricsRows(table: MetricsTable): MetricsRow[] {
  return Object.entries(table.byLabel).map(([label, entry]) => ({
    label,
    count: entry.count,
    ...(entry.totalTime
      ? {
          timeMean: entry.totalTime.mean,
          timeMin: entry.totalTime.min,
          timeMax: entry.totalTime.max,
        }
      : {}),
    ...(entry.totalCost
      ? {
          costMean: entry.totalCost.mean,
          costMin: entry.totalCost.min,
          costMax: entry.totalCost.max,
        }
      : {}),
  }));
}
