/** Wire types mirrored from the simulation service JSON. */

export type SessionStatus =
  | "Created"
  | "Running"
  | "Paused"
  | "DecisionRequired"
  | "Completed"
  | "Stuck"
  | "Faulted"
  | "Aborted";

export type NodeStatus =
  | "JustExecuted"
  | "ExecutedThisInstance"
  | "PreviousInstancesOnly";

export interface GraphNode {
  id: string;
  status: NodeStatus;
}

export interface ProcessGraph {
  nodes: GraphNode[];
  edges: [string, string][];
}

export interface ExecutionRecord {
  activityId: string;
  startTime: number;
  endTime: number;
  cost: number;
  snapshotBefore: string;
  snapshotAfter: string;
  firedRuleId: string;
}

export interface RuleView {
  id: string;
  kind: string;
  priority: number;
  enabled: boolean;
  source: string;
}

export interface LogEntry {
  step: number;
  clock: number;
  category: string;
  message: string;
}

export interface WatchPointView {
  id: string;
  expr: string;
  lastValue: unknown;
  history: [number, unknown][];
}

export interface EventView {
  at: number;
  label: string;
  applied: boolean;
}

export interface PendingDecision {
  reason: string | null;
  considered: { activityId: string; ruleId: string }[];
  filtered: { activityId: string; ruleId: string; reason: string; detail: string }[];
}

export interface StateView {
  sessionId: string;
  instanceId: string;
  scenarioHash: string;
  status: SessionStatus;
  mode: string;
  clock: number;
  stepIndex: number;
  version: { revision: number; stepIndex: number };
  rules: { revision: number; items: RuleView[] };
  context: { bindings: Record<string, unknown>; lastDiff: [string, unknown, unknown][] };
  events: EventView[];
  trace: ExecutionRecord[];
  processGraph: ProcessGraph;
  watchPoints: WatchPointView[];
  logTail: LogEntry[];
  pendingDecision: PendingDecision | null;
  totals: { time: number; cost: number };
  progressHistory: number[];
}

export type Command =
  | { type: "start" }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "stop" }
  | { type: "step"; n: number }
  | { type: "editRule"; ruleId: string; source: string }
  | { type: "addRule"; source: string }
  | { type: "deleteRule"; ruleId: string }
  | { type: "injectExternal"; assignments: Record<string, unknown> }
  | { type: "defineActivity"; activity: Record<string, unknown> }
  | { type: "setWatch"; expr: string }
  | { type: "replay"; instanceId: string };

export interface CommandResponse {
  ok: boolean;
  message: string;
  diagnostics: { line: number; col: number; message: string } | null;
  status: SessionStatus;
  instanceId: string;
  version: { revision: number; stepIndex: number };
}

export interface InstanceSummary {
  instanceId: string;
  scenarioHash: string;
  seed: number;
  activitySequence: string[];
  totalTime: number;
  totalCost: number;
  completionStatus: string;
  label: string;
}

export interface MetricsEntry {
  count: number;
  totalTime?: { mean: number; min: number; max: number };
  totalCost?: { mean: number; min: number; max: number };
}

export interface MetricsTable {
  scenarioHash: string;
  count: number;
  byLabel: Record<string, MetricsEntry>;
}
