/** DOM wiring for the four-panel live view (events | instance graph |
 * context + log | watch points) plus the control bar, rule editor, and
 * history browser. The page keeps no state beyond the latest StateView and
 * editor drafts; rendering is a pure function of that view, so a reload
 * rebuilds everything from one state fetch. */

import { ApiClient } from "./api.js";
import { commandFor, isLegal, legalActions, type ControlAction } from "./controls.js";
import { renderGraph } from "./graph.js";
import { historyRows, metricsRows, replayInstance, setLabel } from "./historyBrowser.js";
import { contextPanelView, eventListView, watchPointsView } from "./panels.js";
import { RuleEditor } from "./ruleEditor.js";
import type { InstanceSummary, StateView } from "./types.js";

const client = new ApiClient("");

let sessionId: string | null = null;
let scenarioId: string | null = null;
let scenarioHash: string | null = null;
let latest: StateView | null = null;
let editor: RuleEditor | null = null;
let unsubscribe: (() => void) | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function text(value: unknown): string {
  if (typeof value === "number" && Number.isInteger(value)) return String(value);
  return JSON.stringify(value);
}

// Panel 1: events detected and processed during the simulation.
function renderEvents(state: StateView): void {
  const list = el<HTMLUListElement>("events");
  list.replaceChildren(
    ...eventListView(state).map((row) => {
      const item = document.createElement("li");
      item.textContent = `t=${row.at}  ${row.label}`;
      item.className = row.processed ? "processed" : "pending";
      return item;
    }),
  );
}

// Panel 2: the instance graph with three-state coloring.
function renderGraphPanel(state: StateView): void {
  const box = el<HTMLDivElement>("graph");
  const view = renderGraph(state);
  box.replaceChildren(
    ...view.nodes.map((node) => {
      const chip = document.createElement("span");
      chip.className = `node ${node.color}`;
      chip.style.backgroundColor = node.color;
      chip.textContent = node.id;
      chip.title = node.status;
      return chip;
    }),
  );
  el<HTMLDivElement>("edges").textContent = view.edges
    .map(([a, b]) => `${a} → ${b}`)
    .join("   ");
}

// Panel 3: context bindings with per-step changes, simulation log below.
function renderContext(state: StateView): void {
  const { rows, log } = contextPanelView(state);
  const table = el<HTMLTableElement>("context");
  table.replaceChildren(
    ...rows.map((row) => {
      const tr = document.createElement("tr");
      if (row.changed) tr.className = "changed";
      const name = document.createElement("td");
      name.textContent = row.name;
      const value = document.createElement("td");
      value.textContent = row.changed
        ? `${text(row.previous)} → ${text(row.value)}`
        : text(row.value);
      tr.append(name, value);
      return tr;
    }),
  );
  el<HTMLPreElement>("log").textContent = log
    .map((entry) => `[${entry.step}] t=${entry.clock} ${entry.category}: ${entry.message}`)
    .join("\n");
}

// Panel 4: watch points.
function renderWatch(state: StateView): void {
  const list = el<HTMLUListElement>("watch");
  list.replaceChildren(
    ...watchPointsView(state).map((row) => {
      const item = document.createElement("li");
      item.textContent = `${row.id}: ${row.expr} = ${text(row.value)}`;
      return item;
    }),
  );
}

function renderControls(state: StateView): void {
  const bar = el<HTMLDivElement>("controls");
  for (const button of Array.from(bar.querySelectorAll("button"))) {
    const action = button.dataset.action as ControlAction | undefined;
    if (action) button.disabled = !isLegal(action, state.status);
  }
  el<HTMLSpanElement>("status").textContent =
    `${state.status}  instance ${state.instanceId}  clock ${state.clock}  ` +
    `cost ${state.totals.cost}`;
  const decision = el<HTMLDivElement>("decision");
  if (state.pendingDecision) {
    decision.hidden = false;
    el<HTMLPreElement>("decision-detail").textContent = JSON.stringify(
      state.pendingDecision,
      null,
      2,
    );
  } else {
    decision.hidden = true;
  }
}

function renderRules(state: StateView): void {
  const select = el<HTMLSelectElement>("rule-select");
  const current = select.value;
  select.replaceChildren(
    ...state.rules.items.map((rule) => {
      const option = document.createElement("option");
      option.value = rule.id;
      option.textContent = `${rule.id} (${rule.kind}, priority ${rule.priority})`;
      return option;
    }),
  );
  if (current) select.value = current;
  const submit = el<HTMLButtonElement>("rule-submit");
  submit.disabled = !(editor && editor.canSubmit(state.status));
  const diag = el<HTMLDivElement>("rule-diagnostics");
  diag.textContent = editor?.diagnostics
    ? `${editor.diagnostics.line}:${editor.diagnostics.col} ${editor.diagnostics.message}`
    : "";
}

function render(state: StateView): void {
  latest = state;
  renderEvents(state);
  renderGraphPanel(state);
  renderContext(state);
  renderWatch(state);
  renderControls(state);
  renderRules(state);
}

async function refresh(): Promise<void> {
  if (!sessionId) return;
  render(await client.state(sessionId));
}

async function renderHistory(): Promise<void> {
  if (!scenarioHash) return;
  const instances = await client.history(scenarioHash);
  const table = el<HTMLTableElement>("history");
  table.replaceChildren(
    ...historyRows(instances).map((row, index) => {
      const tr = document.createElement("tr");
      const cells = [row.instanceId, row.sequence, String(row.totalTime),
                     String(row.totalCost), row.completion, row.label];
      for (const value of cells) {
        const td = document.createElement("td");
        td.textContent = value;
        tr.append(td);
      }
      const actions = document.createElement("td");
      for (const label of ["good", "bad", "unlabeled"] as const) {
        const button = document.createElement("button");
        button.textContent = label;
        button.onclick = async () => {
          await setLabel(client, row.instanceId, label);
          await renderHistory();
        };
        actions.append(button);
      }
      const replay = document.createElement("button");
      replay.textContent = "replay";
      replay.onclick = async () => {
        const instance = instances[index] as InstanceSummary;
        const result = await replayInstance(client, scenarioId as string, instance);
        el<HTMLSpanElement>("history-note").textContent =
          `replay ${result.ok ? "finished" : "failed"}: ${result.message}`;
      };
      actions.append(replay);
      tr.append(actions);
      return tr;
    }),
  );
  const metrics = await client.metrics(scenarioHash);
  el<HTMLPreElement>("metrics").textContent = metricsRows(metrics)
    .map((row) =>
      row.count
        ? `${row.label}: ${row.count}  time ${row.timeMean}/${row.timeMin}/${row.timeMax}` +
          `  cost ${row.costMean}/${row.costMin}/${row.costMax}`
        : `${row.label}: 0`,
    )
    .join("\n");
}

function wire(): void {
  el<HTMLButtonElement>("load-scenario").onclick = async () => {
    const doc = JSON.parse(el<HTMLTextAreaElement>("scenario-input").value);
    const info = await client.uploadScenario(doc);
    scenarioId = info.scenarioId;
    scenarioHash = info.scenarioHash;
    const session = await client.createSession(info.scenarioId);
    sessionId = session.sessionId;
    editor = null;
    unsubscribe?.();
    unsubscribe = client.subscribe(sessionId, () => {
      void refresh();
      void renderHistory();
    });
    await refresh();
    editor = RuleEditor.fromState(latest as StateView);
    await renderHistory();
  };

  for (const button of Array.from(el<HTMLDivElement>("controls").querySelectorAll("button"))) {
    button.onclick = async () => {
      if (!sessionId || !latest) return;
      const action = button.dataset.action as ControlAction;
      await client.command(sessionId, commandFor(action, 1));
      await refresh();
    };
  }

  el<HTMLSelectElement>("rule-select").onchange = (event) => {
    const id = (event.target as HTMLSelectElement).value;
    editor?.select(id);
    el<HTMLTextAreaElement>("rule-source").value = editor?.source ?? "";
    if (latest) renderRules(latest);
  };

  el<HTMLTextAreaElement>("rule-source").oninput = (event) => {
    editor?.edit((event.target as HTMLTextAreaElement).value);
    if (latest) renderRules(latest);
  };

  el<HTMLButtonElement>("rule-submit").onclick = async () => {
    if (!sessionId || !editor) return;
    try {
      await editor.submit(client, sessionId);
    } catch {
      // diagnostics already captured on the editor
    }
    await refresh();
  };

  el<HTMLButtonElement>("watch-add").onclick = async () => {
    if (!sessionId) return;
    const expr = el<HTMLInputElement>("watch-expr").value;
    await client.command(sessionId, { type: "setWatch", expr });
    await refresh();
  };

  el<HTMLButtonElement>("decision-abort").onclick = async () => {
    if (!sessionId) return;
    await client.command(sessionId, { type: "stop" });
    await refresh();
  };

  el<HTMLButtonElement>("decision-define").onclick = async () => {
    if (!sessionId) return;
    const activity = JSON.parse(el<HTMLTextAreaElement>("decision-activity").value);
    await client.command(sessionId, { type: "defineActivity", activity });
    await refresh();
  };
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}
