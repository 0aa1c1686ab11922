/** Instance-graph view model. Node coloring is the three-way classification
 * from the service: the activity that has just been simulated is green,
 * activities executed earlier in this instance are yellow, and activities
 * seen only in previously recorded instances are grey. */

import type { NodeStatus, StateView } from "./types.js";

export const NODE_COLORS: Record<NodeStatus, string> = {
  JustExecuted: "green",
  ExecutedThisInstance: "yellow",
  PreviousInstancesOnly: "grey",
};

export interface GraphNodeView {
  id: string;
  status: NodeStatus;
  color: string;
  /** Layer index for left-to-right layout: first-execution order in this
   * instance; history-only nodes trail after. */
  layer: number;
}

export interface GraphView {
  nodes: GraphNodeView[];
  edges: [string, string][];
}

export function renderGraph(state: StateView): GraphView {
  const firstExecution = new Map<string, number>();
  state.trace.forEach((record, index) => {
    if (!firstExecution.has(record.activityId)) {
      firstExecution.set(record.activityId, index);
    }
  });
  const historyStart = firstExecution.size;
  let trailing = 0;

  const nodes = state.processGraph.nodes.map((node) => {
    let layer = firstExecution.get(node.id);
    if (layer === undefined) {
      layer = historyStart + trailing;
      trailing += 1;
    }
    return {
      id: node.id,
      status: node.status,
      color: NODE_COLORS[node.status],
      layer,
    };
  });
  nodes.sort((a, b) => a.layer - b.layer || a.id.localeCompare(b.id));
  return { nodes, edges: state.processGraph.edges };
}
