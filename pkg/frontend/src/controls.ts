/** Simulation controls: which actions are legal for a status (illegal ones
 * render disabled) and the action-to-command dispatch. The decision panel
 * offers defining a new activity or aborting when the engine has nothing to
 * run. */

import type { ApiClient } from "./api.js";
import type { Command, CommandResponse, SessionStatus } from "./types.js";

export type ControlAction =
  | "start"
  | "pause"
  | "resume"
  | "step"
  | "stop"
  | "abort";

const LEGAL: Record<ControlAction, SessionStatus[]> = {
  start: ["Created"],
  pause: ["Running"],
  resume: ["Paused", "DecisionRequired"],
  step: ["Created", "Paused", "DecisionRequired"],
  stop: ["Created", "Running", "Paused", "DecisionRequired"],
  abort: ["Created", "Running", "Paused", "DecisionRequired"],
};

export function legalActions(status: SessionStatus): ControlAction[] {
  return (Object.keys(LEGAL) as ControlAction[]).filter((action) =>
    LEGAL[action].includes(status),
  );
}

export function isLegal(action: ControlAction, status: SessionStatus): boolean {
  return LEGAL[action].includes(status);
}

export function commandFor(action: ControlAction, stepCount = 1): Command {
  switch (action) {
    case "start":
      return { type: "start" };
    case "pause":
      return { type: "pause" };
    case "resume":
      return { type: "resume" };
    case "step":
      return { type: "step", n: stepCount };
    case "stop":
    case "abort":
      return { type: "stop" };
  }
}

export async function controlFlow(
  client: ApiClient,
  sessionId: string,
  action: ControlAction,
  status: SessionStatus,
  stepCount = 1,
): Promise<CommandResponse> {
  if (!isLegal(action, status)) {
    throw new Error(`${action} is not available while ${status}`);
  }
  return client.command(sessionId, commandFor(action, stepCount));
}

/** The mid-instance edit flow as one controller call: pause the running
 * instance, apply the rule changes, resume the same instance. The commands
 * go out strictly in this order, one POST each. */
export async function pauseEditResume(
  client: ApiClient,
  sessionId: string,
  edits: Command[],
): Promise<CommandResponse[]> {
  const responses: CommandResponse[] = [];
  responses.push(await client.command(sessionId, { type: "pause" }));
  for (const edit of edits) {
    responses.push(await client.command(sessionId, edit));
  }
  responses.push(await client.command(sessionId, { type: "resume" }));
  return responses;
}
