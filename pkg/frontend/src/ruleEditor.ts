/** Rule editor state. Submission is enabled only while the session is
 * paused or waiting at a decision point: the service enforces the same
 * gate, this mirrors it in the UI so the button state tells the truth. */

import type { ApiClient } from "./api.js";
import type { CommandResponse, SessionStatus, StateView } from "./types.js";

export interface Diagnostics {
  line: number;
  col: number;
  message: string;
}

export class RuleEditor {
  selectedRuleId: string | null = null;
  source = "";
  dirty = false;
  diagnostics: Diagnostics | null = null;

  constructor(private readonly original: Map<string, string> = new Map()) {}

  static fromState(state: StateView): RuleEditor {
    return new RuleEditor(new Map(state.rules.items.map((r) => [r.id, r.source])));
  }

  select(ruleId: string): void {
    this.selectedRuleId = ruleId;
    this.source = this.original.get(ruleId) ?? "";
    this.dirty = false;
    this.diagnostics = null;
  }

  edit(text: string): void {
    this.source = text;
    this.dirty =
      this.selectedRuleId === null ||
      text !== (this.original.get(this.selectedRuleId) ?? "");
  }

  canSubmit(status: SessionStatus): boolean {
    return (
      this.dirty &&
      this.source.trim().length > 0 &&
      (status === "Paused" || status === "DecisionRequired")
    );
  }

  /** POST the edit (or an add when no rule is selected). On rejection the
   * diagnostics land inline and the draft stays; on success the draft
   * becomes the new original. */
  async submit(client: ApiClient, sessionId: string): Promise<CommandResponse> {
    let response: CommandResponse;
    try {
      if (this.selectedRuleId !== null) {
        response = await client.command(sessionId, {
          type: "editRule",
          ruleId: this.selectedRuleId,
          source: this.source,
        });
      } else {
        response = await client.command(sessionId, {
          type: "addRule",
          source: this.source,
        });
      }
    } catch (error) {
      const body = (error as { body?: { diagnostics?: Diagnostics; message?: string } }).body;
      this.diagnostics = body?.diagnostics ?? {
        line: 0,
        col: 0,
        message: body?.message ?? String(error),
      };
      throw error;
    }
    this.diagnostics = null;
    this.dirty = false;
    if (this.selectedRuleId !== null) {
      this.original.set(this.selectedRuleId, this.source);
    }
    return response;
  }
}
