/**
 * Supervisor console: skill buttons for click-to-sequence commanding,
 * plan approval, a live execution log, and human-gate confirmation.
 *
 * The console mutates nothing on its own: every POST is triggered by a
 * button the supervisor pressed. Server state is never assumed; drafts
 * are the only optimistic piece of UI.
 */

import {
  ApiClient,
  EventStream,
  SessionEvent,
  SkillInfo,
} from "./api.js";

export interface ConsoleState {
  skills: SkillInfo[];
  draft: string[];
  breakIndex: number | null;
  planChain: string[] | null;
  events: SessionEvent[];
  gate: { kind: string; message: string; progress: string | null } | null;
  summary: string | null;
  lastError: string | null;
}

export class SupervisorConsole {
  readonly state: ConsoleState = {
    skills: [],
    draft: [],
    breakIndex: null,
    planChain: null,
    events: [],
    gate: null,
    summary: null,
    lastError: null,
  };

  private stream: EventStream | null = null;
  private streamDone: Promise<void> | null = null;

  constructor(
    readonly api: ApiClient,
    readonly root: HTMLElement,
    readonly supervisorId: string = "console",
  ) {}

  async init(): Promise<void> {
    const listing = await this.api.skills();
    this.state.skills = listing.skills;
    this.render();
  }

  // ------------------------------------------------------------------
  // Click-to-sequence
  // ------------------------------------------------------------------

  clickSkill(name: string): void {
    this.state.draft.push(name);
    this.state.breakIndex = null;
    this.render();
  }

  undo(): void {
    this.state.draft.pop();
    this.state.breakIndex = null;
    this.render();
  }

  async submitDraft(): Promise<void> {
    if (this.state.draft.length === 0) return; // button is disabled anyway
    const result = await this.api.postSequence([...this.state.draft]);
    if (result.ok) {
      this.state.planChain = result.body.chain;
      this.state.breakIndex = null;
      this.state.lastError = null;
    } else {
      this.state.planChain = null;
      this.state.breakIndex = result.body.first_break ?? null;
      this.state.lastError = result.body.error;
    }
    this.render();
  }

  // ------------------------------------------------------------------
  // Approve and monitor
  // ------------------------------------------------------------------

  async approve(): Promise<void> {
    const result = await this.api.approve(this.supervisorId);
    if (!result.ok) {
      this.state.lastError = result.body.error;
      this.render();
      return;
    }
    this.state.lastError = null;
    this.subscribe(0);
    this.render();
  }

  subscribe(fromSeq: number): void {
    this.stream?.stop();
    this.stream = new EventStream(this.api.baseUrl, {
      fromSeq,
      retryDelayMs: 50,
    });
    this.streamDone = this.stream
      .run((event) => this.onEvent(event))
      .catch((err) => {
        this.state.lastError = String(err);
        this.render();
      });
  }

  /** Resolves when the current subscription has drained. */
  async settled(): Promise<void> {
    await this.streamDone;
  }

  private onEvent(event: SessionEvent): void {
    this.state.events.push(event);
    if (event.kind === "human_gate_opened" || event.kind === "tool_change_requested") {
      this.state.gate = {
        kind: String(event.payload["gate"] ?? "gate"),
        message: String(event.payload["message"] ?? ""),
        progress: (event.payload["progress"] as string | undefined) ?? null,
      };
    } else if (event.kind === "human_confirmed") {
      const progress = event.payload["progress"] as string | undefined;
      if (progress && this.state.gate) {
        this.state.gate.progress = progress;
      }
    } else if (event.kind === "step_started" || event.kind === "step_completed") {
      this.state.gate = null;
    } else if (event.kind === "plan_completed") {
      this.state.gate = null;
      this.state.summary = `completed: ${this.state.events.filter((e) => e.kind === "step_completed").length} steps`;
    } else if (event.kind === "plan_failed") {
      this.state.gate = null;
      this.state.summary = `failed: ${String(event.payload["reason"] ?? "")}`;
    }
    this.render();
  }

  async confirmGate(): Promise<void> {
    const result = await this.api.confirm(this.supervisorId);
    if (!result.ok) {
      this.state.lastError = result.body.error;
    }
    this.render();
  }

  // ------------------------------------------------------------------
  // Rendering
  // ------------------------------------------------------------------

  render(): void {
    const { state } = this;
    this.root.replaceChildren();

    const buttons = el("div", { id: "skill-buttons" });
    for (const skill of state.skills) {
      const button = el("button", {
        class: "skill",
        "data-skill": skill.canonical_name,
      });
      button.textContent = skill.canonical_name;
      button.addEventListener("click", () => this.clickSkill(skill.canonical_name));
      buttons.append(button);
    }
    this.root.append(buttons);

    const draft = el("ol", { id: "draft" });
    state.draft.forEach((name, index) => {
      const item = el("li", {
        class: index === state.breakIndex ? "draft-item break" : "draft-item",
      });
      item.textContent = name;
      draft.append(item);
    });
    this.root.append(draft);

    const undo = el("button", { id: "undo" });
    undo.textContent = "Undo";
    undo.addEventListener("click", () => this.undo());
    const submit = el("button", { id: "submit" }) as HTMLButtonElement;
    submit.textContent = "Submit sequence";
    submit.disabled = state.draft.length === 0;
    submit.addEventListener("click", () => void this.submitDraft());
    const approveButton = el("button", { id: "approve" }) as HTMLButtonElement;
    approveButton.textContent = "Approve plan";
    approveButton.disabled = state.planChain === null;
    approveButton.addEventListener("click", () => void this.approve());
    this.root.append(undo, submit, approveButton);

    if (state.planChain) {
      const preview = el("div", { id: "plan-preview" });
      preview.textContent = state.planChain.join(" -> ");
      this.root.append(preview);
    }

    if (state.gate) {
      const modal = el("div", { id: "gate-modal", "data-gate": state.gate.kind });
      const message = el("p", { class: "gate-message" });
      message.textContent = state.gate.message;
      modal.append(message);
      if (state.gate.progress !== null) {
        const progress = el("p", { id: "gate-progress" });
        progress.textContent = state.gate.progress;
        modal.append(progress);
      }
      const confirm = el("button", { id: "confirm" });
      confirm.textContent = "Confirm";
      confirm.addEventListener("click", () => void this.confirmGate());
      modal.append(confirm);
      this.root.append(modal);
    }

    const log = el("ul", { id: "event-log" });
    for (const event of state.events) {
      const row = el("li", { class: "event", "data-seq": String(event.seq_no) });
      row.textContent = `#${event.seq_no} ${event.kind}`;
      log.append(row);
    }
    this.root.append(log);

    if (state.summary) {
      const summary = el("div", { id: "summary" });
      summary.textContent = state.summary;
      this.root.append(summary);
    }
    if (state.lastError) {
      const error = el("div", { id: "error" });
      error.textContent = state.lastError;
      this.root.append(error);
    }
  }
}

function el(tag: string, attrs: Record<string, string> = {}): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}
