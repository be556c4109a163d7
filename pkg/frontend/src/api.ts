/**
 * Typed client for the skillchain supervision service.
 *
 * Every mutation is an explicit POST issued from a user action; the event
 * stream is a read-only NDJSON subscription that resumes from the last
 * seen sequence number after a disconnect, so the rendered log can never
 * drop or duplicate an event.
 */

export interface SkillInfo {
  id: string;
  canonical_name: string;
  synonyms: string[];
  requires_human_gate: boolean;
  is_sentinel: boolean;
}

export interface SkillListing {
  version: string;
  skills: SkillInfo[];
}

export interface SessionEvent {
  seq_no: number;
  ts: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SessionSnapshot {
  status: string;
  cursor?: number;
  task_label?: string;
  chain?: string[];
  gate?: string | null;
  fail_reason?: string | null;
  world?: Record<string, unknown>;
}

export interface ApiError {
  error: string;
  first_break?: number;
  unknown?: string;
}

export type Result<T> =
  | { ok: true; body: T }
  | { ok: false; status: number; body: ApiError };

async function asResult<T>(response: Response): Promise<Result<T>> {
  const body = await response.json();
  if (response.ok) {
    return { ok: true, body: body as T };
  }
  return { ok: false, status: response.status, body: body as ApiError };
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async skills(): Promise<SkillListing> {
    const response = await fetch(this.url("/skills"));
    return (await response.json()) as SkillListing;
  }

  async postSequence(names: string[]): Promise<Result<{ status: string; chain: string[] }>> {
    const response = await fetch(this.url("/sequence"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(names),
    });
    return asResult(response);
  }

  async postChain(backend: string, start: string, maxLen: number) {
    const response = await fetch(this.url("/chain"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ backend, start, max_len: maxLen }),
    });
    return asResult<{ status: string; chain: string[] }>(response);
  }

  async approve(supervisorId: string): Promise<Result<SessionSnapshot>> {
    const response = await fetch(this.url("/approve"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ supervisor_id: supervisorId }),
    });
    return asResult(response);
  }

  async confirm(supervisorId: string): Promise<Result<SessionSnapshot>> {
    const response = await fetch(this.url("/confirm"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ supervisor_id: supervisorId }),
    });
    return asResult(response);
  }

  async session(): Promise<SessionSnapshot> {
    const response = await fetch(this.url("/session"));
    return (await response.json()) as SessionSnapshot;
  }
}

const TERMINAL_KINDS = new Set(["plan_completed", "plan_failed"]);

export interface StreamOptions {
  fromSeq?: number;
  retryDelayMs?: number;
  maxRetries?: number;
}

/**
 * Long-lived event subscription with exactly-once delivery.
 *
 * Events arriving with a sequence number below the resume cursor are
 * dropped (replays after reconnect), so subscribers see each seq_no once,
 * in order, regardless of how often the transport fails.
 */
export class EventStream {
  private nextSeq: number;
  private stopped = false;
  readonly retryDelayMs: number;
  readonly maxRetries: number;

  constructor(readonly baseUrl: string = "", options: StreamOptions = {}) {
    this.nextSeq = options.fromSeq ?? 0;
    this.retryDelayMs = options.retryDelayMs ?? 250;
    this.maxRetries = options.maxRetries ?? 20;
  }

  stop(): void {
    this.stopped = true;
  }

  get cursor(): number {
    return this.nextSeq;
  }

  async run(onEvent: (event: SessionEvent) => void): Promise<void> {
    let retries = 0;
    let terminal = false;
    while (!this.stopped && !terminal) {
      try {
        const response = await fetch(
          `${this.baseUrl}/events?from_seq=${this.nextSeq}`,
        );
        if (!response.ok || response.body === null) {
          throw new Error(`stream unavailable: ${response.status}`);
        }
        terminal = await this.consume(response.body, onEvent);
        if (!terminal) {
          // clean close without a terminal event: session still live
          throw new Error("stream closed early");
        }
      } catch (err) {
        if (this.stopped) return;
        retries += 1;
        if (retries > this.maxRetries) throw err;
        await new Promise((resolve) => setTimeout(resolve, this.retryDelayMs));
      }
    }
  }

  private async consume(
    body: ReadableStream<Uint8Array>,
    onEvent: (event: SessionEvent) => void,
  ): Promise<boolean> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let terminal = false;
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        newline = buffer.indexOf("\n");
        if (!line) continue;
        const event = JSON.parse(line) as SessionEvent;
        if (event.seq_no < this.nextSeq) continue; // replayed duplicate
        this.nextSeq = event.seq_no + 1;
        onEvent(event);
        if (TERMINAL_KINDS.has(event.kind)) terminal = true;
      }
    }
    return terminal;
  }
}
