// Seat controller: joins, polls the server for phase changes, renders, and
// forwards clicks. One submission may be in flight at a time; poll errors
// back off exponentially and surface a retry banner instead of resubmitting.

import { ApiError, SessionApi } from "./api.js";
import { SeatState } from "./types.js";
import { Handlers, render } from "./view.js";

export interface ControllerOptions {
  pollIntervalMs?: number;
  maxBackoffMs?: number;
  onState?: (state: SeatState) => void;
}

export class SeatController {
  private state: SeatState | null = null;
  private busy = false;
  private error: string | null = null;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private backoff: number;
  private readonly pollInterval: number;
  private readonly maxBackoff: number;

  constructor(
    private readonly api: SessionApi,
    private readonly root: HTMLElement,
    private readonly options: ControllerOptions = {},
  ) {
    this.pollInterval = options.pollIntervalMs ?? 500;
    this.maxBackoff = options.maxBackoffMs ?? 8000;
    this.backoff = this.pollInterval;
  }

  async start(): Promise<void> {
    try {
      this.apply(await this.api.join());
    } catch (err) {
      this.error = describe(err);
      this.draw();
    }
    this.scheduleNext();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
  }

  current(): SeatState | null {
    return this.state;
  }

  private apply(state: SeatState): void {
    this.state = state;
    this.error = null;
    this.backoff = this.pollInterval;
    this.options.onState?.(state);
    this.draw();
  }

  private scheduleNext(): void {
    if (this.stopped || this.state?.phase.kind === "finished") return;
    this.timer = setTimeout(() => void this.poll(), this.error ? this.backoff : this.pollInterval);
  }

  private async poll(): Promise<void> {
    if (this.stopped) return;
    try {
      this.apply(await this.api.state());
    } catch (err) {
      this.error = describe(err);
      this.backoff = Math.min(this.backoff * 2, this.maxBackoff);
      this.draw();
    }
    this.scheduleNext();
  }

  private handlers(): Handlers {
    return {
      onChoose: (action: string) => void this.choose(action),
      onContinue: () => void this.acknowledge(),
    };
  }

  private async choose(action: string): Promise<void> {
    const state = this.state;
    if (this.busy || !state || state.phase.kind !== "collecting" || state.submitted) {
      return;
    }
    this.busy = true;
    this.draw();
    try {
      await this.api.submitChoice(state.phase.part, state.phase.round, action);
      this.apply(await this.api.state());
    } catch (err) {
      // a 409 means the server already holds a choice; never send it twice
      if (!(err instanceof ApiError && err.status === 409)) {
        this.error = describe(err);
      }
      this.draw();
    } finally {
      this.busy = false;
      this.draw();
    }
  }

  private async acknowledge(): Promise<void> {
    const state = this.state;
    if (this.busy || !state || state.phase.kind !== "feedback" || state.acknowledged) {
      return;
    }
    this.busy = true;
    this.draw();
    try {
      await this.api.ackFeedback(state.phase.part, state.phase.round);
      this.apply(await this.api.state());
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 409)) {
        this.error = describe(err);
      }
    } finally {
      this.busy = false;
      this.draw();
    }
  }

  private draw(): void {
    render(this.root, this.state, this.handlers(), {
      busy: this.busy,
      error: this.error,
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
