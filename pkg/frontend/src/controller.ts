// Review-loop state machine, kept free of DOM so it is testable headless.
// All state lives on the server; every transition re-fetches, which makes
// a browser refresh land on exactly the same pending candidate.

import {
  ApiError,
  ConflictError,
  Decision,
  NextResponse,
  ScreeningApi,
  TemplateView,
} from "./api.js";

export type ViewState =
  | { kind: "loading"; relation: string }
  | {
      kind: "candidate";
      relation: string;
      candidate: NextResponse;
      templates: TemplateView;
    }
  | { kind: "done"; relation: string; templates: TemplateView }
  | { kind: "finalized"; relation: string; templates: TemplateView }
  | { kind: "error"; relation: string; message: string; conflict: boolean };

export class ReviewController {
  private state: ViewState;

  constructor(
    private readonly api: ScreeningApi,
    private readonly relation: string,
    private readonly onRender: (state: ViewState) => void,
  ) {
    this.state = { kind: "loading", relation };
  }

  current(): ViewState {
    return this.state;
  }

  private render(state: ViewState): void {
    this.state = state;
    this.onRender(state);
  }

  /** Fetch the pending candidate and template view from the server. */
  async refresh(): Promise<void> {
    this.render({ kind: "loading", relation: this.relation });
    try {
      const templates = await this.api.templates(this.relation);
      if (templates.finalized) {
        this.render({ kind: "finalized", relation: this.relation, templates });
        return;
      }
      const candidate = await this.api.next(this.relation);
      if (candidate.done) {
        this.render({ kind: "done", relation: this.relation, templates });
      } else {
        this.render({ kind: "candidate", relation: this.relation, candidate, templates });
      }
    } catch (err) {
      this.fail(err);
    }
  }

  /** Record a decision for the displayed candidate, then advance. */
  async decide(decision: Decision): Promise<void> {
    if (this.state.kind !== "candidate") {
      return;
    }
    const pattern = this.state.candidate.pattern;
    if (!pattern) {
      return;
    }
    try {
      await this.api.decide(this.relation, pattern, decision);
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Close the session on the server and show the final template set. */
  async finalize(): Promise<void> {
    try {
      const templates = await this.api.finalize(this.relation);
      this.render({ kind: "finalized", relation: this.relation, templates });
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    const conflict = err instanceof ConflictError;
    const message =
      err instanceof ApiError ? err.message : `unexpected error: ${err}`;
    this.render({ kind: "error", relation: this.relation, message, conflict });
  }
}
