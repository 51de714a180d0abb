// Typed client for the pattern-screening API served by the pipeline's
// `screen` command. The server is the single source of truth; this client
// never caches state and never retries on its own.

export type Decision = "accept" | "reject" | "skip";

export interface RelationRow {
  id: string;
  decided: number;
  total: number;
  accepted: number;
  finalized: boolean;
}

export interface ExampleSentence {
  sentence_id: string;
  tokens: string[];
  subj_span: [number, number];
  obj_span: [number, number];
}

export interface Progress {
  decided: number;
  total: number;
  accepted: number;
}

export interface NextResponse {
  done: boolean;
  progress: Progress;
  pattern?: string;
  tokens?: string[];
  frequency?: number;
  example?: ExampleSentence | null;
}

export interface TemplateView {
  relation: string;
  general: string;
  mined: string[];
  finalized: boolean;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(message, 409);
    this.name = "ConflictError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ScreeningApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`screening server unreachable: ${err}`, 0);
    }
    const body = await response.json().catch(() => ({}));
    if (response.status === 409) {
      throw new ConflictError(body.error ?? "decision conflict");
    }
    if (!response.ok) {
      throw new ApiError(body.error ?? `HTTP ${response.status}`, response.status);
    }
    return body as T;
  }

  async relations(): Promise<RelationRow[]> {
    const body = await this.request<{ relations: RelationRow[] }>("/api/relations");
    return body.relations;
  }

  next(relation: string): Promise<NextResponse> {
    return this.request(`/api/screening/${encodeURIComponent(relation)}/next`);
  }

  decide(relation: string, pattern: string, decision: Decision): Promise<{ ok: boolean; progress: Progress }> {
    return this.request(`/api/screening/${encodeURIComponent(relation)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pattern, decision }),
    });
  }

  templates(relation: string): Promise<TemplateView> {
    return this.request(`/api/templates/${encodeURIComponent(relation)}`);
  }

  finalize(relation: string): Promise<TemplateView> {
    return this.request(`/api/templates/${encodeURIComponent(relation)}/finalize`, {
      method: "POST",
    });
  }
}
