// Typed client for the study service. All traffic goes through the /v1/
// HTTP interface; nothing in here computes glosses, scores, or summaries.

export interface DictSense {
  text: string;
  provenance: string;
  score: number | null;
}

export interface DictRow {
  headword: string;
  match: string;
  senses: DictSense[];
  pos: string[] | null;
}

export interface DictResponse {
  query: string;
  lang: string;
  results: DictRow[];
}

export interface CorpusHit {
  id: number;
  src: string;
  tgt: string;
  tag: string | null;
  score: number;
}

export interface CorpusResponse {
  query: string;
  side: string;
  results: CorpusHit[];
}

export type Condition = "human-only" | "human+llm";

export interface SessionInstanceRef {
  id: number;
  condition: Condition;
}

export interface SessionMeta {
  session_id: string;
  participant_id: string;
  seed: number;
  direction: [string, string];
  instances: SessionInstanceRef[];
  created_ms: number;
}

export interface GlossCandidate {
  text: string;
  origin: string;
}

export interface GlossRow {
  surface: string;
  kind: string;
  covered: boolean;
  glosses: GlossCandidate[];
}

export interface InstancePage {
  done: false;
  instance_id: number;
  condition: Condition;
  source: string;
  src_lang: string;
  tgt_lang: string;
  index: number;
  total: number;
  glosses: GlossRow[];
}

export interface SessionDone {
  done: true;
  total: number;
}

export type NextResponse = InstancePage | SessionDone;

export interface EventAck {
  ok: boolean;
  ts_ms: number;
}

export interface SubmitAck {
  ok: boolean;
  ts_ms: number;
  remaining: number;
}

export interface Suggestion {
  text: string;
  coverage: number;
}

export interface SummaryRow {
  instance_id: number;
  condition: Condition;
  opened_ms: number | null;
  submitted_ms: number | null;
  elapsed_ms: number | null;
  text: string | null;
  counts: Record<string, number>;
  word_searches_by_language: Record<string, number>;
}

export interface Summary {
  session_id: string;
  participant_id: string;
  submitted: number;
  instances: SummaryRow[];
  totals: Record<string, number>;
  word_searches_by_language: Record<string, number>;
  mean_elapsed_ms: Record<string, number | null>;
  report: Record<string, unknown> | null;
}

export interface EventBody {
  kind: string;
  instance_id?: number;
  language?: string;
  payload?: Record<string, unknown>;
}

/** Attribution headers attached to search requests made inside a session. */
export interface SearchContext {
  sessionId: string;
  instanceId?: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function readDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    // non-JSON error body, fall through
  }
  return res.statusText || "request failed";
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // bind so a bare window.fetch keeps its receiver
    const impl = fetchImpl ?? fetch;
    this.fetchImpl = (url, init) => impl(url, init);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await readDetail(res));
    }
    return (await res.json()) as T;
  }

  private get<T>(path: string, ctx?: SearchContext): Promise<T> {
    const headers: Record<string, string> = {};
    if (ctx) {
      headers["X-Session-Id"] = ctx.sessionId;
      if (ctx.instanceId !== undefined) {
        headers["X-Instance-Id"] = String(ctx.instanceId);
      }
    }
    return this.request<T>(path, { method: "GET", headers });
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  dictSearch(query: string, lang: string, ctx?: SearchContext): Promise<DictResponse> {
    const qs = new URLSearchParams({ q: query, lang });
    return this.get<DictResponse>(`/v1/dict?${qs}`, ctx);
  }

  corpusSearch(
    query: string,
    side: string,
    k: number,
    ctx?: SearchContext,
  ): Promise<CorpusResponse> {
    const qs = new URLSearchParams({ q: query, side, k: String(k) });
    return this.get<CorpusResponse>(`/v1/corpus?${qs}`, ctx);
  }

  createSession(participantId: string, seed?: number): Promise<SessionMeta> {
    const body: Record<string, unknown> = { participant_id: participantId };
    if (seed !== undefined) body.seed = seed;
    return this.post<SessionMeta>("/v1/session", body);
  }

  nextInstance(sessionId: string): Promise<NextResponse> {
    return this.get<NextResponse>(`/v1/session/${encodeURIComponent(sessionId)}/next`);
  }

  logEvent(sessionId: string, body: EventBody): Promise<EventAck> {
    return this.post<EventAck>(`/v1/session/${encodeURIComponent(sessionId)}/event`, body);
  }

  submit(sessionId: string, instanceId: number, text: string): Promise<SubmitAck> {
    return this.post<SubmitAck>(`/v1/session/${encodeURIComponent(sessionId)}/submit`, {
      instance_id: instanceId,
      text,
    });
  }

  summary(sessionId: string): Promise<Summary> {
    return this.get<Summary>(`/v1/session/${encodeURIComponent(sessionId)}/summary`);
  }

  suggest(sessionId: string, instanceId: number): Promise<Suggestion> {
    return this.post<Suggestion>("/v1/suggest", {
      session_id: sessionId,
      instance_id: instanceId,
    });
  }
}
