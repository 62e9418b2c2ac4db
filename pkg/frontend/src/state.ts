// Workbench state machine. This is a thin client: every gloss, search
// result, suggestion, and summary figure held here is the verbatim parsed
// body of a service response. The controller never computes translations,
// glosses, or scores; it only sequences requests and tracks UI state.

import {
  ApiClient,
  ApiError,
  Condition,
  CorpusResponse,
  DictResponse,
  InstancePage,
  SessionMeta,
  Suggestion,
  Summary,
} from "./api.js";

export interface SearchPane<T> {
  /** Last issued query (trimmed). */
  query: string;
  /** Response for the last issued query, verbatim from the service. */
  results: T | null;
  pending: boolean;
  error: string | null;
}

export type Phase = "idle" | "working" | "done" | "summary";

export interface WorkbenchState {
  phase: Phase;
  session: SessionMeta | null;
  page: InstancePage | null;
  /** Set when loading the next instance failed; drives the retry banner. */
  loadError: string | null;
  dict: SearchPane<DictResponse>;
  corpus: SearchPane<CorpusResponse>;
  /** Language the dictionary pane currently searches (swappable). */
  dictLang: string;
  corpusSide: "src" | "tgt";
  suggestion: Suggestion | null;
  suggestionPending: boolean;
  draft: string;
  toast: string | null;
  /** Local render timestamp for the on-screen timer. Display only; the
   *  summary's server-side elapsed time is authoritative. */
  openedAtMs: number | null;
  summary: Summary | null;
}

function emptyPane<T>(): SearchPane<T> {
  return { query: "", results: null, pending: false, error: null };
}

export interface ControllerOptions {
  now?: () => number;
  onChange?: (state: WorkbenchState) => void;
}

export class WorkbenchController {
  readonly state: WorkbenchState;
  private readonly api: ApiClient;
  private readonly now: () => number;
  private readonly onChange: ((state: WorkbenchState) => void) | null;
  private dictSeq = 0;
  private corpusSeq = 0;

  constructor(api: ApiClient, opts: ControllerOptions = {}) {
    this.api = api;
    this.now = opts.now ?? Date.now;
    this.onChange = opts.onChange ?? null;
    this.state = {
      phase: "idle",
      session: null,
      page: null,
      loadError: null,
      dict: emptyPane(),
      corpus: emptyPane(),
      dictLang: "",
      corpusSide: "src",
      suggestion: null,
      suggestionPending: false,
      draft: "",
      toast: null,
      openedAtMs: null,
      summary: null,
    };
  }

  private touch(): void {
    if (this.onChange) this.onChange(this.state);
  }

  private fail(message: string): void {
    this.state.toast = message;
    this.touch();
  }

  private static message(err: unknown): string {
    if (err instanceof ApiError) return err.detail;
    if (err instanceof Error) return err.message;
    return String(err);
  }

  // -- session flow ---------------------------------------------------

  async start(participantId: string, seed?: number): Promise<void> {
    try {
      const meta = await this.api.createSession(participantId, seed);
      this.state.session = meta;
      this.state.dictLang = meta.direction[0];
      this.touch();
    } catch (err) {
      this.fail(WorkbenchController.message(err));
      return;
    }
    await this.loadNext();
  }

  /** Fetch the current instance. The timer starts only once the page has
   *  actually rendered; a failed load leaves it unset and raises the
   *  retry banner instead. */
  async loadNext(): Promise<void> {
    const session = this.state.session;
    if (!session) {
      this.fail("no active session");
      return;
    }
    this.state.loadError = null;
    this.touch();
    let next;
    try {
      next = await this.api.nextInstance(session.session_id);
    } catch (err) {
      this.state.loadError = WorkbenchController.message(err);
      this.state.page = null;
      this.state.openedAtMs = null;
      this.touch();
      return;
    }
    if (next.done) {
      this.state.page = null;
      this.state.phase = "done";
      this.state.openedAtMs = null;
      this.touch();
      return;
    }
    this.state.page = next;
    this.state.phase = "working";
    this.state.dict = emptyPane();
    this.state.corpus = emptyPane();
    this.state.suggestion = null;
    this.state.suggestionPending = false;
    this.state.draft = "";
    this.state.openedAtMs = this.now();
    this.touch();
  }

  async retryLoad(): Promise<void> {
    await this.loadNext();
  }

  async finish(): Promise<void> {
    const session = this.state.session;
    if (!session) {
      this.fail("no active session");
      return;
    }
    try {
      this.state.summary = await this.api.summary(session.session_id);
      this.state.phase = "summary";
      this.touch();
    } catch (err) {
      this.fail(WorkbenchController.message(err));
    }
  }

  // -- searches -------------------------------------------------------

  private searchContext() {
    const session = this.state.session;
    if (!session) return undefined;
    return {
      sessionId: session.session_id,
      instanceId: this.state.page?.instance_id,
    };
  }

  /** Dictionary search in the pane's current language. Empty queries
   *  never hit the network. Overlapping searches resolve last-issued-wins:
   *  a stale response is dropped even when it arrives after the newer
   *  one. */
  async searchDict(query: string): Promise<void> {
    const q = query.trim();
    const pane = this.state.dict;
    if (!q) {
      pane.query = "";
      pane.results = null;
      pane.pending = false;
      pane.error = null;
      this.touch();
      return;
    }
    const seq = ++this.dictSeq;
    pane.query = q;
    pane.pending = true;
    pane.error = null;
    this.touch();
    try {
      const res = await this.api.dictSearch(q, this.state.dictLang, this.searchContext());
      if (seq !== this.dictSeq) return; // stale
      pane.results = res;
      pane.pending = false;
      this.touch();
    } catch (err) {
      if (seq !== this.dictSeq) return;
      pane.pending = false;
      pane.error = WorkbenchController.message(err);
      this.fail(pane.error);
    }
  }

  async searchCorpus(query: string, side?: "src" | "tgt"): Promise<void> {
    const q = query.trim();
    const pane = this.state.corpus;
    if (side) this.state.corpusSide = side;
    if (!q) {
      pane.query = "";
      pane.results = null;
      pane.pending = false;
      pane.error = null;
      this.touch();
      return;
    }
    const seq = ++this.corpusSeq;
    pane.query = q;
    pane.pending = true;
    pane.error = null;
    this.touch();
    try {
      const res = await this.api.corpusSearch(
        q,
        this.state.corpusSide,
        5,
        this.searchContext(),
      );
      if (seq !== this.corpusSeq) return; // stale
      pane.results = res;
      pane.pending = false;
      this.touch();
    } catch (err) {
      if (seq !== this.corpusSeq) return;
      pane.pending = false;
      pane.error = WorkbenchController.message(err);
      this.fail(pane.error);
    }
  }

  /** Toggle the dictionary pane between the two study languages
   *  (bound to a keyboard shortcut in the page shell). */
  swapDictLang(): void {
    const session = this.state.session;
    if (!session) return;
    const [a, b] = session.direction;
    this.state.dictLang = this.state.dictLang === a ? b : a;
    this.touch();
  }

  // -- suggestion -----------------------------------------------------

  suggestionAllowed(): boolean {
    return this.state.page?.condition === "human+llm";
  }

  /** Fetch the LLM suggestion for the current instance. Human-only
   *  instances are refused locally, before any request is made. At most
   *  one suggestion request is in flight at a time. */
  async requestSuggestion(): Promise<Suggestion | null> {
    const page = this.state.page;
    const session = this.state.session;
    if (!page || !session) return null;
    if (page.condition !== "human+llm") {
      this.fail("suggestions are disabled for this instance");
      return null;
    }
    if (this.state.suggestionPending) return null;
    this.state.suggestionPending = true;
    this.touch();
    try {
      const s = await this.api.suggest(session.session_id, page.instance_id);
      this.state.suggestion = s;
      this.state.suggestionPending = false;
      this.touch();
      return s;
    } catch (err) {
      this.state.suggestionPending = false;
      this.fail(WorkbenchController.message(err));
      return null;
    }
  }

  // -- draft ----------------------------------------------------------

  /** Mirror keystrokes into the draft without logging anything. */
  setDraft(text: string): void {
    this.state.draft = text;
    this.touch();
  }

  /** Copy the suggestion into the draft box. Not an edit event; only
   *  subsequent manual changes are. */
  acceptSuggestion(): void {
    const s = this.state.suggestion;
    if (!s) return;
    this.state.draft = s.text;
    this.touch();
  }

  /** Commit a manual edit: update the draft and log one edit event.
   *  Callers fire this per committed change (blur), not per keystroke. */
  async edit(text: string): Promise<void> {
    this.state.draft = text;
    this.touch();
    const session = this.state.session;
    const page = this.state.page;
    if (!session || !page) return;
    try {
      await this.api.logEvent(session.session_id, {
        kind: "edit",
        instance_id: page.instance_id,
        payload: { len: text.length },
      });
    } catch (err) {
      // the draft stays; only the telemetry write failed
      this.fail(WorkbenchController.message(err));
    }
  }

  /** Submit the draft for the current instance, then advance. An empty
   *  draft is blocked locally; the server enforces forward-only order. */
  async submit(): Promise<void> {
    const session = this.state.session;
    const page = this.state.page;
    if (!session || !page) {
      this.fail("nothing to submit");
      return;
    }
    const text = this.state.draft;
    if (!text.trim()) {
      this.fail("draft is empty");
      return;
    }
    try {
      await this.api.submit(session.session_id, page.instance_id, text);
    } catch (err) {
      this.fail(WorkbenchController.message(err));
      return;
    }
    await this.loadNext();
  }

  // -- timer ----------------------------------------------------------

  /** Milliseconds since the current page rendered, for display only. */
  elapsedMs(): number | null {
    if (this.state.openedAtMs === null) return null;
    return this.now() - this.state.openedAtMs;
  }
}

export type { Condition };
