// Browser entry point: wires the controller to the static page. All data
// on screen comes from controller state, which in turn is verbatim
// service output; this file only moves strings between the two.

import { ApiClient } from "./api.js";
import {
  renderConditionBadge,
  renderCorpusResults,
  renderDictResults,
  renderGlossPanel,
  renderProgress,
  renderSuggestion,
  renderSummary,
  renderTimer,
} from "./render.js";
import { WorkbenchController } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://localhost:8000";

const api = new ApiClient(base);
const ctl = new WorkbenchController(api, { onChange: () => render() });

const startForm = el<HTMLElement>("start-form");
const workArea = el<HTMLElement>("work-area");
const doneArea = el<HTMLElement>("done-area");
const summaryArea = el<HTMLElement>("summary-area");
const toastBox = el<HTMLElement>("toast");
const retryBanner = el<HTMLElement>("retry-banner");

const badgeBox = el<HTMLElement>("condition-badge");
const progressBox = el<HTMLElement>("progress");
const timerBox = el<HTMLElement>("timer");
const sourceBox = el<HTMLElement>("source-text");
const glossBox = el<HTMLElement>("gloss-panel");

const dictInput = el<HTMLInputElement>("dict-query");
const dictLangBox = el<HTMLElement>("dict-lang");
const dictResultsBox = el<HTMLElement>("dict-results");
const corpusInput = el<HTMLInputElement>("corpus-query");
const corpusSide = el<HTMLSelectElement>("corpus-side");
const corpusResultsBox = el<HTMLElement>("corpus-results");

const suggestWrap = el<HTMLElement>("suggest-wrap");
const suggestBtn = el<HTMLButtonElement>("suggest-btn");
const suggestionBox = el<HTMLElement>("suggestion");
const acceptBtn = el<HTMLButtonElement>("accept-btn");

const draftBox = el<HTMLTextAreaElement>("draft");
const submitBtn = el<HTMLButtonElement>("submit-btn");

function render(): void {
  const s = ctl.state;
  startForm.hidden = s.phase !== "idle";
  workArea.hidden = s.phase !== "working";
  doneArea.hidden = s.phase !== "done";
  summaryArea.hidden = s.phase !== "summary";
  toastBox.textContent = s.toast ?? "";
  toastBox.hidden = s.toast === null;
  retryBanner.hidden = s.loadError === null;

  if (s.page) {
    badgeBox.innerHTML = renderConditionBadge(s.page.condition);
    progressBox.textContent = renderProgress(s.page.index, s.page.total);
    sourceBox.textContent = s.page.source;
    glossBox.innerHTML = renderGlossPanel(s.page.glosses);
    suggestWrap.hidden = !ctl.suggestionAllowed();
  }
  dictLangBox.textContent = s.dictLang;
  dictResultsBox.innerHTML = renderDictResults(s.dict.results);
  corpusResultsBox.innerHTML = renderCorpusResults(s.corpus.results);
  suggestionBox.innerHTML = renderSuggestion(s.suggestion, s.suggestionPending);
  acceptBtn.hidden = s.suggestion === null;
  if (draftBox.value !== s.draft) draftBox.value = s.draft;
  summaryArea.innerHTML = s.summary ? renderSummary(s.summary) : "";
}

window.setInterval(() => {
  timerBox.textContent = renderTimer(ctl.elapsedMs());
}, 500);

el<HTMLFormElement>("start-form").addEventListener("submit", (ev) => {
  ev.preventDefault();
  const pid = el<HTMLInputElement>("participant").value;
  if (pid.trim()) void ctl.start(pid.trim());
});

dictInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") void ctl.searchDict(dictInput.value);
});
el<HTMLButtonElement>("dict-go").addEventListener("click", () => {
  void ctl.searchDict(dictInput.value);
});
corpusInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") {
    void ctl.searchCorpus(corpusInput.value, corpusSide.value as "src" | "tgt");
  }
});
el<HTMLButtonElement>("corpus-go").addEventListener("click", () => {
  void ctl.searchCorpus(corpusInput.value, corpusSide.value as "src" | "tgt");
});

// Alt+L swaps the dictionary search language
window.addEventListener("keydown", (ev) => {
  if (ev.altKey && ev.key.toLowerCase() === "l") {
    ev.preventDefault();
    ctl.swapDictLang();
  }
});

suggestBtn.addEventListener("click", () => {
  void ctl.requestSuggestion();
});
acceptBtn.addEventListener("click", () => {
  ctl.acceptSuggestion();
});

// keystrokes mirror locally; a committed change (blur) logs one edit event
draftBox.addEventListener("input", () => {
  ctl.setDraft(draftBox.value);
});
draftBox.addEventListener("change", () => {
  void ctl.edit(draftBox.value);
});

submitBtn.addEventListener("click", () => {
  void ctl.submit();
});
el<HTMLButtonElement>("retry-btn").addEventListener("click", () => {
  void ctl.retryLoad();
});
el<HTMLButtonElement>("summary-btn").addEventListener("click", () => {
  void ctl.finish();
});

render();
