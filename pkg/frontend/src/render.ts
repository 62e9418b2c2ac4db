// Pure HTML renderers. Every function maps service payloads (plus UI
// flags) to markup strings; none of them compute or rewrite study data.
// Keeping them DOM-free makes them directly testable under node.

import {
  Condition,
  CorpusResponse,
  DictResponse,
  GlossRow,
  Suggestion,
  Summary,
} from "./api.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Escape ``text`` and wrap exact occurrences of ``query`` in <mark>. */
export function highlight(text: string, query: string): string {
  if (!query) return escapeHtml(text);
  const parts = text.split(query);
  if (parts.length === 1) return escapeHtml(text);
  return parts.map(escapeHtml).join(`<mark>${escapeHtml(query)}</mark>`);
}

// -- instance header --------------------------------------------------

export function renderConditionBadge(condition: Condition): string {
  const label = condition === "human+llm" ? "Human + LLM" : "Human only";
  return `<span class="badge badge-${condition === "human+llm" ? "llm" : "human"}">${label}</span>`;
}

export function renderProgress(index: number, total: number): string {
  return `${index + 1} / ${total}`;
}

/** m:ss display for the local on-screen timer. */
export function renderTimer(ms: number | null): string {
  if (ms === null) return "-:--";
  const total = Math.max(0, Math.floor(ms / 1000));
  const m = Math.floor(total / 60);
  const s = total % 60;
  return `${m}:${String(s).padStart(2, "0")}`;
}

// -- gloss panel ------------------------------------------------------

/** One row per gloss token; the row count always equals the payload
 *  length, uncovered tokens included. */
export function renderGlossPanel(rows: GlossRow[]): string {
  const body = rows
    .map((row) => {
      const surface = escapeHtml(row.surface);
      if (!row.covered) {
        return `<tr class="uncovered"><td>${surface}</td><td class="gloss">(no gloss)</td></tr>`;
      }
      const senses = row.glosses
        .map((g) => {
          const origin =
            g.origin === "base" ? "" : ` <sup class="origin">${escapeHtml(g.origin)}</sup>`;
          return `<span class="sense">${escapeHtml(g.text)}${origin}</span>`;
        })
        .join("; ");
      return `<tr><td>${surface}</td><td class="gloss">${senses}</td></tr>`;
    })
    .join("\n");
  return `<table class="gloss-panel"><tbody>\n${body}\n</tbody></table>`;
}

// -- search panes -----------------------------------------------------

export function renderDictResults(res: DictResponse | null): string {
  if (res === null) return `<p class="hint">Type a word to search the dictionary.</p>`;
  if (res.results.length === 0) {
    return `<p class="hint">No matches for ${escapeHtml(res.query)}.</p>`;
  }
  const rows = res.results
    .map((r) => {
      const senses = r.senses
        .map((s) => {
          const origin =
            s.provenance === "base"
              ? ""
              : ` <sup class="origin">${escapeHtml(s.provenance)}</sup>`;
          return `${escapeHtml(s.text)}${origin}`;
        })
        .join("; ");
      const pos = r.pos && r.pos.length ? ` <em class="pos">${escapeHtml(r.pos.join(","))}</em>` : "";
      return (
        `<li class="match-${escapeHtml(r.match)}">` +
        `<b>${highlight(r.headword, res.query)}</b>${pos} ${senses}` +
        `</li>`
      );
    })
    .join("\n");
  return `<ul class="dict-results">\n${rows}\n</ul>`;
}

export function renderCorpusResults(res: CorpusResponse | null): string {
  if (res === null) return `<p class="hint">Search the parallel corpus.</p>`;
  if (res.results.length === 0) {
    return `<p class="hint">No matches for ${escapeHtml(res.query)}.</p>`;
  }
  const rows = res.results
    .map((hit) => {
      const src = res.side === "src" ? highlight(hit.src, res.query) : escapeHtml(hit.src);
      const tgt = res.side === "tgt" ? highlight(hit.tgt, res.query) : escapeHtml(hit.tgt);
      return `<li><span class="src">${src}</span><span class="tgt">${tgt}</span></li>`;
    })
    .join("\n");
  return `<ul class="corpus-results">\n${rows}\n</ul>`;
}

// -- suggestion pane --------------------------------------------------

export function renderSuggestion(s: Suggestion | null, pending: boolean): string {
  if (pending) return `<p class="hint">Requesting suggestion...</p>`;
  if (s === null) return "";
  return (
    `<blockquote class="suggestion">${escapeHtml(s.text)}</blockquote>` +
    `<p class="coverage">gloss coverage ${(s.coverage * 100).toFixed(0)}%</p>`
  );
}

// -- summary ----------------------------------------------------------

function ms(v: number | null): string {
  return v === null ? "-" : `${(v / 1000).toFixed(1)} s`;
}

export function renderSummary(summary: Summary): string {
  const rows = summary.instances
    .map(
      (r) =>
        `<tr><td>${r.instance_id}</td><td>${escapeHtml(r.condition)}</td>` +
        `<td>${ms(r.elapsed_ms)}</td>` +
        `<td>${r.counts["word-search"] ?? 0}</td>` +
        `<td>${r.counts["corpus-search"] ?? 0}</td>` +
        `<td>${r.counts["edit"] ?? 0}</td>` +
        `<td>${r.text === null ? "" : escapeHtml(r.text)}</td></tr>`,
    )
    .join("\n");
  const means = Object.entries(summary.mean_elapsed_ms)
    .map(([cond, v]) => `<li>${escapeHtml(cond)}: ${ms(v)}</li>`)
    .join("\n");
  return (
    `<h2>Session ${escapeHtml(summary.session_id)}</h2>` +
    `<p>${summary.submitted} of ${summary.instances.length} submitted.</p>` +
    `<ul class="means">\n${means}\n</ul>` +
    `<table class="summary"><thead><tr>` +
    `<th>id</th><th>condition</th><th>elapsed</th>` +
    `<th>dict</th><th>corpus</th><th>edits</th><th>text</th>` +
    `</tr></thead><tbody>\n${rows}\n</tbody></table>`
  );
}
