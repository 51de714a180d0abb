// Pure HTML-string renderers; the browser entry swaps them into the page.

import { ExampleSentence, NextResponse, TemplateView } from "./api.js";
import { ViewState } from "./controller.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderExample(example: ExampleSentence): string {
  const [ss, se] = example.subj_span;
  const [os, oe] = example.obj_span;
  const parts = example.tokens.map((token, i) => {
    const escaped = escapeHtml(token);
    if (i >= ss && i < se) return `<mark class="subj">${escaped}</mark>`;
    if (i >= os && i < oe) return `<mark class="obj">${escaped}</mark>`;
    return escaped;
  });
  return `<p class="example">${parts.join(" ")}</p>`;
}

export function renderCandidate(candidate: NextResponse): string {
  const pattern = escapeHtml(candidate.pattern ?? "");
  const example = candidate.example
    ? renderExample(candidate.example)
    : '<p class="example none">no example sentence available</p>';
  const { decided, total } = candidate.progress;
  return [
    `<div class="candidate">`,
    `<code class="pattern">${pattern}</code>`,
    `<span class="frequency">group frequency ${candidate.frequency ?? 0}</span>`,
    example,
    `<span class="progress">${decided} of ${total} decided</span>`,
    `</div>`,
  ].join("\n");
}

export function renderTemplates(view: TemplateView): string {
  const items = [
    `<li class="general">${escapeHtml(view.general)}</li>`,
    ...view.mined.map((t) => `<li class="mined">${escapeHtml(t)}</li>`),
  ];
  const state = view.finalized ? " (finalized)" : "";
  return `<div class="templates"><h2>templates${state}</h2><ol>${items.join("")}</ol></div>`;
}

export function renderState(state: ViewState): string {
  switch (state.kind) {
    case "loading":
      return `<p class="loading">loading ${escapeHtml(state.relation)}…</p>`;
    case "candidate":
      return renderCandidate(state.candidate) + renderTemplates(state.templates);
    case "done":
      return (
        `<p class="done">all candidates decided for ${escapeHtml(state.relation)};` +
        ` press f to finalize</p>` + renderTemplates(state.templates)
      );
    case "finalized":
      return (
        `<p class="done">finalized ${escapeHtml(state.relation)}</p>` +
        renderTemplates(state.templates)
      );
    case "error": {
      const cls = state.conflict ? "error conflict" : "error";
      return (
        `<p class="${cls}">${escapeHtml(state.message)}</p>` +
        `<p class="hint">press n to reload the pending candidate</p>`
      );
    }
  }
}
