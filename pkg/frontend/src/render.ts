/** DOM builders for the three panes. Everything shown comes straight off
 * an API payload field; the UI adds no legal logic of its own. All text
 * lands via textContent, never markup interpolation. */

import type {
  Candidate,
  FeedbackReport,
  GraphStats,
  Precedent,
  Recommendation,
} from "./types.js";
import type { ReviewDecision } from "./review.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderScore(value: number): string {
  return value.toFixed(4);
}

function precedentCard(precedent: Precedent): HTMLElement {
  const card = el("article", "precedent-card");
  card.append(
    el("h4", "precedent-name", precedent.name),
    el("p", "precedent-meta", `${precedent.session_time} — ${precedent.reason}`),
    el("p", "precedent-specifics", precedent.specifics),
  );
  return card;
}

function candidateRow(
  candidate: Candidate,
  decision: ReviewDecision | null,
  onToggle?: (number: string) => void,
): HTMLElement {
  const row = el("li", "candidate");
  const header = el("div", "candidate-header");
  if (decision && onToggle) {
    const label = el("label", "candidate-accept");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = decision.has(candidate.article_number);
    box.disabled = decision.state === "submitted";
    box.setAttribute("data-number", candidate.article_number);
    box.setAttribute(
      "aria-label",
      `accept article ${candidate.article_number}`,
    );
    box.addEventListener("change", () => onToggle(candidate.article_number));
    label.append(box, el("span", undefined, `Article ${candidate.article_number}`));
    header.append(label);
  } else {
    header.append(el("span", undefined, `Article ${candidate.article_number}`));
  }
  header.append(
    el("span", "candidate-score", `score ${renderScore(candidate.cumulative_score)}`),
  );
  row.append(header, el("p", "candidate-body", candidate.body));
  if (candidate.precedents.length) {
    const cases = el("div", "precedents");
    cases.append(
      el("h5", undefined, `Reference cases (${candidate.precedents.length})`),
    );
    for (const precedent of candidate.precedents) {
      cases.append(precedentCard(precedent));
    }
    row.append(cases);
  }
  return row;
}

/** The recommendation pane: headline articles with grounding badges,
 * rationale, ranked candidates, and their precedent cards. */
export function recommendationView(
  recommendation: Recommendation,
  decision: ReviewDecision | null,
  onToggle?: (number: string) => void,
): HTMLElement {
  const pane = el("section", "recommendation");
  if (recommendation.no_match) {
    const empty = el("div", "empty-state");
    empty.append(
      el("h3", undefined, "No matching key information"),
      el(
        "p",
        undefined,
        "Nothing in the knowledge graph matched this description. " +
          "You can still record the confirmed articles below.",
      ),
    );
    pane.append(empty);
    return pane;
  }
  const headline = el("div", "headline");
  for (const number of recommendation.articles) {
    const badge = el("span", "article-pill", `Article ${number}`);
    if (!recommendation.grounded[number]) {
      const warning = el("span", "ungrounded-badge", "ungrounded");
      warning.title =
        "This number is not among the retrieved candidates; it may be a hallucination.";
      badge.append(warning);
      badge.classList.add("ungrounded");
    }
    headline.append(badge);
  }
  if (!recommendation.articles.length) {
    headline.append(el("span", "article-pill none", "No article number parsed"));
  }
  pane.append(headline);
  pane.append(el("p", "rationale", recommendation.rationale));
  const candidates = recommendation.retrieval?.candidates ?? [];
  const list = el("ul", "candidates");
  for (const candidate of candidates) {
    list.append(candidateRow(candidate, decision, onToggle));
  }
  pane.append(el("h3", undefined, `Candidates (${candidates.length})`), list);
  return pane;
}

export function statsView(stats: GraphStats): HTMLElement {
  const pane = el("section", "stats");
  const table = el("table");
  table.setAttribute("aria-label", "graph statistics");
  const head = el("tr");
  head.append(el("th", undefined, "kind"), el("th", undefined, "count"));
  table.append(head);
  for (const [group, counts] of [
    ["node", stats.nodes],
    ["edge", stats.edges],
  ] as const) {
    for (const [kind, count] of Object.entries(counts)) {
      const row = el("tr", `stat-${group}`);
      row.append(el("td", undefined, kind), el("td", undefined, String(count)));
      table.append(row);
    }
  }
  pane.append(table);
  return pane;
}

export function reportView(report: FeedbackReport): HTMLElement {
  const pane = el("section", "mutation-report");
  pane.append(el("h3", undefined, `Recorded as case node ${report.case_id}`));
  const list = el("ul");
  for (const [kind, count] of Object.entries(report.edges_created)) {
    list.append(el("li", undefined, `${kind}: +${count}`));
  }
  pane.append(list);
  if (report.embeddings_stale) {
    pane.append(
      el(
        "p",
        "stale-note",
        "Embeddings are now stale; schedule a retraining run to refresh retrieval.",
      ),
    );
  }
  return pane;
}

export function errorBanner(message: string): HTMLElement {
  const banner = el("div", "error-banner", message);
  banner.setAttribute("role", "alert");
  return banner;
}

export function threadEntry(role: "user" | "assistant", text: string): HTMLElement {
  return el("li", `turn ${role}`, text);
}
