/** Pure state for the human review workflow: the case draft being typed
 * and the accept/correct decision built on top of a recommendation. No
 * DOM and no network here, so the rules are unit-testable in isolation. */

import type { FeedbackBody, Recommendation } from "./types.js";

export interface CaseDraft {
  description: string;
  name: string;
  date: string;
  reason: string;
}

export function emptyDraft(): CaseDraft {
  return { description: "", name: "", date: "", reason: "" };
}

/** Submission is gated only on the description; metadata gets defaults. */
export function draftReady(draft: CaseDraft): boolean {
  return draft.description.trim().length > 0;
}

export type DecisionState = "pending" | "submitted";

export class ReviewDecision {
  private accepted: string[];
  private readonly recommended: string[];
  state: DecisionState = "pending";

  constructor(recommendation: Recommendation) {
    // pre-fill with the recommended numbers; fall back to the top
    // candidate so a parse-less rationale still yields a usable decision
    const fallback =
      recommendation.retrieval?.candidates.slice(0, 1).map((c) => c.article_number) ??
      [];
    this.recommended = recommendation.articles.length
      ? [...recommendation.articles]
      : fallback;
    this.accepted = [...this.recommended];
  }

  get articles(): string[] {
    return [...this.accepted];
  }

  has(number: string): boolean {
    return this.accepted.includes(number);
  }

  private assertEditable(): void {
    if (this.state === "submitted") {
      throw new Error("submitted decisions are immutable");
    }
  }

  add(number: string): void {
    this.assertEditable();
    const cleaned = number.trim();
    if (cleaned && !this.accepted.includes(cleaned)) {
      this.accepted.push(cleaned);
    }
  }

  remove(number: string): void {
    this.assertEditable();
    this.accepted = this.accepted.filter((n) => n !== number);
  }

  toggle(number: string): void {
    this.has(number) ? this.remove(number) : this.add(number);
  }

  /** Numbers the reviewer dropped from the original recommendation. */
  get correctedFrom(): string[] {
    return this.recommended.filter((n) => !this.accepted.includes(n));
  }

  get isCorrection(): boolean {
    return (
      this.correctedFrom.length > 0 ||
      this.accepted.some((n) => !this.recommended.includes(n))
    );
  }

  markSubmitted(): void {
    if (!this.accepted.length) {
      throw new Error("select at least one article before submitting");
    }
    this.state = "submitted";
  }

  feedbackBody(draft: CaseDraft): FeedbackBody {
    const body: FeedbackBody = {
      case_text: draft.description.trim(),
      case_name: draft.name.trim() || "Unnamed case (review UI)",
      session_date: draft.date.trim() || new Date().toISOString().slice(0, 10),
      prosecution_reason: draft.reason.trim() || "unspecified",
      confirmed_articles: this.articles,
    };
    if (this.isCorrection && this.correctedFrom.length) {
      body.corrected_from = this.correctedFrom;
    }
    return body;
  }
}
