/** Wires the three panes together: case entry, recommendation review,
 * and graph stats, plus the follow-up thread for the open session. */

import { ApiClient, ApiError } from "./api.js";
import {
  errorBanner,
  recommendationView,
  reportView,
  statsView,
  threadEntry,
} from "./render.js";
import { CaseDraft, ReviewDecision, draftReady, emptyDraft } from "./review.js";
import type { Recommendation } from "./types.js";

interface Elements {
  caseForm: HTMLFormElement;
  description: HTMLTextAreaElement;
  caseName: HTMLInputElement;
  caseDate: HTMLInputElement;
  caseReason: HTMLInputElement;
  submitCase: HTMLButtonElement;
  busy: HTMLElement;
  recommendation: HTMLElement;
  reviewControls: HTMLElement;
  addNumber: HTMLInputElement;
  addButton: HTMLButtonElement;
  submitReview: HTMLButtonElement;
  reviewErrors: HTMLElement;
  report: HTMLElement;
  stats: HTMLElement;
  followupForm: HTMLFormElement;
  question: HTMLInputElement;
  thread: HTMLUListElement;
  followupNotice: HTMLElement;
}

function grab(root: Document | HTMLElement): Elements {
  const byId = <T extends HTMLElement>(id: string) => {
    const node = root.querySelector<T>(`#${id}`);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  };
  return {
    caseForm: byId<HTMLFormElement>("case-form"),
    description: byId<HTMLTextAreaElement>("case-description"),
    caseName: byId<HTMLInputElement>("case-name"),
    caseDate: byId<HTMLInputElement>("case-date"),
    caseReason: byId<HTMLInputElement>("case-reason"),
    submitCase: byId<HTMLButtonElement>("submit-case"),
    busy: byId("busy-indicator"),
    recommendation: byId("recommendation-pane"),
    reviewControls: byId("review-controls"),
    addNumber: byId<HTMLInputElement>("add-article-number"),
    addButton: byId<HTMLButtonElement>("add-article"),
    submitReview: byId<HTMLButtonElement>("submit-review"),
    reviewErrors: byId("review-errors"),
    report: byId("report-pane"),
    stats: byId("stats-pane"),
    followupForm: byId<HTMLFormElement>("followup-form"),
    question: byId<HTMLInputElement>("followup-question"),
    thread: byId<HTMLUListElement>("followup-thread"),
    followupNotice: byId("followup-notice"),
  };
}

export class ReviewApp {
  private readonly api: ApiClient;
  private readonly ui: Elements;
  private draft: CaseDraft = emptyDraft();
  private decision: ReviewDecision | null = null;
  private recommendation: Recommendation | null = null;
  private inFlight = false;
  private followupChain: Promise<void> = Promise.resolve();

  constructor(api: ApiClient, root: Document | HTMLElement = document) {
    this.api = api;
    this.ui = grab(root);
    this.bind();
    this.refreshStats();
  }

  private bind(): void {
    this.ui.description.addEventListener("input", () => {
      this.draft.description = this.ui.description.value;
      this.ui.submitCase.disabled = !draftReady(this.draft) || this.inFlight;
    });
    this.ui.submitCase.disabled = true;
    this.ui.caseForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.runRecommendation();
    });
    this.ui.addButton.addEventListener("click", () => {
      void this.addArticleByNumber();
    });
    this.ui.submitReview.addEventListener("click", () => {
      void this.submitReview();
    });
    this.ui.followupForm.addEventListener("submit", (event) => {
      event.preventDefault();
      this.queueFollowup();
    });
  }

  private setBusy(value: boolean): void {
    this.inFlight = value;
    this.ui.busy.hidden = !value;
    this.ui.submitCase.disabled = value || !draftReady(this.draft);
  }

  private collectDraft(): void {
    this.draft = {
      description: this.ui.description.value,
      name: this.ui.caseName.value,
      date: this.ui.caseDate.value,
      reason: this.ui.caseReason.value,
    };
  }

  async runRecommendation(): Promise<void> {
    if (this.inFlight) return;
    this.collectDraft();
    if (!draftReady(this.draft)) return;
    this.setBusy(true);
    this.ui.reviewErrors.replaceChildren();
    this.ui.report.replaceChildren();
    try {
      const recommendation = await this.api.recommend(this.draft.description);
      this.recommendation = recommendation;
      this.decision = new ReviewDecision(recommendation);
      this.renderRecommendation();
      this.ui.reviewControls.hidden = false;
      this.ui.thread.replaceChildren();
      this.ui.followupNotice.replaceChildren();
    } catch (error) {
      this.ui.recommendation.replaceChildren(
        errorBanner(error instanceof Error ? error.message : String(error)),
      );
    } finally {
      this.setBusy(false);
    }
  }

  private renderRecommendation(): void {
    if (!this.recommendation) return;
    this.ui.recommendation.replaceChildren(
      recommendationView(this.recommendation, this.decision, (number) => {
        this.decision?.toggle(number);
        this.renderRecommendation();
      }),
    );
  }

  async addArticleByNumber(): Promise<void> {
    const number = this.ui.addNumber.value.trim();
    if (!number || !this.decision) return;
    this.ui.reviewErrors.replaceChildren();
    try {
      const info = await this.api.article(number);
      this.decision.add(info.number);
      this.ui.addNumber.value = "";
      this.renderRecommendation();
      this.renderDecisionSummary();
    } catch (error) {
      const message =
        error instanceof ApiError && error.status === 404
          ? `No article ${number} in the graph`
          : `Lookup failed: ${error instanceof Error ? error.message : error}`;
      this.ui.reviewErrors.replaceChildren(errorBanner(message));
    }
  }

  private renderDecisionSummary(): void {
    if (!this.decision) return;
    const summary = document.createElement("p");
    summary.className = "decision-summary";
    summary.textContent = `Will confirm: ${this.decision.articles
      .map((n) => `Article ${n}`)
      .join(", ")}`;
    this.ui.reviewErrors.replaceChildren(summary);
  }

  async submitReview(): Promise<void> {
    if (!this.decision || this.inFlight) return;
    this.collectDraft();
    this.ui.reviewErrors.replaceChildren();
    let body;
    try {
      body = this.decision.feedbackBody(this.draft);
    } catch (error) {
      this.ui.reviewErrors.replaceChildren(
        errorBanner(error instanceof Error ? error.message : String(error)),
      );
      return;
    }
    this.setBusy(true);
    try {
      const report = await this.api.feedback(body);
      this.decision.markSubmitted();
      this.renderRecommendation();
      this.ui.report.replaceChildren(reportView(report));
      this.ui.stats.replaceChildren(statsView(report.graph_stats));
      this.ui.submitReview.disabled = true;
    } catch (error) {
      // decision stays editable; surface the offending numbers inline
      const message =
        error instanceof ApiError && error.status === 404
          ? `Rejected: ${error.message}`
          : `Submission failed: ${error instanceof Error ? error.message : error}`;
      this.ui.reviewErrors.replaceChildren(errorBanner(message));
    } finally {
      this.setBusy(false);
    }
  }

  /** Follow-ups run strictly in send order, one request at a time. */
  queueFollowup(): void {
    const question = this.ui.question.value.trim();
    const sessionId = this.recommendation?.session_id;
    if (!question) return;
    this.ui.question.value = "";
    if (!sessionId) {
      this.ui.followupNotice.replaceChildren(
        errorBanner("No open session — run a recommendation first."),
      );
      return;
    }
    this.followupChain = this.followupChain.then(() =>
      this.sendFollowup(sessionId, question),
    );
  }

  private async sendFollowup(sessionId: string, question: string): Promise<void> {
    this.ui.thread.append(threadEntry("user", question));
    try {
      const { answer } = await this.api.followup(sessionId, question);
      this.ui.thread.append(threadEntry("assistant", answer));
      this.ui.thread.scrollTop = this.ui.thread.scrollHeight;
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.ui.followupNotice.replaceChildren(
          errorBanner("Session expired — re-run the recommendation."),
        );
      } else {
        this.ui.followupNotice.replaceChildren(
          errorBanner(error instanceof Error ? error.message : String(error)),
        );
      }
    }
  }

  async refreshStats(): Promise<void> {
    try {
      const stats = await this.api.stats();
      this.ui.stats.replaceChildren(statsView(stats));
    } catch {
      // stats pane is best-effort on load
    }
  }
}

export function boot(): ReviewApp {
  return new ReviewApp(new ApiClient(""));
}

declare global {
  interface Window {
    reviewApp?: ReviewApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("case-form")) {
  window.reviewApp = boot();
}
