import { beforeEach, describe, expect, it } from "vitest";

import { recommendationView, renderScore, statsView } from "../src/render.js";
import { ReviewDecision } from "../src/review.js";
import type { GraphStats, Recommendation } from "../src/types.js";
import { fixtures, recommendation } from "./helpers.js";

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("recommendation view", () => {
  it("renders the recommended article with precedent cards", () => {
    const rec = recommendation(fixtures.recommendZhangyue);
    const view = recommendationView(rec, null);
    document.body.append(view);
    const headline = view.querySelector(".headline")!;
    expect(headline.textContent).toContain("Article 385");
    expect(view.querySelector(".ungrounded-badge")).toBeNull();
    const card385 = [...view.querySelectorAll(".candidate")].find((c) =>
      c.textContent!.includes("Article 385"),
    )!;
    const cards = card385.querySelectorAll(".precedent-card");
    expect(cards.length).toBeGreaterThanOrEqual(1);
    const names = [...cards].map((c) => c.querySelector("h4")!.textContent);
    const apiNames = rec
      .retrieval!.candidates.find((c) => c.article_number === "385")!
      .precedents.map((p) => p.name);
    expect(names).toEqual(apiNames);
  });

  it("shows every score exactly as the API reported it", () => {
    const rec = recommendation(fixtures.recommendZhangyue);
    const view = recommendationView(rec, null);
    const rendered = [...view.querySelectorAll(".candidate-score")].map(
      (node) => node.textContent,
    );
    const expected = rec.retrieval!.candidates.map(
      (c) => `score ${renderScore(c.cumulative_score)}`,
    );
    expect(rendered).toEqual(expected);
  });

  it("flags ungrounded recommendations with a visible badge", () => {
    const rec = recommendation(fixtures.recommendUngrounded);
    expect(rec.grounded["999"]).toBe(false);
    const view = recommendationView(rec, null);
    const badge = view.querySelector(".ungrounded-badge");
    expect(badge).not.toBeNull();
    expect(badge!.textContent).toBe("ungrounded");
    const pill = badge!.closest(".article-pill")!;
    expect(pill.textContent).toContain("Article 999");
  });

  it("renders an explanatory empty state for a no-match payload", () => {
    const rec = recommendation(fixtures.recommendNoMatch);
    expect(rec.no_match).toBe(true);
    const view = recommendationView(rec, null);
    expect(view.querySelector(".empty-state")).not.toBeNull();
    expect(view.querySelectorAll(".candidate").length).toBe(0);
  });

  it("wires accept checkboxes to the decision", () => {
    const rec = recommendation(fixtures.recommendZhangyue);
    const decision = new ReviewDecision(rec);
    const toggles: string[] = [];
    const view = recommendationView(rec, decision, (n) => toggles.push(n));
    const boxes = view.querySelectorAll<HTMLInputElement>(
      'input[type="checkbox"]',
    );
    expect(boxes.length).toBe(rec.retrieval!.candidates.length);
    const box385 = [...boxes].find(
      (b) => b.getAttribute("data-number") === "385",
    )!;
    expect(box385.checked).toBe(true);
    box385.dispatchEvent(new Event("change"));
    expect(toggles).toEqual(["385"]);
  });

  it("keeps every interactive control keyboard-reachable", () => {
    const rec = recommendation(fixtures.recommendZhangyue);
    const decision = new ReviewDecision(rec);
    const view = recommendationView(rec, decision, () => undefined);
    document.body.append(view);
    for (const node of view.querySelectorAll("input, button, a, select, textarea")) {
      const tabindex = node.getAttribute("tabindex");
      expect(tabindex === null || Number(tabindex) >= 0).toBe(true);
    }
    // checkboxes carry accessible names
    for (const box of view.querySelectorAll('input[type="checkbox"]')) {
      expect(box.getAttribute("aria-label")).toBeTruthy();
    }
  });
});

describe("stats view", () => {
  it("renders one row per node and edge kind from the API payload", () => {
    const stats = fixtures.statsBefore.body as GraphStats;
    const view = statsView(stats);
    const rows = view.querySelectorAll("tr.stat-node, tr.stat-edge");
    expect(rows.length).toBe(
      Object.keys(stats.nodes).length + Object.keys(stats.edges).length,
    );
    const text = view.textContent!;
    for (const [kind, count] of Object.entries(stats.nodes)) {
      expect(text).toContain(kind);
      expect(text).toContain(String(count));
    }
  });
});
