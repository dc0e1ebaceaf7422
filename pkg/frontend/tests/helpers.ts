/** Shared plumbing: fixture loading and a fetch fake backed by the
 * recorded API responses, so component tests exercise exactly what the
 * backend emits. */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { Recommendation } from "../src/types.js";

export interface Recorded {
  status: number;
  body: unknown;
}

function recorded(name: string): Recorded {
  // vitest runs with the frontend directory as its root
  const path = resolve(process.cwd(), "tests", "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as Recorded;
}

export const fixtures = {
  recommendZhangyue: recorded("recommend_zhangyue"),
  recommendUngrounded: recorded("recommend_ungrounded"),
  recommendNoMatch: recorded("recommend_nomatch"),
  feedbackCorrected: recorded("feedback_corrected"),
  feedbackUnknown: recorded("feedback_unknown_article"),
  followup: recorded("followup"),
  followupExpired: recorded("followup_expired"),
  article397: recorded("article_397"),
  statsBefore: recorded("stats_before"),
  statsAfter: recorded("stats_after"),
};

export function recommendation(fixture: Recorded): Recommendation {
  return fixture.body as Recommendation;
}

export function asResponse(recorded: Recorded): Response {
  return new Response(JSON.stringify(recorded.body), {
    status: recorded.status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface RouteCall {
  url: string;
  init?: RequestInit;
}

/** Fetch fake: routes are matched by "METHOD path" prefix; each handler
 * may be a recorded fixture or a function (for deferred responses). */
export function fakeFetch(
  routes: Record<string, Recorded | ((call: RouteCall) => Promise<Response> | Response)>,
) {
  const calls: RouteCall[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? "GET").toUpperCase();
    calls.push({ url, init });
    for (const [key, handler] of Object.entries(routes)) {
      const [routeMethod, routePath] = key.split(" ", 2);
      if (method === routeMethod && url.startsWith(routePath)) {
        return typeof handler === "function"
          ? handler({ url, init })
          : asResponse(handler);
      }
    }
    throw new Error(`unrouted request: ${method} ${url}`);
  };
  return { impl, calls };
}

export function mountShell(): void {
  document.body.innerHTML = `
    <span id="busy-indicator" hidden></span>
    <form id="case-form">
      <textarea id="case-description"></textarea>
      <input id="case-name" type="text" />
      <input id="case-date" type="date" />
      <input id="case-reason" type="text" />
      <button id="submit-case" type="submit" disabled></button>
    </form>
    <div id="recommendation-pane"></div>
    <div id="review-controls" hidden>
      <input id="add-article-number" type="text" />
      <button id="add-article" type="button"></button>
      <button id="submit-review" type="button"></button>
    </div>
    <div id="review-errors"></div>
    <div id="report-pane"></div>
    <div id="stats-pane"></div>
    <form id="followup-form">
      <input id="followup-question" type="text" />
      <button type="submit"></button>
    </form>
    <ul id="followup-thread"></ul>
    <div id="followup-notice"></div>
  `;
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
