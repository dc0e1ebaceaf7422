import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { Recommendation } from "../src/types.js";
import { fakeFetch, fixtures } from "./helpers.js";

describe("api client", () => {
  it("returns parsed payloads on 2xx", async () => {
    const { impl } = fakeFetch({ "POST /api/recommend": fixtures.recommendZhangyue });
    const client = new ApiClient("", impl);
    const rec: Recommendation = await client.recommend("case text");
    expect(rec.articles).toEqual(["385"]);
    expect(rec.retrieval!.candidates.length).toBeGreaterThan(0);
  });

  it("raises ApiError with the server's machine code on non-2xx", async () => {
    const { impl } = fakeFetch({ "POST /api/feedback": fixtures.feedbackUnknown });
    const client = new ApiClient("", impl);
    await expect(
      client.feedback({
        case_text: "x",
        case_name: "y",
        session_date: "2023-01-01",
        prosecution_reason: "z",
        confirmed_articles: ["999"],
      }),
    ).rejects.toSatisfy((error: unknown) => {
      expect(error).toBeInstanceOf(ApiError);
      const apiError = error as ApiError;
      expect(apiError.status).toBe(404);
      expect(apiError.code).toBe("unknown_article");
      expect(apiError.requestId).toBeTruthy();
      return true;
    });
  });

  it("sends the question and session id on follow-up", async () => {
    const { impl, calls } = fakeFetch({ "POST /api/followup": fixtures.followup });
    const client = new ApiClient("", impl);
    await client.followup("abc123", "why?");
    const body = JSON.parse(String(calls[0].init!.body));
    expect(body).toEqual({ session_id: "abc123", question: "why?" });
  });

  it("escapes article numbers in the path", async () => {
    const { impl, calls } = fakeFetch({
      "GET /api/articles/": fixtures.article397,
    });
    const client = new ApiClient("", impl);
    await client.article("397 bis");
    expect(calls[0].url).toBe("/api/articles/397%20bis");
  });
});
