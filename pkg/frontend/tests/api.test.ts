import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, ChatApi } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ChatApi", () => {
  it("creates a session", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, { session_id: "abc" }));
    vi.stubGlobal("fetch", fetchMock);
    const api = new ChatApi("http://svc");
    await expect(api.createSession()).resolves.toBe("abc");
    expect(fetchMock).toHaveBeenCalledWith(
      "http://svc/sessions",
      expect.objectContaining({ method: "POST" }),
    );
  });

  it("posts a turn and returns the typed body", async () => {
    const body = {
      response: "Movies!",
      trace: {
        module: "structured_topic",
        topic: "movies",
        state: "greet",
        intent: null,
        confident: true,
        profane: false,
      },
      turn_counter: 2,
      steps: [],
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, body));
    vi.stubGlobal("fetch", fetchMock);
    const api = new ChatApi("http://svc");
    const out = await api.sendTurn("sid", "let's chat about movies");
    expect(out.trace.topic).toBe("movies");
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://svc/sessions/sid/turns");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      text: "let's chat about movies",
    });
  });

  it("raises ApiError with the server's error text on 4xx", async () => {
    // a Response body is single-use: mint a fresh one per fetch call
    vi.stubGlobal(
      "fetch",
      vi.fn().mockImplementation(() =>
        Promise.resolve(jsonResponse(400, { error: "stars must be an integer" })),
      ),
    );
    const api = new ChatApi("http://svc");
    await expect(api.submitRating("sid", 9)).rejects.toThrowError(ApiError);
    await expect(api.submitRating("sid", 9)).rejects.toThrow("stars must be an integer");
  });

  it("maps network failures to status 0", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("connection refused")));
    const api = new ChatApi("http://svc");
    try {
      await api.getMetrics();
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(0);
    }
  });

  it("health returns false instead of throwing", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("down")));
    const api = new ChatApi("http://svc");
    await expect(api.health()).resolves.toBe(false);
  });
});
