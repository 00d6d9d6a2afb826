import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, OfflineError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("posts risk requests with the exact wire shape", async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({
        risk: 1.5,
        baseline_risk: 2.0,
        reduction_ratio: 0.25,
        epsilon_hat: 0.1,
        interval: [1.2, 1.8],
        required_n: 500,
        n: 400,
      }),
    );
    const client = new ApiClient("http://service", fetchFn);
    const payload = await client.risk({ maintained: [3, 1], y0: 10, beta: 0.9 });
    expect(payload.risk).toBe(1.5);
    expect(fetchFn).toHaveBeenCalledWith("http://service/api/risk", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ maintained: [3, 1], y0: 10, beta: 0.9 }),
    });
  });

  it("maps non-2xx answers to ApiError with the service detail", async () => {
    const fetchFn = vi
      .fn()
      .mockResolvedValue(jsonResponse({ detail: "unknown component id 42" }, 422));
    const client = new ApiClient("http://service", fetchFn);
    const err = await client
      .risk({ maintained: [42], y0: 0, beta: 0.95 })
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).detail).toBe("unknown component id 42");
  });

  it("maps fetch failures to OfflineError", async () => {
    const fetchFn = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    const client = new ApiClient("http://service", fetchFn);
    const err = await client.network().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(OfflineError);
  });

  it("encodes stats query parameters", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ n: 1 }));
    const client = new ApiClient("", fetchFn);
    await client.stats(200.5);
    expect(fetchFn.mock.calls[0]?.[0]).toBe("/api/stats?y0=200.5");
  });
});
