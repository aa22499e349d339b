import { describe, expect, it } from "vitest";
import { QueryLoop } from "../src/queryLoop";
import type { QueryResponse } from "../src/types";

function deferred() {
  let resolve!: (r: QueryResponse) => void;
  const promise = new Promise<QueryResponse>((res) => (resolve = res));
  return { promise, resolve };
}

const resp = (tag: number): QueryResponse => ({
  hits: [],
  elapsed_ms: tag,
});

describe("QueryLoop", () => {
  it("keeps a single request in flight and supersedes queued ones", async () => {
    const sent: number[] = [];
    const shown: number[] = [];
    const d1 = deferred();
    const d2 = deferred();
    const d3 = deferred();
    const loop = new QueryLoop((r) => shown.push(r.elapsed_ms));

    loop.submit(() => (sent.push(1), d1.promise));
    loop.submit(() => (sent.push(2), d2.promise));
    loop.submit(() => (sent.push(3), d3.promise)); // replaces the queued #2
    expect(sent).toEqual([1]);

    d1.resolve(resp(1));
    await Promise.resolve();
    await Promise.resolve();
    expect(sent).toEqual([1, 3]); // #2 never went out
    d3.resolve(resp(3));
    await Promise.resolve();
    await Promise.resolve();
    expect(shown).toEqual([1, 3]);
  });

  it("a stale response never overwrites a newer one", async () => {
    const shown: number[] = [];
    const slow = deferred();
    const fast = deferred();
    const loop = new QueryLoop((r) => shown.push(r.elapsed_ms));
    loop.submit(() => slow.promise);
    loop.submit(() => fast.promise);

    fast.resolve(resp(2)); // queued request not yet sent; nothing shown
    await Promise.resolve();
    expect(shown).toEqual([]);

    slow.resolve(resp(1));
    await Promise.resolve();
    await Promise.resolve();
    await Promise.resolve();
    expect(shown).toEqual([1, 2]); // applied in sequence order, newest last
  });

  it("errors on the newest request reach the error handler", async () => {
    const errors: unknown[] = [];
    const loop = new QueryLoop(
      () => {},
      (e) => errors.push(e),
    );
    loop.submit(() => Promise.reject(new Error("boom")));
    await Promise.resolve();
    await Promise.resolve();
    expect(errors).toHaveLength(1);
  });
});
