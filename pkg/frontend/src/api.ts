import type { QueryResponse, Rect } from "./types";

export class BlankQueryError extends Error {}

export class ApiClient {
  constructor(private base = "") {}

  private async parse(resp: Response): Promise<QueryResponse> {
    if (resp.status === 422) {
      throw new BlankQueryError("draw something first");
    }
    if (!resp.ok) {
      throw new Error(`search failed: HTTP ${resp.status}`);
    }
    return (await resp.json()) as QueryResponse;
  }

  async query(png: Uint8Array, top = 20): Promise<QueryResponse> {
    const resp = await fetch(`${this.base}/query?top=${top}`, {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: png.slice().buffer,
    });
    return this.parse(resp);
  }

  async feedback(pageId: number, rect: Rect, top = 20): Promise<QueryResponse> {
    const resp = await fetch(`${this.base}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ page_id: pageId, ...rect, top }),
    });
    return this.parse(resp);
  }

  pageUrl(pageId: number): string {
    return `${this.base}/pages/${pageId}`;
  }

  regionUrl(pageId: number, x: number, y: number, side: number): string {
    return `${this.base}/pages/${pageId}/region?x=${x}&y=${y}&side=${side}`;
  }
}
