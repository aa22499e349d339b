import type { ApiClient } from "./api";
import type { Hit, Rect } from "./types";

const MIN_DRAG_PX = 5; // screen pixels; anything smaller is a stray click

/** Page preview pane: shows the hit's page with the matched window outlined,
 * and turns drag gestures into page-coordinate region selections. */
export class PreviewPane {
  private hit: Hit | null = null;
  private img: HTMLImageElement;
  private outline: HTMLDivElement;
  private marquee: HTMLDivElement;
  private dragStart: { x: number; y: number } | null = null;

  constructor(
    private container: HTMLElement,
    private api: ApiClient,
    private onRegionSelected: (pageId: number, rect: Rect) => void,
  ) {
    this.img = document.createElement("img");
    this.img.className = "preview-img";
    this.img.draggable = false;
    this.outline = document.createElement("div");
    this.outline.className = "hit-outline";
    this.marquee = document.createElement("div");
    this.marquee.className = "marquee";
    this.marquee.style.display = "none";
    container.appendChild(this.img);
    container.appendChild(this.outline);
    container.appendChild(this.marquee);

    container.addEventListener("mousedown", (e) => this.down(e as MouseEvent));
    container.addEventListener("mousemove", (e) => this.move(e as MouseEvent));
    container.addEventListener("mouseup", (e) => this.up(e as MouseEvent));
  }

  get currentHit(): Hit | null {
    return this.hit;
  }

  show(hit: Hit): void {
    this.hit = hit;
    this.img.src = this.api.pageUrl(hit.page_id);
    this.img.onload = () => this.placeOutline();
    this.placeOutline();
  }

  /** Scale from page pixels to displayed pixels (1 until the image loads). */
  private scale(): number {
    if (!this.img.naturalWidth || !this.img.clientWidth) return 1;
    return this.img.clientWidth / this.img.naturalWidth;
  }

  private placeOutline(): void {
    if (!this.hit) return;
    const s = this.scale();
    this.outline.style.display = "block";
    this.outline.style.left = `${this.hit.x * s}px`;
    this.outline.style.top = `${this.hit.y * s}px`;
    this.outline.style.width = `${this.hit.side * s}px`;
    this.outline.style.height = `${this.hit.side * s}px`;
  }

  private local(e: MouseEvent): { x: number; y: number } {
    const rect = this.container.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private down(e: MouseEvent): void {
    if (!this.hit) return;
    this.dragStart = this.local(e);
    this.marquee.style.display = "none";
  }

  private move(e: MouseEvent): void {
    if (!this.dragStart) return;
    const cur = this.local(e);
    const x = Math.min(this.dragStart.x, cur.x);
    const y = Math.min(this.dragStart.y, cur.y);
    this.marquee.style.display = "block";
    this.marquee.style.left = `${x}px`;
    this.marquee.style.top = `${y}px`;
    this.marquee.style.width = `${Math.abs(cur.x - this.dragStart.x)}px`;
    this.marquee.style.height = `${Math.abs(cur.y - this.dragStart.y)}px`;
  }

  private up(e: MouseEvent): void {
    const start = this.dragStart;
    this.dragStart = null;
    this.marquee.style.display = "none";
    if (!start || !this.hit) return;
    const cur = this.local(e);
    const w = Math.abs(cur.x - start.x);
    const h = Math.abs(cur.y - start.y);
    if (w < MIN_DRAG_PX || h < MIN_DRAG_PX) return; // degenerate drag
    const s = this.scale();
    const rect: Rect = {
      x: Math.round(Math.min(start.x, cur.x) / s),
      y: Math.round(Math.min(start.y, cur.y) / s),
      w: Math.max(1, Math.round(w / s)),
      h: Math.max(1, Math.round(h / s)),
    };
    this.onRegionSelected(this.hit.page_id, rect);
  }
}
