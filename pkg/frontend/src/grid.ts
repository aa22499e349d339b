import type { Hit } from "./types";

/** Thumbnail grid of ranked results; clicking a tile opens it in the preview. */
export class ResultGrid {
  constructor(
    private container: HTMLElement,
    private onSelect: (hit: Hit) => void,
  ) {}

  /** Replace the grid contents, preserving the response's ranking order. */
  show(hits: Hit[]): void {
    this.container.textContent = "";
    hits.forEach((hit, rank) => {
      const tile = document.createElement("figure");
      tile.className = "result-tile";
      tile.dataset.pageId = String(hit.page_id);
      tile.dataset.rank = String(rank);

      const img = document.createElement("img");
      img.src = hit.thumbnail_url;
      img.alt = `${hit.title_id} page ${hit.page_id}`;
      tile.appendChild(img);

      const caption = document.createElement("figcaption");
      caption.textContent = `#${rank + 1} ${hit.title_id} · d=${hit.distance.toFixed(3)}`;
      tile.appendChild(caption);

      tile.addEventListener("click", () => this.onSelect(hit));
      this.container.appendChild(tile);
    });
  }

  showHint(text: string): void {
    this.container.textContent = "";
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = text;
    this.container.appendChild(hint);
  }
}
