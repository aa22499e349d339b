import { ApiClient, BlankQueryError } from "./api";
import type { BackdropSource } from "./backdrop";
import { CanvasState } from "./canvas";
import { ResultGrid } from "./grid";
import { PreviewPane } from "./preview";
import { QueryLoop } from "./queryLoop";
import type { Hit, QueryResponse, Rect } from "./types";

export interface AppOptions {
  api: ApiClient;
  backdrops: BackdropSource;
  canvasSize?: number;
  top?: number;
  penWidth?: number;
  eraserWidth?: number;
}

export interface App {
  state: CanvasState;
  canvasEl: HTMLCanvasElement;
  gridEl: HTMLElement;
  previewEl: HTMLElement;
  preview: PreviewPane;
  setTool(tool: "pen" | "eraser"): void;
  undo(): void;
  clearCanvas(): void;
  loadHitIntoCanvas(hit: Hit): Promise<void>;
  lastResponse(): QueryResponse | null;
}

export function createApp(root: HTMLElement, opts: AppOptions): App {
  const size = opts.canvasSize ?? 400;
  const top = opts.top ?? 20;
  const penWidth = opts.penWidth ?? 4;
  const eraserWidth = opts.eraserWidth ?? 16;

  root.innerHTML = `
    <div class="panes">
      <section class="pane sketch-pane">
        <h2>Sketch</h2>
        <canvas id="sketch" width="${size}" height="${size}"></canvas>
        <div class="tools">
          <button id="tool-pen" class="active">Pen</button>
          <button id="tool-eraser">Eraser</button>
          <button id="undo">Undo</button>
          <button id="clear">Clear</button>
        </div>
      </section>
      <section class="pane results-pane">
        <h2>Results</h2>
        <div id="grid" class="grid"></div>
      </section>
      <section class="pane preview-pane">
        <h2>Preview <small>drag to search a region</small></h2>
        <div id="preview" class="preview"></div>
        <button id="retouch" disabled>Load result into canvas</button>
      </section>
    </div>`;

  const canvasEl = root.querySelector<HTMLCanvasElement>("#sketch")!;
  const gridEl = root.querySelector<HTMLElement>("#grid")!;
  const previewEl = root.querySelector<HTMLElement>("#preview")!;
  const retouchBtn = root.querySelector<HTMLButtonElement>("#retouch")!;

  const state = new CanvasState(size);
  let tool: "pen" | "eraser" = "pen";
  let drawing = false;
  let lastResp: QueryResponse | null = null;

  const grid = new ResultGrid(gridEl, (hit) => {
    preview.show(hit);
    retouchBtn.disabled = false;
  });

  const loop = new QueryLoop(
    (resp) => {
      lastResp = resp;
      grid.show(resp.hits);
      if (resp.hits.length > 0) {
        preview.show(resp.hits[0]);
        retouchBtn.disabled = false;
      }
    },
    (err) => {
      if (err instanceof BlankQueryError) {
        grid.showHint("draw something");
      } else {
        grid.showHint(`search failed: ${String(err)}`);
      }
    },
  );

  const preview = new PreviewPane(previewEl, opts.api, (pageId, rect: Rect) => {
    loop.submit(() => opts.api.feedback(pageId, rect, top));
  });

  function paint(): void {
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = canvasEl.getContext("2d");
    } catch {
      return; // headless test environment without canvas support
    }
    if (!ctx) return;
    ctx.fillStyle = "#fff";
    ctx.fillRect(0, 0, size, size);
    if (state.backdrop) {
      // Backdrop shows at half strength; the query raster gets it in full.
      const img = ctx.createImageData(size, size);
      for (let i = 0; i < state.backdrop.data.length; i++) {
        const display = 255 - (255 - state.backdrop.data[i]) / 2;
        img.data[i * 4] = img.data[i * 4 + 1] = img.data[i * 4 + 2] = display;
        img.data[i * 4 + 3] = 255;
      }
      ctx.putImageData(img, 0, 0);
    }
    for (const stroke of state.strokes) {
      ctx.strokeStyle = stroke.eraser ? "#fff" : "#000";
      ctx.lineWidth = stroke.width;
      ctx.lineCap = "round";
      ctx.lineJoin = "round";
      ctx.beginPath();
      stroke.points.forEach(([x, y], i) =>
        i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y),
      );
      ctx.stroke();
    }
  }

  function queryIfInked(): void {
    if (state.isBlank()) return;
    const png = state.toPngBytes();
    loop.submit(() => opts.api.query(png, top));
  }

  function localPos(e: MouseEvent): [number, number] {
    const r = canvasEl.getBoundingClientRect();
    return [e.clientX - r.left, e.clientY - r.top];
  }

  canvasEl.addEventListener("mousedown", (e) => {
    drawing = true;
    const [x, y] = localPos(e as MouseEvent);
    state.beginStroke(x, y, tool === "pen" ? penWidth : eraserWidth, tool === "eraser");
  });
  canvasEl.addEventListener("mousemove", (e) => {
    if (!drawing) return;
    const [x, y] = localPos(e as MouseEvent);
    state.extendStroke(x, y);
    paint();
  });
  canvasEl.addEventListener("mouseup", () => {
    if (!drawing) return;
    drawing = false;
    state.endStroke();
    paint();
    queryIfInked(); // one query per completed stroke
  });

  function setTool(next: "pen" | "eraser"): void {
    tool = next;
    root.querySelector("#tool-pen")!.classList.toggle("active", next === "pen");
    root.querySelector("#tool-eraser")!.classList.toggle("active", next === "eraser");
  }

  function undo(): void {
    state.undo();
    paint();
    queryIfInked(); // a blank canvas after undo stays quiet
  }

  function clearCanvas(): void {
    state.clear();
    paint();
  }

  async function loadHitIntoCanvas(hit: Hit): Promise<void> {
    const rect: Rect = { x: hit.x, y: hit.y, w: hit.side, h: hit.side };
    const bmp = await opts.backdrops.loadRegion(hit.page_id, rect, size);
    state.setBackdrop(bmp);
    paint();
  }

  root.querySelector("#tool-pen")!.addEventListener("click", () => setTool("pen"));
  root.querySelector("#tool-eraser")!.addEventListener("click", () => setTool("eraser"));
  root.querySelector("#undo")!.addEventListener("click", () => undo());
  root.querySelector("#clear")!.addEventListener("click", () => clearCanvas());
  retouchBtn.addEventListener("click", () => {
    const hit = preview.currentHit;
    if (hit) void loadHitIntoCanvas(hit);
  });

  paint();
  return {
    state,
    canvasEl,
    gridEl,
    previewEl,
    preview,
    setTool,
    undo,
    clearCanvas,
    loadHitIntoCanvas,
    lastResponse: () => lastResp,
  };
}
