"""Command-line interface: build, query, serve, eval, demo."""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import engine, eoh, evalkit, margins, proposals, synthetic
from .exceptions import SketchdexError


@click.group()
def main():
    """Sketch-queried retrieval over black-and-white line-art pages."""


@main.command()
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--cells", default=8, show_default=True)
@click.option("--m", default=16, show_default=True)
@click.option("--k", default=256, show_default=True)
@click.option("--min-side", default=100, show_default=True)
@click.option("--margin", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--holdout", default=0.15, show_default=True,
              help="Fraction of pages whose features train the codebook.")
@click.option("--workers", default=1, show_default=True)
@click.option("--dump-masks", type=click.Path(file_okay=False), default=None,
              help="Also write margin-mask overlays as PNGs into this directory.")
@click.option("--dump-proposals", type=click.Path(file_okay=False), default=None,
              help="Also write per-page proposal boxes as JSON into this directory.")
def build(input_dir, out_path, cells, m, k, min_side, margin, seed, holdout, workers,
          dump_masks, dump_proposals):
    """Index every PNG/JPEG under --input (title = subdirectory name)."""
    inputs = engine.collect_pages(input_dir)
    if not inputs:
        raise click.ClickException(f"no page images found under {input_dir}")
    cfg = engine.IndexConfig(
        cells=cells, m=m, k=k, min_side=min_side, margin_threshold=margin,
        seed=seed, holdout_fraction=holdout,
    )

    if dump_masks or dump_proposals:
        _write_debug_dumps(inputs, cfg, dump_masks, dump_proposals)

    started = time.perf_counter()
    try:
        idx = engine.build_index(inputs, cfg, workers=workers)
    except SketchdexError as exc:
        raise click.ClickException(str(exc))
    engine.save_index(idx, out_path)
    elapsed = time.perf_counter() - started
    for path, err in idx.failures:
        click.echo(f"warning: skipped {path}: {err}", err=True)
    report = idx.memory_report()
    click.echo(
        f"indexed {report['pages']} pages, {report['windows']} windows, "
        f"{report['code_bytes']} code bytes in {elapsed:.1f}s -> {out_path}"
    )


def _write_debug_dumps(inputs, cfg, dump_masks, dump_proposals):
    mask_dir = Path(dump_masks) if dump_masks else None
    prop_dir = Path(dump_proposals) if dump_proposals else None
    for d in (mask_dir, prop_dir):
        if d:
            d.mkdir(parents=True, exist_ok=True)
    for page_id, (path, _title) in enumerate(inputs):
        page = engine.load_page(path)
        mask = margins.compute_margin_mask(page, cfg.margin_config())
        stem = f"page_{page_id:05d}"
        if mask_dir:
            rgba = margins.mask_to_rgba(page, mask)
            Image.fromarray(rgba, mode="RGBA").save(mask_dir / f"{stem}_margin.png")
        if prop_dir:
            boxes = proposals.propose_regions(page, cfg.proposal_config())
            payload = [{"x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in boxes]
            (prop_dir / f"{stem}_proposals.json").write_text(json.dumps(payload))


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sketch", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--top", default=20, show_default=True)
@click.option("--windows", is_flag=True,
              help="Rank individual windows instead of one best hit per page.")
@click.option("--dump-feature", type=click.Path(dir_okay=False), default=None,
              help="Write the query descriptor as a JSON cell grid.")
def query(index_path, sketch, top, windows, dump_feature):
    """Search with a sketch image; emits one JSON hit per line."""
    idx = engine.load_index(index_path)
    canvas = engine.load_page(sketch)
    feat = eoh.sketch_to_feature(
        canvas, idx.config.cells, magnitude_floor=idx.config.magnitude_floor
    )
    if feat is None:
        raise click.ClickException("sketch is blank: nothing to search for")
    if dump_feature:
        grid = eoh.feature_grid(feat, idx.config.cells)
        Path(dump_feature).write_text(json.dumps(grid))
    searcher = engine.search_windows if windows else engine.search
    for hit in searcher(idx, feat, top):
        rec = idx.pages[hit.page_id]
        click.echo(json.dumps({
            "page_id": hit.page_id,
            "title_id": rec.title_id,
            "x": hit.window.x,
            "y": hit.window.y,
            "side": hit.window.side,
            "distance": hit.distance,
        }))


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bind", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(index_path, bind, port):
    """Serve the HTTP API for the sketch UI."""
    import uvicorn

    from .service import create_app

    idx = engine.load_index(index_path)
    uvicorn.run(create_app(idx), host=bind, port=port)


@main.group(name="eval")
def eval_group():
    """Evaluation harnesses: localization accuracy and proposal quality."""


@eval_group.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--queries", "queries_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--top", default=100, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="CSV destination (stdout when omitted).")
def localize(index_path, gt_path, queries_dir, top, out_path):
    """Judge ranked windows against annotations and report AP per query.

    A query file whose stem matches a ground-truth label is scored against
    just that target; otherwise against every annotated box.
    """
    idx = engine.load_index(index_path)
    gts = evalkit.load_ground_truth(gt_path)
    query_paths = sorted(
        p for p in Path(queries_dir).iterdir()
        if p.suffix.lower() in {".png", ".jpg", ".jpeg"}
    )
    if not query_paths:
        raise click.ClickException(f"no query images in {queries_dir}")

    rows = []
    aps = []
    for qp in query_paths:
        canvas = engine.load_page(qp)
        started = time.perf_counter()
        feat = eoh.sketch_to_feature(
            canvas, idx.config.cells, magnitude_floor=idx.config.magnitude_floor
        )
        if feat is None:
            click.echo(f"warning: {qp.name} is blank, skipped", err=True)
            continue
        hits = engine.search_windows(idx, feat, top)
        runtime_ms = (time.perf_counter() - started) * 1000.0
        relevant = [g for g in gts if g.label == qp.stem] or gts
        judged = evalkit.judge([(h.page_id, h.window.box) for h in hits], relevant)
        n_rel = sum(len(g.boxes) for g in relevant)
        ap = evalkit.average_precision(judged, n_rel, top)
        aps.append(ap)
        rows.append((qp.name, f"{ap:.6f}", f"{runtime_ms:.2f}"))

    report = idx.memory_report()
    out = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow([f"# pages={report['pages']} patches={report['windows']} "
                         f"code_bytes={report['code_bytes']}"])
        writer.writerow(["query", f"ap@{top}", "runtime_ms"])
        writer.writerows(rows)
        if aps:
            writer.writerow(["mAP", f"{sum(aps) / len(aps):.6f}", ""])
    finally:
        if out_path:
            out.close()


@eval_group.command(name="proposals")
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--budgets", default="10,25,50,100,200,500,1000", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def eval_proposals(input_dir, gt_path, budgets, out_path):
    """Detection-rate curve of the proposal generator vs a sliding grid."""
    inputs = engine.collect_pages(input_dir)
    gts = evalkit.load_ground_truth(gt_path)
    budget_list = sorted(int(b) for b in budgets.split(","))
    cfg = engine.IndexConfig()

    selective: dict[int, list] = {}
    sliding: dict[int, list] = {}
    proposer = proposals.WindowProposer(
        cfg.proposal_config(), cfg.min_side, cfg.margin_threshold
    )
    for page_id, (path, _title) in enumerate(inputs):
        page = engine.load_page(path)
        h, w = page.shape
        mask = margins.compute_margin_mask(page, cfg.margin_config())
        selective[page_id] = [win.box for win in proposer.propose(page, mask, page_id)]
        grid = evalkit.sliding_windows(w, h, cfg.min_side, page_id=page_id)
        grid = proposals.filter_windows(grid, mask, cfg.min_side, cfg.margin_threshold)
        sliding[page_id] = [win.box for win in grid]

    dr_sel, auc_sel = evalkit.detection_rate_curve(selective, gts, budget_list)
    dr_sli, auc_sli = evalkit.detection_rate_curve(sliding, gts, budget_list)

    out = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["budget", "dr_selective", "dr_sliding"])
        for b, ds, dl in zip(budget_list, dr_sel, dr_sli):
            writer.writerow([b, f"{ds:.4f}", f"{dl:.4f}"])
        writer.writerow(["auc", f"{auc_sel:.4f}", f"{auc_sli:.4f}"])
    finally:
        if out_path:
            out.close()


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--pages", default=40, show_default=True)
@click.option("--queries", "n_queries", default=10, show_default=True)
@click.option("--page-side", default=512, show_default=True)
def demo(out_dir, pages, n_queries, page_side):
    """Generate a synthetic corpus (pages, gt.json, query sketches) to try
    the system without a licensed page collection."""
    inputs, _ = synthetic.write_glyph_corpus(out_dir, pages, page_side)
    rng = np.random.default_rng(12)
    picks = sorted(rng.choice(pages, size=min(n_queries, pages), replace=False).tolist())
    synthetic.write_query_sketches(Path(out_dir) / "queries", picks)
    click.echo(f"wrote {len(inputs)} pages, gt.json, and {len(picks)} query sketches "
               f"under {out_dir}")
    click.echo(f"next: sketchdex build --input {out_dir} --out index.skdx --holdout 0.5")


if __name__ == "__main__":
    main()
