/** Distance scatter plot with box and lasso selection.
 *
 * Selections are captured in data coordinates before they leave this
 * view, so a saved geometry replays identically regardless of screen
 * size.  Boundary rules (inclusive box edges, on-edge lasso points)
 * match the server's selection engine.
 */

import { selectIds, type Geometry } from "./geometry.js";
import { colorFor, extent, linearScale, svgElement, type LinearScale } from "./scale.js";
import type { ScatterPoint } from "./types.js";

const WIDTH = 520;
const HEIGHT = 420;
const MARGIN = { top: 20, right: 20, bottom: 40, left: 55 };

export type SelectionTool = "box" | "lasso";

export interface ScatterOptions {
  onSelection: (geometry: Geometry, ids: Set<string>) => void;
}

export class ScatterView {
  readonly element: HTMLElement;
  private svg: SVGSVGElement;
  private points: ScatterPoint[] = [];
  private colorBy = "profile";
  private geometry: Geometry | null = null;
  private selected = new Set<string>();
  private xScale: LinearScale = linearScale([0, 1], [MARGIN.left, WIDTH - MARGIN.right]);
  private yScale: LinearScale = linearScale([0, 1], [HEIGHT - MARGIN.bottom, MARGIN.top]);
  tool: SelectionTool = "box";
  private drag: { x: number; y: number } | null = null;
  private lassoTrail: [number, number][] = [];

  constructor(private readonly opts: ScatterOptions) {
    this.element = document.createElement("div");
    this.element.className = "scatter";
    this.svg = svgElement("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      width: WIDTH,
      height: HEIGHT,
      role: "img",
    });
    this.element.appendChild(this.svg);
    this.svg.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    this.svg.addEventListener("pointermove", (e) => this.onPointerMove(e));
    this.svg.addEventListener("pointerup", (e) => this.onPointerUp(e));
  }

  setData(points: ScatterPoint[]): void {
    this.points = points;
    const xs = points.map((p) => p.x);
    const ys = points.map((p) => p.y);
    this.xScale = linearScale(extent(xs), [MARGIN.left, WIDTH - MARGIN.right]);
    this.yScale = linearScale(extent(ys), [HEIGHT - MARGIN.bottom, MARGIN.top]);
    if (this.geometry) this.selected = selectIds(points, this.geometry);
    this.render();
  }

  setColorBy(param: string): void {
    this.colorBy = param;
    this.render();
  }

  selectedIds(): Set<string> {
    return new Set(this.selected);
  }

  currentGeometry(): Geometry | null {
    return this.geometry;
  }

  /** Apply a selection geometry in data coordinates (also used by tests
   * and by load-settings). */
  applyGeometry(geometry: Geometry | null): void {
    this.geometry = geometry;
    this.selected = geometry ? selectIds(this.points, geometry) : new Set();
    this.render();
    if (geometry) this.opts.onSelection(geometry, new Set(this.selected));
  }

  /** Highlight a member list without changing the active geometry
   * (dataset "visualize"). */
  highlightMembers(ids: Set<string>): void {
    this.geometry = null;
    this.selected = new Set(ids);
    this.render();
  }

  private dataPoint(e: PointerEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const px = ((e.clientX - rect.left) / (rect.width || WIDTH)) * WIDTH;
    const py = ((e.clientY - rect.top) / (rect.height || HEIGHT)) * HEIGHT;
    return { x: this.xScale.fromPx(px), y: this.yScale.fromPx(py) };
  }

  private onPointerDown(e: PointerEvent): void {
    const p = this.dataPoint(e);
    this.drag = p;
    this.lassoTrail = [[p.x, p.y]];
  }

  private onPointerMove(e: PointerEvent): void {
    if (this.drag && this.tool === "lasso") {
      const p = this.dataPoint(e);
      this.lassoTrail.push([p.x, p.y]);
    }
  }

  private onPointerUp(e: PointerEvent): void {
    if (!this.drag) return;
    const start = this.drag;
    const end = this.dataPoint(e);
    this.drag = null;
    if (this.tool === "box") {
      this.applyGeometry({
        type: "box",
        xMin: Math.min(start.x, end.x),
        xMax: Math.max(start.x, end.x),
        yMin: Math.min(start.y, end.y),
        yMax: Math.max(start.y, end.y),
      });
    } else if (this.lassoTrail.length >= 3) {
      this.applyGeometry({ type: "lasso", vertices: [...this.lassoTrail] });
    }
    this.lassoTrail = [];
  }

  private render(): void {
    this.svg.replaceChildren();
    if (this.points.length === 0) {
      const msg = svgElement("text", {
        x: WIDTH / 2, y: HEIGHT / 2, "text-anchor": "middle", class: "empty-state",
      });
      msg.textContent = "no points for this view";
      this.svg.appendChild(msg);
      return;
    }
    const xLabel = svgElement("text", {
      x: WIDTH / 2, y: HEIGHT - 8, "text-anchor": "middle", class: "axis-label",
    });
    xLabel.textContent = "weighted feature distance";
    const yLabel = svgElement("text", {
      x: 14, y: HEIGHT / 2, "text-anchor": "middle", class: "axis-label",
      transform: `rotate(-90 14 ${HEIGHT / 2})`,
    });
    yLabel.textContent = "density distance";
    this.svg.append(xLabel, yLabel);

    for (const p of this.points) {
      const level = typeof p[this.colorBy] === "number" ? (p[this.colorBy] as number) : 0;
      const isSelected = this.selected.has(p.sim_id);
      this.svg.appendChild(
        svgElement("circle", {
          cx: this.xScale.toPx(p.x),
          cy: this.yScale.toPx(p.y),
          r: isSelected ? 5 : 3,
          fill: colorFor(level),
          stroke: isSelected ? "#111" : "none",
          "stroke-width": isSelected ? 1.5 : 0,
          class: isSelected ? "pt selected" : "pt",
          "data-sim": p.sim_id,
        }),
      );
    }

    if (this.geometry?.type === "box") {
      const g = this.geometry;
      this.svg.appendChild(
        svgElement("rect", {
          x: this.xScale.toPx(g.xMin),
          y: this.yScale.toPx(g.yMax),
          width: this.xScale.toPx(g.xMax) - this.xScale.toPx(g.xMin),
          height: this.yScale.toPx(g.yMin) - this.yScale.toPx(g.yMax),
          class: "selection-box",
          fill: "rgba(66, 105, 208, 0.12)",
          stroke: "#4269d0",
        }),
      );
    } else if (this.geometry?.type === "lasso") {
      const pts = this.geometry.vertices
        .map((v) => `${this.xScale.toPx(v[0])},${this.yScale.toPx(v[1])}`)
        .join(" ");
      this.svg.appendChild(
        svgElement("polygon", {
          points: pts,
          class: "selection-lasso",
          fill: "rgba(66, 105, 208, 0.12)",
          stroke: "#4269d0",
        }),
      );
    }
  }
}
