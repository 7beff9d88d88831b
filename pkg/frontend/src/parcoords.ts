/** Parallel coordinates over the parameter axes plus the three distance
 * axes, with per-axis brushing that builds filter clauses.
 *
 * Brushes are held in data values (levels / ranges), never pixels, so the
 * resulting filter is resolution independent and maps one to one onto the
 * filter grammar.
 */

import { DELTA_AXES, type Clause } from "./filter.js";
import { colorFor, extent, linearScale, svgElement, type LinearScale } from "./scale.js";
import type { RecordRow } from "./types.js";

const WIDTH = 860;
const HEIGHT = 300;
const TOP = 30;
const BOTTOM = 270;

export interface ParCoordsOptions {
  paramNames: string[];
  onBrushChange: (clauses: Clause[]) => void;
}

export class ParCoordsView {
  readonly element: HTMLElement;
  private svg: SVGSVGElement;
  private rows: RecordRow[] = [];
  private colorBy = "profile";
  private highlighted = new Set<string>();
  /** axis -> selected levels (categorical) */
  private levelBrushes = new Map<string, Set<number>>();
  /** axis -> [lo, hi] (delta axes) */
  private rangeBrushes = new Map<string, [number, number]>();

  constructor(private readonly opts: ParCoordsOptions) {
    this.element = document.createElement("div");
    this.element.className = "parcoords";
    this.svg = svgElement("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      width: WIDTH,
      height: HEIGHT,
      role: "img",
    });
    this.element.appendChild(this.svg);
  }

  private axes(): string[] {
    return [...this.opts.paramNames, ...DELTA_AXES];
  }

  setParamNames(names: string[]): void {
    this.opts.paramNames = names;
    this.render();
  }

  setData(rows: RecordRow[]): void {
    this.rows = rows;
    this.render();
  }

  setColorBy(param: string): void {
    this.colorBy = param;
    this.render();
  }

  setHighlight(ids: Set<string>): void {
    this.highlighted = ids;
    this.render();
  }

  /** Toggle one level of a categorical axis brush. */
  toggleLevel(axis: string, level: number): void {
    const current = this.levelBrushes.get(axis) ?? new Set<number>();
    if (current.has(level)) current.delete(level);
    else current.add(level);
    if (current.size === 0) this.levelBrushes.delete(axis);
    else this.levelBrushes.set(axis, current);
    this.emitBrushes();
  }

  /** Set or clear a range brush on a distance axis. */
  setRange(axis: string, range: [number, number] | null): void {
    if (!(DELTA_AXES as readonly string[]).includes(axis)) {
      throw new Error(`axis '${axis}' does not take a range brush`);
    }
    if (range === null) this.rangeBrushes.delete(axis);
    else if (range[0] > range[1]) throw new Error("range lo > hi");
    else this.rangeBrushes.set(axis, range);
    this.emitBrushes();
  }

  clearBrushes(): void {
    this.levelBrushes.clear();
    this.rangeBrushes.clear();
    this.emitBrushes();
  }

  /** Restore brushes from filter clauses (e.g. after load-settings). */
  setBrushesFromClauses(clauses: Clause[]): void {
    this.levelBrushes.clear();
    this.rangeBrushes.clear();
    for (const c of clauses) {
      if (c.kind === "categorical") {
        this.levelBrushes.set(c.axis, new Set(c.levels));
      } else {
        this.rangeBrushes.set(c.axis, [c.lo, c.hi]);
      }
    }
    this.render();
  }

  brushClauses(): Clause[] {
    const clauses: Clause[] = [];
    for (const [axis, levels] of this.levelBrushes) {
      clauses.push({
        kind: "categorical",
        axis,
        levels: [...levels].sort((a, b) => a - b),
      });
    }
    for (const [axis, [lo, hi]] of this.rangeBrushes) {
      clauses.push({ kind: "range", axis, lo, hi });
    }
    return clauses;
  }

  private emitBrushes(): void {
    this.render();
    this.opts.onBrushChange(this.brushClauses());
  }

  private axisValue(row: RecordRow, axis: string): number | null {
    const v = row[axis];
    return typeof v === "number" ? v : null;
  }

  private render(): void {
    this.svg.replaceChildren();
    const axes = this.axes();
    if (this.rows.length === 0) {
      const msg = svgElement("text", {
        x: WIDTH / 2,
        y: HEIGHT / 2,
        "text-anchor": "middle",
        class: "empty-state",
      });
      msg.textContent = "no records to display";
      this.svg.appendChild(msg);
      return;
    }
    const xStep = WIDTH / (axes.length + 1);
    const scales = new Map<string, LinearScale>();
    for (const axis of axes) {
      const values = this.rows
        .map((r) => this.axisValue(r, axis))
        .filter((v): v is number => v !== null);
      scales.set(axis, linearScale(extent(values), [BOTTOM, TOP]));
    }

    for (const row of this.rows) {
      const pts: string[] = [];
      let broken = false;
      axes.forEach((axis, i) => {
        const v = this.axisValue(row, axis);
        if (v === null) {
          broken = true;
          return;
        }
        pts.push(`${(i + 1) * xStep},${scales.get(axis)!.toPx(v)}`);
      });
      if (broken) continue;
      const colorLevel = this.axisValue(row, this.colorBy) ?? 0;
      const line = svgElement("polyline", {
        points: pts.join(" "),
        fill: "none",
        stroke: colorFor(colorLevel),
        "stroke-width": this.highlighted.has(row.sim_id) ? 2.5 : 1,
        class: this.highlighted.has(row.sim_id) ? "pc-line highlight" : "pc-line",
        "data-sim": row.sim_id,
      });
      this.svg.appendChild(line);
    }

    axes.forEach((axis, i) => {
      const x = (i + 1) * xStep;
      this.svg.appendChild(
        svgElement("line", {
          x1: x, y1: TOP, x2: x, y2: BOTTOM,
          stroke: "#888", class: "pc-axis", "data-axis": axis,
        }),
      );
      const label = svgElement("text", {
        x, y: TOP - 10, "text-anchor": "middle", class: "pc-label",
      });
      label.textContent = axis;
      this.svg.appendChild(label);

      if ((DELTA_AXES as readonly string[]).includes(axis)) {
        this.renderRangeBrush(axis, x, scales.get(axis)!);
      } else {
        this.renderLevelTicks(axis, x, scales.get(axis)!);
      }
    });
  }

  private renderLevelTicks(axis: string, x: number, scale: LinearScale): void {
    const levels = [
      ...new Set(
        this.rows
          .map((r) => this.axisValue(r, axis))
          .filter((v): v is number => v !== null),
      ),
    ].sort((a, b) => a - b);
    const selected = this.levelBrushes.get(axis);
    for (const level of levels) {
      const y = scale.toPx(level);
      const active = selected === undefined || selected.has(level);
      const tick = svgElement("circle", {
        cx: x, cy: y, r: 5,
        class: active ? "pc-tick active" : "pc-tick",
        fill: active ? "#333" : "#ccc",
        "data-axis": axis,
        "data-level": level,
      });
      tick.addEventListener("click", () => this.toggleLevel(axis, level));
      this.svg.appendChild(tick);
    }
  }

  private renderRangeBrush(axis: string, x: number, scale: LinearScale): void {
    const brush = this.rangeBrushes.get(axis);
    if (!brush) return;
    const [lo, hi] = brush;
    const y1 = scale.toPx(hi);
    const y2 = scale.toPx(lo);
    this.svg.appendChild(
      svgElement("rect", {
        x: x - 6,
        y: Math.min(y1, y2),
        width: 12,
        height: Math.abs(y2 - y1),
        class: "pc-brush",
        fill: "rgba(66, 105, 208, 0.3)",
        "data-axis": axis,
      }),
    );
  }
}
