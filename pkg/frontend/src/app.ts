/** Application shell: explore page (parallel coordinates + scatter,
 * sliders, save dialog) and dataset management page, wired to the HTTP
 * service.  ViewState is the single source of truth; every control
 * writes to it and every view renders from it.
 */

import { ApiClient, ApiError, DriftError } from "./api.js";
import { applyFilter, serializeFilter, type Clause } from "./filter.js";
import { type Geometry } from "./geometry.js";
import { ParCoordsView } from "./parcoords.js";
import { scatterPoints } from "./points.js";
import { ScatterView, type SelectionTool } from "./scatter.js";
import { initialViewState, specFromViewState, viewStateFromSpec, type ViewState } from "./state.js";
import type { DatasetSummary, MethodSummary, RecordRow } from "./types.js";

export class App {
  state: ViewState = initialViewState(0, 1);
  paramNames: string[] = [];
  methods: MethodSummary[] = [];
  rows: RecordRow[] = [];

  readonly parcoords: ParCoordsView;
  readonly scatter: ScatterView;
  private explorePage!: HTMLElement;
  private datasetsPage!: HTMLElement;
  private statusBar!: HTMLElement;
  private saveDialog!: HTMLElement;
  private fetchController: AbortController | null = null;

  constructor(
    readonly root: HTMLElement,
    readonly api: ApiClient = new ApiClient(),
  ) {
    this.parcoords = new ParCoordsView({
      paramNames: [],
      onBrushChange: (clauses) => this.onBrushChange(clauses),
    });
    this.scatter = new ScatterView({
      onSelection: (geometry, ids) => this.onSelection(geometry, ids),
    });
  }

  async start(): Promise<void> {
    this.paramNames = (await this.api.getParams()).params;
    this.parcoords.setParamNames(this.paramNames);
    this.methods = await this.api.listMethods();
    this.buildLayout();
    if (this.methods.length === 0) {
      this.setStatus("no comparison methods in the store yet");
      return;
    }
    this.state.methodId = this.methods[0].method_id;
    await this.refreshData();
  }

  // -- data flow --------------------------------------------------------

  /** Refetch records for (method, time step); stale responses are
   * dropped so rapid slider moves are last-write-wins. */
  async refreshData(): Promise<void> {
    this.fetchController?.abort();
    const controller = new AbortController();
    this.fetchController = controller;
    try {
      const rows = await this.api.getRecords(
        this.state.methodId,
        this.state.timeStep,
        controller.signal,
      );
      if (controller !== this.fetchController) return;
      this.rows = rows;
      this.redraw();
      this.setStatus("");
    } catch (e) {
      if (e instanceof DOMException && e.name === "AbortError") return;
      this.setStatus(this.describeError(e));
    }
  }

  /** Re-render both plots from current state without refetching. */
  redraw(): void {
    const filtered = applyFilter(this.rows, this.state.filter);
    this.parcoords.setColorBy(this.state.colorBy);
    this.parcoords.setData(this.rows);
    this.parcoords.setBrushesFromClauses(this.state.filter);
    this.scatter.setColorBy(this.state.colorBy);
    this.scatter.setData(scatterPoints(filtered, this.state.wShock, this.state.wEdge));
    if (this.state.geometry) {
      this.scatter.applyGeometry(this.state.geometry);
    }
    this.updateSaveButton();
  }

  private onBrushChange(clauses: Clause[]): void {
    this.state.filter = clauses;
    const filtered = applyFilter(this.rows, this.state.filter);
    this.scatter.setData(scatterPoints(filtered, this.state.wShock, this.state.wEdge));
    if (this.state.geometry) this.scatter.applyGeometry(this.state.geometry);
    this.updateSaveButton();
  }

  private onSelection(geometry: Geometry, ids: Set<string>): void {
    this.state.geometry = geometry;
    this.state.highlighted = ids;
    this.parcoords.setHighlight(ids);
    this.updateSaveButton();
  }

  clearSelection(): void {
    this.state.geometry = null;
    this.state.highlighted = new Set();
    this.scatter.applyGeometry(null);
    this.parcoords.setHighlight(new Set());
    this.updateSaveButton();
  }

  setWeights(wShock: number, wEdge: number): void {
    this.state.wShock = wShock;
    this.state.wEdge = wEdge;
    const filtered = applyFilter(this.rows, this.state.filter);
    this.scatter.setData(scatterPoints(filtered, wShock, wEdge));
    if (this.state.geometry) this.scatter.applyGeometry(this.state.geometry);
  }

  async setTimeStep(t: number): Promise<void> {
    this.state.timeStep = t;
    await this.refreshData();
  }

  setColorBy(param: string): void {
    this.state.colorBy = param;
    this.parcoords.setColorBy(param);
    this.scatter.setColorBy(param);
  }

  setTool(tool: SelectionTool): void {
    this.scatter.tool = tool;
  }

  // -- saving -----------------------------------------------------------

  saveEnabled(): boolean {
    const description = this.descriptionInput()?.value ?? "";
    return this.state.geometry !== null && description.trim().length > 0;
  }

  /** POST the current view as a dataset.  The client's member list is
   * sent only when no subsampling applies (then it must equal the
   * server's replay); with p < 1 the server's replayed set is authoritative. */
  async saveCurrentSelection(): Promise<number | null> {
    if (!this.saveEnabled()) return null;
    const description = this.descriptionInput()!.value.trim();
    this.state.subsampleP = Number(
      (this.root.querySelector("#subsample-p") as HTMLInputElement).value,
    );
    this.state.subsampleSeed = Number(
      (this.root.querySelector("#subsample-seed") as HTMLInputElement).value,
    );
    const spec = specFromViewState(this.state, this.paramNames, description);
    const clientIds =
      this.state.subsampleP === 1 ? [...this.scatter.selectedIds()].sort() : null;
    try {
      const saved = await this.api.saveDataset(spec, clientIds);
      this.state.highlighted = new Set(saved.members);
      this.parcoords.setHighlight(this.state.highlighted);
      this.setStatus(
        `saved dataset ${saved.dataset_id} with ${saved.members.length} members`,
      );
      this.descriptionInput()!.value = "";
      this.updateSaveButton();
      return saved.dataset_id;
    } catch (e) {
      if (e instanceof DriftError) {
        const onlyServer = e.drift.server_members.filter(
          (m) => !e.drift.client_members.includes(m),
        );
        const onlyClient = e.drift.client_members.filter(
          (m) => !e.drift.server_members.includes(m),
        );
        this.setStatus(
          `selection drift: server-only [${onlyServer.join(", ")}]` +
            ` client-only [${onlyClient.join(", ")}]`,
        );
      } else {
        this.setStatus(this.describeError(e));
      }
      return null;
    }
  }

  expectedMemberCount(): number {
    return Math.round(this.scatter.selectedIds().size * this.state.subsampleP);
  }

  // -- dataset management -------------------------------------------------

  async showDatasets(): Promise<void> {
    this.explorePage.hidden = true;
    this.datasetsPage.hidden = false;
    await this.renderDatasetTable();
  }

  showExplore(): void {
    this.datasetsPage.hidden = true;
    this.explorePage.hidden = false;
  }

  async renderDatasetTable(): Promise<void> {
    const table = this.datasetsPage.querySelector("tbody")!;
    table.replaceChildren();
    let datasets: DatasetSummary[];
    try {
      datasets = await this.api.listDatasets();
    } catch (e) {
      this.setStatus(this.describeError(e));
      return;
    }
    for (const ds of datasets) {
      const tr = document.createElement("tr");
      tr.dataset.id = String(ds.dataset_id);
      const cells = [
        String(ds.dataset_id),
        ds.description,
        ds.created_at,
        String(ds.member_count),
      ];
      for (const text of cells) {
        const td = document.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      const actions = document.createElement("td");
      actions.append(
        this.actionButton("delete", () => this.deleteDataset(ds.dataset_id)),
        this.actionButton("export", () => this.exportDataset(ds.dataset_id)),
        this.actionButton("visualize", () => this.visualizeDataset(ds.dataset_id)),
        this.actionButton("load settings", () => this.loadSettings(ds.dataset_id)),
      );
      tr.appendChild(actions);
      table.appendChild(tr);
    }
  }

  private actionButton(label: string, onClick: () => void): HTMLButtonElement {
    const b = document.createElement("button");
    b.textContent = label;
    b.className = `action-${label.replace(" ", "-")}`;
    b.addEventListener("click", onClick);
    return b;
  }

  async deleteDataset(id: number): Promise<void> {
    try {
      await this.api.deleteDataset(id);
    } catch (e) {
      if (!(e instanceof ApiError && e.status === 404)) {
        this.setStatus(this.describeError(e));
        return;
      }
    }
    this.datasetsPage.querySelector(`tr[data-id="${id}"]`)?.remove();
  }

  async exportDataset(id: number): Promise<void> {
    try {
      const doc = await this.api.exportDataset(id);
      downloadJson(doc, `dataset-${id}.json`);
    } catch (e) {
      this.setStatus(this.describeError(e));
    }
  }

  async visualizeDataset(id: number): Promise<void> {
    try {
      const ds = await this.api.getDataset(id);
      this.showExplore();
      this.state.highlighted = new Set(ds.members);
      this.scatter.highlightMembers(this.state.highlighted);
      this.parcoords.setHighlight(this.state.highlighted);
    } catch (e) {
      this.handleGone(e, id);
    }
  }

  /** Restore every view setting from a saved dataset. */
  async loadSettings(id: number): Promise<void> {
    let spec;
    try {
      spec = await this.api.getSettings(id);
    } catch (e) {
      this.handleGone(e, id);
      return;
    }
    this.state = { ...viewStateFromSpec(spec, this.paramNames), highlighted: new Set() };
    this.showExplore();
    this.syncControls();
    await this.refreshData();
  }

  private handleGone(e: unknown, id: number): void {
    if (e instanceof ApiError && e.status === 404) {
      this.datasetsPage.querySelector(`tr[data-id="${id}"]`)?.remove();
      this.setStatus(`dataset ${id} no longer exists`);
    } else {
      this.setStatus(this.describeError(e));
    }
  }

  // -- DOM ----------------------------------------------------------------

  private buildLayout(): void {
    this.root.replaceChildren();
    const nav = document.createElement("nav");
    nav.append(
      this.actionButton("explore", () => this.showExplore()),
      this.actionButton("datasets", () => void this.showDatasets()),
    );
    this.statusBar = document.createElement("div");
    this.statusBar.id = "status";

    this.explorePage = document.createElement("section");
    this.explorePage.id = "explore";
    this.explorePage.append(
      this.buildToolbar(),
      this.parcoords.element,
      this.scatter.element,
      this.buildSaveDialog(),
    );

    this.datasetsPage = document.createElement("section");
    this.datasetsPage.id = "datasets";
    this.datasetsPage.hidden = true;
    const table = document.createElement("table");
    table.innerHTML =
      "<thead><tr><th>id</th><th>description</th><th>created</th>" +
      "<th>members</th><th>actions</th></tr></thead><tbody></tbody>";
    this.datasetsPage.appendChild(table);

    this.root.append(nav, this.statusBar, this.explorePage, this.datasetsPage);
  }

  private buildToolbar(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "toolbar";

    const methodSelect = document.createElement("select");
    methodSelect.id = "method-select";
    for (const m of this.methods) {
      const opt = document.createElement("option");
      opt.value = String(m.method_id);
      opt.textContent = `#${m.method_id} ${m.norm} vs ${m.gt_sim_id}@t${m.gt_time_step}`;
      methodSelect.appendChild(opt);
    }
    methodSelect.addEventListener("change", () => {
      this.state.methodId = Number(methodSelect.value);
      void this.refreshData();
    });

    const timeSlider = slider("time-slider", 1, 40, 1, this.state.timeStep);
    timeSlider.addEventListener("change", () => {
      void this.setTimeStep(Number(timeSlider.value));
    });
    const wsSlider = slider("wshock-slider", 0, 1, 0.01, this.state.wShock);
    const weSlider = slider("wedge-slider", 0, 1, 0.01, this.state.wEdge);
    const onWeight = () =>
      this.setWeights(Number(wsSlider.value), Number(weSlider.value));
    wsSlider.addEventListener("input", onWeight);
    weSlider.addEventListener("input", onWeight);

    const colorSelect = document.createElement("select");
    colorSelect.id = "color-select";
    for (const name of this.paramNames) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = `color by ${name}`;
      colorSelect.appendChild(opt);
    }
    colorSelect.addEventListener("change", () => this.setColorBy(colorSelect.value));

    const toolSelect = document.createElement("select");
    toolSelect.id = "tool-select";
    for (const tool of ["box", "lasso"]) {
      const opt = document.createElement("option");
      opt.value = tool;
      opt.textContent = `${tool} select`;
      toolSelect.appendChild(opt);
    }
    toolSelect.addEventListener("change", () =>
      this.setTool(toolSelect.value as SelectionTool),
    );

    const clear = this.actionButton("clear selection", () => this.clearSelection());
    const clearBrushes = this.actionButton("clear brushes", () =>
      this.parcoords.clearBrushes(),
    );
    bar.append(
      methodSelect,
      labeled("t", timeSlider),
      labeled("w_shock", wsSlider),
      labeled("w_edge", weSlider),
      colorSelect,
      toolSelect,
      clear,
      clearBrushes,
    );
    return bar;
  }

  private buildSaveDialog(): HTMLElement {
    this.saveDialog = document.createElement("div");
    this.saveDialog.className = "save-dialog";
    const description = document.createElement("input");
    description.id = "description";
    description.placeholder = "description (required)";
    description.addEventListener("input", () => this.updateSaveButton());
    const p = slider("subsample-p", 0.01, 1, 0.01, this.state.subsampleP);
    const seed = document.createElement("input");
    seed.id = "subsample-seed";
    seed.type = "number";
    seed.value = String(this.state.subsampleSeed);
    const expected = document.createElement("span");
    expected.id = "expected-count";
    p.addEventListener("input", () => {
      this.state.subsampleP = Number(p.value);
      expected.textContent = `~${this.expectedMemberCount()} members`;
    });
    const save = document.createElement("button");
    save.id = "save-button";
    save.textContent = "save dataset";
    save.disabled = true;
    save.addEventListener("click", () => void this.saveCurrentSelection());
    this.saveDialog.append(
      description,
      labeled("subsample p", p),
      labeled("seed", seed),
      expected,
      save,
    );
    return this.saveDialog;
  }

  private descriptionInput(): HTMLInputElement | null {
    return this.root.querySelector("#description");
  }

  updateSaveButton(): void {
    const button = this.root.querySelector<HTMLButtonElement>("#save-button");
    if (button) button.disabled = !this.saveEnabled();
  }

  /** Push state back into the toolbar controls after load-settings. */
  private syncControls(): void {
    const set = (id: string, value: string) => {
      const el = this.root.querySelector<HTMLInputElement | HTMLSelectElement>(`#${id}`);
      if (el) el.value = value;
    };
    set("method-select", String(this.state.methodId));
    set("time-slider", String(this.state.timeStep));
    set("wshock-slider", String(this.state.wShock));
    set("wedge-slider", String(this.state.wEdge));
    set("color-select", this.state.colorBy);
    set("subsample-p", String(this.state.subsampleP));
    set("subsample-seed", String(this.state.subsampleSeed));
    set("tool-select", this.state.geometry?.type === "lasso" ? "lasso" : "box");
  }

  /** Current filter as its canonical string (for display and tests). */
  filterString(): string {
    return serializeFilter(this.state.filter, this.paramNames);
  }

  setStatus(text: string): void {
    if (this.statusBar) this.statusBar.textContent = text;
  }

  private describeError(e: unknown): string {
    if (e instanceof ApiError) return `${e.code}: ${e.message}`;
    return e instanceof Error ? e.message : String(e);
  }
}

function slider(
  id: string,
  min: number,
  max: number,
  step: number,
  value: number,
): HTMLInputElement {
  const el = document.createElement("input");
  el.type = "range";
  el.id = id;
  el.min = String(min);
  el.max = String(max);
  el.step = String(step);
  el.value = String(value);
  return el;
}

function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.append(text, control);
  return label;
}

function downloadJson(doc: unknown, filename: string): void {
  if (typeof URL.createObjectURL !== "function") return; // non-browser env
  const blob = new Blob([JSON.stringify(doc, null, 1)], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = filename;
  a.click();
  URL.revokeObjectURL(a.href);
}
