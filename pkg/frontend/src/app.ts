/**
 * Operator console shell.
 *
 * Wires the API client, session state, Gantt view, what-if editor, and run
 * monitors into one page. All schedule numbers shown anywhere in the console
 * come from service responses; this module only moves them around.
 */

import { ApiClient } from "./api";
import type { InstanceDocument, RunRecord, TimelineDocument } from "./api";
import { WhatIfEditor } from "./editor";
import { renderGantt } from "./gantt";
import { RunMonitor } from "./monitor";
import { ConsoleSession, MAX_COMPARISONS } from "./state";

/**
 * Parse a buffer override like "2", "1,3" or "inf" into per-stage
 * capacities (null = unbounded). Empty text means "use the instance's own
 * buffers". A single token is broadcast across all stages.
 */
export function parseBufferTokens(text: string, machines: number): (number | null)[] | null {
  const trimmed = text.trim();
  if (trimmed === "") {
    return null;
  }
  const tokens = trimmed.split(/[\s,]+/).filter((t) => t.length > 0);
  const stages = machines - 1;
  const parsed = tokens.map((token) => {
    if (token === "inf" || token === "none" || token === "∞") {
      return null;
    }
    const value = Number(token);
    if (!Number.isInteger(value) || value < 0) {
      throw new Error(`buffer capacity must be 'inf' or an integer ≥ 0, got '${token}'`);
    }
    return value;
  });
  if (parsed.length === 1 && stages > 1) {
    return new Array(stages).fill(parsed[0]);
  }
  if (parsed.length !== stages) {
    throw new Error(`expected ${stages} buffer capacities, got ${parsed.length}`);
  }
  return parsed;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function section(doc: Document, title: string): { box: HTMLElement; body: HTMLElement } {
  const box = el(doc, "section", "panel");
  box.appendChild(el(doc, "h2", "", title));
  const body = el(doc, "div", "panel-body");
  box.appendChild(body);
  return { box, body };
}

export class ConsoleApp {
  readonly session = new ConsoleSession();
  private readonly client: ApiClient;
  private readonly doc: Document;
  private readonly editor: WhatIfEditor;
  private pinCounter = 0;

  private readonly healthView: HTMLElement;
  private readonly statusBar: HTMLElement;
  private readonly instanceList: HTMLElement;
  private readonly ganttBox: HTMLElement;
  private readonly bufferInput: HTMLInputElement;
  private readonly monitorsBox: HTMLElement;
  private readonly comparisonBox: HTMLElement;
  private readonly algorithmSelect: HTMLSelectElement;
  private readonly seedInput: HTMLInputElement;
  private readonly configInput: HTMLTextAreaElement;
  private readonly genFields: Record<"n" | "m" | "seed", HTMLInputElement>;
  private readonly uploadInput: HTMLTextAreaElement;

  constructor(root: HTMLElement, client: ApiClient) {
    this.client = client;
    this.doc = root.ownerDocument;
    const doc = this.doc;

    const header = el(doc, "header", "console-header");
    header.appendChild(el(doc, "h1", "", "flow-shop operator console"));
    this.healthView = el(doc, "span", "health", "connecting…");
    header.appendChild(this.healthView);

    this.statusBar = el(doc, "div", "status-bar");

    /* Instances: generate on the service, or paste a document. */
    const instances = section(doc, "instances");
    const genForm = el(doc, "div", "gen-form");
    this.genFields = {
      n: this.numberInput(doc, "jobs", "6"),
      m: this.numberInput(doc, "machines", "2"),
      seed: this.numberInput(doc, "seed", "1"),
    };
    genForm.append(this.genFields.n, this.genFields.m, this.genFields.seed);
    const genButton = el(doc, "button", "gen-button", "generate");
    genButton.addEventListener("click", () => void this.generateInstance());
    genForm.appendChild(genButton);

    this.uploadInput = el(doc, "textarea", "upload-input");
    this.uploadInput.placeholder = '{"p": [[3, 1], [1, 3]], ...}';
    const uploadButton = el(doc, "button", "upload-button", "upload document");
    uploadButton.addEventListener("click", () => void this.uploadInstance());

    this.instanceList = el(doc, "ul", "instance-list");
    instances.body.append(genForm, this.uploadInput, uploadButton, this.instanceList);

    /* Schedule view: Gantt chart plus buffer override. */
    const schedule = section(doc, "schedule");
    const bufferRow = el(doc, "div", "buffer-row");
    bufferRow.appendChild(el(doc, "label", "", "buffers:"));
    this.bufferInput = el(doc, "input", "buffer-input");
    this.bufferInput.placeholder = "e.g. 1,3 or inf (blank = instance default)";
    const bufferApply = el(doc, "button", "buffer-apply", "re-evaluate");
    bufferApply.addEventListener("click", () => void this.applyBuffers());
    bufferRow.append(this.bufferInput, bufferApply);
    this.ganttBox = el(doc, "div", "gantt-box");
    schedule.body.append(bufferRow, this.ganttBox);

    /* What-if editor. */
    const whatIf = section(doc, "what-if editor");
    const editorRoot = el(doc, "div", "editor-root");
    const pinButton = el(doc, "button", "pin-button", "pin working sequence");
    pinButton.addEventListener("click", () => this.pinWorkingSequence());
    whatIf.body.append(editorRoot, pinButton);
    this.editor = new WhatIfEditor(editorRoot, this.client, {
      onEvaluated: (timeline, sequence) => this.applyTimeline(timeline, sequence),
    });

    /* Run launcher and live monitors. */
    const runs = section(doc, "runs");
    const runForm = el(doc, "div", "run-form");
    this.algorithmSelect = el(doc, "select", "algorithm-select");
    for (const algorithm of ["gbml", "sa", "johnson"]) {
      const option = el(doc, "option", "", algorithm);
      option.value = algorithm;
      this.algorithmSelect.appendChild(option);
    }
    this.seedInput = this.numberInput(doc, "seed", "");
    this.configInput = el(doc, "textarea", "config-input");
    this.configInput.placeholder = '{"iterations": 500} (optional)';
    const startButton = el(doc, "button", "start-run", "start run");
    startButton.addEventListener("click", () => void this.startRun());
    runForm.append(this.algorithmSelect, this.seedInput, this.configInput, startButton);
    this.monitorsBox = el(doc, "div", "monitors");
    runs.body.append(runForm, this.monitorsBox);

    /* Comparison pins with pairwise ratio badges. */
    const comparisons = section(doc, "comparisons");
    this.comparisonBox = el(doc, "div", "comparison-box");
    comparisons.body.appendChild(this.comparisonBox);

    root.replaceChildren(
      header,
      this.statusBar,
      instances.box,
      schedule.box,
      whatIf.box,
      runs.box,
      comparisons.box,
    );
    this.renderComparisons();
  }

  private numberInput(doc: Document, placeholder: string, value: string): HTMLInputElement {
    const input = el(doc, "input");
    input.type = "number";
    input.placeholder = placeholder;
    input.value = value;
    return input;
  }

  /** Initial load: health check plus the stored instance list. */
  async boot(): Promise<void> {
    try {
      const health = await this.client.health();
      this.healthView.textContent = `service ${health.status} · ${health.workers} worker(s)`;
    } catch (err) {
      this.healthView.textContent = "service unreachable";
      this.note(err);
    }
    await this.refreshInstances();
  }

  private note(err: unknown): void {
    this.statusBar.textContent = err instanceof Error ? err.message : String(err);
    this.statusBar.classList.add("error");
  }

  private info(message: string): void {
    this.statusBar.textContent = message;
    this.statusBar.classList.remove("error");
  }

  async refreshInstances(): Promise<void> {
    try {
      const summaries = await this.client.listInstances();
      this.instanceList.replaceChildren(
        ...summaries.map((summary) => {
          const item = el(this.doc, "li", "instance-item");
          item.dataset.instanceId = summary.id;
          const label = `${summary.id.slice(0, 12)} · ${summary.n} jobs × ${summary.m} machines`;
          const open = el(this.doc, "button", "open-instance", label);
          open.addEventListener("click", () => void this.openInstance(summary.id));
          item.appendChild(open);
          return item;
        }),
      );
    } catch (err) {
      this.note(err);
    }
  }

  private async generateInstance(): Promise<void> {
    try {
      const id = await this.client.createInstance({
        n: Number(this.genFields.n.value),
        m: Number(this.genFields.m.value),
        seed: this.genFields.seed.value === "" ? null : Number(this.genFields.seed.value),
      });
      await this.refreshInstances();
      await this.openInstance(id);
    } catch (err) {
      this.note(err);
    }
  }

  private async uploadInstance(): Promise<void> {
    try {
      const doc = JSON.parse(this.uploadInput.value) as InstanceDocument;
      const id = await this.client.createInstance(doc);
      await this.refreshInstances();
      await this.openInstance(id);
    } catch (err) {
      this.note(err);
    }
  }

  async openInstance(id: string): Promise<void> {
    try {
      const instance = await this.client.getInstance(id);
      this.session.selectInstance(instance);
      this.bufferInput.value = "";
      this.renderComparisons();
      this.info(`opened ${id.slice(0, 12)}`);
      await this.evaluateWorkingSequence();
    } catch (err) {
      this.note(err);
    }
  }

  /** Ask the service to evaluate the current working sequence and render it. */
  private async evaluateWorkingSequence(): Promise<void> {
    const instance = this.session.instance;
    if (!instance) {
      return;
    }
    try {
      const timeline = await this.client.evaluate(
        instance.id,
        this.session.workingSequence,
        this.session.buffers,
      );
      this.applyTimeline(timeline, this.session.workingSequence);
    } catch (err) {
      this.note(err);
    }
  }

  /** Single sink for fresh timelines: update session, gantt, and editor. */
  private applyTimeline(timeline: TimelineDocument, sequence: number[]): void {
    const instance = this.session.instance;
    if (!instance) {
      return;
    }
    this.session.setWorkingSequence(sequence, timeline.makespan);
    renderGantt(this.ganttBox, timeline);
    this.editor.setContext({
      instanceId: instance.id,
      sequence,
      buffers: this.session.buffers,
      makespan: timeline.makespan,
    });
  }

  private async applyBuffers(): Promise<void> {
    const instance = this.session.instance;
    if (!instance) {
      this.note(new Error("select an instance first"));
      return;
    }
    try {
      this.session.buffers = parseBufferTokens(this.bufferInput.value, instance.m);
    } catch (err) {
      this.note(err);
      return;
    }
    await this.evaluateWorkingSequence();
  }

  private pinWorkingSequence(): void {
    const makespan = this.session.workingMakespan;
    if (!this.session.instance || makespan === null) {
      this.note(new Error("evaluate a sequence before pinning it"));
      return;
    }
    this.pinCounter += 1;
    const added = this.session.addComparison({
      name: `pin-${this.pinCounter}`,
      sequence: this.session.workingSequence,
      makespan,
    });
    if (!added) {
      this.note(new Error(`at most ${MAX_COMPARISONS} sequences can be pinned`));
      return;
    }
    this.renderComparisons();
  }

  private async startRun(): Promise<void> {
    const instance = this.session.instance;
    if (!instance) {
      this.note(new Error("select an instance first"));
      return;
    }
    let config: Record<string, unknown> | null = null;
    const configText = this.configInput.value.trim();
    if (configText !== "") {
      try {
        config = JSON.parse(configText) as Record<string, unknown>;
      } catch (err) {
        this.note(err);
        return;
      }
    }
    const algorithm = this.algorithmSelect.value as "gbml" | "sa" | "johnson";
    try {
      const runId = await this.client.startRun({
        instance_id: instance.id,
        algorithm,
        seed: this.seedInput.value === "" ? null : Number(this.seedInput.value),
        config,
        buffers: this.session.buffers,
      });
      this.session.watchRun(runId);
      this.mountMonitor(runId);
      this.info(`started ${algorithm} run ${runId.slice(0, 12)}`);
    } catch (err) {
      this.note(err);
    }
  }

  private mountMonitor(runId: string): void {
    const panel = el(this.doc, "div", "monitor-slot");
    this.monitorsBox.prepend(panel);
    const monitor = new RunMonitor(panel, this.client, runId, {
      onClosed: (id) => {
        this.session.unwatchRun(id);
      },
      onAdopt: (sequence) => void this.adoptSequence(sequence),
      onCompare: (record) => void this.pinRunResult(record),
    });
    monitor.start();
  }

  /** Adopt a finished run's sequence as the working sequence. */
  private async adoptSequence(sequence: number[]): Promise<void> {
    const instance = this.session.instance;
    if (!instance || sequence.length !== instance.n) {
      this.note(new Error("run sequence does not fit the selected instance"));
      return;
    }
    try {
      const timeline = await this.client.evaluate(instance.id, sequence, this.session.buffers);
      this.applyTimeline(timeline, sequence);
      this.info("adopted run result as working sequence");
    } catch (err) {
      this.note(err);
    }
  }

  /** Pin a finished run, evaluating its sequence under the session buffers. */
  private async pinRunResult(record: RunRecord): Promise<void> {
    const instance = this.session.instance;
    const sequence = record.result?.sequence ?? record.result?.sequences?.[0];
    if (!instance || !sequence) {
      return;
    }
    if (sequence.length !== instance.n) {
      this.note(new Error("run sequence does not fit the selected instance"));
      return;
    }
    try {
      const timeline = await this.client.evaluate(instance.id, sequence, this.session.buffers);
      const added = this.session.addComparison({
        name: `${record.algorithm}-${record.id.slice(0, 6)}`,
        sequence,
        makespan: timeline.makespan,
      });
      if (!added) {
        this.note(new Error(`at most ${MAX_COMPARISONS} sequences can be pinned`));
        return;
      }
      this.renderComparisons();
    } catch (err) {
      this.note(err);
    }
  }

  private renderComparisons(): void {
    const doc = this.doc;
    const list = el(doc, "ul", "comparison-list");
    for (const entry of this.session.comparisons) {
      const item = el(doc, "li", "comparison-entry");
      item.dataset.name = entry.name;
      item.appendChild(
        el(doc, "span", "", `${entry.name}: [${entry.sequence.join(" ")}] → ${entry.makespan}`),
      );
      const remove = el(doc, "button", "remove-pin", "unpin");
      remove.addEventListener("click", () => {
        this.session.removeComparison(entry.name);
        this.renderComparisons();
      });
      item.appendChild(remove);
      list.appendChild(item);
    }
    const badges = el(doc, "div", "ratio-badges");
    for (const badge of this.session.ratioBadges()) {
      const span = el(doc, "span", "ratio-badge", `${badge.label} = ${badge.value.toFixed(3)}`);
      span.dataset.label = badge.label;
      badges.appendChild(span);
    }
    this.comparisonBox.replaceChildren(list, badges);
  }
}

/* Boot when loaded in the real page (tests import modules directly). */
const rootElement =
  typeof document !== "undefined" ? document.getElementById("console-root") : null;
if (rootElement) {
  const app = new ConsoleApp(rootElement, new ApiClient());
  void app.boot();
}
