/**
 * Live run monitor panel.
 *
 * Polls one run every 500ms while the tab is visible, draws the best-value
 * curve from the numbers the service reports, and exposes cancel / adopt /
 * pin-for-comparison actions. While a run is in flight the curve is built
 * from progress samples; once the run is done the curve is replaced by the
 * authoritative per-step history from the result document. A cancelled run
 * keeps its last progress numbers on screen but has no result sequence, so
 * adopt and compare stay disabled.
 */

import { ServiceError } from "./api";
import type { RunRecord } from "./api";

/** The slice of the API client the monitor needs (stubbed in tests). */
export interface RunApi {
  getRun(runId: string): Promise<RunRecord>;
  cancelRun(runId: string): Promise<RunRecord>;
}

export interface RunMonitorOptions {
  pollIntervalMs?: number;
  /** Called when the panel closes itself (run deleted on the server). */
  onClosed?: (runId: string, reason: string) => void;
  /** Called when the operator adopts a finished run's sequence. */
  onAdopt?: (sequence: number[], record: RunRecord) => void;
  /** Called when the operator pins a finished run for comparison. */
  onCompare?: (record: RunRecord) => void;
}

export interface CurveSample {
  x: number;
  y: number;
}

const TERMINAL: ReadonlySet<string> = new Set(["done", "cancelled", "failed"]);

export class RunMonitor {
  readonly runId: string;
  readonly samples: CurveSample[] = [];
  record: RunRecord | null = null;
  closed = false;

  private readonly api: RunApi;
  private readonly options: RunMonitorOptions;
  private readonly root: HTMLElement;
  private readonly doc: Document;
  private readonly interval: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight = false;
  private terminal = false;
  private readonly onVisibility: () => void;

  private readonly statusView: HTMLElement;
  private readonly progressView: HTMLElement;
  private readonly noteView: HTMLElement;
  private readonly curve: SVGSVGElement;
  private readonly curveLine: SVGPolylineElement;
  private readonly cancelButton: HTMLButtonElement;
  private readonly adoptButton: HTMLButtonElement;
  private readonly compareButton: HTMLButtonElement;

  constructor(root: HTMLElement, api: RunApi, runId: string, options: RunMonitorOptions = {}) {
    this.root = root;
    this.api = api;
    this.runId = runId;
    this.options = options;
    this.interval = options.pollIntervalMs ?? 500;
    this.doc = root.ownerDocument;

    root.classList.add("run-monitor");
    root.dataset.runId = runId;

    const header = this.doc.createElement("div");
    header.className = "monitor-header";
    const title = this.doc.createElement("span");
    title.className = "monitor-title";
    title.textContent = `run ${runId.slice(0, 12)}`;
    this.statusView = this.doc.createElement("span");
    this.statusView.className = "monitor-status";
    header.append(title, this.statusView);

    this.progressView = this.doc.createElement("div");
    this.progressView.className = "monitor-progress";
    this.noteView = this.doc.createElement("div");
    this.noteView.className = "monitor-note";

    const SVG = "http://www.w3.org/2000/svg";
    this.curve = this.doc.createElementNS(SVG, "svg") as SVGSVGElement;
    this.curve.setAttribute("class", "monitor-curve");
    this.curve.setAttribute("viewBox", "0 0 100 40");
    this.curve.setAttribute("preserveAspectRatio", "none");
    this.curveLine = this.doc.createElementNS(SVG, "polyline") as SVGPolylineElement;
    this.curveLine.setAttribute("fill", "none");
    this.curve.appendChild(this.curveLine);

    const actions = this.doc.createElement("div");
    actions.className = "monitor-actions";
    this.cancelButton = this.button("monitor-cancel", "cancel", () => void this.cancel());
    this.adoptButton = this.button("monitor-adopt", "use sequence", () => this.adopt());
    this.compareButton = this.button("monitor-compare", "pin comparison", () => {
      if (this.record?.status === "done") {
        this.options.onCompare?.(this.record);
      }
    });
    actions.append(this.cancelButton, this.adoptButton, this.compareButton);

    root.replaceChildren(header, this.progressView, this.curve, actions, this.noteView);

    this.onVisibility = () => {
      if (this.doc.visibilityState !== "hidden") {
        void this.refresh();
      }
    };
    this.doc.addEventListener("visibilitychange", this.onVisibility);
    this.render();
  }

  private button(cls: string, label: string, onClick: () => void): HTMLButtonElement {
    const el = this.doc.createElement("button");
    el.type = "button";
    el.className = cls;
    el.textContent = label;
    el.disabled = true;
    el.addEventListener("click", onClick);
    return el;
  }

  /** Fetch once immediately, then poll until the run reaches a final state. */
  start(): void {
    void this.refresh();
    this.schedule();
  }

  /** Stop polling and detach listeners; the panel keeps its last render. */
  stop(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.doc.removeEventListener("visibilitychange", this.onVisibility);
  }

  private schedule(): void {
    if (this.closed || this.terminal) {
      return;
    }
    this.timer = setTimeout(() => {
      if (this.doc.visibilityState !== "hidden") {
        void this.refresh();
      }
      this.schedule();
    }, this.interval);
  }

  /** One poll of the run record; hidden tabs skip these entirely. */
  async refresh(): Promise<void> {
    if (this.inflight || this.closed || this.terminal) {
      return;
    }
    this.inflight = true;
    let record: RunRecord;
    try {
      record = await this.api.getRun(this.runId);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 404) {
        this.close("run no longer exists on the service");
      } else {
        this.noteView.textContent = `poll failed: ${err instanceof Error ? err.message : err}`;
      }
      return;
    } finally {
      this.inflight = false;
    }
    this.applyRecord(record);
  }

  async cancel(): Promise<void> {
    try {
      const record = await this.api.cancelRun(this.runId);
      this.applyRecord(record);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 404) {
        this.close("run no longer exists on the service");
      } else {
        this.noteView.textContent = `cancel failed: ${err instanceof Error ? err.message : err}`;
      }
    }
  }

  private adopt(): void {
    const sequence = this.adoptableSequence();
    if (sequence && this.record) {
      this.options.onAdopt?.([...sequence], this.record);
    }
  }

  /** A sequence is only available from a completed run's result document. */
  adoptableSequence(): number[] | null {
    if (this.record?.status !== "done" || !this.record.result) {
      return null;
    }
    const result = this.record.result;
    return result.sequence ?? result.sequences?.[0] ?? null;
  }

  private applyRecord(record: RunRecord): void {
    this.record = record;
    const progress = record.progress;
    if (progress.best !== null) {
      const last = this.samples[this.samples.length - 1];
      if (!last || progress.counter > last.x) {
        this.samples.push({ x: progress.counter, y: progress.best });
      } else if (progress.counter === last.x) {
        last.y = progress.best;
      }
    }
    if (TERMINAL.has(record.status)) {
      this.terminal = true;
      if (this.timer !== null) {
        clearTimeout(this.timer);
        this.timer = null;
      }
      if (record.status === "done" && record.result) {
        this.finalizeCurve(record);
      }
    }
    this.render();
  }

  /** Replace progress samples with the authoritative per-step history. */
  private finalizeCurve(record: RunRecord): void {
    const result = record.result;
    if (!result) {
      return;
    }
    let finalSamples: CurveSample[] = [];
    if (result.history && result.history.length > 0) {
      finalSamples = result.history.map((row) => ({ x: row.generation, y: row.best_so_far }));
    } else if (result.trace && result.trace.length > 0) {
      finalSamples = result.trace.map(([x, y]) => ({ x, y }));
    } else {
      finalSamples = [{ x: Math.max(record.progress.counter, 1), y: result.objective }];
    }
    this.samples.length = 0;
    this.samples.push(...finalSamples);
  }

  private close(reason: string): void {
    this.stop();
    this.closed = true;
    const notice = this.doc.createElement("div");
    notice.className = "monitor-closed";
    notice.textContent = `run ${this.runId.slice(0, 12)}: ${reason}`;
    this.root.replaceChildren(notice);
    this.options.onClosed?.(this.runId, reason);
  }

  private render(): void {
    const record = this.record;
    const status = record?.status ?? "loading";
    this.statusView.textContent = status;
    this.statusView.dataset.status = status;

    if (!record) {
      this.progressView.textContent = "waiting for first poll";
    } else if (record.status === "done" && record.result) {
      this.progressView.textContent = `objective ${record.result.objective}`;
    } else if (record.status === "failed") {
      this.progressView.textContent = `failed: ${record.error ?? "unknown error"}`;
    } else {
      const best = record.progress.best ?? "—";
      this.progressView.textContent = `step ${record.progress.counter} · best ${best}`;
    }

    this.cancelButton.disabled = record === null || TERMINAL.has(record.status);
    const adoptable = this.adoptableSequence() !== null;
    this.adoptButton.disabled = !adoptable;
    this.compareButton.disabled = !adoptable;
    this.renderCurve();
  }

  private renderCurve(): void {
    this.curve.dataset.points = String(this.samples.length);
    if (this.samples.length === 0) {
      this.curveLine.setAttribute("points", "");
      return;
    }
    const ys = this.samples.map((s) => s.y);
    const ymin = Math.min(...ys);
    const ymax = Math.max(...ys);
    const span = ymax - ymin;
    const denom = Math.max(this.samples.length - 1, 1);
    const points = this.samples
      .map((s, idx) => {
        const sx = (idx / denom) * 100;
        const sy = span === 0 ? 20 : 2 + ((ymax - s.y) / span) * 36;
        return `${sx},${sy}`;
      })
      .join(" ");
    this.curveLine.setAttribute("points", points);
  }
}
