/**
 * What-if sequence editor.
 *
 * The operator nudges the working sequence (swap two positions, or move a
 * job to a new position) and the console asks the service to evaluate the
 * edited sequence. The console never computes makespans itself: every number
 * shown here came back from an evaluation call. Invalid edits are rejected
 * locally with an inline message and no request is sent.
 */

import type { TimelineDocument } from "./api";

export type SequenceEdit =
  | { kind: "swap"; i: number; j: number }
  | { kind: "move"; from: number; to: number };

/** Raised by applyEdit when an edit does not fit the sequence. */
export class EditError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EditError";
  }
}

function checkPosition(value: number, n: number, label: string): void {
  if (!Number.isInteger(value) || value < 0 || value >= n) {
    throw new EditError(`${label} must be a position between 0 and ${n - 1}`);
  }
}

/** Pure edit application; returns a new sequence, never mutates the input. */
export function applyEdit(sequence: readonly number[], edit: SequenceEdit): number[] {
  const next = [...sequence];
  if (edit.kind === "swap") {
    checkPosition(edit.i, next.length, "swap position i");
    checkPosition(edit.j, next.length, "swap position j");
    [next[edit.i], next[edit.j]] = [next[edit.j], next[edit.i]];
    return next;
  }
  checkPosition(edit.from, next.length, "move source");
  checkPosition(edit.to, next.length, "move target");
  const [job] = next.splice(edit.from, 1);
  next.splice(edit.to, 0, job);
  return next;
}

/** The slice of the API client the editor needs (stubbed in tests). */
export interface Evaluator {
  evaluate(
    instanceId: string,
    sequence: number[],
    buffers?: (number | null)[] | null,
  ): Promise<TimelineDocument>;
}

export interface EditorContext {
  instanceId: string;
  sequence: number[];
  buffers: (number | null)[] | null;
  makespan: number | null;
}

export interface WhatIfEditorOptions {
  /** Called after a successful evaluation with the fresh timeline. */
  onEvaluated?: (timeline: TimelineDocument, sequence: number[]) => void;
}

export class WhatIfEditor {
  private readonly evaluator: Evaluator;
  private readonly options: WhatIfEditorOptions;

  private instanceId: string | null = null;
  private buffers: (number | null)[] | null = null;
  sequence: number[] = [];
  makespan: number | null = null;

  private readonly kindSelect: HTMLSelectElement;
  private readonly firstInput: HTMLInputElement;
  private readonly secondInput: HTMLInputElement;
  private readonly applyButton: HTMLButtonElement;
  private readonly sequenceView: HTMLElement;
  private readonly makespanView: HTMLElement;
  private readonly statusView: HTMLElement;

  constructor(root: HTMLElement, evaluator: Evaluator, options: WhatIfEditorOptions = {}) {
    this.evaluator = evaluator;
    this.options = options;
    const doc = root.ownerDocument;

    this.sequenceView = doc.createElement("div");
    this.sequenceView.className = "editor-sequence";
    this.makespanView = doc.createElement("div");
    this.makespanView.className = "editor-makespan";
    this.statusView = doc.createElement("div");
    this.statusView.className = "editor-status";

    const form = doc.createElement("div");
    form.className = "editor-form";
    this.kindSelect = doc.createElement("select");
    for (const kind of ["swap", "move"]) {
      const option = doc.createElement("option");
      option.value = kind;
      option.textContent = kind;
      this.kindSelect.appendChild(option);
    }
    this.firstInput = doc.createElement("input");
    this.firstInput.type = "number";
    this.firstInput.placeholder = "i / from";
    this.secondInput = doc.createElement("input");
    this.secondInput.type = "number";
    this.secondInput.placeholder = "j / to";
    this.applyButton = doc.createElement("button");
    this.applyButton.type = "button";
    this.applyButton.textContent = "evaluate edit";
    this.applyButton.addEventListener("click", () => {
      void this.submit(this.readEdit());
    });
    form.append(this.kindSelect, this.firstInput, this.secondInput, this.applyButton);

    root.replaceChildren(this.sequenceView, this.makespanView, form, this.statusView);
    this.renderState();
  }

  /** Point the editor at an instance and its current working sequence. */
  setContext(context: EditorContext): void {
    this.instanceId = context.instanceId;
    this.buffers = context.buffers;
    this.sequence = [...context.sequence];
    this.makespan = context.makespan;
    this.statusView.textContent = "";
    this.statusView.classList.remove("error");
    this.renderState();
  }

  private readEdit(): SequenceEdit {
    const a = Number(this.firstInput.value);
    const b = Number(this.secondInput.value);
    return this.kindSelect.value === "move"
      ? { kind: "move", from: a, to: b }
      : { kind: "swap", i: a, j: b };
  }

  /**
   * Validate the edit, then evaluate the edited sequence via the service.
   * On a local validation failure no request is made; on a service failure
   * the working sequence is left untouched.
   */
  async submit(edit: SequenceEdit): Promise<void> {
    if (this.instanceId === null) {
      this.showError("select an instance first");
      return;
    }
    let candidate: number[];
    try {
      candidate = applyEdit(this.sequence, edit);
    } catch (err) {
      this.showError(err instanceof Error ? err.message : String(err));
      return;
    }

    let timeline: TimelineDocument;
    try {
      timeline = await this.evaluator.evaluate(this.instanceId, candidate, this.buffers);
    } catch (err) {
      const detail = err instanceof Error ? err.message : String(err);
      this.showError(`evaluation failed: ${detail}`);
      return;
    }

    const previous = this.makespan;
    this.sequence = candidate;
    this.makespan = timeline.makespan;
    this.statusView.textContent =
      previous === null
        ? `makespan ${timeline.makespan}`
        : `makespan ${previous} → ${timeline.makespan} (${formatDelta(timeline.makespan - previous)})`;
    this.statusView.classList.remove("error");
    this.renderState();
    this.options.onEvaluated?.(timeline, [...candidate]);
  }

  private showError(message: string): void {
    this.statusView.textContent = message;
    this.statusView.classList.add("error");
  }

  private renderState(): void {
    this.sequenceView.textContent = this.sequence.length
      ? `sequence: ${this.sequence.join(" ")}`
      : "no sequence loaded";
    this.makespanView.textContent =
      this.makespan === null ? "" : `makespan: ${this.makespan}`;
  }
}

function formatDelta(delta: number): string {
  return delta >= 0 ? `Δ+${delta}` : `Δ${delta}`;
}
