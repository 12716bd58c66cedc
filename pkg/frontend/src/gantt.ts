/**
 * Gantt renderer for timeline documents.
 *
 * One row per machine; processing blocks and blocking intervals (a finished
 * job holding its machine) are separate, visually distinct elements. Each
 * buffer stage gets an occupancy strip under its upstream machine row.
 * Positions are percentages of the makespan, so the chart scales with its
 * container.
 */

import type { BlockingInterval, TimelineDocument } from "./api";

/** Raised when a document does not look like an evaluation timeline. */
export class GanttError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "GanttError";
  }
}

function isNumberMatrix(value: unknown, rows: number, cols: number): boolean {
  return (
    Array.isArray(value) &&
    value.length === rows &&
    value.every(
      (row) =>
        Array.isArray(row) &&
        row.length === cols &&
        row.every((x) => typeof x === "number"),
    )
  );
}

/** Structural validation; returns the document typed, or throws GanttError. */
export function validateTimeline(doc: unknown): TimelineDocument {
  if (typeof doc !== "object" || doc === null) {
    throw new GanttError("timeline document must be an object");
  }
  const d = doc as Record<string, unknown>;
  const machines = d.machines;
  const jobs = d.jobs;
  if (typeof machines !== "number" || machines < 1) {
    throw new GanttError("timeline is missing a machine count");
  }
  if (typeof jobs !== "number" || jobs < 0) {
    throw new GanttError("timeline is missing a job count");
  }
  if (typeof d.makespan !== "number") {
    throw new GanttError("timeline is missing its makespan");
  }
  if (!Array.isArray(d.sequence) || d.sequence.length !== jobs) {
    throw new GanttError("timeline sequence does not match the job count");
  }
  for (const key of ["start", "finish", "depart"] as const) {
    if (!isNumberMatrix(d[key], jobs, machines)) {
      throw new GanttError(`timeline '${key}' must be a ${jobs}x${machines} matrix`);
    }
  }
  if (!Array.isArray(d.blocking)) {
    throw new GanttError("timeline blocking intervals missing");
  }
  if (!Array.isArray(d.buffer_occupancy) || d.buffer_occupancy.length !== machines - 1) {
    throw new GanttError("timeline needs one occupancy track per buffer stage");
  }
  return doc as TimelineDocument;
}

function pct(value: number, scale: number): string {
  return `${(100 * value) / scale}%`;
}

function block(
  doc: Document,
  kind: "processing" | "blocking",
  job: number,
  machine: number,
  from: number,
  to: number,
  scale: number,
): HTMLElement {
  const el = doc.createElement("div");
  el.className = `gantt-block ${kind}`;
  el.style.left = pct(from, scale);
  el.style.width = pct(to - from, scale);
  el.dataset.job = String(job);
  el.dataset.machine = String(machine);
  el.dataset.kind = kind;
  el.dataset.from = String(from);
  el.dataset.to = String(to);
  const what = kind === "blocking" ? "blocked on" : "on";
  el.title = `job ${job} ${what} M${machine + 1}: ${from} → ${to}`;
  if (kind === "processing") {
    el.textContent = String(job);
  }
  return el;
}

/**
 * Render the timeline into `container` (cleared first). Throws GanttError on
 * malformed input without touching the container.
 */
export function renderGantt(container: HTMLElement, timeline: unknown): void {
  const tl = validateTimeline(timeline);
  const doc = container.ownerDocument;
  const scale = tl.makespan > 0 ? tl.makespan : 1;

  const chart = doc.createElement("div");
  chart.className = "gantt";
  chart.dataset.makespan = String(tl.makespan);

  const blockingByMachine = new Map<number, BlockingInterval[]>();
  for (const interval of tl.blocking) {
    const list = blockingByMachine.get(interval.machine) ?? [];
    list.push(interval);
    blockingByMachine.set(interval.machine, list);
  }

  for (let machine = 0; machine < tl.machines; machine++) {
    const row = doc.createElement("div");
    row.className = "gantt-row";
    row.dataset.machine = String(machine);

    const label = doc.createElement("span");
    label.className = "gantt-label";
    label.textContent = `M${machine + 1}`;
    row.appendChild(label);

    const track = doc.createElement("div");
    track.className = "gantt-track";
    for (const job of tl.sequence) {
      const from = tl.start[job][machine];
      const to = tl.finish[job][machine];
      if (to > from) {
        track.appendChild(block(doc, "processing", job, machine, from, to, scale));
      }
    }
    for (const interval of blockingByMachine.get(machine) ?? []) {
      track.appendChild(
        block(doc, "blocking", interval.job, machine, interval.from, interval.to, scale),
      );
    }
    row.appendChild(track);
    chart.appendChild(row);

    if (machine < tl.machines - 1) {
      chart.appendChild(bufferStrip(doc, machine, tl, scale));
    }
  }

  container.replaceChildren(chart);
}

function bufferStrip(
  doc: Document,
  stage: number,
  tl: TimelineDocument,
  scale: number,
): HTMLElement {
  const row = doc.createElement("div");
  row.className = "gantt-buffer-row";
  row.dataset.stage = String(stage);

  const label = doc.createElement("span");
  label.className = "gantt-label";
  const cap = tl.buffers[stage];
  label.textContent = `B${stage + 1} (${cap === null ? "∞" : cap})`;
  row.appendChild(label);

  const track = doc.createElement("div");
  track.className = "gantt-track buffer";
  const steps = tl.buffer_occupancy[stage];
  for (let i = 0; i < steps.length; i++) {
    const [time, count] = steps[i];
    if (count <= 0) continue;
    const until = i + 1 < steps.length ? steps[i + 1][0] : tl.makespan;
    const seg = doc.createElement("div");
    seg.className = "gantt-occupancy";
    seg.style.left = pct(time, scale);
    seg.style.width = pct(until - time, scale);
    seg.dataset.stage = String(stage);
    seg.dataset.count = String(count);
    seg.dataset.from = String(time);
    seg.dataset.to = String(until);
    seg.title = `${count} waiting after M${stage + 1}: ${time} → ${until}`;
    seg.textContent = String(count);
    track.appendChild(seg);
  }
  row.appendChild(track);
  return row;
}
