import { describe, expect, it } from "vitest";

import type { TimelineDocument } from "../src/api";
import { EditError, WhatIfEditor, applyEdit } from "../src/editor";

describe("applyEdit", () => {
  it("swaps two positions and leaves the input untouched", () => {
    const seq = [3, 1, 2, 0];
    expect(applyEdit(seq, { kind: "swap", i: 0, j: 3 })).toEqual([0, 1, 2, 3]);
    expect(seq).toEqual([3, 1, 2, 0]);
  });

  it("a swap of a position with itself is the identity", () => {
    expect(applyEdit([2, 0, 1], { kind: "swap", i: 1, j: 1 })).toEqual([2, 0, 1]);
  });

  it("moves a job forward and backward", () => {
    expect(applyEdit([0, 1, 2, 3], { kind: "move", from: 0, to: 2 })).toEqual([1, 2, 0, 3]);
    expect(applyEdit([0, 1, 2, 3], { kind: "move", from: 3, to: 0 })).toEqual([3, 0, 1, 2]);
  });

  it("rejects out-of-range and non-integer positions", () => {
    expect(() => applyEdit([0, 1], { kind: "swap", i: 0, j: 2 })).toThrow(EditError);
    expect(() => applyEdit([0, 1], { kind: "swap", i: -1, j: 0 })).toThrow(EditError);
    expect(() => applyEdit([0, 1], { kind: "move", from: 0.5, to: 1 })).toThrow(EditError);
    expect(() => applyEdit([], { kind: "swap", i: 0, j: 0 })).toThrow(EditError);
  });
});

/** Evaluator stub: counts calls and replays canned makespans. */
class StubEvaluator {
  calls: { instanceId: string; sequence: number[]; buffers: (number | null)[] | null }[] = [];
  fail = false;
  makespanBySequence = new Map<string, number>();

  async evaluate(
    instanceId: string,
    sequence: number[],
    buffers?: (number | null)[] | null,
  ): Promise<TimelineDocument> {
    this.calls.push({ instanceId, sequence: [...sequence], buffers: buffers ?? null });
    if (this.fail) {
      throw new Error("boom");
    }
    const makespan = this.makespanBySequence.get(sequence.join(",")) ?? 99;
    return {
      sequence: [...sequence],
      machines: 2,
      jobs: sequence.length,
      buffers: [null],
      makespan,
      start: sequence.map(() => [0, 0]),
      finish: sequence.map(() => [0, 0]),
      depart: sequence.map(() => [0, 0]),
      blocking: [],
      buffer_occupancy: [[]],
    };
  }
}

function freshEditor(stub: StubEvaluator): WhatIfEditor {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const editor = new WhatIfEditor(root, stub);
  editor.setContext({
    instanceId: "inst-1",
    sequence: [0, 1],
    buffers: null,
    makespan: 7,
  });
  return editor;
}

/** The single editor's status line (each test clears the body first). */
function status(_editor: WhatIfEditor): HTMLElement {
  const el = document.querySelector(".editor-status");
  if (!(el instanceof HTMLElement)) throw new Error("status element missing");
  return el;
}

describe("WhatIfEditor", () => {
  it("evaluates a valid edit and shows the makespan delta", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    stub.makespanBySequence.set("1,0", 5);
    const editor = freshEditor(stub);

    await editor.submit({ kind: "swap", i: 0, j: 1 });

    expect(stub.calls).toHaveLength(1);
    expect(stub.calls[0]).toEqual({ instanceId: "inst-1", sequence: [1, 0], buffers: null });
    expect(editor.sequence).toEqual([1, 0]);
    expect(editor.makespan).toBe(5);
    expect(status(editor).textContent).toBe("makespan 7 → 5 (Δ-2)");
    expect(status(editor).classList.contains("error")).toBe(false);
  });

  it("shows Δ+ for a worsening edit", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    stub.makespanBySequence.set("1,0", 11);
    const editor = freshEditor(stub);
    await editor.submit({ kind: "swap", i: 0, j: 1 });
    expect(status(editor).textContent).toBe("makespan 7 → 11 (Δ+4)");
  });

  it("rejects an invalid edit locally: inline error, no request sent", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    const editor = freshEditor(stub);

    await editor.submit({ kind: "swap", i: 0, j: 5 });

    expect(stub.calls).toHaveLength(0);
    expect(editor.sequence).toEqual([0, 1]);
    expect(editor.makespan).toBe(7);
    expect(status(editor).classList.contains("error")).toBe(true);
    expect(status(editor).textContent).toMatch(/between 0 and 1/);
  });

  it("still asks the service to evaluate an identity swap", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    stub.makespanBySequence.set("0,1", 7);
    const editor = freshEditor(stub);
    await editor.submit({ kind: "swap", i: 1, j: 1 });
    expect(stub.calls).toHaveLength(1);
    expect(status(editor).textContent).toBe("makespan 7 → 7 (Δ+0)");
  });

  it("keeps the working sequence when the service call fails", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    stub.fail = true;
    const editor = freshEditor(stub);

    await editor.submit({ kind: "swap", i: 0, j: 1 });

    expect(stub.calls).toHaveLength(1);
    expect(editor.sequence).toEqual([0, 1]);
    expect(editor.makespan).toBe(7);
    expect(status(editor).classList.contains("error")).toBe(true);
    expect(status(editor).textContent).toMatch(/evaluation failed: boom/);
  });

  it("passes the session buffer override through to every evaluation", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    const root = document.createElement("div");
    document.body.appendChild(root);
    const editor = new WhatIfEditor(root, stub);
    editor.setContext({ instanceId: "i", sequence: [0, 1, 2], buffers: [2], makespan: null });
    await editor.submit({ kind: "move", from: 2, to: 0 });
    expect(stub.calls[0].buffers).toEqual([2]);
    expect(stub.calls[0].sequence).toEqual([2, 0, 1]);
    // first evaluation with no prior makespan shows the value alone
    expect(status(editor).textContent).toBe("makespan 99");
  });

  it("reports an error when no instance is selected", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    const root = document.createElement("div");
    document.body.appendChild(root);
    const editor = new WhatIfEditor(root, stub);
    await editor.submit({ kind: "swap", i: 0, j: 1 });
    expect(stub.calls).toHaveLength(0);
    expect(status(editor).textContent).toMatch(/select an instance/);
  });

  it("notifies onEvaluated with the fresh timeline and sequence", async () => {
    document.body.innerHTML = "";
    const stub = new StubEvaluator();
    stub.makespanBySequence.set("1,0", 5);
    const seen: { makespan: number; sequence: number[] }[] = [];
    const root = document.createElement("div");
    document.body.appendChild(root);
    const editor = new WhatIfEditor(root, stub, {
      onEvaluated: (tl, seq) => seen.push({ makespan: tl.makespan, sequence: seq }),
    });
    editor.setContext({ instanceId: "i", sequence: [0, 1], buffers: null, makespan: 7 });
    await editor.submit({ kind: "swap", i: 0, j: 1 });
    expect(seen).toEqual([{ makespan: 5, sequence: [1, 0] }]);
  });
});
