/**
 * Console session state: the selected instance, the operator's working
 * sequence, and the pinned comparison set.
 *
 * The session enforces two invariants: the working sequence is always a
 * permutation of the selected instance's jobs, and at most three sequences
 * are pinned side by side.
 */

import type { InstanceDocument } from "./api";

export const MAX_COMPARISONS = 3;

export interface ComparisonEntry {
  name: string;
  sequence: number[];
  makespan: number;
}

export interface RatioBadge {
  label: string;
  value: number;
}

/** True when `sequence` visits each of 0..n-1 exactly once. */
export function isPermutation(sequence: number[], n: number): boolean {
  if (sequence.length !== n) return false;
  const seen = new Array<boolean>(n).fill(false);
  for (const job of sequence) {
    if (!Number.isInteger(job) || job < 0 || job >= n || seen[job]) return false;
    seen[job] = true;
  }
  return true;
}

export class ConsoleSession {
  instance: InstanceDocument | null = null;
  /** Buffer override sent with evaluations; null = use the instance's own. */
  buffers: (number | null)[] | null = null;
  workingSequence: number[] = [];
  /** Makespan of the working sequence, as last reported by the service. */
  workingMakespan: number | null = null;
  comparisons: ComparisonEntry[] = [];
  watchedRuns: string[] = [];

  /** Select an instance and reset the working sequence to identity order. */
  selectInstance(instance: InstanceDocument): void {
    this.instance = instance;
    this.buffers = null;
    this.workingSequence = Array.from({ length: instance.n }, (_, j) => j);
    this.workingMakespan = null;
    this.comparisons = [];
  }

  setWorkingSequence(sequence: number[], makespan: number | null = null): void {
    if (!this.instance) {
      throw new Error("no instance selected");
    }
    if (!isPermutation(sequence, this.instance.n)) {
      throw new Error(
        `sequence must be a permutation of 0..${this.instance.n - 1}`,
      );
    }
    this.workingSequence = [...sequence];
    this.workingMakespan = makespan;
  }

  watchRun(runId: string): void {
    if (!this.watchedRuns.includes(runId)) {
      this.watchedRuns.push(runId);
    }
  }

  unwatchRun(runId: string): void {
    this.watchedRuns = this.watchedRuns.filter((id) => id !== runId);
  }

  /**
   * Pin a named sequence for side-by-side comparison. Returns false (and
   * leaves the set unchanged) once three entries are pinned.
   */
  addComparison(entry: ComparisonEntry): boolean {
    if (this.comparisons.length >= MAX_COMPARISONS) return false;
    if (!this.instance || !isPermutation(entry.sequence, this.instance.n)) {
      throw new Error("comparison entries must hold a valid permutation");
    }
    this.comparisons.push({ ...entry, sequence: [...entry.sequence] });
    return true;
  }

  removeComparison(name: string): void {
    this.comparisons = this.comparisons.filter((c) => c.name !== name);
  }

  /**
   * Pairwise makespan ratios across the pinned entries, one badge per
   * unordered pair in pin order: with three entries named A, B, C the
   * badges read A/B, A/C, B/C.
   */
  ratioBadges(): RatioBadge[] {
    const badges: RatioBadge[] = [];
    for (let i = 0; i < this.comparisons.length; i++) {
      for (let j = i + 1; j < this.comparisons.length; j++) {
        const a = this.comparisons[i];
        const b = this.comparisons[j];
        badges.push({
          label: `${a.name}/${b.name}`,
          value: a.makespan / b.makespan,
        });
      }
    }
    return badges;
  }
}
