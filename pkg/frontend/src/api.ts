/**
 * Typed client for the scheduling service HTTP API.
 *
 * Every number the console displays comes out of one of these calls; the
 * client never derives schedule values locally.
 */

export interface InstanceDocument {
  id: string;
  m: number;
  n: number;
  p: number[][];
  buffers: (number | null)[];
  seed: number | null;
}

export interface InstanceSummary {
  id: string;
  n: number;
  m: number;
  buffers: (number | null)[];
}

export interface BlockingInterval {
  job: number;
  machine: number;
  from: number;
  to: number;
}

/** Occupancy step function per stage: [time, jobs-in-buffer] pairs. */
export type OccupancySteps = [number, number][];

export interface TimelineDocument {
  sequence: number[];
  machines: number;
  jobs: number;
  buffers: (number | null)[];
  makespan: number;
  start: number[][]; // [job][machine]
  finish: number[][];
  depart: number[][];
  blocking: BlockingInterval[];
  buffer_occupancy: OccupancySteps[];
}

export type RunStatus = "queued" | "running" | "done" | "cancelled" | "failed";
export type Algorithm = "gbml" | "sa" | "johnson";

export interface HistoryRow {
  generation: number;
  best: number;
  mean: number;
  best_fitness: number;
  best_so_far: number;
  fallback: boolean;
}

export interface RunResult {
  algorithm: Algorithm;
  seed: number | null;
  objective: number;
  sequence?: number[];
  sequences?: number[][];
  history?: HistoryRow[];
  trace?: [number, number][];
  [extra: string]: unknown;
}

export interface RunRecord {
  id: string;
  instance_id: string;
  algorithm: Algorithm;
  config: Record<string, unknown>;
  seed: number | null;
  buffers: (number | null)[];
  status: RunStatus;
  progress: { counter: number; best: number | null };
  result: RunResult | null;
  error: string | null;
  created_at: number;
  started_at: number | null;
  finished_at: number | null;
}

export interface RunRequest {
  instance_id: string;
  algorithm: Algorithm;
  buffers?: (number | null)[] | null;
  config?: Record<string, unknown> | null;
  seed?: number | null;
}

export interface GenerationRequest {
  n: number;
  m?: number;
  lo?: number;
  hi?: number;
  seed?: number | null;
  buffers?: (number | null)[] | null;
}

export interface ServiceErrorBody {
  code: string;
  message: string;
  detail: unknown;
}

/** Error raised for any non-2xx service response. */
export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ServiceErrorBody) {
    super(body.message);
    this.name = "ServiceError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

async function parseError(resp: Response): Promise<ServiceError> {
  let body: ServiceErrorBody = {
    code: "unknown_error",
    message: `service responded ${resp.status}`,
    detail: null,
  };
  try {
    body = (await resp.json()) as ServiceErrorBody;
  } catch {
    // non-JSON error body; keep the status fallback
  }
  return new ServiceError(resp.status, body);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  async health(): Promise<{ status: string; workers: number }> {
    return this.request("/health");
  }

  /** Upload a full instance document or ask the service to generate one. */
  async createInstance(
    spec: InstanceDocument | GenerationRequest,
  ): Promise<string> {
    const body = await this.request<{ id: string }>("/instances", {
      method: "POST",
      body: JSON.stringify(spec),
    });
    return body.id;
  }

  async getInstance(id: string): Promise<InstanceDocument> {
    return this.request(`/instances/${id}`);
  }

  async listInstances(): Promise<InstanceSummary[]> {
    const body = await this.request<{ instances: InstanceSummary[] }>("/instances");
    return body.instances;
  }

  async evaluate(
    instanceId: string,
    sequence: number[],
    buffers?: (number | null)[] | null,
  ): Promise<TimelineDocument> {
    return this.request("/evaluate", {
      method: "POST",
      body: JSON.stringify({
        instance_id: instanceId,
        sequence,
        buffers: buffers ?? null,
      }),
    });
  }

  async startRun(req: RunRequest): Promise<string> {
    const body = await this.request<{ run_id: string }>("/runs", {
      method: "POST",
      body: JSON.stringify(req),
    });
    return body.run_id;
  }

  async getRun(runId: string): Promise<RunRecord> {
    return this.request(`/runs/${runId}`);
  }

  async listRuns(): Promise<RunRecord[]> {
    const body = await this.request<{ runs: RunRecord[] }>("/runs");
    return body.runs;
  }

  async cancelRun(runId: string): Promise<RunRecord> {
    return this.request(`/runs/${runId}`, { method: "DELETE" });
  }
}
