// Typed client for the local simulation service.  Every number the UI shows
// comes out of these responses.

export interface DiagnosticOut {
  severity: string;
  message: string;
  line?: number | null;
  col?: number | null;
  x?: number | null;
  y?: number | null;
}

export interface PlacementOut {
  kind: string;
  x: number;
  y: number;
  orientation: number;
  label?: string | null;
  params: Record<string, unknown>;
}

export interface ValidateResponse {
  ok: boolean;
  diagnostics: DiagnosticOut[];
  placements: PlacementOut[];
  path_length_report: Array<{ source: string; detector: string; latency_steps: number }>;
  canonical_text?: string | null;
}

export interface RunStatus {
  run_id: string;
  status: "queued" | "running" | "done" | "error";
  progress: number;
  num_steps: number;
  error?: string | null;
  meter_labels: string[];
  detector_labels: string[];
  detector_totals?: Record<string, number> | null;
  coincidence_table?: Record<string, number> | null;
}

export interface FrameCell {
  x: number;
  y: number;
  h_re: number;
  h_im: number;
  v_re: number;
  v_im: number;
  power_W: number;
  bloch?: [number, number, number] | null;
}

export interface FrameEdge {
  edge_id: number;
  src: string;
  dst?: string | null;
  cells: FrameCell[];
}

export interface FrameResponse {
  run_id: string;
  step: number;
  edges: FrameEdge[];
}

export interface StepRecord {
  step: number;
  time_s: number;
  powers: Record<string, number>;
  clicks: Record<string, number>;
}

export interface RecordsPage {
  run_id: string;
  start: number;
  stop: number;
  steps: StepRecord[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      const body = await response.text();
      throw new Error(`${response.status} ${path}: ${body}`);
    }
    return (await response.json()) as T;
  }

  validate(dslText: string): Promise<ValidateResponse> {
    return this.request("/api/validate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dsl_text: dslText }),
    });
  }

  createRun(dslText: string, seed = 0, numSteps?: number): Promise<{ run_id: string }> {
    return this.request("/api/runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dsl_text: dslText, seed, num_steps: numSteps ?? null }),
    });
  }

  runStatus(runId: string): Promise<RunStatus> {
    return this.request(`/api/runs/${runId}`);
  }

  frame(runId: string, step: number): Promise<FrameResponse> {
    return this.request(`/api/runs/${runId}/frames/${step}`);
  }

  records(runId: string, from: number, to: number): Promise<RecordsPage> {
    return this.request(`/api/runs/${runId}/records?from=${from}&to=${to}`);
  }

  analyze(runIds: string[], pipeline: string, params: Record<string, unknown> = {}) {
    return this.request<{ pipeline: string; rows: Array<Record<string, unknown>> }>(
      "/api/analyze",
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ run_ids: runIds, pipeline, params }),
      },
    );
  }
}
