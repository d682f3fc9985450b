// Thin client for the documented backend endpoints, with job polling.

import type {
  ExplainConfig,
  ExplanationDoc,
  FeaturesResponse,
  JobInfo,
  PredictionResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  const text = await response.text();
  try {
    const body = JSON.parse(text);
    const detail = body.detail ?? body;
    if (typeof detail === "string") return detail;
    if (detail && typeof detail === "object" && "message" in detail) {
      const field = "field" in detail ? `${detail.field}: ` : "";
      return `${field}${detail.message}`;
    }
  } catch {
    // fall through to the raw text
  }
  return text || `HTTP ${response.status}`;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new Error(await errorMessage(response));
    }
    return (await response.json()) as T;
  }

  uploadDataset(csv: Blob | string, labelColumn: string): Promise<{ id: string }> {
    const form = new FormData();
    const blob = typeof csv === "string" ? new Blob([csv], { type: "text/csv" }) : csv;
    form.append("file", blob, "dataset.csv");
    form.append("config", JSON.stringify({ label_column: labelColumn }));
    return this.request("/datasets", { method: "POST", body: form });
  }

  getFeatures(datasetId: string): Promise<FeaturesResponse> {
    return this.request(`/datasets/${datasetId}/features`);
  }

  startExplain(
    datasetId: string,
    features: string[] | null,
    config: ExplainConfig,
  ): Promise<{ job_id: string }> {
    const body: Record<string, unknown> = { ...config };
    if (features) body.features = features;
    return this.request(`/datasets/${datasetId}/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getJob(jobId: string): Promise<JobInfo> {
    return this.request(`/jobs/${jobId}`);
  }

  /** Poll until the job is done or failed; the failed job is returned, not thrown. */
  async pollJob(jobId: string, intervalMs = 500, timeoutMs = 300_000): Promise<JobInfo> {
    const startedAt = Date.now();
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.state === "done" || job.state === "failed") return job;
      if (Date.now() - startedAt > timeoutMs) {
        throw new Error(`job ${jobId} still ${job.state} after ${timeoutMs}ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  getExplanation(explanationId: string): Promise<ExplanationDoc> {
    return this.request(`/explanations/${explanationId}`);
  }

  predict(
    explanationId: string,
    instance: Record<string, string | number>,
  ): Promise<PredictionResponse> {
    return this.request(`/explanations/${explanationId}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instance }),
    });
  }
}
