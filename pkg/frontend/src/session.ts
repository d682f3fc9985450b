// Exploration session state: an append-only history of customized
// explanations plus probe (what-if) support. One explain job runs at a time;
// earlier explanations stay one click away for comparison.

import type { ApiClient } from "./api.js";
import type {
  ExplainConfig,
  ExplanationDoc,
  FeatureInfo,
  PredictionResponse,
} from "./types.js";
import { Highlight, highlightFor } from "./render.js";

export type HistoryEntry = {
  features: string[];
  config: ExplainConfig;
  status: "done" | "failed";
  explanationId: string | null;
  doc: ExplanationDoc | null;
  error: string | null;
  timestamp: number;
};

export type ExplorationSession = {
  datasetId: string;
  history: HistoryEntry[];
  activeIndex: number | null;
  inFlight: boolean;
};

export function newSession(datasetId: string): ExplorationSession {
  return { datasetId, history: [], activeIndex: null, inFlight: false };
}

export function activeEntry(session: ExplorationSession): HistoryEntry | null {
  if (session.activeIndex === null) return null;
  return session.history[session.activeIndex] ?? null;
}

export function validateFeatureSelection(features: string[]): string | null {
  if (features.length === 0) {
    return "pick at least one feature to scope the neighborhoods";
  }
  return null;
}

/**
 * Request a customized explanation restricted to `features`, poll the job,
 * and append the outcome to the session history (failed jobs included, with
 * the server's message). The new entry becomes active only on success.
 */
export async function exploreCycle(
  api: ApiClient,
  session: ExplorationSession,
  features: string[],
  config: ExplainConfig,
  pollIntervalMs = 500,
): Promise<ExplorationSession> {
  const invalid = validateFeatureSelection(features);
  if (invalid) throw new Error(invalid);
  if (session.inFlight) throw new Error("an explanation job is already running");

  const running = { ...session, inFlight: true };
  let entry: HistoryEntry;
  try {
    const { job_id } = await api.startExplain(session.datasetId, features, config);
    const job = await api.pollJob(job_id, pollIntervalMs);
    if (job.state === "failed" || !job.result_id) {
      entry = {
        features,
        config,
        status: "failed",
        explanationId: null,
        doc: null,
        error: job.error ?? "job failed",
        timestamp: Date.now(),
      };
    } else {
      const doc = await api.getExplanation(job.result_id);
      entry = {
        features,
        config,
        status: "done",
        explanationId: job.result_id,
        doc,
        error: null,
        timestamp: Date.now(),
      };
    }
  } catch (err) {
    entry = {
      features,
      config,
      status: "failed",
      explanationId: null,
      doc: null,
      error: err instanceof Error ? err.message : String(err),
      timestamp: Date.now(),
    };
  }
  const history = [...running.history, entry];
  return {
    ...running,
    history,
    inFlight: false,
    activeIndex: entry.status === "done" ? history.length - 1 : running.activeIndex,
  };
}

export function activateHistoryEntry(
  session: ExplorationSession,
  index: number,
): ExplorationSession {
  const entry = session.history[index];
  if (!entry || entry.status !== "done") return session;
  return { ...session, activeIndex: index };
}

/** Field-level validation of a probe draft; returns the incomplete fields. */
export function missingProbeFields(
  features: FeatureInfo[],
  draft: Record<string, string>,
): string[] {
  return features
    .filter((f) => !(f.name in draft) || draft[f.name] === "")
    .map((f) => f.name);
}

export type ProbeResult = {
  prediction: PredictionResponse;
  highlight: Highlight;
};

/**
 * Ask the backend to label the draft instance against the active explanation
 * and say which rendered block to highlight (a rule or the Default block).
 */
export async function probe(
  api: ApiClient,
  session: ExplorationSession,
  features: FeatureInfo[],
  draft: Record<string, string>,
): Promise<ProbeResult> {
  const entry = activeEntry(session);
  if (!entry || !entry.explanationId) {
    throw new Error("no active explanation to probe against");
  }
  const missing = missingProbeFields(features, draft);
  if (missing.length > 0) {
    throw new ProbeValidationError(missing);
  }
  const prediction = await api.predict(entry.explanationId, draft);
  return { prediction, highlight: highlightFor(prediction) };
}

export class ProbeValidationError extends Error {
  constructor(public missing: string[]) {
    super(`missing values for: ${missing.join(", ")}`);
  }
}
