// Browser bootstrap: wires the DOM to the API client and session state.
// All rule evaluation happens server-side; this file only moves JSON around.

import { ApiClient } from "./api.js";
import { Highlight, renderError, renderExplanation } from "./render.js";
import {
  ExplorationSession,
  ProbeValidationError,
  activateHistoryEntry,
  activeEntry,
  exploreCycle,
  missingProbeFields,
  newSession,
  probe,
  validateFeatureSelection,
} from "./session.js";
import type { FeatureInfo } from "./types.js";

const api = new ApiClient("");
let session: ExplorationSession | null = null;
let features: FeatureInfo[] = [];
let highlight: Highlight = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string) {
  el("status").textContent = text;
}

function selectedFeatures(): string[] {
  return Array.from(
    document.querySelectorAll<HTMLInputElement>("#feature-list input:checked"),
  ).map((box) => box.value);
}

function renderActive() {
  const panel = el("explanation");
  const entry = session && activeEntry(session);
  if (!entry || !entry.doc) {
    panel.innerHTML = renderError("no explanation yet: pick features and explore");
    return;
  }
  panel.innerHTML = renderExplanation(entry.doc, highlight);
}

function renderHistory() {
  const list = el("history");
  list.innerHTML = "";
  if (!session) return;
  session.history.forEach((entry, index) => {
    const item = document.createElement("li");
    const tag = entry.status === "done" ? "" : ` [failed: ${entry.error}]`;
    const button = document.createElement("button");
    button.textContent = `#${index + 1} features={${entry.features.join(", ")}}${tag}`;
    button.disabled = entry.status !== "done";
    button.addEventListener("click", () => {
      session = activateHistoryEntry(session!, index);
      highlight = null;
      renderActive();
    });
    item.appendChild(button);
    list.appendChild(item);
  });
}

function renderProbeForm() {
  const form = el("probe-fields");
  form.innerHTML = "";
  for (const feature of features) {
    const label = document.createElement("label");
    label.textContent = feature.name;
    let input: HTMLElement;
    if (feature.kind === "categorical" && feature.values) {
      const select = document.createElement("select");
      select.name = feature.name;
      select.appendChild(new Option("(unset)", ""));
      for (const value of feature.values) select.appendChild(new Option(value, value));
      input = select;
    } else {
      const box = document.createElement("input");
      box.name = feature.name;
      box.placeholder = "number";
      input = box;
    }
    label.appendChild(input);
    form.appendChild(label);
  }
}

async function onLoadDataset() {
  const datasetId = el<HTMLInputElement>("dataset-id").value.trim();
  if (!datasetId) {
    setStatus("enter a dataset id (upload one with the CLI or POST /datasets)");
    return;
  }
  try {
    const response = await api.getFeatures(datasetId);
    features = response.features;
    session = newSession(datasetId);
    highlight = null;
    const list = el("feature-list");
    list.innerHTML = "";
    for (const feature of features) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = feature.name;
      label.appendChild(box);
      label.appendChild(document.createTextNode(feature.name));
      list.appendChild(label);
    }
    renderProbeForm();
    renderHistory();
    renderActive();
    setStatus(`dataset ${datasetId}: ${features.length} features, labels {${response.labels.join(", ")}}`);
  } catch (err) {
    setStatus(`cannot load dataset: ${err instanceof Error ? err.message : err}`);
  }
}

async function onExplore() {
  if (!session) {
    setStatus("load a dataset first");
    return;
  }
  const chosen = selectedFeatures();
  const invalid = validateFeatureSelection(chosen);
  if (invalid) {
    setStatus(invalid);
    return;
  }
  setStatus("optimizing...");
  session = await exploreCycle(api, session, chosen, {
    objective: { lambda: [1, 1, 1, 1, 5], eps: [10, 5, 4], normalize: false },
    miner: { min_support: 0.05, max_width: 2 },
    seed: 0,
  });
  highlight = null;
  renderHistory();
  renderActive();
  const last = session.history[session.history.length - 1];
  setStatus(last?.status === "done" ? "explanation ready" : `job failed: ${last?.error}`);
}

async function onProbe() {
  if (!session) return;
  const draft: Record<string, string> = {};
  document
    .querySelectorAll<HTMLInputElement | HTMLSelectElement>(
      "#probe-fields input, #probe-fields select",
    )
    .forEach((field) => {
      if (field.value !== "") draft[field.name] = field.value;
    });
  const missing = missingProbeFields(features, draft);
  if (missing.length > 0) {
    setStatus(`fill in: ${missing.join(", ")}`);
    return;
  }
  try {
    const result = await probe(api, session, features, draft);
    highlight = result.highlight;
    renderActive();
    const where =
      result.prediction.provenance.kind === "default"
        ? "the Default block"
        : `rule ${result.prediction.provenance.rule_index}`;
    setStatus(`prediction: ${result.prediction.label} via ${where}`);
  } catch (err) {
    if (err instanceof ProbeValidationError) {
      setStatus(`fill in: ${err.missing.join(", ")}`);
    } else {
      setStatus(`probe failed: ${err instanceof Error ? err.message : err}`);
    }
  }
}

export function start() {
  el("load-dataset").addEventListener("click", () => void onLoadDataset());
  el("explore").addEventListener("click", () => void onExplore());
  el("probe").addEventListener("click", () => void onProbe());
  renderActive();
}

if (typeof document !== "undefined" && document.getElementById("explanation")) {
  start();
}
