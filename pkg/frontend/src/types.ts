// Wire types of the backend HTTP API. The UI never computes rule semantics
// itself; every label shown on screen originates from one of these payloads.

export type PredicateJson = {
  feature: string;
  op: "==" | ">=" | "<";
  value: string | number;
};

export type RuleJson = {
  q: PredicateJson[]; // neighborhood descriptor (outer IF)
  s: PredicateJson[]; // decision logic condition (inner IF)
  c: string;          // class label
  cover: number;
  agreement: number;
};

export type MetricsJson = {
  disagreement: number;
  ruleoverlap: number;
  cover: number;
  size: number;
  maxwidth: number;
  numpreds: number;
  numdsets: number;
  featureoverlap: number;
  agreement_rate: number;
  cover_fraction: number;
  ruleoverlap_fraction: number;
};

export type ExplanationDoc = {
  rules: RuleJson[];
  default_label: string;
  metrics: MetricsJson;
  params: Record<string, unknown>;
  search?: Record<string, unknown>;
};

export type FeatureInfo = {
  name: string;
  kind: "categorical" | "numeric";
  values?: string[];
  thresholds?: number[];
};

export type FeaturesResponse = {
  features: FeatureInfo[];
  label_column: string;
  labels: string[];
};

export type JobInfo = {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  result_id: string | null;
  error: string | null;
};

export type PredictionResponse = {
  label: string;
  provenance: { kind: "rule" | "default" | "tie-break"; rule_index: number | null };
  fired_rules: number[];
};

export type ExplainConfig = {
  objective?: Record<string, unknown>;
  miner?: Record<string, unknown>;
  seed?: number;
};
