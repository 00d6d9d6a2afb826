// Payload shapes mirrored from the service's response models.

export interface ComponentInfo {
  id: number;
  kind: string;
  from_bus: number;
  to_bus: number;
}

export interface NetworkPayload {
  buses: number;
  branches: number;
  lines: number;
  transformers: number;
  base_mva: number;
  total_demand: number;
  maintainable: ComponentInfo[];
}

export interface StatsPayload {
  n: number;
  y0: number;
  baseline_risk: number;
  network_hash: string;
  model_hash: string;
  master_seed: number | null;
  truncated_samples: number;
}

export interface RiskPayload {
  risk: number;
  baseline_risk: number;
  reduction_ratio: number | null;
  epsilon_hat: number | null;
  interval: [number, number];
  required_n: number | null;
  n: number;
}

export interface RiskRequest {
  maintained: number[];
  y0: number;
  beta: number;
}

export interface SensitivityRowPayload {
  component: number;
  risk: number;
  reduction_ratio: number | null;
}

export interface SensitivityPayload {
  baseline_risk: number;
  rows: SensitivityRowPayload[];
  mean: SensitivityRowPayload;
  y0: number;
  n: number;
}

export interface CredibilityPayload {
  risk: number;
  variance: number;
  per_sample_variance: number;
  epsilon_hat: number | null;
  beta: number;
  interval: [number, number];
  required_n: number | null;
  n: number;
  absolute_half_width: number;
  nonzero_samples: number;
  normality_warning: boolean;
}

export interface OptimizeRequest {
  alg: "enum" | "one" | "two";
  m_max: number;
  m_k: number | null;
  y0: number;
  beta: number;
}

export interface OptimizePayload {
  strategy: number[];
  risk: number;
  baseline_risk: number;
  reduction_ratio: number | null;
  scenarios_evaluated: number;
  scenarios_total: number;
  algorithm: string;
  credibility: CredibilityPayload | null;
  converged: boolean;
}
