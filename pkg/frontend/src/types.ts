export type Triple = [number, number, number];

export interface Params {
  resolution: Triple;
  block_size_mm: Triple;
  angles_deg: Triple;
}

export interface SessionInfo {
  id: string;
  model_id: string;
  params: Params;
  has_result: boolean;
}

export interface ModelInfo {
  model_id: string;
  vertex_count: number;
  triangle_count: number;
  bbox: [Triple, Triple];
  watertight: boolean;
}

export interface GapReport {
  available: boolean;
  reason: string | null;
  occupied_blocks: number;
  solid_blocks: number;
  gap_blocks: number;
  gap_mm3: number;
}

export interface GenerateSummary {
  foam_blocks: number;
  occupied_blocks: number;
  f_score: number;
  gap_report: GapReport | null;
  timing_ms: number;
  links: Record<string, string>;
}

export interface OptimizeReport {
  angles_deg: Triple;
  f_score: number;
  evaluations: number;
  rounds_used: number;
}

export interface SliceLayer {
  index: number;
  labels: number[][];
  histogram: { occupied: number; foam_plus: number; foam_minus: number };
}

export interface SliceStackJson {
  nx: number;
  ny: number;
  nz: number;
  label_names: Record<string, string>;
  layers: SliceLayer[];
}

export const LABEL_OCCUPIED = 0;
export const LABEL_FOAM_PLUS = 1;
export const LABEL_FOAM_MINUS = 2;
