/** Wire types of the analysis server; field names match its JSON exactly. */

export interface SessionSnapshot {
  loaded: boolean;
  manifest: string | null;
  revision: number;
  realizations: number;
  properties: string[];
  voi: { cells: number[]; revision: number };
  graph_ready: boolean;
  graph_stale: boolean;
  members: number[] | null;
  decision_count: number;
}

export interface GridCell {
  id: number;
  corners: number[][];        // 8 corners, [x, y, z]
}

export interface GridGeometry {
  dims: number[];
  cells: GridCell[];
  bounds: { min: number[]; max: number[] };
}

export interface VarianceField {
  cells: number[];
  values: number[];
  realizations: number[];
  properties: string[];
}

export interface GraphNode {
  id: number;
  xyz: number[];
  cluster: number;
  score: number;
  is_center: boolean;
}

export interface ClusterGraph {
  nodes: GraphNode[];
  k: number;
  objective: number;
  stale?: boolean;
}

export interface EvaluateReport {
  candidate: number;
  outlier_score: number;
  mean_abs_change: number;
  max_abs_change: number;
  changed_fraction: number;
  cells: number[];
  delta: number[];
}

export interface JobStatus {
  state: 'idle' | 'running' | 'done' | 'error' | 'discarded';
  detail: string | null;
}

export interface ClusterParams {
  k: number;
  seed?: number;
  bins?: number;
  sigma?: number | null;
  property_name?: string | null;
}

export interface LensParams {
  apex: number[];
  orientation: number[];      // unit quaternion [w, x, y, z]
  near: number;
  far: number;
  half_angle_h: number;
  half_angle_v: number;
}

export type CutStatus = 'retained' | 'culled' | 'clipped';

export interface CutFace {
  vertices: number[][];
  cap: boolean;
  normal: number[] | null;
}

export interface CutResult {
  cells: Record<string, { status: CutStatus; faces?: CutFace[] }>;
}

export interface SessionDocument {
  version: number;
  manifest: string;
  properties: string[];
  voi: { cells: number[]; revision: number };
  clustering: Record<string, unknown> | null;
  decisions: Record<string, unknown>[];
  members: number[] | null;
}
