// Wire schema of the drawing service: JSON messages over one websocket,
// every request acked in order, plus two REST endpoints for mesh data.

export type Vec3 = [number, number, number];
// w, x, y, z; identity is [1, 0, 0, 0]
export type Quat = [number, number, number, number];

export interface StrokeSample {
  c: Vec3;
  cq: Quat;
  h: Vec3;
  hq: Quat;
  t_ms: number;
}

export interface InkPoint {
  face: number;
  bary: Vec3;
  position: Vec3;
}

export interface MeshSummary {
  id: string;
  n_vertices: number;
  n_faces: number;
  bbox: [Vec3, Vec3];
}

export interface MeshDoc extends MeshSummary {
  vertices: Vec3[];
  faces: Vec3[];
  normals: Vec3[];
}

export type ErrorCode = "not-found" | "bad-request" | "rejected";

export type Ack =
  | { ok: true; op: "open"; session: string; mesh: string; method: string }
  | { ok: true; op: "point"; point: InkPoint | null; skipped: boolean }
  | { ok: true; op: "method"; method: string }
  | {
      ok: true;
      op: "end";
      n_points: number;
      n_skipped: number;
      report: Record<string, number | string | null> | null;
      reason?: string;
    }
  | { ok: true; op: "undo"; removed: number }
  | { ok: true; op: "close" }
  | { ok: true; op: "list"; meshes: MeshSummary[] }
  | { ok: false; op: string; code: ErrorCode; error: string };

// session file understood by the replay harness
export interface SessionDoc {
  mesh: string;
  method?: string;
  meta?: Record<string, unknown>;
  samples: StrokeSample[];
}

export const METHODS = [
  "mimicry",
  "spraycan",
  "snap",
  "scp",
  "occlude",
] as const;

// red for mimicry, blue for spraycan; the rest just need to differ
export const METHOD_COLORS: Record<string, string> = {
  mimicry: "#d62728",
  spraycan: "#1f77b4",
  snap: "#2ca02c",
  scp: "#9467bd",
  occlude: "#8c564b",
};

export function methodColor(method: string): string {
  return METHOD_COLORS[method] ?? "#e0e0e0";
}
