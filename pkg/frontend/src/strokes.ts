import type { SessionDoc, StrokeSample, Vec3 } from "./protocol";
import { methodColor } from "./protocol";

export interface Stroke {
  method: string;
  color: string;
  // null marks a skipped sample: a visible gap, never a segment
  points: (Vec3 | null)[];
  samples: StrokeSample[];
  done: boolean;
}

/**
 * Inked curves as the service acked them. Nothing enters a stroke
 * without an ack, so what this holds is exactly what was drawn.
 */
export class StrokeStore {
  readonly strokes: Stroke[] = [];

  get current(): Stroke | null {
    const last = this.strokes[this.strokes.length - 1];
    return last && !last.done ? last : null;
  }

  begin(method: string): Stroke {
    if (this.current) throw new Error("previous stroke still open");
    const s: Stroke = {
      method,
      color: methodColor(method),
      points: [],
      samples: [],
      done: false,
    };
    this.strokes.push(s);
    return s;
  }

  ink(sample: StrokeSample, position: Vec3 | null): void {
    const s = this.current;
    if (!s) throw new Error("no stroke in progress");
    s.samples.push(sample);
    s.points.push(position);
  }

  end(): Stroke {
    const s = this.current;
    if (!s) throw new Error("no stroke in progress");
    s.done = true;
    return s;
  }

  /** Drop the most recent finished stroke (mirrors the undo op). */
  undo(): Stroke | null {
    if (this.current) throw new Error("stroke in progress");
    return this.strokes.pop() ?? null;
  }

  /** Polyline runs split at skip gaps; drawable as-is. */
  static runs(stroke: Stroke): Vec3[][] {
    const out: Vec3[][] = [];
    let run: Vec3[] = [];
    for (const p of stroke.points) {
      if (p === null) {
        if (run.length > 0) out.push(run);
        run = [];
      } else {
        run.push(p);
      }
    }
    if (run.length > 0) out.push(run);
    return out;
  }

  static segmentCount(stroke: Stroke): number {
    return StrokeStore.runs(stroke).reduce(
      (n, run) => n + Math.max(0, run.length - 1),
      0,
    );
  }

  /** The latest finished stroke as a harness session file. */
  exportSession(meshId: string): SessionDoc {
    const done = this.strokes.filter((s) => s.done && s.samples.length > 0);
    const last = done[done.length - 1];
    if (!last) throw new Error("nothing to export");
    return {
      mesh: meshId,
      method: last.method,
      meta: { source: "browser" },
      samples: last.samples,
    };
  }
}
