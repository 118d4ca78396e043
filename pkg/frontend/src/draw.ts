// Annotation overlay: freehand strokes in three pen colors plus an eraser,
// rendered locally and logged as summarized draw_action events rather than
// raw mouse-move streams.

import type { ClientEvent } from './types';

export type Tool = 'pen' | 'eraser';

export const PEN_COLORS: Record<string, string> = {
  red: '#d7261e',
  green: '#1da03c',
  blue: '#2b6fe0',
};

export const MAX_POLYLINE_POINTS = 32;

export interface Point {
  x: number;
  y: number;
}

export interface Stroke {
  tool: Tool;
  color: string | null; // null for the eraser
  points: Point[];
}

export interface StrokeSummary {
  tool: Tool;
  color: string | null;
  point_count: number;
  bbox: { min_x: number; min_y: number; max_x: number; max_y: number };
  polyline: [number, number][];
}

/** Evenly downsample a stroke to at most MAX_POLYLINE_POINTS vertices,
 * always keeping the first and last point. */
export function downsample(points: Point[], limit = MAX_POLYLINE_POINTS): [number, number][] {
  if (points.length <= limit) {
    return points.map((p) => [p.x, p.y]);
  }
  const out: [number, number][] = [];
  for (let i = 0; i < limit; i++) {
    const idx = Math.round((i * (points.length - 1)) / (limit - 1));
    out.push([points[idx].x, points[idx].y]);
  }
  return out;
}

export function summarize(stroke: Stroke): StrokeSummary {
  const xs = stroke.points.map((p) => p.x);
  const ys = stroke.points.map((p) => p.y);
  return {
    tool: stroke.tool,
    color: stroke.color,
    point_count: stroke.points.length,
    bbox: {
      min_x: Math.min(...xs),
      min_y: Math.min(...ys),
      max_x: Math.max(...xs),
      max_y: Math.max(...ys),
    },
    polyline: downsample(stroke.points),
  };
}

export class AnnotationOverlay {
  strokes: Stroke[] = [];
  private active: Stroke | null = null;

  beginStroke(tool: Tool, colorName: string | null, x: number, y: number) {
    if (tool === 'pen' && (colorName === null || !(colorName in PEN_COLORS))) {
      throw new Error(`unknown pen color ${JSON.stringify(colorName)}`);
    }
    this.active = {
      tool,
      color: tool === 'pen' ? colorName : null,
      points: [{ x, y }],
    };
  }

  addPoint(x: number, y: number) {
    this.active?.points.push({ x, y });
  }

  /** Finish the stroke: keep it on the overlay and emit one draw_action. */
  endStroke(): ClientEvent | null {
    if (!this.active) return null;
    const stroke = this.active;
    this.active = null;
    this.strokes.push(stroke);
    return { op: 'draw_action', args: { ...summarize(stroke) } };
  }

  /** Remove every annotation and emit one draw_cleared. */
  clear(): ClientEvent {
    this.strokes = [];
    this.active = null;
    return { op: 'draw_cleared', args: {} };
  }

  /** Annotations are scoped to one task; no event, nothing to log. */
  resetForTask() {
    this.strokes = [];
    this.active = null;
  }
}
