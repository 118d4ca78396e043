// Pure scene-graph construction: turns a redacted task payload plus optional
// live wire levels into a flat list of drawable nodes. Rendering to a canvas
// happens in render.ts; keeping this step pure makes it unit-testable.

import type { TaskPayload, ElementPayload } from './types';

export type Glyph =
  | 'battery'
  | 'switch-open'
  | 'switch-closed'
  | 'and'
  | 'or'
  | 'not'
  | 'junction'
  | 'lamp-off'
  | 'lamp-on'
  | 'danger-idle'
  | 'danger-active'
  | 'ink-blot';

export interface GlyphNode {
  type: 'glyph';
  id: string;
  glyph: Glyph;
  x: number;
  y: number;
  interactive: boolean;
}

export interface WireNode {
  type: 'wire';
  from: { x: number; y: number };
  to: { x: number; y: number };
  powered: boolean;
  color: string;
}

export type SceneNode = GlyphNode | WireNode;

export const PALETTE = {
  wireIdle: '#606a76',
  wirePowered: '#f5c400', // yellow highlight for current-carrying wires
  background: '#ffffff',
  outline: '#1c232b',
};

export class SceneError extends Error {}

const KNOWN_KINDS = new Set([
  'battery', 'switch', 'and', 'or', 'not', 'wire', 'lamp', 'danger', 'camouflaged',
]);

function glyphFor(element: ElementPayload, opts: {
  closed: boolean;
  outputLevel: number | undefined;
}): Glyph {
  switch (element.kind) {
    case 'battery':
      return 'battery';
    case 'switch':
      return opts.closed ? 'switch-closed' : 'switch-open';
    case 'and':
      return 'and';
    case 'or':
      return 'or';
    case 'not':
      return 'not';
    case 'wire':
      return 'junction';
    case 'lamp':
      return opts.outputLevel === 1 ? 'lamp-on' : 'lamp-off';
    case 'danger':
      return opts.outputLevel === 1 ? 'danger-active' : 'danger-idle';
    case 'camouflaged':
      // Obfuscated gate: the payload carries no function, so the scene can
      // only ever show the ink blot.
      return 'ink-blot';
    default:
      throw new SceneError(`unknown element kind ${JSON.stringify(element.kind)}`);
  }
}

export function buildScene(
  task: TaskPayload,
  switches: Record<string, number>,
  wireLevels?: Record<string, number>,
  outputLevels?: Record<string, number>,
): SceneNode[] {
  if (!task || !Array.isArray(task.elements) || !Array.isArray(task.wires)) {
    throw new SceneError('malformed task payload');
  }
  const byId = new Map<string, ElementPayload>();
  for (const element of task.elements) {
    if (!KNOWN_KINDS.has(element.kind)) {
      throw new SceneError(`unknown element kind ${JSON.stringify(element.kind)}`);
    }
    if (typeof element.x !== 'number' || typeof element.y !== 'number') {
      throw new SceneError(`element ${element.id} missing position`);
    }
    byId.set(element.id, element);
  }

  const nodes: SceneNode[] = [];
  for (const wire of task.wires) {
    const source = byId.get(wire.source);
    const sink = byId.get(wire.sink);
    if (!source || !sink) {
      throw new SceneError(`wire references unknown element ${wire.source}->${wire.sink}`);
    }
    const powered = wireLevels?.[`${wire.source}:${wire.sink}`] === 1;
    nodes.push({
      type: 'wire',
      from: { x: source.x, y: source.y },
      to: { x: sink.x, y: sink.y },
      powered,
      color: powered ? PALETTE.wirePowered : PALETTE.wireIdle,
    });
  }
  for (const element of task.elements) {
    nodes.push({
      type: 'glyph',
      id: element.id,
      glyph: glyphFor(element, {
        closed: switches[element.id] === 1,
        outputLevel: outputLevels?.[element.id],
      }),
      x: element.x,
      y: element.y,
      interactive: element.kind === 'switch',
    });
  }
  return nodes;
}

// Hit testing for mouse interaction: returns the interactive glyph under the
// point, if any. Glyphs are treated as fixed-size squares around their center.
export const GLYPH_HIT_RADIUS = 28;

export function hitTest(scene: SceneNode[], x: number, y: number): GlyphNode | null {
  for (let i = scene.length - 1; i >= 0; i--) {
    const node = scene[i];
    if (node.type !== 'glyph' || !node.interactive) continue;
    if (Math.abs(node.x - x) <= GLYPH_HIT_RADIUS && Math.abs(node.y - y) <= GLYPH_HIT_RADIUS) {
      return node;
    }
  }
  return null;
}
