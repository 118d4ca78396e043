// Draws a scene onto a 2D context. Only the small subset of the canvas API
// that we actually use is required, so tests can pass a recording stub.

import { PALETTE, type SceneNode, type Glyph } from './scene';

export interface Draw2D {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | object;
  fillStyle: string | object;
  lineWidth: number;
  font: string;
}

const S = 22; // glyph half-size

function drawGateBody(ctx: Draw2D, x: number, y: number, label: string) {
  ctx.beginPath();
  ctx.rect(x - S, y - S, 2 * S, 2 * S);
  ctx.stroke();
  ctx.fillText(label, x - 8, y + 4);
}

function drawGlyph(ctx: Draw2D, glyph: Glyph, x: number, y: number) {
  ctx.strokeStyle = PALETTE.outline;
  ctx.fillStyle = PALETTE.outline;
  ctx.lineWidth = 2;
  switch (glyph) {
    case 'battery':
      ctx.beginPath();
      ctx.moveTo(x - 10, y - S);
      ctx.lineTo(x - 10, y + S);
      ctx.moveTo(x + 10, y - 12);
      ctx.lineTo(x + 10, y + 12);
      ctx.stroke();
      break;
    case 'switch-open':
    case 'switch-closed': {
      const lift = glyph === 'switch-open' ? -16 : 0;
      ctx.beginPath();
      ctx.moveTo(x - S, y);
      ctx.lineTo(x - 6, y);
      ctx.lineTo(x + 14, y + lift);
      ctx.moveTo(x + 14, y);
      ctx.lineTo(x + S, y);
      ctx.stroke();
      break;
    }
    case 'and':
      drawGateBody(ctx, x, y, '&');
      break;
    case 'or':
      drawGateBody(ctx, x, y, '≥1');
      break;
    case 'not':
      drawGateBody(ctx, x, y, '1');
      ctx.beginPath();
      ctx.arc(x + S + 5, y, 5, 0, Math.PI * 2);
      ctx.stroke();
      break;
    case 'junction':
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, Math.PI * 2);
      ctx.fill();
      break;
    case 'lamp-off':
    case 'lamp-on':
      if (glyph === 'lamp-on') {
        ctx.fillStyle = PALETTE.wirePowered;
        ctx.beginPath();
        ctx.arc(x, y, S - 4, 0, Math.PI * 2);
        ctx.fill();
        ctx.fillStyle = PALETTE.outline;
      }
      ctx.beginPath();
      ctx.arc(x, y, S - 4, 0, Math.PI * 2);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(x - 12, y - 12);
      ctx.lineTo(x + 12, y + 12);
      ctx.moveTo(x + 12, y - 12);
      ctx.lineTo(x - 12, y + 12);
      ctx.stroke();
      break;
    case 'danger-idle':
    case 'danger-active':
      ctx.beginPath();
      ctx.moveTo(x, y - S);
      ctx.lineTo(x + S, y + S);
      ctx.lineTo(x - S, y + S);
      ctx.closePath();
      ctx.stroke();
      ctx.fillText('!', x - 3, y + 12);
      if (glyph === 'danger-active') {
        // discharge arcs around the triangle when the sign is powered
        ctx.strokeStyle = '#2b6fe0';
        for (const side of [-1, 1]) {
          ctx.beginPath();
          ctx.arc(x + side * (S + 8), y, 8, -Math.PI / 3, Math.PI / 3);
          ctx.stroke();
        }
      }
      break;
    case 'ink-blot': {
      // irregular filled blob: the obfuscated-gate glyph
      ctx.beginPath();
      ctx.arc(x, y, S - 2, 0, Math.PI * 2);
      ctx.fill();
      for (const [dx, dy, r] of [[-14, -10, 9], [13, -8, 7], [10, 13, 8], [-11, 12, 6]]) {
        ctx.beginPath();
        ctx.arc(x + dx, y + dy, r, 0, Math.PI * 2);
        ctx.fill();
      }
      break;
    }
  }
}

export function renderScene(ctx: Draw2D, scene: SceneNode[]) {
  ctx.font = '14px sans-serif';
  // wires first, then glyphs on top
  for (const node of scene) {
    if (node.type !== 'wire') continue;
    ctx.strokeStyle = node.color;
    ctx.lineWidth = node.powered ? 4 : 2;
    ctx.beginPath();
    ctx.moveTo(node.from.x, node.from.y);
    ctx.lineTo(node.to.x, node.to.y);
    ctx.stroke();
  }
  for (const node of scene) {
    if (node.type !== 'glyph') continue;
    drawGlyph(ctx, node.glyph, node.x, node.y);
  }
}
