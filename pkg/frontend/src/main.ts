// Browser entry point: wires the canvas, buttons and polling loop to the
// pure controllers. All study logic lives server-side; this file only maps
// DOM gestures onto client events and redraws from the latest view.

import { ApiClient } from './api';
import { TaskController, ZvtController, type Action } from './controller';
import { AnnotationOverlay, PEN_COLORS, type Tool } from './draw';
import { buildScene, hitTest } from './scene';
import { renderScene } from './render';
import type { ViewPayload } from './types';

const POLL_INTERVAL_MS = 1000;

function nowSeconds(): number {
  return Date.now() / 1000;
}

export class App {
  private api: ApiClient;
  private pseudonym = '';
  private task = new TaskController({ pseudonym: '', phase: 'ended' });
  private zvt = new ZvtController({ pseudonym: '', phase: 'ended' });
  private overlay = new AnnotationOverlay();
  private lastTaskId: string | undefined;
  private tool: Tool = 'pen';
  private penColor = 'red';
  private drawing = false;

  constructor(
    private canvas: HTMLCanvasElement,
    private overlayCanvas: HTMLCanvasElement,
    private statusBar: HTMLElement,
    private buttons: { confirm: HTMLButtonElement; next: HTMLButtonElement;
                       skip: HTMLButtonElement; clear: HTMLButtonElement },
    baseUrl = '',
  ) {
    this.api = new ApiClient(baseUrl);
  }

  async start(studyId: string) {
    const created = await this.api.createSession(studyId);
    this.pseudonym = created.pseudonym;
    this.applyView(created.view);
    this.bind();
    setInterval(() => this.poll(), POLL_INTERVAL_MS);
  }

  private bind() {
    this.canvas.addEventListener('click', (e) => this.onCanvasClick(e));
    this.buttons.confirm.addEventListener('click', () => {
      void this.dispatch(this.task.clickConfirm(nowSeconds()));
    });
    this.buttons.next.addEventListener('click', () => {
      void this.dispatch(this.task.clickNext());
    });
    this.buttons.skip.addEventListener('click', () => {
      void this.dispatch(this.task.clickSkip());
    });
    this.buttons.clear.addEventListener('click', () => {
      void this.sendEvent(this.overlay.clear());
      this.redrawOverlay();
    });
    this.overlayCanvas.addEventListener('mousedown', (e) => {
      this.drawing = true;
      this.overlay.beginStroke(this.tool, this.tool === 'pen' ? this.penColor : null,
                               e.offsetX, e.offsetY);
    });
    this.overlayCanvas.addEventListener('mousemove', (e) => {
      if (!this.drawing) return;
      this.overlay.addPoint(e.offsetX, e.offsetY);
      this.redrawOverlay();
    });
    this.overlayCanvas.addEventListener('mouseup', () => {
      this.drawing = false;
      const event = this.overlay.endStroke();
      if (event) void this.sendEvent(event);
    });
  }

  setTool(tool: Tool, color?: string) {
    this.tool = tool;
    if (color) this.penColor = color;
  }

  private onCanvasClick(e: MouseEvent) {
    const view = this.task.view;
    if (view.phase === 'psychometric_test') {
      const cell = this.zvtCellAt(e.offsetX, e.offsetY);
      if (cell !== null) void this.dispatch(this.zvt.clickNumber(cell));
      return;
    }
    if (!view.task) return;
    const scene = buildScene(view.task, this.task.switches,
                             view.wire_levels, view.output_levels);
    const hit = hitTest(scene, e.offsetX, e.offsetY);
    if (hit) {
      void this.dispatch(this.task.clickSwitch(hit.id));
      this.redraw();
    }
  }

  private zvtCellAt(x: number, y: number): number | null {
    const zvt = this.task.view.zvt;
    if (!zvt) return null;
    for (const [num, [cx, cy]] of Object.entries(zvt.positions)) {
      if (Math.abs(cx * 64 + 32 - x) < 30 && Math.abs(cy * 64 + 32 - y) < 30) {
        return Number(num);
      }
    }
    return null;
  }

  private async dispatch(action: Action | null) {
    if (!action) return;
    let view: ViewPayload;
    if (action.kind === 'confirm') {
      view = (await this.api.confirm(this.pseudonym)).view;
    } else if (action.kind === 'skip') {
      view = (await this.api.skip(this.pseudonym)).view;
    } else {
      view = (await this.api.sendEvents(this.pseudonym, [action.event])).view;
    }
    this.applyView(view);
  }

  private async sendEvent(event: { op: string; args: Record<string, unknown> }) {
    const response = await this.api.sendEvents(this.pseudonym, [event]);
    this.applyView(response.view);
  }

  private async poll() {
    const response = await this.api.getView(this.pseudonym);
    this.applyView(response.view);
  }

  private applyView(view: ViewPayload) {
    this.task.refresh(view);
    this.zvt.refresh(view);
    if (view.task_id !== this.lastTaskId) {
      this.lastTaskId = view.task_id;
      this.overlay.resetForTask();
      this.redrawOverlay();
    }
    this.redraw();
  }

  private redraw() {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const view = this.task.view;
    if (view.phase === 'psychometric_test' && view.zvt) {
      ctx.font = '20px sans-serif';
      ctx.fillStyle = '#1c232b';
      for (const [num, [cx, cy]] of Object.entries(view.zvt.positions)) {
        ctx.strokeRect(cx * 64 + 4, cy * 64 + 4, 56, 56);
        ctx.fillText(num, cx * 64 + 24, cy * 64 + 38);
      }
    } else if (view.task) {
      renderScene(ctx, buildScene(view.task, this.task.switches,
                                  view.wire_levels, view.output_levels));
    }
    this.updateChrome(view);
  }

  private redrawOverlay() {
    const ctx = this.overlayCanvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, this.overlayCanvas.width, this.overlayCanvas.height);
    for (const stroke of this.overlay.strokes) {
      ctx.strokeStyle = stroke.color ? PEN_COLORS[stroke.color] : '#ffffff';
      ctx.lineWidth = stroke.tool === 'eraser' ? 14 : 3;
      ctx.beginPath();
      stroke.points.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
      ctx.stroke();
    }
  }

  private updateChrome(view: ViewPayload) {
    const countdown = this.task.confirmCountdown(nowSeconds());
    this.buttons.confirm.disabled = !this.task.confirmEnabled(nowSeconds());
    this.buttons.confirm.textContent =
      countdown > 0 ? `Confirm (${Math.ceil(countdown)}s)` : 'Confirm';
    this.buttons.next.disabled = !view.solved;
    this.buttons.skip.hidden = !view.skip_offered;
    const bits = [];
    if (view.score !== undefined) bits.push(`Score ${view.score}`);
    if (view.task_index !== undefined && view.task_count !== undefined) {
      bits.push(`Task ${view.task_index + 1}/${view.task_count}`);
    }
    if (view.switch_clicks !== undefined) bits.push(`Switch clicks ${view.switch_clicks}`);
    if (view.confirm_clicks !== undefined) bits.push(`Confirm clicks ${view.confirm_clicks}`);
    this.statusBar.textContent = bits.join(' · ');
  }
}
