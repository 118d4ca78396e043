// Interaction dispatch: translates user gestures on the current view into
// client events. Every gesture that changes visible state produces exactly
// one event; gestures on non-interactive targets or during the confirm
// delay produce none.

import type { ClientEvent, ViewPayload } from './types';

export type Action =
  | { kind: 'event'; event: ClientEvent }
  | { kind: 'confirm' }
  | { kind: 'skip' };

export class TaskController {
  view: ViewPayload;
  // Local echo of switch levels so flips render immediately; the server
  // remains authoritative and the next view refresh overwrites this.
  switches: Record<string, number>;

  constructor(view: ViewPayload) {
    this.view = view;
    this.switches = { ...(view.switches ?? {}) };
  }

  refresh(view: ViewPayload) {
    this.view = view;
    this.switches = { ...(view.switches ?? {}) };
  }

  /** Click on a switch glyph: exactly one toggle event plus local echo. */
  clickSwitch(switchId: string): Action | null {
    if (!(switchId in this.switches)) return null;
    this.switches[switchId] = this.switches[switchId] === 1 ? 0 : 1;
    return { kind: 'event', event: { op: 'toggle_switch', args: { switch_id: switchId } } };
  }

  /** Seconds until Confirm becomes available again; 0 when enabled. */
  confirmCountdown(nowSeconds: number): number {
    const gate = this.view.next_confirm_allowed ?? 0;
    return Math.max(0, gate - nowSeconds);
  }

  confirmEnabled(nowSeconds: number): boolean {
    return this.confirmCountdown(nowSeconds) === 0 && !this.view.solved;
  }

  /** Click on Confirm: suppressed entirely while the delay countdown runs. */
  clickConfirm(nowSeconds: number): Action | null {
    if (!this.confirmEnabled(nowSeconds)) return null;
    return { kind: 'confirm' };
  }

  /** Click on Next after a correct confirm. */
  clickNext(): Action | null {
    if (!this.view.solved) return null;
    return { kind: 'event', event: { op: 'advance_task', args: {} } };
  }

  /** Click on Skip: only available once the server has offered it. */
  clickSkip(): Action | null {
    if (!this.view.skip_offered) return null;
    return { kind: 'skip' };
  }
}

export class ZvtController {
  view: ViewPayload;

  constructor(view: ViewPayload) {
    this.view = view;
  }

  refresh(view: ViewPayload) {
    this.view = view;
  }

  /** Numbers currently in the scene graph, from the payload alone. */
  visibleNumbers(): number[] {
    return this.view.zvt?.visible_numbers ?? [];
  }

  startMatrix(): Action {
    return { kind: 'event', event: { op: 'zvt_start_matrix', args: {} } };
  }

  /** Click on a number cell: exactly one event. */
  clickNumber(n: number): Action | null {
    if (!this.view.zvt || this.view.zvt.matrix_id === null) return null;
    return { kind: 'event', event: { op: 'zvt_click', args: { number: n } } };
  }
}
