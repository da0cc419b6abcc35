/** Maps UI controls 1:1 to session commands.
 *
 * No optimistic updates: a control click only issues the command; what the
 * interface displays changes when the server's reply state and the next
 * pushed frame land in the store. Error replies surface as toasts and
 * leave the view untouched.
 */

import { ApiClient } from './client.js';
import { Store } from './store.js';
import type { Command } from './types.js';

export class Controls {
  constructor(
    private readonly client: ApiClient,
    private readonly store: Store,
    private readonly toast: (message: string) => void = () => {},
  ) {}

  /** Issue a command; resolves once the server state echo is stored. */
  async send(cmd: Command): Promise<boolean> {
    try {
      const reply = await this.client.command(cmd);
      if (!reply.ok) {
        const error = reply.error ?? { code: 'unknown', message: 'unknown error' };
        this.toast(`${error.code}: ${error.message}`);
        return false;
      }
      if (reply.state) this.store.applyServerState(reply.state);
      return true;
    } catch (err) {
      this.toast(`request failed: ${String(err)}`);
      return false;
    }
  }

  play(): Promise<boolean> {
    return this.send({ cmd: 'play' });
  }

  pause(): Promise<boolean> {
    return this.send({ cmd: 'pause' });
  }

  stop(): Promise<boolean> {
    return this.send({ cmd: 'stop' });
  }

  step(n: number): Promise<boolean> {
    return this.send({ cmd: 'step', n });
  }

  seek(target: number): Promise<boolean> {
    return this.send({ cmd: 'seek', target });
  }

  relayout(): Promise<boolean> {
    return this.send({ cmd: 'relayout' });
  }

  setHeat(mode: 'window' | 'decay', k: number): Promise<boolean> {
    return this.send({ cmd: 'set_heat_config', mode, k });
  }

  /** Snap a raw slider value to the nearest checkpoint when close by. */
  snapToCheckpoint(value: number, snapRadius = 250): number {
    const state = this.store.state.serverState;
    if (!state || !state.checkpoints.length) return value;
    let best = value;
    let bestDist = snapRadius + 1;
    for (const cp of state.checkpoints) {
      const dist = Math.abs(cp - value);
      if (dist <= snapRadius && dist < bestDist) {
        best = cp;
        bestDist = dist;
      }
    }
    return best;
  }
}
