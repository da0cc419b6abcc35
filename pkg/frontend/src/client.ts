/** API client: JSON commands plus the SSE frame stream with reconnect.
 *
 * Transport is injectable so tests can run without a browser: `post`
 * matches fetch-POST-JSON semantics and `openStream` matches EventSource.
 */

import type { Command, CommandReply, SessionState, StreamMessage } from './types.js';

export interface StreamHandle {
  close(): void;
}

export interface Transport {
  post(url: string, body: unknown): Promise<CommandReply>;
  getJson(url: string): Promise<CommandReply>;
  openStream(
    url: string,
    onMessage: (msg: StreamMessage) => void,
    onError: () => void,
  ): StreamHandle;
}

export interface ConnectionHooks {
  onMessage(msg: StreamMessage): void;
  onStatus(connected: boolean, attempt: number): void;
}

export const fetchTransport: Transport = {
  async post(url, body) {
    const resp = await fetch(url, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    return (await resp.json()) as CommandReply;
  },
  async getJson(url) {
    const resp = await fetch(url);
    return (await resp.json()) as CommandReply;
  },
  openStream(url, onMessage, onError) {
    const source = new EventSource(url);
    source.onmessage = (ev) => {
      try {
        onMessage(JSON.parse(ev.data) as StreamMessage);
      } catch {
        /* tolerate malformed keepalives */
      }
    };
    source.onerror = () => onError();
    return { close: () => source.close() };
  },
};

const BACKOFF_BASE_MS = 500;
const BACKOFF_MAX_MS = 15000;

export function backoffDelay(attempt: number): number {
  return Math.min(BACKOFF_BASE_MS * 2 ** attempt, BACKOFF_MAX_MS);
}

export class ApiClient {
  private stream: StreamHandle | null = null;
  private attempt = 0;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    readonly baseUrl: string,
    private readonly transport: Transport = fetchTransport,
    private readonly schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> =
      (fn, ms) => setTimeout(fn, ms),
  ) {}

  command(cmd: Command): Promise<CommandReply> {
    return this.transport.post(`${this.baseUrl}/api/command`, cmd);
  }

  getState(): Promise<CommandReply> {
    return this.transport.getJson(`${this.baseUrl}/api/state`);
  }

  getFrame(): Promise<CommandReply> {
    return this.transport.getJson(`${this.baseUrl}/api/frame`);
  }

  /** Subscribe to the frame stream; reconnects with exponential backoff. */
  connect(hooks: ConnectionHooks): void {
    this.closed = false;
    this.open(hooks);
  }

  private open(hooks: ConnectionHooks): void {
    if (this.closed) return;
    this.stream = this.transport.openStream(
      `${this.baseUrl}/api/stream`,
      (msg) => {
        if (this.attempt !== 0) {
          this.attempt = 0;
        }
        hooks.onStatus(true, 0);
        hooks.onMessage(msg);
      },
      () => {
        this.stream?.close();
        this.stream = null;
        hooks.onStatus(false, this.attempt);
        const delay = backoffDelay(this.attempt);
        this.attempt += 1;
        this.retryTimer = this.schedule(() => this.open(hooks), delay);
      },
    );
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.stream?.close();
    this.stream = null;
  }
}

export type { SessionState };
