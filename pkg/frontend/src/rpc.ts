/**
 * Minimal JSON-RPC 2.0 client over byte streams with Content-Length
 * framing, matching the engine's stdio protocol.
 */

import type { Readable, Writable } from 'stream';

export class RpcError extends Error {
  constructor(
    public readonly code: number,
    message: string,
    public readonly data?: unknown
  ) {
    super(message);
    this.name = 'RpcError';
  }
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (error: Error) => void;
}

export function encodeFrame(message: object): Buffer {
  const body = Buffer.from(JSON.stringify(message), 'utf8');
  const header = Buffer.from(`Content-Length: ${body.length}\r\n\r\n`, 'ascii');
  return Buffer.concat([header, body]);
}

/** Incremental frame decoder; feed chunks, get parsed messages. */
export class FrameDecoder {
  private buffer = Buffer.alloc(0);

  push(chunk: Buffer): object[] {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    const messages: object[] = [];
    for (;;) {
      const headerEnd = this.buffer.indexOf('\r\n\r\n');
      if (headerEnd < 0) {
        break;
      }
      const header = this.buffer.subarray(0, headerEnd).toString('ascii');
      const match = /content-length:\s*(\d+)/i.exec(header);
      if (!match) {
        throw new Error(`frame without Content-Length: ${header}`);
      }
      const length = Number(match[1]);
      const bodyStart = headerEnd + 4;
      if (this.buffer.length < bodyStart + length) {
        break;
      }
      const body = this.buffer.subarray(bodyStart, bodyStart + length);
      this.buffer = this.buffer.subarray(bodyStart + length);
      messages.push(JSON.parse(body.toString('utf8')));
    }
    return messages;
  }
}

export class JsonRpcConnection {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private decoder = new FrameDecoder();
  private closed = false;

  constructor(input: Readable, private readonly output: Writable) {
    input.on('data', (chunk: Buffer) => this.onData(chunk));
    input.on('close', () => this.onClose());
    input.on('error', () => this.onClose());
  }

  /** Sends a request; returns its id (for cancellation) and result promise. */
  request<T>(method: string, params: object): { id: number; result: Promise<T> } {
    const id = this.nextId++;
    const result = new Promise<T>((resolve, reject) => {
      if (this.closed) {
        reject(new Error('connection closed'));
        return;
      }
      this.pending.set(id, { resolve: resolve as (v: unknown) => void, reject });
      this.output.write(encodeFrame({ jsonrpc: '2.0', id, method, params }));
    });
    return { id, result };
  }

  notify(method: string, params: object): void {
    if (!this.closed) {
      this.output.write(encodeFrame({ jsonrpc: '2.0', method, params }));
    }
  }

  get pendingCount(): number {
    return this.pending.size;
  }

  private onData(chunk: Buffer): void {
    let messages: object[];
    try {
      messages = this.decoder.push(chunk);
    } catch (error) {
      this.fail(error instanceof Error ? error : new Error(String(error)));
      return;
    }
    for (const message of messages) {
      this.onMessage(message as Record<string, unknown>);
    }
  }

  private onMessage(message: Record<string, unknown>): void {
    const id = message.id;
    if (typeof id !== 'number') {
      return; // server-to-client notifications are not part of the protocol
    }
    const pending = this.pending.get(id);
    if (!pending) {
      return;
    }
    this.pending.delete(id);
    if (message.error !== undefined) {
      const error = message.error as { code: number; message: string; data?: unknown };
      pending.reject(new RpcError(error.code, error.message, error.data));
    } else {
      pending.resolve(message.result);
    }
  }

  private onClose(): void {
    this.fail(new Error('engine connection closed'));
  }

  private fail(error: Error): void {
    this.closed = true;
    const waiting = [...this.pending.values()];
    this.pending.clear();
    for (const pending of waiting) {
      pending.reject(error);
    }
  }
}
