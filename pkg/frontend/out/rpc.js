"use strict";
/**
 * Minimal JSON-RPC 2.0 client over byte streams with Content-Length
 * framing, matching the engine's stdio protocol.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.JsonRpcConnection = exports.FrameDecoder = exports.RpcError = void 0;
exports.encodeFrame = encodeFrame;
class RpcError extends Error {
    constructor(code, message, data) {
        super(message);
        this.code = code;
        this.data = data;
        this.name = 'RpcError';
    }
}
exports.RpcError = RpcError;
function encodeFrame(message) {
    const body = Buffer.from(JSON.stringify(message), 'utf8');
    const header = Buffer.from(`Content-Length: ${body.length}\r\n\r\n`, 'ascii');
    return Buffer.concat([header, body]);
}
/** Incremental frame decoder; feed chunks, get parsed messages. */
class FrameDecoder {
    constructor() {
        this.buffer = Buffer.alloc(0);
    }
    push(chunk) {
        this.buffer = Buffer.concat([this.buffer, chunk]);
        const messages = [];
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
exports.FrameDecoder = FrameDecoder;
class JsonRpcConnection {
    constructor(input, output) {
        this.output = output;
        this.nextId = 1;
        this.pending = new Map();
        this.decoder = new FrameDecoder();
        this.closed = false;
        input.on('data', (chunk) => this.onData(chunk));
        input.on('close', () => this.onClose());
        input.on('error', () => this.onClose());
    }
    /** Sends a request; returns its id (for cancellation) and result promise. */
    request(method, params) {
        const id = this.nextId++;
        const result = new Promise((resolve, reject) => {
            if (this.closed) {
                reject(new Error('connection closed'));
                return;
            }
            this.pending.set(id, { resolve: resolve, reject });
            this.output.write(encodeFrame({ jsonrpc: '2.0', id, method, params }));
        });
        return { id, result };
    }
    notify(method, params) {
        if (!this.closed) {
            this.output.write(encodeFrame({ jsonrpc: '2.0', method, params }));
        }
    }
    get pendingCount() {
        return this.pending.size;
    }
    onData(chunk) {
        let messages;
        try {
            messages = this.decoder.push(chunk);
        }
        catch (error) {
            this.fail(error instanceof Error ? error : new Error(String(error)));
            return;
        }
        for (const message of messages) {
            this.onMessage(message);
        }
    }
    onMessage(message) {
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
            const error = message.error;
            pending.reject(new RpcError(error.code, error.message, error.data));
        }
        else {
            pending.resolve(message.result);
        }
    }
    onClose() {
        this.fail(new Error('engine connection closed'));
    }
    fail(error) {
        this.closed = true;
        const waiting = [...this.pending.values()];
        this.pending.clear();
        for (const pending of waiting) {
            pending.reject(error);
        }
    }
}
exports.JsonRpcConnection = JsonRpcConnection;
//# sourceMappingURL=rpc.js.map