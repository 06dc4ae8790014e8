"use strict";
/**
 * Engine process management: spawn `<engine> serve --workspace <root>` as a
 * child, hand it the API key through its environment (never argv), talk
 * JSON-RPC over its stdio, and restart on crash at most three times per
 * session.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.EngineClient = void 0;
const child_process_1 = require("child_process");
const rpc_1 = require("./rpc");
const schema_1 = require("./schema");
const DEFAULT_MAX_RESTARTS = 3;
class EngineClient {
    constructor(options) {
        this.options = options;
        this.restarts = 0;
        this.disposed = false;
    }
    get restartCount() {
        return this.restarts;
    }
    get pid() {
        return this.child?.pid;
    }
    /** Spawns (or re-uses) the engine and completes the initialize handshake. */
    ensureStarted() {
        if (this.disposed) {
            return Promise.reject(new Error('engine client disposed'));
        }
        if (!this.starting) {
            const limit = this.options.maxRestarts ?? DEFAULT_MAX_RESTARTS;
            if (this.restarts > limit) {
                return Promise.reject(new Error(`engine crashed ${limit} times; giving up for this session`));
            }
            this.starting = this.spawnAndInitialize();
            this.starting.catch(() => this.markDead());
        }
        return this.starting;
    }
    spawnAndInitialize() {
        const [executable, ...args] = this.options.command;
        const env = { ...process.env };
        if (this.options.apiKey) {
            env[this.options.apiKeyEnv] = this.options.apiKey;
        }
        const child = (0, child_process_1.spawn)(executable, [...args, 'serve', '--workspace', this.options.workspaceRoot], { env, stdio: ['pipe', 'pipe', 'pipe'] });
        this.child = child;
        child.on('exit', () => {
            if (!this.disposed) {
                this.markDead();
            }
        });
        child.stderr?.on('data', () => {
            // engine diagnostics are intentionally dropped: they may describe
            // user code, and the key must never reach extension logs anyway
        });
        this.connection = new rpc_1.JsonRpcConnection(child.stdout, child.stdin);
        const params = {
            workspaceRoot: this.options.workspaceRoot,
            ...(this.options.initializeConfig
                ? { config: this.options.initializeConfig }
                : {}),
        };
        return this.connection.request(schema_1.METHODS.initialize, params).result;
    }
    markDead() {
        this.starting = undefined;
        this.connection = undefined;
        this.child = undefined;
        this.restarts += 1;
    }
    async connected() {
        await this.ensureStarted();
        if (!this.connection) {
            throw new Error('engine connection unavailable');
        }
        return this.connection;
    }
    async explain(params) {
        const connection = await this.connected();
        return connection.request(schema_1.METHODS.explain, params);
    }
    async buildPrompt(params) {
        const connection = await this.connected();
        return connection.request(schema_1.METHODS.buildPrompt, params).result;
    }
    cancel(id) {
        this.connection?.notify(schema_1.METHODS.cancelRequest, { id });
    }
    async shutdown() {
        if (!this.connection) {
            return;
        }
        try {
            await this.connection.request(schema_1.METHODS.shutdown, {}).result;
        }
        catch {
            // the engine may already be gone; disposal below still reaps it
        }
    }
    dispose() {
        this.disposed = true;
        this.child?.kill();
        this.child = undefined;
        this.connection = undefined;
        this.starting = undefined;
    }
}
exports.EngineClient = EngineClient;
//# sourceMappingURL=server.js.map