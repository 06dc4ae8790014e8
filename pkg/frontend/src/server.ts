/**
 * Engine process management: spawn `<engine> serve --workspace <root>` as a
 * child, hand it the API key through its environment (never argv), talk
 * JSON-RPC over its stdio, and restart on crash at most three times per
 * session.
 */

import { ChildProcess, spawn } from 'child_process';

import { JsonRpcConnection } from './rpc';
import {
  BuildPromptResult,
  ExplainParams,
  ExplainResult,
  InitializeResult,
  METHODS,
} from './schema';

export interface EngineOptions {
  /** Command plus leading arguments, e.g. ["gptutor"] or ["python3", "-m", "gptutor"]. */
  command: string[];
  workspaceRoot: string;
  /** Name of the environment variable the engine reads the key from. */
  apiKeyEnv: string;
  apiKey?: string;
  /** Extra config passed with initialize (backend, model, ...). */
  initializeConfig?: Record<string, unknown>;
  maxRestarts?: number;
}

const DEFAULT_MAX_RESTARTS = 3;

export class EngineClient {
  private child: ChildProcess | undefined;
  private connection: JsonRpcConnection | undefined;
  private starting: Promise<InitializeResult> | undefined;
  private restarts = 0;
  private disposed = false;

  constructor(private readonly options: EngineOptions) {}

  get restartCount(): number {
    return this.restarts;
  }

  get pid(): number | undefined {
    return this.child?.pid;
  }

  /** Spawns (or re-uses) the engine and completes the initialize handshake. */
  ensureStarted(): Promise<InitializeResult> {
    if (this.disposed) {
      return Promise.reject(new Error('engine client disposed'));
    }
    if (!this.starting) {
      const limit = this.options.maxRestarts ?? DEFAULT_MAX_RESTARTS;
      if (this.restarts > limit) {
        return Promise.reject(
          new Error(`engine crashed ${limit} times; giving up for this session`)
        );
      }
      this.starting = this.spawnAndInitialize();
      this.starting.catch(() => this.markDead());
    }
    return this.starting;
  }

  private spawnAndInitialize(): Promise<InitializeResult> {
    const [executable, ...args] = this.options.command;
    const env: NodeJS.ProcessEnv = { ...process.env };
    if (this.options.apiKey) {
      env[this.options.apiKeyEnv] = this.options.apiKey;
    }
    const child = spawn(
      executable,
      [...args, 'serve', '--workspace', this.options.workspaceRoot],
      { env, stdio: ['pipe', 'pipe', 'pipe'] }
    );
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

    this.connection = new JsonRpcConnection(child.stdout!, child.stdin!);
    const params = {
      workspaceRoot: this.options.workspaceRoot,
      ...(this.options.initializeConfig
        ? { config: this.options.initializeConfig }
        : {}),
    };
    return this.connection.request<InitializeResult>(METHODS.initialize, params).result;
  }

  private markDead(): void {
    this.starting = undefined;
    this.connection = undefined;
    this.child = undefined;
    this.restarts += 1;
  }

  private async connected(): Promise<JsonRpcConnection> {
    await this.ensureStarted();
    if (!this.connection) {
      throw new Error('engine connection unavailable');
    }
    return this.connection;
  }

  async explain(params: ExplainParams): Promise<{ id: number; result: Promise<ExplainResult> }> {
    const connection = await this.connected();
    return connection.request<ExplainResult>(METHODS.explain, params);
  }

  async buildPrompt(params: ExplainParams): Promise<BuildPromptResult> {
    const connection = await this.connected();
    return connection.request<BuildPromptResult>(METHODS.buildPrompt, params).result;
  }

  cancel(id: number): void {
    this.connection?.notify(METHODS.cancelRequest, { id });
  }

  async shutdown(): Promise<void> {
    if (!this.connection) {
      return;
    }
    try {
      await this.connection.request(METHODS.shutdown, {}).result;
    } catch {
      // the engine may already be gone; disposal below still reaps it
    }
  }

  dispose(): void {
    this.disposed = true;
    this.child?.kill();
    this.child = undefined;
    this.connection = undefined;
    this.starting = undefined;
  }
}
