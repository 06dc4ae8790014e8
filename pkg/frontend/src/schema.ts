/**
 * Typed surface of the engine's JSON-RPC protocol (see docs/protocol.md in
 * the repository root). The extension never builds prompts itself; these
 * four methods are its entire view of the engine.
 */

export interface PositionParam {
  line: number;
  character: number;
}

export interface SelectionParam {
  start: PositionParam;
  end: PositionParam;
}

export interface InitializeParams {
  workspaceRoot: string;
  config?: Record<string, unknown>;
}

export interface InitializeResult {
  serverVersion: string;
  indexedFiles: number;
  skippedFiles: number;
}

export interface ExplainParams {
  file: string;
  selection: SelectionParam;
  model?: string;
  backend?: 'live' | 'mock' | 'replay';
}

export interface ExplainResult {
  text: string;
  model: string;
  cached: boolean;
  latencyMs: number;
}

export interface BuildPromptResult {
  system: string;
  user: string;
}

export const METHODS = {
  initialize: 'initialize',
  explain: 'explain',
  buildPrompt: 'buildPrompt',
  shutdown: 'shutdown',
  cancelRequest: '$/cancelRequest',
  didChange: 'didChange',
} as const;

export const ERROR_CODES = {
  serverNotInitialized: -32002,
  requestCancelled: -32800,
  domainError: -32000,
} as const;
