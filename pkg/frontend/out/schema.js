"use strict";
/**
 * Typed surface of the engine's JSON-RPC protocol (see docs/protocol.md in
 * the repository root). The extension never builds prompts itself; these
 * four methods are its entire view of the engine.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.ERROR_CODES = exports.METHODS = void 0;
exports.METHODS = {
    initialize: 'initialize',
    explain: 'explain',
    buildPrompt: 'buildPrompt',
    shutdown: 'shutdown',
    cancelRequest: '$/cancelRequest',
    didChange: 'didChange',
};
exports.ERROR_CODES = {
    serverNotInitialized: -32002,
    requestCancelled: -32800,
    domainError: -32000,
};
//# sourceMappingURL=schema.js.map