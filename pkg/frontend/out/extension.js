"use strict";
/**
 * Editor client for the gptutor engine.
 *
 * The extension owns none of the intelligence: it forwards the active
 * selection to the engine over JSON-RPC and renders the returned
 * explanation as a markdown hover pop-up at the cursor. Prompt
 * construction, definition lookup, and backend calls all happen in the
 * engine process.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.activate = activate;
exports.deactivate = deactivate;
const path = require("path");
const vscode = require("vscode");
const keys_1 = require("./keys");
const rpc_1 = require("./rpc");
const server_1 = require("./server");
let engine;
let inflightId;
let shown;
function activate(context) {
    context.subscriptions.push(vscode.commands.registerCommand('gptutor.explainSelection', () => explainSelection(context)), vscode.commands.registerCommand('gptutor.resetApiKey', () => (0, keys_1.resetApiKey)(context)), vscode.languages.registerHoverProvider({ scheme: 'file' }, { provideHover: (document, position) => hoverFor(document, position) }), vscode.window.onDidChangeActiveTextEditor(() => cancelInflight()));
}
async function deactivate() {
    if (engine) {
        await engine.shutdown();
        engine.dispose();
        engine = undefined;
    }
}
function hoverFor(document, position) {
    if (shown &&
        shown.uri === document.uri.toString() &&
        shown.line === position.line) {
        return new vscode.Hover(shown.content);
    }
    return undefined;
}
function cancelInflight() {
    if (engine && inflightId !== undefined) {
        engine.cancel(inflightId);
        inflightId = undefined;
    }
}
function engineFor(root, apiKey) {
    if (!engine) {
        const config = vscode.workspace.getConfiguration('gptutor');
        const command = (config.get('enginePath') || 'gptutor')
            .split(' ')
            .filter((part) => part.length > 0);
        engine = new server_1.EngineClient({
            command,
            workspaceRoot: root,
            apiKeyEnv: config.get('apiKeyEnv') || 'OPENAI_API_KEY',
            apiKey,
        });
    }
    return engine;
}
async function explainSelection(context) {
    const editor = vscode.window.activeTextEditor;
    if (!editor) {
        vscode.window.showInformationMessage('Select code to explain');
        return;
    }
    const folder = vscode.workspace.workspaceFolders?.[0];
    if (!folder) {
        vscode.window.showInformationMessage('Open a workspace folder to use GPTutor');
        return;
    }
    let apiKey;
    try {
        apiKey = await (0, keys_1.ensureApiKey)(context);
    }
    catch (error) {
        if (error instanceof keys_1.UserCancelled) {
            vscode.window.showWarningMessage('GPTutor: API key required');
            return;
        }
        throw error;
    }
    const root = folder.uri.fsPath;
    const config = vscode.workspace.getConfiguration('gptutor');
    const params = {
        file: path.relative(root, editor.document.uri.fsPath),
        selection: {
            start: {
                line: editor.selection.start.line,
                character: editor.selection.start.character,
            },
            end: {
                line: editor.selection.end.line,
                character: editor.selection.end.character,
            },
        },
    };
    const backend = config.get('backend');
    if (backend === 'live' || backend === 'mock' || backend === 'replay') {
        params.backend = backend;
    }
    const model = config.get('model');
    if (model) {
        params.model = model;
    }
    cancelInflight();
    const client = engineFor(root, apiKey);
    try {
        const result = await vscode.window.withProgress({
            location: vscode.ProgressLocation.Notification,
            title: 'GPTutor: explaining selection…',
        }, async () => {
            const request = await client.explain(params);
            inflightId = request.id;
            try {
                return await request.result;
            }
            finally {
                inflightId = undefined;
            }
        });
        showExplanation(editor, result);
    }
    catch (error) {
        if (error instanceof rpc_1.RpcError) {
            const detail = error.data && typeof error.data === 'object' && 'code' in error.data
                ? ` [${error.data.code}]`
                : '';
            vscode.window.showErrorMessage(`GPTutor (${error.code})${detail}: ${error.message}`);
        }
        else {
            vscode.window.showErrorMessage(`GPTutor: ${error.message}`);
        }
    }
}
function showExplanation(editor, result) {
    const content = new vscode.MarkdownString();
    content.appendMarkdown(result.text);
    content.appendMarkdown(`\n\n---\n*${result.model}${result.cached ? ', cached' : ''}*`);
    shown = {
        uri: editor.document.uri.toString(),
        line: editor.selection.start.line,
        content,
    };
    vscode.commands.executeCommand('editor.action.showHover');
}
//# sourceMappingURL=extension.js.map