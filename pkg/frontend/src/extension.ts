/**
 * Editor client for the gptutor engine.
 *
 * The extension owns none of the intelligence: it forwards the active
 * selection to the engine over JSON-RPC and renders the returned
 * explanation as a markdown hover pop-up at the cursor. Prompt
 * construction, definition lookup, and backend calls all happen in the
 * engine process.
 */

import * as path from 'path';
import * as vscode from 'vscode';

import { ensureApiKey, resetApiKey, UserCancelled } from './keys';
import { RpcError } from './rpc';
import { ExplainParams, ExplainResult } from './schema';
import { EngineClient } from './server';

interface ShownExplanation {
  uri: string;
  line: number;
  content: vscode.MarkdownString;
}

let engine: EngineClient | undefined;
let inflightId: number | undefined;
let shown: ShownExplanation | undefined;

export function activate(context: vscode.ExtensionContext): void {
  context.subscriptions.push(
    vscode.commands.registerCommand('gptutor.explainSelection', () =>
      explainSelection(context)
    ),
    vscode.commands.registerCommand('gptutor.resetApiKey', () => resetApiKey(context)),
    vscode.languages.registerHoverProvider(
      { scheme: 'file' },
      { provideHover: (document, position) => hoverFor(document, position) }
    ),
    vscode.window.onDidChangeActiveTextEditor(() => cancelInflight())
  );
}

export async function deactivate(): Promise<void> {
  if (engine) {
    await engine.shutdown();
    engine.dispose();
    engine = undefined;
  }
}

function hoverFor(
  document: vscode.TextDocument,
  position: vscode.Position
): vscode.Hover | undefined {
  if (
    shown &&
    shown.uri === document.uri.toString() &&
    shown.line === position.line
  ) {
    return new vscode.Hover(shown.content);
  }
  return undefined;
}

function cancelInflight(): void {
  if (engine && inflightId !== undefined) {
    engine.cancel(inflightId);
    inflightId = undefined;
  }
}

function engineFor(root: string, apiKey: string): EngineClient {
  if (!engine) {
    const config = vscode.workspace.getConfiguration('gptutor');
    const command = (config.get<string>('enginePath') || 'gptutor')
      .split(' ')
      .filter((part) => part.length > 0);
    engine = new EngineClient({
      command,
      workspaceRoot: root,
      apiKeyEnv: config.get<string>('apiKeyEnv') || 'OPENAI_API_KEY',
      apiKey,
    });
  }
  return engine;
}

async function explainSelection(context: vscode.ExtensionContext): Promise<void> {
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

  let apiKey: string;
  try {
    apiKey = await ensureApiKey(context);
  } catch (error) {
    if (error instanceof UserCancelled) {
      vscode.window.showWarningMessage('GPTutor: API key required');
      return;
    }
    throw error;
  }

  const root = folder.uri.fsPath;
  const config = vscode.workspace.getConfiguration('gptutor');
  const params: ExplainParams = {
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
  const backend = config.get<string>('backend');
  if (backend === 'live' || backend === 'mock' || backend === 'replay') {
    params.backend = backend;
  }
  const model = config.get<string>('model');
  if (model) {
    params.model = model;
  }

  cancelInflight();
  const client = engineFor(root, apiKey);
  try {
    const result = await vscode.window.withProgress(
      {
        location: vscode.ProgressLocation.Notification,
        title: 'GPTutor: explaining selection…',
      },
      async () => {
        const request = await client.explain(params);
        inflightId = request.id;
        try {
          return await request.result;
        } finally {
          inflightId = undefined;
        }
      }
    );
    showExplanation(editor, result);
  } catch (error) {
    if (error instanceof RpcError) {
      const detail =
        error.data && typeof error.data === 'object' && 'code' in error.data
          ? ` [${(error.data as { code: string }).code}]`
          : '';
      vscode.window.showErrorMessage(`GPTutor (${error.code})${detail}: ${error.message}`);
    } else {
      vscode.window.showErrorMessage(`GPTutor: ${(error as Error).message}`);
    }
  }
}

function showExplanation(editor: vscode.TextEditor, result: ExplainResult): void {
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
