/**
 * One-time API key intake. The key lives in the editor's secret storage,
 * is prompted for at most once, and is only ever handed to the engine
 * process through its environment.
 */

import * as vscode from 'vscode';

const SECRET_NAME = 'gptutor.apiKey';

export class UserCancelled extends Error {
  constructor() {
    super('API key entry cancelled');
    this.name = 'UserCancelled';
  }
}

export async function ensureApiKey(context: vscode.ExtensionContext): Promise<string> {
  const stored = await context.secrets.get(SECRET_NAME);
  if (stored) {
    return stored;
  }
  const entered = await vscode.window.showInputBox({
    prompt: 'Enter your OpenAI API key (stored securely, used only by the engine)',
    password: true,
    ignoreFocusOut: true,
  });
  if (!entered) {
    throw new UserCancelled();
  }
  await context.secrets.store(SECRET_NAME, entered);
  return entered;
}

export async function resetApiKey(context: vscode.ExtensionContext): Promise<void> {
  await context.secrets.delete(SECRET_NAME);
  vscode.window.showInformationMessage('GPTutor API key cleared.');
}
