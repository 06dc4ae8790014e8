"use strict";
/**
 * One-time API key intake. The key lives in the editor's secret storage,
 * is prompted for at most once, and is only ever handed to the engine
 * process through its environment.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.UserCancelled = void 0;
exports.ensureApiKey = ensureApiKey;
exports.resetApiKey = resetApiKey;
const vscode = require("vscode");
const SECRET_NAME = 'gptutor.apiKey';
class UserCancelled extends Error {
    constructor() {
        super('API key entry cancelled');
        this.name = 'UserCancelled';
    }
}
exports.UserCancelled = UserCancelled;
async function ensureApiKey(context) {
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
async function resetApiKey(context) {
    await context.secrets.delete(SECRET_NAME);
    vscode.window.showInformationMessage('GPTutor API key cleared.');
}
//# sourceMappingURL=keys.js.map