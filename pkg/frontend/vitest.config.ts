import { defineConfig } from 'vitest/config';
import * as path from 'path';

export default defineConfig({
  resolve: {
    alias: {
      // the extension host API is mocked for unit/e2e tests
      vscode: path.resolve(__dirname, 'test/vscode-mock.ts'),
    },
  },
  test: {
    include: ['test/**/*.test.ts'],
    testTimeout: 20000,
    hookTimeout: 20000,
  },
});
