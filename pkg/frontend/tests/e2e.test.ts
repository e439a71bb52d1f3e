/**
 * End-to-end acceptance: the console against the real, unchanged backend
 * stack (two endpoints plus the gateway spawned as subprocesses).
 * Skipped only when S3AI_E2E=0.
 */

import { ChildProcess, spawn, spawnSync } from 'node:child_process';
import { mkdtempSync, writeFileSync } from 'node:fs';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { fetchEndpoints, fetchExamples, submitQuery } from '../src/api.js';
import { renderTable, sortModel, toTableModel } from '../src/table.js';
import { buildTicketQuery } from '../src/templates.js';

const PYTHON = process.env.S3AI_PYTHON ?? 'python3';
const ENABLED = process.env.S3AI_E2E !== '0';

const children: ChildProcess[] = [];
let gateway = '';

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, '127.0.0.1', () => {
      const address = server.address();
      if (address && typeof address === 'object') {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error('no port'));
      }
    });
  });
}

async function waitReady(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError = 'no attempt';
  while (Date.now() < deadline) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
      lastError = `status ${response.status}`;
    } catch (err) {
      lastError = String(err);
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`${url} never became ready: ${lastError}`);
}

describe.skipIf(!ENABLED)('console against the live stack', () => {
  beforeAll(async () => {
    const scratch = mkdtempSync(join(tmpdir(), 's3ai-console-e2e-'));
    const fixtures = join(scratch, 'fx');
    const built = spawnSync(PYTHON, ['-m', 's3ai', 'build-fixtures', '--dest', fixtures]);
    if (built.status !== 0) {
      throw new Error(`build-fixtures failed: ${built.stderr?.toString()}`);
    }
    const [portA, portB, portG] = [await freePort(), await freePort(), await freePort()];
    const serveArgs = (port: number, mapping: string) => [
      '-m', 's3ai', 'serve',
      '-b', `http://127.0.0.1:${port}/`, '-p', String(port), '--fast',
      join(fixtures, mapping),
    ];
    children.push(spawn(PYTHON, serveArgs(portA, 'mappingOSTicket.hdo.ttl'), { stdio: 'ignore' }));
    children.push(spawn(PYTHON, serveArgs(portB, 'mappingGLPI.hdo.ttl'), { stdio: 'ignore' }));
    const registry = join(scratch, 'registry.txt');
    writeFileSync(registry, [
      `samos\thttp://127.0.0.1:${portA}/sparql\ttrue\t10000`,
      `ikaria\thttp://127.0.0.1:${portB}/sparql\ttrue\t10000`,
      '',
    ].join('\n'));
    children.push(spawn(
      PYTHON,
      ['-m', 's3ai', 'serve-gateway', '--registry', registry, '-p', String(portG)],
      { stdio: 'ignore' },
    ));
    await waitReady(`http://127.0.0.1:${portA}/sparql?query=${encodeURIComponent('SELECT * WHERE {}')}`);
    await waitReady(`http://127.0.0.1:${portB}/sparql?query=${encodeURIComponent('SELECT * WHERE {}')}`);
    gateway = `http://127.0.0.1:${portG}`;
    await waitReady(`${gateway}/api/endpoints`);
  }, 120000);

  afterAll(() => {
    for (const child of children) child.kill('SIGTERM');
  });

  it('lists both demo sites with their browse links', async () => {
    const endpoints = await fetchEndpoints(gateway);
    const names = endpoints.map((e) => e.siteName).sort();
    expect(names).toEqual(['ikaria', 'samos']);
    expect(endpoints.every((e) => e.active)).toBe(true);
  }, 30000);

  it('runs the predefined mediated No Video query and renders both sites with provenance', async () => {
    const examples = await fetchExamples(gateway);
    const noVideo = examples.find((e) => e.mode === 'mediated' && /No Video/.test(e.query));
    expect(noVideo).toBeDefined();
    const results = await submitQuery(gateway, 'mediated', noVideo!.query);
    const model = toTableModel(results);
    expect(model.columns).toContain('site');
    const siteColumn = model.columns.indexOf('site');
    const sites = new Set(model.rows.map((row) => row[siteColumn]));
    expect(sites).toEqual(new Set(['samos', 'ikaria']));
    const html = renderTable(model);
    expect(html).toContain('<th data-column="site">site</th>');
    expect(html).toContain('&quot;No Video&quot; error');
    expect(html).toContain('Monitor reports &quot;No Video&quot; on boot');
    // sorting by provenance is stable and reversible on live data
    const sorted = sortModel(model, 'site');
    expect(sorted.rows[0][siteColumn]).toBe('ikaria');
  }, 30000);

  it('template form output parses under the backend grammar', async () => {
    const generated = buildTicketQuery({ titleContains: 'No Video', statusEquals: 'closed' });
    const results = await submitQuery(gateway, 'mediated', generated);
    expect(results.head.vars).toEqual(expect.arrayContaining(['t', 'title', 'status', 'site']));
    const model = toTableModel(results);
    expect(model.rows.length).toBeGreaterThanOrEqual(1); // ticket 1149 is closed
    const malformed = buildTicketQuery({ titleContains: 'No Video' }) + ' }';
    await expect(submitQuery(gateway, 'mediated', malformed)).rejects.toThrowError(/line/);
  }, 30000);

  it('single-site mode passes through to one endpoint only', async () => {
    const query = buildTicketQuery({ titleContains: 'No Video' });
    const results = await submitQuery(gateway, 'site', query, 'samos');
    const model = toTableModel(results);
    expect(model.rows).toHaveLength(1);
    expect(model.rows[0][0]).toContain('ost_ticket/1149');
  }, 30000);
});
