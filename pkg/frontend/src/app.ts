/**
 * DOM wiring for the console page. One query in flight at a time; the
 * cancel button aborts the HTTP request. All state lives in the
 * ConsoleSession plus the current table model.
 */

import {
  EndpointInfo,
  GatewayError,
  QueryMode,
  fetchEndpoints,
  fetchExamples,
  siteLinks,
  submitQuery,
} from './api.js';
import { ConsoleSession } from './session.js';
import { TableModel, renderTable, sortModel, toTableModel } from './table.js';
import { TemplateParams, buildTicketQuery, hasCriteria } from './templates.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class ConsoleApp {
  private session: ConsoleSession;
  private model: TableModel | null = null;
  private sortColumn: string | null = null;
  private sortDescending = false;
  private inflight: AbortController | null = null;

  constructor(gateway: string) {
    this.session = new ConsoleSession(gateway);
  }

  async start(): Promise<void> {
    el<HTMLButtonElement>('run').addEventListener('click', () => void this.run());
    el<HTMLButtonElement>('cancel').addEventListener('click', () => this.cancel());
    el<HTMLButtonElement>('generate').addEventListener('click', () => this.generate());
    el<HTMLButtonElement>('reload-endpoints').addEventListener('click', () => void this.loadEndpoints());
    el<HTMLSelectElement>('mode').addEventListener('change', () => this.syncSitePicker());
    el<HTMLTableElement>('results').addEventListener('click', (event) => {
      const target = event.target as HTMLElement;
      const column = target?.dataset?.column;
      if (column) this.sortBy(column);
    });
    await this.loadEndpoints();
    await this.loadExamples();
  }

  private banner(text: string, kind: 'error' | 'info' | '' = ''): void {
    const banner = el<HTMLDivElement>('banner');
    banner.textContent = text;
    banner.className = kind;
  }

  async loadEndpoints(): Promise<void> {
    try {
      this.session.endpoints = await fetchEndpoints(this.session.gateway);
      this.renderEndpoints();
      this.banner('');
    } catch (err) {
      this.banner(`gateway unreachable: ${String(err)} — retry below`, 'error');
    }
  }

  private renderEndpoints(): void {
    const list = el<HTMLUListElement>('endpoints');
    list.innerHTML = '';
    const picker = el<HTMLSelectElement>('site');
    picker.innerHTML = '';
    if (this.session.endpoints.length === 0) {
      list.innerHTML = '<li class="empty">No sites registered.</li>';
      return;
    }
    for (const endpoint of this.session.endpoints) {
      const links = siteLinks(endpoint);
      const item = document.createElement('li');
      const badge = endpoint.active ? 'active' : 'inactive';
      item.innerHTML =
        `<span class="badge ${badge}">${badge}</span> <b>${endpoint.siteName}</b> ` +
        `<a href="${links.sparql}" target="_blank">sparql</a> ` +
        `<a href="${links.all}" target="_blank">browse</a>`;
      list.appendChild(item);
      if (endpoint.active) {
        const option = document.createElement('option');
        option.value = endpoint.siteName;
        option.textContent = endpoint.siteName;
        picker.appendChild(option);
      }
    }
    this.syncSitePicker();
  }

  private async loadExamples(): Promise<void> {
    try {
      const examples = await fetchExamples(this.session.gateway);
      const picker = el<HTMLSelectElement>('examples');
      picker.innerHTML = '<option value="">— predefined queries —</option>';
      examples.forEach((example, i) => {
        const option = document.createElement('option');
        option.value = String(i);
        option.textContent = `${example.name} [${example.mode}]`;
        picker.appendChild(option);
      });
      picker.addEventListener('change', () => {
        const index = Number(picker.value);
        if (!Number.isNaN(index) && picker.value !== '') {
          el<HTMLTextAreaElement>('query').value = examples[index].query;
          el<HTMLSelectElement>('mode').value = examples[index].mode;
          this.syncSitePicker();
        }
      });
    } catch {
      /* examples are optional sugar */
    }
  }

  private syncSitePicker(): void {
    const mode = el<HTMLSelectElement>('mode').value as QueryMode;
    el<HTMLSelectElement>('site').disabled = mode !== 'site';
  }

  generate(): void {
    const params: TemplateParams = {
      titleContains: el<HTMLInputElement>('tpl-title').value,
      statusEquals: el<HTMLInputElement>('tpl-status').value,
      idAtLeast: el<HTMLInputElement>('tpl-id').value
        ? Number(el<HTMLInputElement>('tpl-id').value)
        : undefined,
      includeSolutions: el<HTMLInputElement>('tpl-solutions').checked,
    };
    if (!hasCriteria(params)) {
      this.banner('fill in at least one template field', 'info');
      return;
    }
    el<HTMLTextAreaElement>('query').value = buildTicketQuery(params);
    this.banner('generated query shown above; review it, then run', 'info');
  }

  cancel(): void {
    this.inflight?.abort();
    this.inflight = null;
  }

  async run(): Promise<void> {
    if (this.inflight) return; // one at a time per tab
    const mode = el<HTMLSelectElement>('mode').value as QueryMode;
    const site = mode === 'site' ? el<HTMLSelectElement>('site').value : undefined;
    const query = el<HTMLTextAreaElement>('query').value;
    if (!query.trim()) {
      this.banner('query text is empty', 'info');
      return;
    }
    this.session.record(mode, query, site);
    this.inflight = new AbortController();
    this.banner('running…', 'info');
    try {
      const results = await submitQuery(
        this.session.gateway, mode, query, site, this.inflight.signal,
      );
      this.model = toTableModel(results);
      this.sortColumn = null;
      this.renderResults();
      this.banner('');
    } catch (err) {
      if (err instanceof GatewayError) {
        this.banner(`query failed (${err.status}): ${err.message}`, 'error');
      } else if ((err as Error)?.name === 'AbortError') {
        this.banner('cancelled', 'info');
      } else {
        this.banner(String(err), 'error');
      }
    } finally {
      this.inflight = null;
    }
  }

  sortBy(column: string): void {
    if (!this.model) return;
    this.sortDescending = this.sortColumn === column ? !this.sortDescending : false;
    this.sortColumn = column;
    this.renderResults();
  }

  private renderResults(): void {
    if (!this.model) return;
    const model = this.sortColumn
      ? sortModel(this.model, this.sortColumn, this.sortDescending)
      : this.model;
    el<HTMLDivElement>('results').innerHTML = renderTable(model);
  }
}
