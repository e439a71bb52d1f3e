/** Console session state: endpoint cache and the append-only query history. */

import { EndpointInfo, QueryMode } from './api.js';

export interface HistoryEntry {
  readonly query: string;
  readonly mode: QueryMode;
  readonly site?: string;
  readonly at: string; // ISO timestamp
}

export class ConsoleSession {
  endpoints: EndpointInfo[] = [];
  private history: HistoryEntry[] = [];

  constructor(public readonly gateway: string) {}

  record(mode: QueryMode, query: string, site?: string): HistoryEntry {
    const entry: HistoryEntry = Object.freeze({
      query,
      mode,
      site,
      at: new Date().toISOString(),
    });
    this.history.push(entry);
    return entry;
  }

  get entries(): readonly HistoryEntry[] {
    return this.history;
  }
}
