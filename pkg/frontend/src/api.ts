/**
 * Gateway API client. The console is a pure client of these three calls;
 * every behavior it shows is reproducible with plain HTTP.
 */

export interface EndpointInfo {
  siteName: string;
  serviceIri: string;
  active: boolean;
  timeoutMs: number;
}

export interface ExampleQuery {
  name: string;
  mode: QueryMode;
  query: string;
}

export type QueryMode = 'site' | 'federated' | 'mediated';

export interface BindingTerm {
  type: 'uri' | 'literal' | 'bnode';
  value: string;
  datatype?: string;
  'xml:lang'?: string;
}

export type Binding = Record<string, BindingTerm>;

export interface QueryResults {
  head: { vars: string[] };
  results: { bindings: Binding[] };
  warnings?: string[];
}

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    throw new GatewayError(response.status, await errorText(response));
  }
  return (await response.json()) as T;
}

async function errorText(response: Response): Promise<string> {
  const body = await response.text();
  try {
    const parsed = JSON.parse(body);
    if (parsed && typeof parsed.error === 'string') return parsed.error;
  } catch {
    /* plain-text error body */
  }
  return body || `HTTP ${response.status}`;
}

export async function fetchEndpoints(gateway: string, signal?: AbortSignal): Promise<EndpointInfo[]> {
  return getJson<EndpointInfo[]>(`${gateway}/api/endpoints`, signal);
}

export async function fetchExamples(gateway: string, signal?: AbortSignal): Promise<ExampleQuery[]> {
  return getJson<ExampleQuery[]>(`${gateway}/api/examples`, signal);
}

export async function submitQuery(
  gateway: string,
  mode: QueryMode,
  query: string,
  site?: string,
  signal?: AbortSignal,
): Promise<QueryResults> {
  const response = await fetch(`${gateway}/api/query`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ mode, query, site }),
    signal,
  });
  if (!response.ok) {
    throw new GatewayError(response.status, await errorText(response));
  }
  return (await response.json()) as QueryResults;
}

/** Direct links shown next to each site in the endpoint list. */
export function siteLinks(endpoint: EndpointInfo): { sparql: string; all: string } {
  const base = endpoint.serviceIri.replace(/\/sparql\/?$/, '');
  return { sparql: `${base}/sparql`, all: `${base}/all` };
}
