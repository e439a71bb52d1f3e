/**
 * Form-based query building over the helpdesk reference ontology. The form
 * fields are ontology properties; the generated SELECT text is shown to the
 * user before it runs and always stays inside the gateway's query subset.
 */

export const HDO = 'http://www.samos.gr/ontologies/helpdeskOnto.owl#';
export const DUL = 'http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#';

export interface TemplateParams {
  /** substring match on hdo:ticketTitle */
  titleContains?: string;
  /** exact match on hdo:ticketStatus */
  statusEquals?: string;
  /** lower bound on hdo:ticketId */
  idAtLeast?: number;
  /** also select the solutions attached to matching tickets */
  includeSolutions?: boolean;
  limit?: number;
}

function escapeLiteral(text: string): string {
  return text.replace(/\\/g, '\\\\').replace(/"/g, '\\"')
    .replace(/\n/g, '\\n').replace(/\r/g, '\\r').replace(/\t/g, '\\t');
}

export function hasCriteria(params: TemplateParams): boolean {
  return Boolean(
    (params.titleContains && params.titleContains.trim()) ||
    (params.statusEquals && params.statusEquals.trim()) ||
    params.idAtLeast !== undefined ||
    params.includeSolutions,
  );
}

/** Generate the SPARQL text for the ticket template form. */
export function buildTicketQuery(params: TemplateParams): string {
  const lines: string[] = [
    `PREFIX hdo: <${HDO}>`,
  ];
  const patterns: string[] = [
    '  ?t a hdo:ItSupportTicket ;',
    '     hdo:ticketTitle ?title .',
  ];
  const filters: string[] = [];
  const projection = ['?t', '?title'];

  if (params.statusEquals && params.statusEquals.trim()) {
    patterns.push('  ?t hdo:ticketStatus ?status .');
    filters.push(`  FILTER (?status = "${escapeLiteral(params.statusEquals.trim())}")`);
    projection.push('?status');
  }
  if (params.idAtLeast !== undefined) {
    patterns.push('  ?t hdo:ticketId ?id .');
    filters.push(`  FILTER (?id >= ${Math.trunc(params.idAtLeast)})`);
    projection.push('?id');
  }
  if (params.titleContains && params.titleContains.trim()) {
    filters.push(`  FILTER regex(?title, "${escapeLiteral(params.titleContains.trim())}")`);
  }
  if (params.includeSolutions) {
    lines.push(`PREFIX dul: <${DUL}>`);
    patterns.push('  ?task dul:associatedWith ?t ;');
    patterns.push('        hdo:solutionText ?text .');
    projection.push('?task', '?text');
  }

  lines.push(`SELECT ${projection.join(' ')} WHERE {`);
  lines.push(...patterns, ...filters, '}');
  if (params.limit !== undefined && params.limit > 0) {
    lines[lines.length - 1] = `} LIMIT ${Math.trunc(params.limit)}`;
  }
  return lines.join('\n');
}
