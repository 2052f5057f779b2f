/** Typed client for the diarynet review service.
 *
 * Every endpoint returns an envelope carrying `alias_version` and
 * `provenance_head` alongside the payload; errors arrive as
 * `{code, message, detail}` with a non-2xx status and are surfaced
 * as `ApiError`.
 */

export interface Envelope {
  alias_version: number;
  provenance_head: string | null;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly body: ErrorBody;

  constructor(status: number, body: ErrorBody) {
    super(`${body.code}: ${body.message}`);
    this.name = "ApiError";
    this.status = status;
    this.body = body;
  }
}

export interface QueueSnippet {
  volume_id: string;
  date: string;
  text: string;
  match_span: [number, number];
}

export interface QueueItem {
  form: string;
  count: number;
  status: string;
  candidates: string[];
  snippets: QueueSnippet[];
}

export interface QueuePage extends Envelope {
  total: number;
  offset: number;
  limit: number | null;
  items: QueueItem[];
}

export interface NetworkNode {
  id: string;
  display_name: string;
  days_mentioned: number;
  total_mentions: number;
  community?: number;
  x?: number;
  y?: number;
}

export interface NetworkEdge {
  source: string;
  target: string;
  weight: number;
}

export interface FilterSpec {
  kind: string;
  value: number;
}

export interface NetworkResponse extends Envelope {
  filter: FilterSpec;
  nodes: NetworkNode[];
  edges: NetworkEdge[];
  full_nodes: number;
  hidden_persons: number;
  agreement: number;
  provenance_seq: number;
}

export interface StatsResponse extends Envelope {
  defined: boolean;
  entries: number;
  span_days: number;
  mean_persons_per_day: number | null;
  sd_persons_per_day: number | null;
  total_persons: number;
  full_nodes: number;
  full_edges: number;
  filtered_nodes: number;
  filtered_edges: number;
  hidden_persons: number;
  default_filter: FilterSpec;
  queue_size: number;
  corpus_warnings: string[];
}

export interface HistogramBin {
  days_mentioned: number;
  persons: number;
}

export interface HistogramResponse extends Envelope {
  bins: HistogramBin[];
}

export interface ContextItem {
  date: string;
  volume: string;
  surface: string;
  snippet: string;
  match_span: [number, number];
  entry: string;
  entry_span: [number, number];
}

export interface ContextsResponse extends Envelope {
  entity_id: string;
  display_name: string;
  total: number;
  items: ContextItem[];
}

export interface ProvenanceRecord {
  seq: number;
  step: string;
  params: Record<string, unknown>;
  input_digest: string;
  output_digest: string;
  actor: string;
  rationale: string;
  prev: string;
  digest: string;
  ts: string;
}

export interface ProvenanceResponse extends Envelope {
  total: number;
  records: ProvenanceRecord[];
}

/** Wire forms accepted by POST /api/decisions. */
export type Decision =
  | { kind: "map_to"; form: string; entity_id: string }
  | { kind: "new_entity"; display_name: string; aliases: string[] }
  | { kind: "merge"; keep: string; retire: string }
  | { kind: "split"; source: string; aliases: string[]; display_name: string }
  | { kind: "ignore"; form: string };

export interface DecisionResponse extends Envelope {
  provenance_seq: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorBody(res: Response): Promise<ErrorBody> {
  try {
    const body = (await res.json()) as Partial<ErrorBody>;
    return {
      code: body.code ?? "unknown",
      message: body.message ?? res.statusText,
      detail: body.detail ?? "",
    };
  } catch {
    return { code: "unknown", message: res.statusText, detail: "" };
  }
}

export class ApiClient {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base.replace(/\/$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) throw new ApiError(res.status, await errorBody(res));
    return (await res.json()) as T;
  }

  getQueue(offset = 0, limit?: number): Promise<QueuePage> {
    const params = new URLSearchParams({ offset: String(offset) });
    if (limit !== undefined) params.set("limit", String(limit));
    return this.request(`/api/queue?${params}`);
  }

  getNetwork(
    minDays: number,
    opts: { layout?: boolean; communities?: boolean } = {},
  ): Promise<NetworkResponse> {
    const params = new URLSearchParams({ min_days: String(minDays) });
    if (opts.layout ?? true) params.set("with_layout", "true");
    if (opts.communities ?? true) params.set("with_communities", "true");
    return this.request(`/api/network?${params}`);
  }

  getStats(): Promise<StatsResponse> {
    return this.request("/api/stats");
  }

  getHistogram(): Promise<HistogramResponse> {
    return this.request("/api/histogram");
  }

  getContexts(entityId: string, limit?: number): Promise<ContextsResponse> {
    const suffix = limit === undefined ? "" : `?limit=${limit}`;
    return this.request(
      `/api/persons/${encodeURIComponent(entityId)}/contexts${suffix}`,
    );
  }

  getProvenance(offset = 0, limit?: number): Promise<ProvenanceResponse> {
    const params = new URLSearchParams({ offset: String(offset) });
    if (limit !== undefined) params.set("limit", String(limit));
    return this.request(`/api/provenance?${params}`);
  }

  postDecision(
    decision: Decision,
    actor: string,
    rationale: string,
  ): Promise<DecisionResponse> {
    return this.request("/api/decisions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ decision, actor, rationale }),
    });
  }
}
