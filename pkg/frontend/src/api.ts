import type {
  BatchJob,
  EmailPage,
  Hierarchy,
  MergeResponse,
  MonthlyReport,
  RepresentativeDoc,
  TopicCard,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

export interface EmailQuery {
  derivedLabel?: string;
  disposition?: string;
  reviewed?: boolean;
  page?: number;
  pageSize?: number;
}

export function buildEmailQuery(q: EmailQuery): string {
  const params = new URLSearchParams();
  if (q.derivedLabel !== undefined) params.set("derived_label", q.derivedLabel);
  if (q.disposition !== undefined) params.set("disposition", q.disposition);
  if (q.reviewed !== undefined) params.set("reviewed", String(q.reviewed));
  params.set("page", String(q.page ?? 1));
  if (q.pageSize !== undefined) params.set("page_size", String(q.pageSize));
  return params.toString();
}

/** Thin typed client over the service HTTP API. */
export class ApiClient {
  constructor(private baseUrl: string = "", private token: string | null = null) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["x-api-token"] = this.token;
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const payload = (await resp.json()) as { detail?: unknown };
        if (payload.detail !== undefined) detail = JSON.stringify(payload.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; model_loaded: boolean }> {
    return this.request("GET", "/healthz");
  }

  async getTopics(): Promise<TopicCard[]> {
    const data = await this.request<{ topics: TopicCard[] }>("GET", "/topics");
    return data.topics;
  }

  getHierarchy(): Promise<Hierarchy> {
    return this.request("GET", "/hierarchy");
  }

  mergeTopics(
    groups: number[][],
    whatIf: boolean,
    expectedTopics?: number,
  ): Promise<MergeResponse> {
    return this.request("POST", "/topics/merge", {
      groups,
      what_if: whatIf,
      expected_topics: expectedTopics ?? null,
    });
  }

  setLabel(topicId: number, label: string): Promise<{ topic_id: number }> {
    return this.request("PUT", `/topics/${topicId}/label`, { label });
  }

  setDerivedMap(map: Record<string, string>): Promise<{ derived_map: Record<string, string> }> {
    return this.request("PUT", "/derived-map", { map });
  }

  async getRepresentativeDocs(topicId: number): Promise<RepresentativeDoc[]> {
    const data = await this.request<{ documents: RepresentativeDoc[] }>(
      "GET",
      `/topics/${topicId}/representative-docs`,
    );
    return data.documents;
  }

  getEmails(q: EmailQuery): Promise<EmailPage> {
    return this.request("GET", `/emails?${buildEmailQuery(q)}`);
  }

  setReviewed(emailId: string, reviewed: boolean): Promise<{ id: string; reviewed: boolean }> {
    return this.request("PUT", `/emails/${encodeURIComponent(emailId)}/reviewed`, { reviewed });
  }

  runBatch(limit: number): Promise<BatchJob> {
    return this.request("POST", "/batches/run", { limit });
  }

  async getBatches(): Promise<BatchJob[]> {
    const data = await this.request<{ jobs: BatchJob[] }>("GET", "/batches");
    return data.jobs;
  }

  getReport(month: string): Promise<MonthlyReport> {
    return this.request("GET", `/reports/${month}`);
  }
}
