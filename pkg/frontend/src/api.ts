// Thin client over the assessment service. All severities and diffs come
// from the service; this module never derives scores itself.

import type {
  AssessmentDocument,
  AssignmentResponse,
  NamedProfile,
  RankEntry,
  Rubric,
  WhatIfDiff,
} from "./types.js";

export class ApiError extends Error {
  constructor(public errorName: string, public detail: string, public status: number) {
    super(`${errorName}: ${detail}`);
  }
}

export class OfflineError extends Error {
  constructor() {
    super("service unreachable");
  }
}

export interface ReportDownload {
  bytes: ArrayBuffer;
  contentType: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch {
      throw new OfflineError();
    }
    if (!response.ok) {
      let name = `http-${response.status}`;
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") {
          name = body.error;
          detail = body.detail ?? detail;
        }
      } catch {
        // non-JSON error body; keep the status fallback
      }
      throw new ApiError(name, detail, response.status);
    }
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private jsonInit(method: string, body: unknown): RequestInit {
    return {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  getRubric(): Promise<Rubric> {
    return this.requestJson("/api/rubric");
  }

  getKbSources(): Promise<{ sources: { id: string; display_name: string; facet: string }[] }> {
    return this.requestJson("/api/kb/sources");
  }

  getProfiles(): Promise<{ profiles: NamedProfile[] }> {
    return this.requestJson("/api/profiles");
  }

  createAssessment(body: {
    title: string;
    sources: string[];
    profile_name?: string;
    profile?: unknown;
  }): Promise<{ id: string; document: AssessmentDocument }> {
    return this.requestJson("/api/assessments", this.jsonInit("POST", body));
  }

  getDocument(id: string): Promise<AssessmentDocument> {
    return this.requestJson(`/api/assessments/${id}`);
  }

  putAssignment(
    id: string,
    body: { source: string; factor: string; category: string; rationale?: string },
  ): Promise<AssignmentResponse> {
    return this.requestJson(`/api/assessments/${id}/assignments`, this.jsonInit("PUT", body));
  }

  whatIf(id: string, body: { profile?: unknown; profile_name?: string }): Promise<WhatIfDiff> {
    return this.requestJson(`/api/assessments/${id}/whatif`, this.jsonInit("POST", body));
  }

  getRank(id: string): Promise<{ rank: RankEntry[] }> {
    return this.requestJson(`/api/assessments/${id}/rank`);
  }

  // Raw bytes, untouched: export downloads must be byte-identical to the
  // service response.
  async getReport(id: string, format: string): Promise<ReportDownload> {
    const response = await this.request(`/api/assessments/${id}/report?format=${format}`);
    return {
      bytes: await response.arrayBuffer(),
      contentType: response.headers.get("content-type") ?? "application/octet-stream",
    };
  }

  cscale(id: string, sources: string[], threshold?: number): Promise<{
    resistant_count: number;
    non_resistant_count: number;
    advisory_text: string;
  }> {
    return this.requestJson(
      `/api/assessments/${id}/cscale`,
      this.jsonInit("POST", threshold === undefined ? { sources } : { sources, threshold }),
    );
  }
}
