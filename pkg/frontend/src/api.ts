/**
 * Typed client for the trial-monitoring HTTP API.
 * The dashboard talks to the service exclusively through this module.
 */

export interface HypothesesDoc {
  p0: number;
  p1: number;
  alpha: number;
  beta: number;
}

export interface DesignDoc extends HypothesesDoc {
  u: number;
  K: number;
  l: number[];
  alpha_actual: number | null;
  power: number | null;
}

export type SessionStatus =
  | "enrolling"
  | "stopped_efficacy"
  | "stopped_futility"
  | "finalized";

export interface IntervalDoc {
  method: string;
  level: number;
  lower: number;
  upper: number;
}

export interface FinalReportDoc {
  m: number;
  s: number;
  estimates: {
    naive: number;
    bias_adjusted: number;
    bias_adjusted_rootsolve: number;
    mue: number;
    mue_lower: number;
    mue_upper: number;
    ordering: string;
  };
  intervals: Record<string, IntervalDoc>;
}

export interface SessionDoc {
  id: string;
  hypotheses: HypothesesDoc;
  design: DesignDoc;
  outcomes: boolean[];
  status: SessionStatus;
  seq: number;
  m: number;
  s: number;
  responders_needed: number;
  created_at: string;
  updated_at: string;
  final_report: FinalReportDoc | null;
}

export interface DecisionDoc {
  responder: boolean;
  decision: "continue" | "stop_efficacy" | "stop_futility";
  m: number;
  s: number;
  responders_needed: number;
}

export interface BoundariesDoc {
  u: number;
  K: number;
  k: number[];
  efficacy: number[];
  futility: (number | null)[];
  first_efficacy_stage: number;
  first_futility_stage: number;
}

/** status 0 means the service was unreachable (network failure). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `cannot reach the monitoring service: ${String(err)}`);
  }
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: unknown };
      if (body.detail) detail = JSON.stringify(body.detail);
    } catch {
      // leave the HTTP status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class MonitorClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  createSession(params: HypothesesDoc): Promise<SessionDoc> {
    return request(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  listSessions(): Promise<SessionDoc[]> {
    return request(this.url("/sessions"));
  }

  getSession(id: string): Promise<SessionDoc> {
    return request(this.url(`/sessions/${id}`));
  }

  getBoundaries(id: string): Promise<BoundariesDoc> {
    return request(this.url(`/sessions/${id}/boundaries`));
  }

  recordOutcome(
    id: string,
    responder: boolean,
    expectedSeq: number | null,
  ): Promise<{ decision: DecisionDoc; session: SessionDoc }> {
    return request(this.url(`/sessions/${id}/outcomes`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ responder, expected_seq: expectedSeq }),
    });
  }

  undoLast(id: string): Promise<SessionDoc> {
    return request(this.url(`/sessions/${id}/outcomes/last`), { method: "DELETE" });
  }

  finalize(id: string): Promise<{ report: FinalReportDoc; session: SessionDoc }> {
    return request(this.url(`/sessions/${id}/finalize`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({}),
    });
  }
}
