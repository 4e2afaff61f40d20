// Typed client of the gateway wire protocol (docs/PROTOCOL.md).
// Every server interaction in the console goes through this module; nothing
// else touches fetch, so the protocol surface the console depends on is
// auditable in one place.

export interface Principal {
  id: string;
  role: "patient" | "medical_expert" | "administrator";
  name: string;
  created_at: string;
  assigned_staff?: string[];
}

export interface Reading {
  patient_id: string;
  device_id: string;
  kind: string;
  value: number;
  taken_at: string;
  seq: number;
  received_at: string;
  status: "normal" | "above_high" | "below_low";
  bound_crossed?: number | null;
  policy_version: number;
}

export interface VitalsPage {
  patient_id: string;
  items: Reading[];
  next_after: number;
  complete: boolean;
}

export interface BoundDoc {
  low: number;
  high: number;
  unit: string;
}

export interface ThresholdDoc {
  patient_id: string;
  version: number;
  updated_by: string;
  updated_at: string | null;
  bounds: Record<string, BoundDoc>;
}

export interface Alert {
  alert_id: string;
  patient_id: string;
  device_id: string;
  kind: string;
  value: number;
  seq: number;
  status: string;
  bound_crossed: number;
  low: number;
  high: number;
  unit: string;
  taken_at: string;
  raised_at: string;
  state: "open" | "acknowledged";
  acknowledged_by: string | null;
  acknowledged_at: string | null;
}

export interface SessionSummary {
  session_id: string;
  mode: string;
  initiator: string;
  responder: string;
  state: "requested" | "active" | "terminated";
  created_at: string;
  activated_at: string | null;
  terminated_at: string | null;
  terminated_by: string | null;
  message_count: number;
}

export interface Message {
  session_id: string;
  seq: number;
  sender: string;
  kind: "text" | "image_ref" | "av_signal";
  payload: string;
  sent_at: string;
}

export interface EventsOut {
  session: SessionSummary;
  messages: Message[];
  next_after: number;
}

export interface LoginOut {
  token: string;
  expires_at: string;
  principal: Principal;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`[${status}] ${code}: ${detail}`);
  }
}

type Json = Record<string, unknown> | unknown[];

export class GatewayApi {
  token: string | null = null;
  principal: Principal | null = null;
  /** Invoked on any 401 so the shell can drop to the login view. */
  onUnauthorized: (() => void) | null = null;

  constructor(private readonly base: string = "") {}

  private async request(
    method: string,
    path: string,
    body?: Json | null,
    raw?: BodyInit,
  ): Promise<unknown> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload: BodyInit | undefined = raw;
    if (body !== undefined && body !== null) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const resp = await fetch(this.base + path, { method, headers, body: payload });
    if (resp.ok) {
      const ctype = resp.headers.get("content-type") ?? "";
      return ctype.includes("application/json") ? resp.json() : resp.blob();
    }
    let code = "error";
    let detail = "";
    try {
      const doc = (await resp.json()) as { error?: string; detail?: string };
      code = doc.error ?? code;
      detail = doc.detail ?? "";
    } catch {
      detail = resp.statusText;
    }
    // a rejected sign-in attempt is not a session expiry
    if (resp.status === 401 && this.onUnauthorized && path !== "/api/login") {
      this.onUnauthorized();
    }
    throw new ApiError(resp.status, code, detail);
  }

  // -- auth -----------------------------------------------------------

  async login(id: string, secret: string): Promise<LoginOut> {
    const out = (await this.request("POST", "/api/login", { id, secret })) as LoginOut;
    this.token = out.token;
    this.principal = out.principal;
    return out;
  }

  logout(): void {
    this.token = null;
    this.principal = null;
  }

  // -- directory ------------------------------------------------------

  async principals(): Promise<Principal[]> {
    const out = (await this.request("GET", "/api/principals")) as { items: Principal[] };
    return out.items;
  }

  // -- vitals ---------------------------------------------------------

  async vitals(patientId: string, after = -1, limit?: number): Promise<VitalsPage> {
    const params = new URLSearchParams({ after: String(after) });
    if (limit !== undefined) params.set("limit", String(limit));
    return (await this.request(
      "GET",
      `/api/patients/${patientId}/vitals?${params}`,
    )) as VitalsPage;
  }

  async thresholds(patientId: string): Promise<ThresholdDoc> {
    return (await this.request(
      "GET",
      `/api/patients/${patientId}/thresholds`,
    )) as ThresholdDoc;
  }

  async putThresholds(
    patientId: string,
    bounds: Record<string, { low: number; high: number }>,
  ): Promise<ThresholdDoc> {
    return (await this.request("PUT", `/api/patients/${patientId}/thresholds`, {
      bounds,
    })) as ThresholdDoc;
  }

  // -- alerts ---------------------------------------------------------

  async alerts(state?: "open" | "acknowledged"): Promise<Alert[]> {
    const suffix = state ? `?state=${state}` : "";
    const out = (await this.request("GET", `/api/alerts${suffix}`)) as { items: Alert[] };
    return out.items;
  }

  async ack(alertId: string): Promise<Alert> {
    return (await this.request("POST", `/api/alerts/${alertId}/ack`)) as Alert;
  }

  // -- sessions -------------------------------------------------------

  async sessions(): Promise<SessionSummary[]> {
    const out = (await this.request("GET", "/api/sessions")) as {
      items: SessionSummary[];
    };
    return out.items;
  }

  async openSession(targetId: string, mode: string): Promise<SessionSummary> {
    return (await this.request("POST", "/api/sessions", {
      target_id: targetId,
      mode,
    })) as SessionSummary;
  }

  async acceptSession(sessionId: string): Promise<SessionSummary> {
    return (await this.request("POST", `/api/sessions/${sessionId}/accept`)) as SessionSummary;
  }

  async terminateSession(sessionId: string): Promise<SessionSummary> {
    return (await this.request(
      "POST",
      `/api/sessions/${sessionId}/terminate`,
    )) as SessionSummary;
  }

  async postMessage(
    sessionId: string,
    kind: Message["kind"],
    payload: string,
  ): Promise<Message> {
    return (await this.request("POST", `/api/sessions/${sessionId}/messages`, {
      kind,
      payload,
    })) as Message;
  }

  async events(sessionId: string, after = -1, wait = 0): Promise<EventsOut> {
    const params = new URLSearchParams({ after: String(after), wait: String(wait) });
    return (await this.request(
      "GET",
      `/api/sessions/${sessionId}/events?${params}`,
    )) as EventsOut;
  }

  // -- objects --------------------------------------------------------

  async putObject(data: Blob | ArrayBuffer): Promise<{ ref: string; bytes: number }> {
    return (await this.request("POST", "/api/objects", undefined, data as BodyInit)) as {
      ref: string;
      bytes: number;
    };
  }

  async getObject(ref: string): Promise<Blob> {
    return (await this.request("GET", `/api/objects/${ref}`)) as Blob;
  }
}
