// Typed client for the field service. The fetch implementation is
// injectable so the client can be exercised against a mock backend.

import { base64ToBytes } from "./field.js";
import type { Stroke } from "./strokes.js";
import type { GridRect } from "./coords.js";

export type ComponentName = "curl_free" | "div_free" | "harmonic";

export interface FieldPayload {
  session_id: string;
  version: number;
  width: number;
  height: number;
  field_b64: string;
  field_sha256: string;
}

export interface EditPayload extends FieldPayload {
  metrics: { cme: number; cs: number };
}

export interface SimulatePayload {
  session_id: string;
  frames: number;
  cs: number[];
}

export interface Inflow {
  cx: number;
  cy: number;
  radius: number;
  angle: number;
  speed: number;
  density?: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly errorClass: string, detail: string) {
    super(`${errorClass}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let errorClass = `HTTP ${response.status}`;
      let detail = response.statusText;
      try {
        const body = await response.json();
        errorClass = body.error ?? errorClass;
        detail = body.detail ?? JSON.stringify(body);
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, errorClass, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    return (await response.json()) as T;
  }

  createSessionFromStrokes(strokes: Stroke[]): Promise<FieldPayload> {
    return this.json("/sessions", {
      method: "POST",
      body: JSON.stringify({ strokes }),
    });
  }

  createSessionFromField(fieldB64: string): Promise<FieldPayload> {
    return this.json("/sessions", {
      method: "POST",
      body: JSON.stringify({ field_b64: fieldB64 }),
    });
  }

  getField(sessionId: string): Promise<FieldPayload> {
    return this.json(`/sessions/${sessionId}/field`);
  }

  applyEdit(
    sessionId: string, rect: GridRect, keep: ComponentName[], version: number,
  ): Promise<EditPayload> {
    return this.json(`/sessions/${sessionId}/edits`, {
      method: "POST",
      body: JSON.stringify({ rect, keep, version }),
    });
  }

  undo(sessionId: string): Promise<FieldPayload> {
    return this.json(`/sessions/${sessionId}/undo`, { method: "POST" });
  }

  simulate(
    sessionId: string, steps: number, dt: number, inflows: Inflow[] = [],
  ): Promise<SimulatePayload> {
    return this.json(`/sessions/${sessionId}/simulate`, {
      method: "POST",
      body: JSON.stringify({ steps, dt, inflows }),
    });
  }

  async fetchFrame(sessionId: string, index: number): Promise<Uint8Array> {
    const response = await this.request(`/sessions/${sessionId}/frames/${index}`);
    return new Uint8Array(await response.arrayBuffer());
  }
}

export function payloadBytes(payload: FieldPayload): Uint8Array {
  return base64ToBytes(payload.field_b64);
}
