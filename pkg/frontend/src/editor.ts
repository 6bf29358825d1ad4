// Editor session state machine. The server is the single source of truth:
// every rendered field is exactly the byte payload of a server response,
// and the UI never computes field math locally. One mutating request is
// in flight at a time.

import { Api, ApiError, ComponentName, FieldPayload } from "./api.js";
import { decodeField, Field } from "./field.js";
import type { GridRect } from "./coords.js";
import type { Stroke } from "./strokes.js";

export interface RegionMetrics {
  cme: number;
  cs: number;
}

export class ConflictError extends Error {
  constructor() {
    super("the session changed under you; the field was refreshed, retry the edit");
  }
}

export class EditorSession {
  private payload: FieldPayload | null = null;
  private busyFlag = false;
  lastMetrics: RegionMetrics | null = null;
  editCount = 0;

  constructor(private api: Api) {}

  get busy(): boolean {
    return this.busyFlag;
  }

  get sessionId(): string | null {
    return this.payload?.session_id ?? null;
  }

  get version(): number {
    return this.payload?.version ?? -1;
  }

  /** Raw bytes of the currently rendered field (server response payload). */
  get fieldBytes(): Uint8Array | null {
    return this.payload ? base64ToBytesCached(this.payload.field_b64) : null;
  }

  get field(): Field | null {
    return this.payload ? decodeField(this.fieldBytes!) : null;
  }

  async createFromStrokes(strokes: Stroke[]): Promise<Field> {
    if (strokes.length === 0) {
      throw new Error("draw at least one stroke first");
    }
    return this.mutate(() => this.api.createSessionFromStrokes(strokes));
  }

  async load(sessionId: string): Promise<Field> {
    return this.mutate(() => this.api.getField(sessionId));
  }

  async applyEdit(rect: GridRect, keep: ComponentName[]): Promise<RegionMetrics> {
    const payload = this.requirePayload();
    try {
      await this.mutate(
        () => this.api.applyEdit(payload.session_id, rect, keep, payload.version),
        true,
      );
      this.editCount += 1;
      return this.lastMetrics!;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // stale version: refetch the authoritative field and ask to retry
        this.payload = await this.api.getField(payload.session_id);
        throw new ConflictError();
      }
      throw error;
    }
  }

  async undo(): Promise<Field> {
    const payload = this.requirePayload();
    const field = await this.mutate(() => this.api.undo(payload.session_id));
    if (this.editCount > 0) this.editCount -= 1;
    return field;
  }

  private requirePayload(): FieldPayload {
    if (!this.payload) {
      throw new Error("no active session");
    }
    return this.payload;
  }

  private async mutate(
    action: () => Promise<FieldPayload>, captureMetrics = false,
  ): Promise<Field> {
    if (this.busyFlag) {
      throw new Error("another request is in flight");
    }
    this.busyFlag = true;
    try {
      const payload = await action();
      this.payload = payload;
      if (captureMetrics) {
        const metrics = (payload as { metrics?: RegionMetrics }).metrics;
        this.lastMetrics = metrics ?? null;
      }
      return this.field!;
    } finally {
      this.busyFlag = false;
    }
  }
}

// decode cache: payloads are immutable, so decoding once per base64 string
// keeps renders cheap without risking staleness
let cachedB64 = "";
let cachedBytes: Uint8Array | null = null;

function base64ToBytesCached(b64: string): Uint8Array {
  if (b64 !== cachedB64 || cachedBytes === null) {
    const binary = atob(b64);
    const bytes = new Uint8Array(binary.length);
    for (let i = 0; i < binary.length; i++) {
      bytes[i] = binary.charCodeAt(i);
    }
    cachedB64 = b64;
    cachedBytes = bytes;
  }
  return cachedBytes;
}
