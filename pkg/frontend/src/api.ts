/**
 * Thin client for the annotation service API.
 *
 * Mirrors the server's optimistic-concurrency contract: reads return the
 * ETag version token alongside the payload, writes send it back via
 * If-Match ("0" creates), and a stale write surfaces the live version so
 * the caller can reload or overwrite.
 */

import type { AnnotationPayload, PoemDetail, PoemSummary, Progress } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
    this.name = "ApiError";
  }
}

export interface StoredAnnotation {
  payload: AnnotationPayload;
  version: string;
}

export type PutResult =
  | { ok: true; version: string }
  | { ok: false; conflict: true; currentVersion: string };

export class Api {
  /** Bearer token forwarded on every request when set. */
  token: string | null = null;

  constructor(private readonly base: string = "") {}

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const out: Record<string, string> = { ...extra };
    if (this.token) out["Authorization"] = `Bearer ${this.token}`;
    return out;
  }

  private async get(path: string): Promise<Response> {
    let response: Response;
    try {
      response = await fetch(this.base + path, { headers: this.headers() });
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`);
    }
    return response;
  }

  async listPoems(): Promise<PoemSummary[]> {
    const response = await this.get("/api/poems");
    if (!response.ok) throw new ApiError(`GET poems ${response.status}`, response.status);
    return response.json();
  }

  async getPoem(id: string): Promise<PoemDetail> {
    const response = await this.get(`/api/poems/${encodeURIComponent(id)}`);
    if (!response.ok) throw new ApiError(`GET poem ${response.status}`, response.status);
    return response.json();
  }

  async getProgress(annotator: string): Promise<Progress> {
    const response = await this.get(`/api/progress/${encodeURIComponent(annotator)}`);
    if (!response.ok) throw new ApiError(`GET progress ${response.status}`, response.status);
    return response.json();
  }

  /** Returns null when the server holds no annotation yet. */
  async getAnnotation(annotator: string, poemId: string): Promise<StoredAnnotation | null> {
    const path = `/api/annotations/${encodeURIComponent(annotator)}/${encodeURIComponent(poemId)}`;
    const response = await this.get(path);
    if (response.status === 404) return null;
    if (!response.ok) throw new ApiError(`GET annotation ${response.status}`, response.status);
    const version = response.headers.get("ETag");
    if (!version) throw new ApiError("annotation response carries no ETag");
    return { payload: await response.json(), version };
  }

  /**
   * Store an annotation against the version the draft was loaded from.
   * A 409 is not an error: it reports the live version for conflict
   * resolution. Anything else non-204 throws.
   */
  async putAnnotation(payload: AnnotationPayload, version: string): Promise<PutResult> {
    const path = `/api/annotations/${encodeURIComponent(payload.annotator)}` +
      `/${encodeURIComponent(payload.poem_id)}`;
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method: "PUT",
        headers: this.headers({
          "Content-Type": "application/json",
          "If-Match": version,
        }),
        body: JSON.stringify(payload),
      });
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`);
    }
    if (response.status === 204) {
      const stored = response.headers.get("ETag");
      if (!stored) throw new ApiError("write acknowledged without an ETag");
      return { ok: true, version: stored };
    }
    if (response.status === 409) {
      const body = await response.json();
      return { ok: false, conflict: true, currentVersion: body.current_version };
    }
    throw new ApiError(`PUT annotation ${response.status}`, response.status);
  }
}
