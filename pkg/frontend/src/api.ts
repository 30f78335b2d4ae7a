// Thin fetch client for the annotation service. Every decision round-trips
// the server; the UI layer holds no labeling logic of its own.

import type { Decision, FinishResult, LabelResult, SessionQuery } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? "Unknown", body.message ?? resp.statusText);
  }
  return body as T;
}

export function createSession(opts: {
  dataset?: string;
  clusters?: string;
  budget: number;
  seed: number;
}): Promise<{ session_id: string }> {
  return request("/sessions", { method: "POST", body: JSON.stringify(opts) });
}

export function getQuery(sessionId: string): Promise<SessionQuery> {
  return request(`/sessions/${sessionId}/query`);
}

export function postLabel(
  sessionId: string,
  segmentId: number,
  label: Decision,
): Promise<LabelResult> {
  return request(`/sessions/${sessionId}/labels`, {
    method: "POST",
    body: JSON.stringify({ segment_id: segmentId, label }),
  });
}

export function finishSession(sessionId: string): Promise<FinishResult> {
  return request(`/sessions/${sessionId}/finish`, { method: "POST" });
}
