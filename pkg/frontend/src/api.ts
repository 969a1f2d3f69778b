/** Thin fetch wrapper over the navsim session service. */

import type { Observation } from "./state.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public body?: unknown,
  ) {
    super(message);
  }
}

export interface SessionCreated {
  session: string;
  observation: Observation;
}

export interface ActionResult {
  records: Record<string, unknown>[];
  observation: Observation;
}

export interface RouteInfo {
  id: string;
  difficulty: number;
  num_pairs: number;
  length_m: number;
}

export interface LogSummary {
  route_id: string;
  nodes: number[];
  outcome: string;
  final_distance_to_goal: number;
  shortest_length: number;
  traveled: number;
  steps: number;
  spl_contribution: number;
}

export interface LogBody {
  records: Record<string, unknown>[];
  summary: LogSummary;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(`${base}${path}`, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await resp.json().catch(() => undefined);
  if (!resp.ok) {
    const message =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message, body);
  }
  return body as T;
}

export function listDatasets(base: string): Promise<{ datasets: string[] }> {
  return request(base, "/datasets");
}

export function listRoutes(base: string, dataset: string): Promise<{ routes: RouteInfo[] }> {
  return request(base, `/datasets/${encodeURIComponent(dataset)}/routes`);
}

export function createSession(
  base: string,
  dataset: string,
  route: string,
  mode = "human",
): Promise<SessionCreated> {
  return request(base, "/sessions", {
    method: "POST",
    body: JSON.stringify({ dataset, route, mode }),
  });
}

/**
 * Finished sessions answer 409 but still carry the final observation;
 * surface that as a normal result so the UI can render the outcome banner.
 */
export async function getObservation(base: string, sessionId: string): Promise<Observation> {
  try {
    const body = await request<{ observation: Observation }>(
      base,
      `/sessions/${sessionId}/observation`,
    );
    return body.observation;
  } catch (err) {
    if (err instanceof ApiError && err.status === 409 && err.body) {
      const body = err.body as { observation?: Observation };
      if (body.observation) return body.observation;
    }
    throw err;
  }
}

export function postAction(base: string, sessionId: string, bin: number): Promise<ActionResult> {
  return request(base, `/sessions/${sessionId}/action`, {
    method: "POST",
    body: JSON.stringify({ bin }),
  });
}

export function getLog(base: string, sessionId: string): Promise<LogBody> {
  return request(base, `/sessions/${sessionId}/log`);
}
