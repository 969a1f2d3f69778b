/**
 * Single-page human-navigation client. One in-flight request at a time;
 * the screen always reflects the latest server observation (no optimistic
 * updates). Keys 1-8 mirror the wheel sectors.
 */

import {
  ApiError,
  createSession,
  getObservation,
  listDatasets,
  listRoutes,
  postAction,
} from "./api.js";
import {
  Observation,
  ViewState,
  binForKey,
  canSubmit,
  deriveViewState,
} from "./state.js";
import { ActionWheel } from "./wheel.js";

const params = new URLSearchParams(window.location.search);
const BASE_URL = params.get("server") ?? "http://127.0.0.1:8080";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const datasetSelect = el<HTMLSelectElement>("dataset");
const routeSelect = el<HTMLSelectElement>("route");
const startButton = el<HTMLButtonElement>("start");
const banner = el<HTMLDivElement>("banner");
const instructionBox = el<HTMLDivElement>("instruction");
const memoryImg = el<HTMLImageElement>("memory");
const scaleCaption = el<HTMLDivElement>("scale");
const counters = el<HTMLDivElement>("counters");
const statusLine = el<HTMLDivElement>("status");

let view: ViewState | null = null;
let busy = false;

const wheel = new ActionWheel((bin) => void submitAction(bin));
el<HTMLDivElement>("wheel-slot").appendChild(wheel.element);

function setBusy(value: boolean): void {
  busy = value;
  startButton.disabled = value;
  render();
}

function showError(err: unknown): void {
  statusLine.textContent = err instanceof Error ? err.message : String(err);
  statusLine.classList.add("error");
}

function clearError(): void {
  statusLine.textContent = "";
  statusLine.classList.remove("error");
}

function render(): void {
  if (!view) return;
  wheel.update(view.sectors.map((s) => s.enabled), busy);

  instructionBox.replaceChildren(
    ...view.segments.map((seg) => {
      const span = document.createElement("span");
      span.textContent = seg.text + " ";
      span.classList.add(seg.kind);
      if (seg.attended) span.classList.add("attended");
      span.title = `pair ${seg.pairIndex}, weight ${seg.weight.toFixed(3)}`;
      return span;
    }),
  );
  memoryImg.src = view.memoryDataUrl;
  scaleCaption.textContent = view.scaleCaption;
  counters.textContent =
    `step ${view.steps}/${view.maxSteps} · ` +
    `${view.traveledM.toFixed(0)} m of ${view.budgetM.toFixed(0)} m budget`;
  banner.textContent = view.banner ?? "";
  banner.className = view.banner
    ? view.outcome === "success"
      ? "banner success"
      : "banner failure"
    : "banner hidden";
}

function apply(sessionId: string, obs: Observation): void {
  view = deriveViewState(sessionId, obs);
  render();
}

async function refreshRoutes(): Promise<void> {
  const { routes } = await listRoutes(BASE_URL, datasetSelect.value);
  routeSelect.replaceChildren(
    ...routes.map((r) => {
      const option = document.createElement("option");
      option.value = r.id;
      option.textContent = `${r.id} (level ${r.difficulty}, ${r.length_m.toFixed(0)} m)`;
      return option;
    }),
  );
}

async function startSession(): Promise<void> {
  clearError();
  setBusy(true);
  try {
    const created = await createSession(BASE_URL, datasetSelect.value, routeSelect.value);
    apply(created.session, created.observation);
  } catch (err) {
    showError(err);
  } finally {
    setBusy(false);
  }
}

async function submitAction(bin: number): Promise<void> {
  if (!view || busy || !canSubmit(view, bin)) return; // disabled bins never hit the wire
  clearError();
  setBusy(true);
  try {
    const result = await postAction(BASE_URL, view.sessionId, bin);
    apply(view.sessionId, result.observation);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409 && view) {
      // stale state (e.g. episode finished elsewhere): re-sync with the server
      apply(view.sessionId, await getObservation(BASE_URL, view.sessionId));
    } else {
      showError(err);
    }
  } finally {
    setBusy(false);
  }
}

document.addEventListener("keydown", (event) => {
  const bin = binForKey(event.key);
  if (bin !== null) void submitAction(bin);
});

startButton.addEventListener("click", () => void startSession());
datasetSelect.addEventListener("change", () => void refreshRoutes());

(async () => {
  try {
    const { datasets } = await listDatasets(BASE_URL);
    datasetSelect.replaceChildren(
      ...datasets.map((name) => {
        const option = document.createElement("option");
        option.value = name;
        option.textContent = name;
        return option;
      }),
    );
    if (datasets.length) await refreshRoutes();
    statusLine.textContent = `connected to ${BASE_URL}`;
  } catch (err) {
    showError(err);
  }
})();
