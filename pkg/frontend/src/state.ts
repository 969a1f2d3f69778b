/**
 * Pure view-model derivation. Everything shown on screen comes from the
 * latest server observation; the client never simulates movement itself.
 */

export interface EdgeInfo {
  to: number;
  bearing: number;
  length: number;
}

export interface InstructionInfo {
  text: string;
  pairs: { landmark: string; direction: string }[];
  eta: number;
  aimed_index: number;
  weights: number[];
}

export interface Observation {
  mode: string;
  node: number;
  heading: number;
  edges: EdgeInfo[];
  instruction: InstructionInfo;
  memory_png: string;
  scale_m_per_px: number;
  steps: number;
  max_steps: number;
  traveled: number;
  budget: number;
  outcome: string;
  final_distance_m: number | null;
}

export interface SectorState {
  bin: number;
  enabled: boolean;
}

export interface SegmentView {
  kind: "landmark" | "direction";
  text: string;
  pairIndex: number; // 1-based, matching the attention reference
  attended: boolean;
  weight: number;
}

export interface ViewState {
  sessionId: string;
  outcome: string;
  running: boolean;
  sectors: SectorState[];
  segments: SegmentView[];
  memoryDataUrl: string;
  scaleCaption: string;
  steps: number;
  maxSteps: number;
  traveledM: number;
  budgetM: number;
  banner: string | null;
}

export const NUM_BINS = 8;

/** Same half-open convention as the simulator: bin i covers i*45 +/- 22.5. */
export function binOfAngle(angle: number): number {
  const norm = ((angle % 360) + 360) % 360;
  return Math.floor((norm + 22.5) / 45) % NUM_BINS;
}

/** Screen angle of a sector center, degrees clockwise from up (bin 0 = up). */
export function sectorCenterAngle(bin: number): number {
  return bin * 45;
}

/** Bins that correspond to an actual outgoing road, in the agent frame. */
export function enabledBins(obs: Observation): boolean[] {
  const enabled = new Array<boolean>(NUM_BINS).fill(false);
  for (const edge of obs.edges) {
    enabled[binOfAngle(edge.bearing - obs.heading)] = true;
  }
  return enabled;
}

export function bannerText(obs: Observation): string | null {
  if (obs.outcome === "running") return null;
  if (obs.outcome === "success") {
    const dist = obs.final_distance_m != null ? ` — ${obs.final_distance_m.toFixed(1)} m from goal` : "";
    return `Success${dist}`;
  }
  return `Failed (${obs.outcome.replace("failure:", "")})`;
}

export function deriveViewState(sessionId: string, obs: Observation): ViewState {
  const running = obs.outcome === "running";
  const enabled = enabledBins(obs);
  const segments: SegmentView[] = [];
  obs.instruction.pairs.forEach((pair, i) => {
    const pairIndex = i + 1;
    const attended = pairIndex === obs.instruction.aimed_index;
    const weight = obs.instruction.weights[i] ?? 0;
    if (pair.landmark) {
      segments.push({ kind: "landmark", text: pair.landmark, pairIndex, attended, weight });
    }
    if (pair.direction) {
      segments.push({ kind: "direction", text: pair.direction, pairIndex, attended, weight });
    }
  });
  return {
    sessionId,
    outcome: obs.outcome,
    running,
    sectors: Array.from({ length: NUM_BINS }, (_, bin) => ({
      bin,
      enabled: running && enabled[bin],
    })),
    segments,
    memoryDataUrl: `data:image/png;base64,${obs.memory_png}`,
    scaleCaption: `${obs.scale_m_per_px.toFixed(2)} m/px`,
    steps: obs.steps,
    maxSteps: obs.max_steps,
    traveledM: obs.traveled,
    budgetM: obs.budget,
    banner: bannerText(obs),
  };
}

/** Keyboard shortcuts: keys 1..8 map onto bins 0..7 (1 = up). */
export function binForKey(key: string): number | null {
  if (key.length === 1 && key >= "1" && key <= "8") {
    return key.charCodeAt(0) - "1".charCodeAt(0);
  }
  return null;
}

export function canSubmit(view: ViewState, bin: number): boolean {
  return view.running && bin >= 0 && bin < NUM_BINS && view.sectors[bin].enabled;
}
