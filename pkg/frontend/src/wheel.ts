/**
 * SVG action wheel: eight annular sectors, bin 0 at the top, clockwise.
 * Purely presentational; enabling/disabling comes from the view state.
 */

import { NUM_BINS, sectorCenterAngle } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 220;
const CX = SIZE / 2;
const CY = SIZE / 2;
const OUTER_R = 100;
const INNER_R = 38;
const HALF_SECTOR = 22.5;

/** Screen coordinates for a polar point, angle in degrees clockwise from up. */
function polar(radius: number, angleDeg: number): [number, number] {
  const rad = (angleDeg * Math.PI) / 180;
  return [CX + radius * Math.sin(rad), CY - radius * Math.cos(rad)];
}

function sectorPath(bin: number): string {
  const start = sectorCenterAngle(bin) - HALF_SECTOR;
  const end = sectorCenterAngle(bin) + HALF_SECTOR;
  const [ox0, oy0] = polar(OUTER_R, start);
  const [ox1, oy1] = polar(OUTER_R, end);
  const [ix0, iy0] = polar(INNER_R, end);
  const [ix1, iy1] = polar(INNER_R, start);
  return [
    `M ${ox0.toFixed(2)} ${oy0.toFixed(2)}`,
    `A ${OUTER_R} ${OUTER_R} 0 0 1 ${ox1.toFixed(2)} ${oy1.toFixed(2)}`,
    `L ${ix0.toFixed(2)} ${iy0.toFixed(2)}`,
    `A ${INNER_R} ${INNER_R} 0 0 0 ${ix1.toFixed(2)} ${iy1.toFixed(2)}`,
    "Z",
  ].join(" ");
}

export class ActionWheel {
  readonly element: SVGSVGElement;
  private sectors: SVGPathElement[] = [];

  constructor(onPick: (bin: number) => void) {
    this.element = document.createElementNS(SVG_NS, "svg");
    this.element.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
    this.element.classList.add("action-wheel");
    for (let bin = 0; bin < NUM_BINS; bin++) {
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", sectorPath(bin));
      path.classList.add("sector");
      path.dataset.bin = String(bin);
      path.addEventListener("click", () => {
        if (!path.classList.contains("disabled")) onPick(bin);
      });
      this.element.appendChild(path);
      this.sectors.push(path);

      const [lx, ly] = polar((OUTER_R + INNER_R) / 2, sectorCenterAngle(bin));
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", lx.toFixed(1));
      label.setAttribute("y", ly.toFixed(1));
      label.classList.add("sector-label");
      label.textContent = String(bin + 1);
      this.element.appendChild(label);
    }
    const hub = document.createElementNS(SVG_NS, "text");
    hub.setAttribute("x", String(CX));
    hub.setAttribute("y", String(CY));
    hub.classList.add("wheel-hub");
    hub.textContent = "▲";
    this.element.appendChild(hub);
  }

  update(enabled: boolean[], busy: boolean): void {
    this.sectors.forEach((path, bin) => {
      path.classList.toggle("disabled", busy || !enabled[bin]);
    });
  }
}
