// Canvas rendering of the table: grid, components, and the beams of one
// frame, colored by polarization and dimmed by power.

import { FrameResponse } from "./api.js";
import { beamBrightness, blochColor, cssColor } from "./color.js";
import { ExperimentModel, Placement, kindSpec } from "./model.js";

export const CELL = 36;

export function gridToCanvas(x: number, y: number): [number, number] {
  return [x * CELL + CELL / 2, y * CELL + CELL / 2];
}

export function canvasToGrid(px: number, py: number): [number, number] {
  return [Math.floor(px / CELL), Math.floor(py / CELL)];
}

export function drawTable(
  ctx: CanvasRenderingContext2D,
  model: ExperimentModel,
  frame: FrameResponse | null,
  selected: Placement | null,
  cols: number,
  rows: number,
): void {
  ctx.clearRect(0, 0, cols * CELL, rows * CELL);
  ctx.save();

  ctx.strokeStyle = "#2b3240";
  ctx.lineWidth = 1;
  for (let x = 0; x <= cols; x++) {
    ctx.beginPath();
    ctx.moveTo(x * CELL, 0);
    ctx.lineTo(x * CELL, rows * CELL);
    ctx.stroke();
  }
  for (let y = 0; y <= rows; y++) {
    ctx.beginPath();
    ctx.moveTo(0, y * CELL);
    ctx.lineTo(cols * CELL, y * CELL);
    ctx.stroke();
  }

  if (frame) drawBeams(ctx, frame);
  for (const placement of model.placements) {
    drawComponent(ctx, placement, placement === selected);
  }
  ctx.restore();
}

function drawBeams(ctx: CanvasRenderingContext2D, frame: FrameResponse): void {
  for (const edge of frame.edges) {
    for (const cell of edge.cells) {
      const brightness = beamBrightness(cell.power_W);
      if (brightness <= 0 || !cell.bloch) continue;
      const [bx, by, bz] = cell.bloch;
      const [cx, cy] = gridToCanvas(cell.x, cell.y);
      ctx.fillStyle = cssColor(blochColor(bx, by, bz), brightness);
      ctx.globalAlpha = 0.35 + 0.65 * brightness;
      ctx.beginPath();
      ctx.arc(cx, cy, 4 + 6 * brightness, 0, 2 * Math.PI);
      ctx.fill();
      ctx.globalAlpha = 1;
    }
  }
}

function drawComponent(
  ctx: CanvasRenderingContext2D,
  placement: Placement,
  selected: boolean,
): void {
  const [cx, cy] = gridToCanvas(placement.x, placement.y);
  const spec = kindSpec(placement.kind)!;
  ctx.save();
  ctx.translate(cx, cy);
  ctx.rotate((placement.orientation * Math.PI) / 180);
  ctx.fillStyle = selected ? "#3d4c63" : "#28303f";
  ctx.strokeStyle = selected ? "#7fb2ff" : "#5a6780";
  ctx.lineWidth = selected ? 2 : 1;
  const half = CELL / 2 - 3;
  ctx.beginPath();
  ctx.rect(-half, -half, 2 * half, 2 * half);
  ctx.fill();
  ctx.stroke();
  if (spec.oriented) {
    ctx.strokeStyle = "#9fb4d8";
    ctx.beginPath();
    ctx.moveTo(0, 0);
    ctx.lineTo(half - 2, 0);
    ctx.stroke();
  }
  ctx.rotate(-(placement.orientation * Math.PI) / 180);
  ctx.fillStyle = "#dce6f5";
  ctx.font = "10px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(spec.short, 0, 0);
  ctx.restore();
}
