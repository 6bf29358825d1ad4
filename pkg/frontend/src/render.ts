// Canvas drawing: arrow-glyph field visualization, stroke echo, region
// overlay, and smoke frames. Arrow geometry is pure so it can be tested
// without a DOM.

import { Field, maxMagnitude, sampleVector } from "./field.js";
import { gridToCanvas } from "./coords.js";

/** Sampling stride for arrow glyphs, in grid cells. */
export const ARROW_STRIDE = 16;

export interface Arrow {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/** One arrow per stride x stride block, length scaled by magnitude and
 * clamped so glyphs never overlap their neighbours. */
export function arrowGlyphs(field: Field, canvasSize: number,
                            stride: number = ARROW_STRIDE): Arrow[] {
  const arrows: Arrow[] = [];
  const scaleMax = maxMagnitude(field);
  if (scaleMax === 0) return arrows;
  const cell = canvasSize / field.width;
  const maxLen = 0.9 * stride * cell;
  const half = Math.floor(stride / 2);
  for (let gy = half; gy < field.height; gy += stride) {
    for (let gx = half; gx < field.width; gx += stride) {
      const [u, v] = sampleVector(field, gx, gy);
      const magnitude = Math.hypot(u, v);
      if (magnitude === 0) continue;
      const length = Math.min(magnitude / scaleMax, 1.0) * maxLen;
      const [cx, cy] = gridToCanvas(gx, gy, canvasSize, field.width);
      const dx = (u / magnitude) * length;
      const dy = (v / magnitude) * length;
      arrows.push({ x0: cx - dx / 2, y0: cy - dy / 2, x1: cx + dx / 2, y1: cy + dy / 2 });
    }
  }
  return arrows;
}

export function drawField(ctx: CanvasRenderingContext2D, field: Field,
                          canvasSize: number): void {
  ctx.clearRect(0, 0, canvasSize, canvasSize);
  ctx.fillStyle = "#101218";
  ctx.fillRect(0, 0, canvasSize, canvasSize);
  ctx.strokeStyle = "#6fd3ff";
  ctx.fillStyle = "#6fd3ff";
  ctx.lineWidth = 1.5;
  for (const arrow of arrowGlyphs(field, canvasSize)) {
    ctx.beginPath();
    ctx.moveTo(arrow.x0, arrow.y0);
    ctx.lineTo(arrow.x1, arrow.y1);
    ctx.stroke();
    drawHead(ctx, arrow);
  }
}

function drawHead(ctx: CanvasRenderingContext2D, arrow: Arrow): void {
  const angle = Math.atan2(arrow.y1 - arrow.y0, arrow.x1 - arrow.x0);
  const size = 4;
  ctx.beginPath();
  ctx.moveTo(arrow.x1, arrow.y1);
  ctx.lineTo(arrow.x1 - size * Math.cos(angle - 0.4), arrow.y1 - size * Math.sin(angle - 0.4));
  ctx.lineTo(arrow.x1 - size * Math.cos(angle + 0.4), arrow.y1 - size * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

export function drawStrokes(ctx: CanvasRenderingContext2D,
                            strokes: Array<Array<[number, number]>>,
                            canvasSize: number, sketchSize: number): void {
  const scale = canvasSize / sketchSize;
  ctx.strokeStyle = "#f2f2f2";
  ctx.lineWidth = 2;
  for (const stroke of strokes) {
    ctx.beginPath();
    stroke.forEach(([x, y], index) => {
      if (index === 0) ctx.moveTo(x * scale, y * scale);
      else ctx.lineTo(x * scale, y * scale);
    });
    ctx.stroke();
  }
}

export function drawSelection(ctx: CanvasRenderingContext2D,
                              ax: number, ay: number, bx: number, by: number): void {
  ctx.strokeStyle = "#ff5050";
  ctx.lineWidth = 2;
  ctx.setLineDash([6, 4]);
  ctx.strokeRect(Math.min(ax, bx), Math.min(ay, by),
                 Math.abs(bx - ax), Math.abs(by - ay));
  ctx.setLineDash([]);
}
