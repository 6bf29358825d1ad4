// Canvas <-> grid coordinate mapping. The square canvas shows the whole
// grid; cell (0, 0) is the top-left. Mapping round-trips within one cell.

export interface GridRect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export function canvasToGrid(
  canvasX: number, canvasY: number,
  canvasSize: number, gridSize: number,
): [number, number] {
  const scale = gridSize / canvasSize;
  const gx = Math.min(Math.max(Math.floor(canvasX * scale), 0), gridSize - 1);
  const gy = Math.min(Math.max(Math.floor(canvasY * scale), 0), gridSize - 1);
  return [gx, gy];
}

export function gridToCanvas(
  gridX: number, gridY: number,
  canvasSize: number, gridSize: number,
): [number, number] {
  const scale = canvasSize / gridSize;
  return [(gridX + 0.5) * scale, (gridY + 0.5) * scale];
}

/** Drag rectangle (any corner order) to a half-open cell rectangle. */
export function dragToGridRect(
  ax: number, ay: number, bx: number, by: number,
  canvasSize: number, gridSize: number,
): GridRect {
  const [gax, gay] = canvasToGrid(Math.min(ax, bx), Math.min(ay, by), canvasSize, gridSize);
  const [gbx, gby] = canvasToGrid(Math.max(ax, bx), Math.max(ay, by), canvasSize, gridSize);
  return { x0: gax, y0: gay, x1: gbx + 1, y1: gby + 1 };
}

export function rectSpansMinimum(rect: GridRect, minCells = 4): boolean {
  return rect.x1 - rect.x0 >= minCells && rect.y1 - rect.y0 >= minCells;
}
