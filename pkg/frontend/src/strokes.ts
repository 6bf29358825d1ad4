// Freehand stroke capture: pointer positions in canvas coordinates are
// mapped into the 256 x 256 sketch space. Draw order carries the flow
// direction (pen-down to pen-up).

export const SKETCH_SIZE = 256;

export type Stroke = Array<[number, number]>;

export class StrokeRecorder {
  readonly strokes: Stroke[] = [];
  private current: Stroke | null = null;

  constructor(private canvasSize: number) {}

  begin(canvasX: number, canvasY: number): void {
    this.current = [this.toSketch(canvasX, canvasY)];
  }

  extend(canvasX: number, canvasY: number): void {
    if (!this.current) return;
    const point = this.toSketch(canvasX, canvasY);
    const last = this.current[this.current.length - 1];
    if (point[0] !== last[0] || point[1] !== last[1]) {
      this.current.push(point);
    }
  }

  end(): void {
    // a stroke needs at least two points to carry a direction
    if (this.current && this.current.length >= 2) {
      this.strokes.push(this.current);
    }
    this.current = null;
  }

  clear(): void {
    this.strokes.length = 0;
    this.current = null;
  }

  get hasStrokes(): boolean {
    return this.strokes.length > 0;
  }

  private toSketch(canvasX: number, canvasY: number): [number, number] {
    const scale = SKETCH_SIZE / this.canvasSize;
    const clamp = (v: number) => Math.min(Math.max(v, 0), SKETCH_SIZE - 1);
    return [clamp(canvasX * scale), clamp(canvasY * scale)];
  }
}
