// Page wiring for the field editor: sketch capture, arrow-glyph field
// view, rectangle selection with component toggles, undo, and smoke
// preview. All field math happens server-side; this file only renders
// server responses.

import { Api, ApiError, ComponentName } from "./api.js";
import { dragToGridRect, rectSpansMinimum } from "./coords.js";
import { ConflictError, EditorSession } from "./editor.js";
import { parsePgm, toImageData } from "./pgm.js";
import { drawField, drawSelection, drawStrokes } from "./render.js";
import { SKETCH_SIZE, StrokeRecorder } from "./strokes.js";

const CANVAS_SIZE = 512;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://localhost:8000";

const canvas = element<HTMLCanvasElement>("editor-canvas");
canvas.width = CANVAS_SIZE;
canvas.height = CANVAS_SIZE;
const ctx = canvas.getContext("2d")!;

const smokeCanvas = element<HTMLCanvasElement>("smoke-canvas");
const smokeCtx = smokeCanvas.getContext("2d")!;

const status = element<HTMLElement>("status");
const cmeBadge = element<HTMLElement>("cme-badge");
const csBadge = element<HTMLElement>("cs-badge");
const sessionLabel = element<HTMLElement>("session-label");

const drawModeButton = element<HTMLInputElement>("mode-draw");
const editModeButton = element<HTMLInputElement>("mode-edit");
const generateButton = element<HTMLButtonElement>("generate");
const clearButton = element<HTMLButtonElement>("clear-strokes");
const applyButton = element<HTMLButtonElement>("apply-edit");
const undoButton = element<HTMLButtonElement>("undo");
const keepCurl = element<HTMLInputElement>("keep-curl-free");
const keepDiv = element<HTMLInputElement>("keep-div-free");
const keepHarmonic = element<HTMLInputElement>("keep-harmonic");
const loadInput = element<HTMLInputElement>("load-session");
const loadButton = element<HTMLButtonElement>("load");
const smokeSteps = element<HTMLInputElement>("smoke-steps");
const smokeDt = element<HTMLInputElement>("smoke-dt");
const smokeStart = element<HTMLButtonElement>("smoke-start");
const smokeStop = element<HTMLButtonElement>("smoke-stop");

const api = new Api(apiBase);
const session = new EditorSession(api);
const recorder = new StrokeRecorder(CANVAS_SIZE);

let pointerDown = false;
let selection: { ax: number; ay: number; bx: number; by: number } | null = null;
let smokePlaying = false;

function setStatus(text: string, isError = false): void {
  status.textContent = text;
  status.className = isError ? "error" : "";
}

function selectedComponents(): ComponentName[] {
  const keep: ComponentName[] = [];
  if (keepCurl.checked) keep.push("curl_free");
  if (keepDiv.checked) keep.push("div_free");
  if (keepHarmonic.checked) keep.push("harmonic");
  return keep;
}

function refreshControls(): void {
  const busy = session.busy;
  generateButton.disabled = busy || !recorder.hasStrokes;
  applyButton.disabled = busy || !session.sessionId || !selection
    || selectedComponents().length === 0
    || !rectSpansMinimum(currentRect() ?? { x0: 0, y0: 0, x1: 0, y1: 0 });
  undoButton.disabled = busy || !session.sessionId || session.editCount === 0;
  smokeStart.disabled = busy || !session.sessionId || smokePlaying;
  smokeStop.disabled = !smokePlaying;
  sessionLabel.textContent = session.sessionId
    ? `session ${session.sessionId.slice(0, 12)}… v${session.version}`
    : "no session";
}

function currentRect() {
  if (!selection || !session.field) return null;
  return dragToGridRect(selection.ax, selection.ay, selection.bx, selection.by,
                        CANVAS_SIZE, session.field.width);
}

function redraw(): void {
  const field = session.field;
  if (field) {
    drawField(ctx, field, CANVAS_SIZE);
  } else {
    ctx.fillStyle = "#101218";
    ctx.fillRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);
  }
  if (drawModeButton.checked) {
    drawStrokes(ctx, recorder.strokes, CANVAS_SIZE, SKETCH_SIZE);
  }
  if (editModeButton.checked && selection) {
    drawSelection(ctx, selection.ax, selection.ay, selection.bx, selection.by);
  }
  refreshControls();
}

function showMetrics(): void {
  const metrics = session.lastMetrics;
  cmeBadge.textContent = metrics ? `CME ${metrics.cme.toExponential(3)}` : "CME –";
  csBadge.textContent = metrics ? `CS ${metrics.cs.toExponential(3)}` : "CS –";
}

function canvasPoint(event: PointerEvent): [number, number] {
  const bounds = canvas.getBoundingClientRect();
  return [
    (event.clientX - bounds.left) * (CANVAS_SIZE / bounds.width),
    (event.clientY - bounds.top) * (CANVAS_SIZE / bounds.height),
  ];
}

canvas.addEventListener("pointerdown", (event) => {
  pointerDown = true;
  canvas.setPointerCapture(event.pointerId);
  const [x, y] = canvasPoint(event);
  if (drawModeButton.checked) {
    recorder.begin(x, y);
  } else {
    selection = { ax: x, ay: y, bx: x, by: y };
  }
  redraw();
});

canvas.addEventListener("pointermove", (event) => {
  if (!pointerDown) return;
  const [x, y] = canvasPoint(event);
  if (drawModeButton.checked) {
    recorder.extend(x, y);
  } else if (selection) {
    selection.bx = x;
    selection.by = y;
  }
  redraw();
});

canvas.addEventListener("pointerup", () => {
  pointerDown = false;
  if (drawModeButton.checked) {
    recorder.end();
  }
  redraw();
});

generateButton.addEventListener("click", async () => {
  setStatus("generating field from sketch…");
  refreshControls();
  try {
    await session.createFromStrokes(recorder.strokes);
    setStatus("field generated");
  } catch (error) {
    setStatus(describe(error), true);
  }
  showMetrics();
  redraw();
});

clearButton.addEventListener("click", () => {
  recorder.clear();
  redraw();
});

applyButton.addEventListener("click", async () => {
  const rect = currentRect();
  if (!rect) return;
  setStatus("applying edit…");
  refreshControls();
  try {
    const metrics = await session.applyEdit(rect, selectedComponents());
    setStatus(`edit applied (region CME ${metrics.cme.toExponential(2)}, `
      + `CS ${metrics.cs.toExponential(2)})`);
  } catch (error) {
    if (error instanceof ConflictError) {
      setStatus("session changed elsewhere; field refreshed, retry the edit", true);
    } else {
      setStatus(describe(error), true);
    }
  }
  showMetrics();
  redraw();
});

undoButton.addEventListener("click", async () => {
  setStatus("undoing…");
  try {
    await session.undo();
    setStatus("restored previous field");
  } catch (error) {
    setStatus(describe(error), true);
  }
  showMetrics();
  redraw();
});

loadButton.addEventListener("click", async () => {
  const id = loadInput.value.trim();
  if (!id) return;
  setStatus("loading session…");
  try {
    await session.load(id);
    setStatus("session loaded");
  } catch (error) {
    setStatus(describe(error), true);
  }
  redraw();
});

smokeStart.addEventListener("click", async () => {
  const sid = session.sessionId;
  if (!sid) return;
  const steps = parseInt(smokeSteps.value, 10) || 60;
  const dt = parseFloat(smokeDt.value) || 0.5;
  setStatus("running smoke simulation…");
  refreshControls();
  try {
    const run = await api.simulate(sid, steps, dt, [
      { cx: 128, cy: 200, radius: 12, angle: -Math.PI / 2, speed: 1.0, density: 1.0 },
    ]);
    smokePlaying = true;
    refreshControls();
    setStatus(`playing ${run.frames} frames (max CS ${Math.max(...run.cs, 0).toExponential(2)})`);
    for (let index = 0; index < run.frames && smokePlaying; index++) {
      const frame = parsePgm(await api.fetchFrame(sid, index));
      const image = toImageData(frame);
      const bitmap = await createImageBitmap(image);
      smokeCtx.imageSmoothingEnabled = false;
      smokeCtx.drawImage(bitmap, 0, 0, smokeCanvas.width, smokeCanvas.height);
      await new Promise((resolve) => setTimeout(resolve, 50));
    }
  } catch (error) {
    setStatus(describe(error), true);
  }
  smokePlaying = false;
  refreshControls();
});

smokeStop.addEventListener("click", () => {
  smokePlaying = false;
  refreshControls();
});

for (const toggle of [keepCurl, keepDiv, keepHarmonic, drawModeButton, editModeButton]) {
  toggle.addEventListener("change", redraw);
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return error.message;
  return String(error);
}

setStatus(`ready (service at ${apiBase})`);
redraw();
